#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdnsim/address.hpp"
#include "sdnsim/telemetry.hpp"

namespace sdnsim {

inline constexpr std::size_t kFeatureDims = 4;
using Point = std::array<double, kFeatureDims>;

/// Per-client traffic rates against one server, both directions.
struct FeatureVector {
    Ipv4 client;
    double pkt_rate_up = 0.0;
    double pkt_rate_down = 0.0;
    double byte_rate_up = 0.0;
    double byte_rate_down = 0.0;

    Point values() const { return {pkt_rate_up, pkt_rate_down, byte_rate_up, byte_rate_down}; }
    bool operator==(const FeatureVector&) const = default;
};

/// One vector per client that exchanged traffic with `server` in either
/// direction, ordered by client address. Rates are delta / interval.
std::vector<FeatureVector> build_features(const std::vector<DeltaRecord>& deltas, Ipv4 server,
                                          double interval);

/// Divides each dimension by its maximum over the set (dimensions that are
/// all zero are left alone).
std::vector<FeatureVector> max_scaled(const std::vector<FeatureVector>& features);

double squared_distance(const Point& a, const Point& b);

struct Clustering {
    std::size_t k = 0;
    std::vector<Point> centroids;
    /// Parallel to `clients`; cluster index per client.
    std::vector<Ipv4> clients;
    std::vector<std::size_t> assignment;
    /// Population std per dimension, per cluster.
    std::vector<Point> stddev;
    std::vector<std::size_t> sizes;
    /// WCSS after each Lloyd iteration.
    std::vector<double> wcss_history;
    std::size_t iterations = 0;

    std::vector<Ipv4> members(std::size_t cluster) const;
};

struct KMeansOptions {
    std::size_t k = 5;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
};

/// Lloyd's algorithm on Euclidean 4-D points with farthest-point seeding.
/// The first center is the client with the smallest address; each next
/// center maximizes the distance to the chosen ones, with exact ties broken
/// by the seeded generator. Clusters that empty out are dropped, so the
/// returned k may be smaller than requested.
///
/// Throws UsageError for empty input, k == 0 or k > features.size().
Clustering kmeans(const std::vector<FeatureVector>& features, const KMeansOptions& options);

struct GaussComponent {
    double mean = 0.0;
    double std = 0.0;
    double weight = 0.0;
    std::size_t count = 0;
    bool degenerate = false;  // zero sample spread; std reports the bandwidth
};

struct DecomposeOptions {
    double bandwidth = 1.0;
    std::size_t grid_points = 512;
    /// Modes whose density is below this fraction of the tallest mode are
    /// merged into a neighbour (isolated outliers).
    double min_peak_fraction = 0.05;
    /// Adjacent modes are merged when the valley between them keeps more
    /// than this fraction of the lower mode's density (sampling ripples).
    double max_valley_ratio = 0.75;
};

struct Decomposition {
    std::vector<GaussComponent> components;
    /// Split points between consecutive components, ascending.
    std::vector<double> boundaries;
};

/// Splits a 1-D sample into Gaussian components at the valleys of its kernel
/// density estimate. A valley qualifies when the discrete second derivative
/// is positive there and it separates two modes where the density is concave.
/// Throws UsageError for fewer than 2 values, non-positive bandwidth or
/// fewer than 16 grid points.
Decomposition decompose_gaussian_1d(const std::vector<double>& values,
                                    const DecomposeOptions& options);

/// 1.06 * sigma * n^(-1/5); falls back to 1.0 when the sample has no spread.
double silverman_bandwidth(const std::vector<double>& values);

struct ClusterRationale {
    std::size_t cluster = 0;
    std::size_t size = 0;
    double intensity = 0.0;  // centroid byte_rate_up
    double sharpness = 0.0;  // mean coefficient of variation
    bool suspicious = false;
};

struct DetectionReport {
    Ipv4 target;
    double aggregate_byte_rate = 0.0;
    double threshold = 0.0;
    bool attack = false;
    bool low_confidence = false;
    std::vector<std::size_t> suspicious_clusters;
    std::vector<Ipv4> suspicious_sources;
    std::vector<ClusterRationale> rationale;
};

/// Mean over dimensions of std / centroid, skipping zero centroid components.
double cluster_sharpness(const Point& centroid, const Point& stddev);

/// Attack iff aggregate > threshold. Under attack a cluster is suspicious
/// when its intensity is at or above the mean intensity and its sharpness is
/// at or below the median sharpness. A lone cluster is suspicious by default
/// and the report is marked low confidence.
DetectionReport detect(Ipv4 target, double aggregate_byte_rate, double threshold,
                       const Clustering& clustering);

/// Indices of clusters in `cur` with no centroid of `prev` within `match_radius`.
std::vector<std::size_t> compare_clusterings(const Clustering& prev, const Clustering& cur,
                                             double match_radius);

}  // namespace sdnsim
