#include "sdnsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "sdnsim/error.hpp"

namespace sdnsim {

std::vector<FeatureVector> build_features(const std::vector<DeltaRecord>& deltas, Ipv4 server,
                                          double interval) {
    if (!(interval > 0.0)) throw UsageError("feature interval must be positive");
    std::map<Ipv4, FeatureVector> by_client;
    for (const DeltaRecord& d : deltas) {
        if (d.dst == server && d.src != server) {
            FeatureVector& f = by_client[d.src];
            f.pkt_rate_up += static_cast<double>(d.d_packets) / interval;
            f.byte_rate_up += static_cast<double>(d.d_bytes) / interval;
        } else if (d.src == server && d.dst != server) {
            FeatureVector& f = by_client[d.dst];
            f.pkt_rate_down += static_cast<double>(d.d_packets) / interval;
            f.byte_rate_down += static_cast<double>(d.d_bytes) / interval;
        }
    }
    std::vector<FeatureVector> out;
    out.reserve(by_client.size());
    for (auto& [client, f] : by_client) {
        f.client = client;
        out.push_back(f);
    }
    return out;
}

std::vector<FeatureVector> max_scaled(const std::vector<FeatureVector>& features) {
    Point peak{};
    for (const FeatureVector& f : features) {
        const Point v = f.values();
        for (std::size_t d = 0; d < kFeatureDims; ++d) peak[d] = std::max(peak[d], v[d]);
    }
    std::vector<FeatureVector> out = features;
    for (FeatureVector& f : out) {
        if (peak[0] > 0) f.pkt_rate_up /= peak[0];
        if (peak[1] > 0) f.pkt_rate_down /= peak[1];
        if (peak[2] > 0) f.byte_rate_up /= peak[2];
        if (peak[3] > 0) f.byte_rate_down /= peak[3];
    }
    return out;
}

double squared_distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < kFeatureDims; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

std::vector<Ipv4> Clustering::members(std::size_t cluster) const {
    std::vector<Ipv4> out;
    for (std::size_t i = 0; i < clients.size(); ++i)
        if (assignment[i] == cluster) out.push_back(clients[i]);
    return out;
}

namespace {

std::vector<std::size_t> farthest_point_seeds(const std::vector<Point>& points,
                                              const std::vector<Ipv4>& clients, std::size_t k,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = points.size();
    const std::size_t first = static_cast<std::size_t>(
        std::min_element(clients.begin(), clients.end()) - clients.begin());
    std::vector<std::size_t> chosen{first};
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points[i], points[first]);

    while (chosen.size() < k) {
        const double best = *std::max_element(nearest.begin(), nearest.end());
        std::vector<std::size_t> ties;
        for (std::size_t i = 0; i < n; ++i)
            if (nearest[i] == best && std::find(chosen.begin(), chosen.end(), i) == chosen.end())
                ties.push_back(i);
        const std::size_t pick = ties.size() == 1 ? ties[0] : ties[rng() % ties.size()];
        chosen.push_back(pick);
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], squared_distance(points[i], points[pick]));
    }
    return chosen;
}

std::vector<std::size_t> assign_nearest(const std::vector<Point>& points,
                                        const std::vector<Point>& centroids) {
    std::vector<std::size_t> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = squared_distance(points[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double d = squared_distance(points[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        out[i] = best;
    }
    return out;
}

/// Recomputes centroids from `assignment`, dropping empty clusters and
/// renumbering the assignment to match.
void update_centroids(const std::vector<Point>& points, std::vector<std::size_t>& assignment,
                      std::vector<Point>& centroids) {
    const std::size_t k = centroids.size();
    std::vector<Point> sums(k, Point{});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        ++counts[assignment[i]];
        for (std::size_t d = 0; d < kFeatureDims; ++d) sums[assignment[i]][d] += points[i][d];
    }
    std::vector<Point> next;
    std::vector<std::size_t> remap(k, 0);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        remap[c] = next.size();
        Point mean{};
        for (std::size_t d = 0; d < kFeatureDims; ++d)
            mean[d] = sums[c][d] / static_cast<double>(counts[c]);
        next.push_back(mean);
    }
    for (std::size_t& a : assignment) a = remap[a];
    centroids = std::move(next);
}

double wcss(const std::vector<Point>& points, const std::vector<std::size_t>& assignment,
            const std::vector<Point>& centroids) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        s += squared_distance(points[i], centroids[assignment[i]]);
    return s;
}

}  // namespace

Clustering kmeans(const std::vector<FeatureVector>& features, const KMeansOptions& options) {
    if (features.empty()) throw UsageError("kmeans needs at least one point");
    if (options.k == 0) throw UsageError("kmeans k must be positive");
    if (options.k > features.size())
        throw UsageError("kmeans k=" + std::to_string(options.k) + " exceeds " +
                         std::to_string(features.size()) + " points");

    std::vector<Point> points;
    std::vector<Ipv4> clients;
    for (const FeatureVector& f : features) {
        points.push_back(f.values());
        clients.push_back(f.client);
    }

    Clustering result;
    for (std::size_t idx : farthest_point_seeds(points, clients, options.k, options.seed))
        result.centroids.push_back(points[idx]);

    std::vector<std::size_t> assignment;
    for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iter, 1); ++iter) {
        std::vector<std::size_t> next = assign_nearest(points, result.centroids);
        if (iter > 0 && next == assignment) break;
        assignment = std::move(next);
        update_centroids(points, assignment, result.centroids);
        result.wcss_history.push_back(wcss(points, assignment, result.centroids));
        ++result.iterations;
    }

    const std::size_t k = result.centroids.size();
    result.k = k;
    result.clients = std::move(clients);
    result.assignment = assignment;
    result.sizes.assign(k, 0);
    result.stddev.assign(k, Point{});
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t c = assignment[i];
        ++result.sizes[c];
        for (std::size_t d = 0; d < kFeatureDims; ++d) {
            const double diff = points[i][d] - result.centroids[c][d];
            result.stddev[c][d] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (double& v : result.stddev[c]) v = std::sqrt(v / static_cast<double>(result.sizes[c]));
    return result;
}

double silverman_bandwidth(const std::vector<double>& values) {
    if (values.size() < 2) return 1.0;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / (n - 1.0));
    if (!(sigma > 0.0)) return 1.0;
    return 1.06 * sigma * std::pow(n, -0.2);
}

namespace {

struct Mode {
    std::size_t index;
    double height;
};

}  // namespace

Decomposition decompose_gaussian_1d(const std::vector<double>& values,
                                    const DecomposeOptions& options) {
    if (values.size() < 2) throw UsageError("decomposition needs at least 2 values");
    if (!(options.bandwidth > 0.0)) throw UsageError("bandwidth must be positive");
    if (options.grid_points < 16) throw UsageError("decomposition needs at least 16 grid points");

    const double h = options.bandwidth;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it - 3.0 * h;
    const double hi = *hi_it + 3.0 * h;
    const std::size_t g = options.grid_points;
    const double dx = (hi - lo) / static_cast<double>(g - 1);

    std::vector<double> grid(g);
    std::vector<double> density(g, 0.0);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < g; ++i) {
        grid[i] = lo + dx * static_cast<double>(i);
        double s = 0.0;
        for (double v : values) {
            const double z = (grid[i] - v) / h;
            s += std::exp(-0.5 * z * z);
        }
        density[i] = s * norm;
    }

    std::vector<double> second(g, 0.0);
    for (std::size_t i = 1; i + 1 < g; ++i)
        second[i] = (density[i - 1] - 2.0 * density[i] + density[i + 1]) / (dx * dx);

    // Modes: density maxima sitting in concave regions.
    std::vector<Mode> modes;
    for (std::size_t i = 1; i + 1 < g; ++i)
        if (density[i] > density[i - 1] && density[i] >= density[i + 1] && second[i] < 0.0)
            modes.push_back(Mode{i, density[i]});
    if (modes.empty()) {
        const auto top = std::max_element(density.begin(), density.end());
        modes.push_back(Mode{static_cast<std::size_t>(top - density.begin()), *top});
    }

    const double tallest =
        std::max_element(modes.begin(), modes.end(),
                         [](const Mode& a, const Mode& b) { return a.height < b.height; })
            ->height;
    std::erase_if(modes, [&](const Mode& m) { return m.height < options.min_peak_fraction * tallest; });

    const auto valley_between = [&](const Mode& a, const Mode& b) {
        std::size_t best = a.index;
        for (std::size_t i = a.index + 1; i < b.index; ++i)
            if (density[i] < density[best]) best = i;
        return best;
    };

    // Merge across shallow valleys until every valley is a clear dip.
    while (modes.size() > 1) {
        std::size_t worst = 0;
        double worst_ratio = -1.0;
        for (std::size_t m = 0; m + 1 < modes.size(); ++m) {
            const std::size_t v = valley_between(modes[m], modes[m + 1]);
            const double ratio =
                density[v] / std::min(modes[m].height, modes[m + 1].height);
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                worst = m;
            }
        }
        if (worst_ratio <= options.max_valley_ratio) break;
        const std::size_t drop =
            modes[worst].height < modes[worst + 1].height ? worst : worst + 1;
        modes.erase(modes.begin() + static_cast<std::ptrdiff_t>(drop));
    }

    std::vector<double> cuts;
    for (std::size_t m = 0; m + 1 < modes.size(); ++m) {
        const std::size_t v = valley_between(modes[m], modes[m + 1]);
        if (second[v] < 0.0) continue;  // not a convex valley
        cuts.push_back(grid[v]);
    }

    std::vector<std::vector<double>> segments(cuts.size() + 1);
    for (double v : values) {
        const auto seg = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) -
                                                  cuts.begin());
        segments[seg].push_back(v);
    }

    Decomposition out;
    const double n = static_cast<double>(values.size());
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.empty()) continue;
        if (!out.components.empty()) out.boundaries.push_back(cuts[s - 1]);
        const double cnt = static_cast<double>(seg.size());
        const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / cnt;
        double ss = 0.0;
        for (double v : seg) ss += (v - mean) * (v - mean);
        GaussComponent c;
        c.mean = mean;
        c.std = std::sqrt(ss / cnt);
        c.count = seg.size();
        c.weight = cnt / n;
        if (!(c.std > 0.0)) {
            c.degenerate = true;
            c.std = h;
        }
        out.components.push_back(c);
    }
    return out;
}

double cluster_sharpness(const Point& centroid, const Point& stddev) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t d = 0; d < kFeatureDims; ++d) {
        if (centroid[d] == 0.0) continue;
        total += stddev[d] / std::abs(centroid[d]);
        ++used;
    }
    return used == 0 ? 0.0 : total / static_cast<double>(used);
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool at_least(double x, double ref) { return x >= ref - 1e-9 * std::max(1.0, std::abs(ref)); }
bool at_most(double x, double ref) { return x <= ref + 1e-9 * std::max(1.0, std::abs(ref)); }

}  // namespace

DetectionReport detect(Ipv4 target, double aggregate_byte_rate, double threshold,
                       const Clustering& clustering) {
    DetectionReport report;
    report.target = target;
    report.aggregate_byte_rate = aggregate_byte_rate;
    report.threshold = threshold;
    report.attack = aggregate_byte_rate > threshold;

    std::vector<double> intensity;
    std::vector<double> sharpness;
    for (std::size_t c = 0; c < clustering.k; ++c) {
        intensity.push_back(clustering.centroids[c][2]);
        sharpness.push_back(cluster_sharpness(clustering.centroids[c], clustering.stddev[c]));
        report.rationale.push_back(
            ClusterRationale{c, clustering.sizes[c], intensity.back(), sharpness.back(), false});
    }
    if (!report.attack || clustering.k == 0) return report;

    if (clustering.k == 1) {
        report.low_confidence = true;
        report.rationale[0].suspicious = true;
        report.suspicious_clusters.push_back(0);
    } else {
        const double mean_intensity =
            std::accumulate(intensity.begin(), intensity.end(), 0.0) / static_cast<double>(clustering.k);
        const double median_sharpness = median(sharpness);
        for (std::size_t c = 0; c < clustering.k; ++c) {
            if (at_least(intensity[c], mean_intensity) && at_most(sharpness[c], median_sharpness)) {
                report.rationale[c].suspicious = true;
                report.suspicious_clusters.push_back(c);
            }
        }
    }
    for (std::size_t c : report.suspicious_clusters)
        for (Ipv4 member : clustering.members(c)) report.suspicious_sources.push_back(member);
    std::sort(report.suspicious_sources.begin(), report.suspicious_sources.end());
    return report;
}

std::vector<std::size_t> compare_clusterings(const Clustering& prev, const Clustering& cur,
                                             double match_radius) {
    const double r2 = match_radius * match_radius;
    std::vector<std::size_t> fresh;
    for (std::size_t c = 0; c < cur.centroids.size(); ++c) {
        const bool matched = std::any_of(prev.centroids.begin(), prev.centroids.end(),
                                         [&](const Point& p) {
                                             return squared_distance(p, cur.centroids[c]) <= r2;
                                         });
        if (!matched) fresh.push_back(c);
    }
    return fresh;
}

}  // namespace sdnsim
