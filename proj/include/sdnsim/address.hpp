#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace sdnsim {

/// IPv4 address held in host byte order.
class Ipv4 {
public:
    constexpr Ipv4() = default;
    constexpr explicit Ipv4(std::uint32_t value) : value_(value) {}
    constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) |
                 (std::uint32_t{c} << 8) | std::uint32_t{d}) {}

    constexpr std::uint32_t value() const { return value_; }
    constexpr std::uint8_t octet(int i) const {
        return static_cast<std::uint8_t>(value_ >> (8 * (3 - i)));
    }

    std::string to_string() const;
    static std::optional<Ipv4> parse(std::string_view text);

    constexpr auto operator<=>(const Ipv4&) const = default;

private:
    std::uint32_t value_ = 0;
};

/// Hosts live at 10.0.<edge>.<slot>.
constexpr Ipv4 host_address(int edge, int slot) {
    return Ipv4(10, 0, static_cast<std::uint8_t>(edge), static_cast<std::uint8_t>(slot));
}

}  // namespace sdnsim

template <>
struct std::hash<sdnsim::Ipv4> {
    std::size_t operator()(const sdnsim::Ipv4& a) const noexcept {
        return std::hash<std::uint32_t>{}(a.value());
    }
};
