#include "sdnsim/address.hpp"

#include <charconv>

namespace sdnsim {

std::string Ipv4::to_string() const {
    std::string out;
    for (int i = 0; i < 4; ++i) {
        if (i) out += '.';
        out += std::to_string(octet(i));
    }
    return out;
}

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
    std::uint32_t value = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        if (i) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
        unsigned octet = 0;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || next == p || octet > 255) return std::nullopt;
        value = (value << 8) | octet;
        p = next;
    }
    if (p != end) return std::nullopt;
    return Ipv4(value);
}

}  // namespace sdnsim
