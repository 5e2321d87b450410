#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>

namespace rumidas {

template <typename... Args>
std::string strfmt(const char* fmt, Args&&... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, fmt, std::forward<Args>(args)...);
    return out;
}

/// Shortest decimal text that parses back to exactly `v`. NaN prints empty.
inline std::string format_double(double v) {
    if (std::isnan(v)) return {};
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Inverse of format_double; empty text reads as NaN.
bool parse_double(std::string_view text, double& out);

}  // namespace rumidas
