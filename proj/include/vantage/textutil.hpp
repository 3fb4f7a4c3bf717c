#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace vantage {

/// Fixed 6-decimal rendering used everywhere a float reaches a file, so
/// emitted artifacts are byte-stable across platforms.
inline std::string fixed6(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
    return std::string(buf, res.ptr);
}

/// Snap to the nearest 6-decimal value (the file precision), so a record
/// survives an emit/read round trip bit-for-bit. Negative zero normalizes
/// to +0.
inline double quantize6(double v) {
    const double snapped = std::round(v * 1e6) / 1e6;
    return snapped == 0.0 ? 0.0 : snapped;
}

inline std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace vantage
