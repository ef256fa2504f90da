#pragma once

#include <array>
#include <charconv>
#include <string>
#include <system_error>

namespace dgc {

/// Shortest decimal string that round-trips to the same double.
/// Locale-independent; "-0" is normalized to "0".
inline std::string fmt_num(double value) {
    if (value == 0.0) return "0";
    std::array<char, 40> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

/// Same, but integral values keep a trailing ".0" (Python float literal form).
inline std::string fmt_py(double value) {
    std::string s = fmt_num(value);
    if (s.find_first_of(".eEnN") == std::string::npos) s += ".0";
    return s;
}

} // namespace dgc
