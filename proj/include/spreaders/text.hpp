#pragma once

// Small text helpers shared by the CSV/JSON writers and readers.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace spreaders {

/// Shortest representation that round-trips to the same double.
inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string format_hex(std::uint64_t value) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof(buf) - 1, value, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Strict parse of a whole token; returns false on trailing garbage.
template <typename T>
bool parse_number(std::string_view token, T &out) {
    token = trim(token);
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc{} && res.ptr == token.data() + token.size();
}

} // namespace spreaders
