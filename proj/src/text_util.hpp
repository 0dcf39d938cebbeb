#pragma once

// Small helpers shared by the line-oriented file parsers.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "outage/error.hpp"

namespace outage::detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                   line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
               line[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

/// True for blank lines and `#` comments.
inline bool is_skippable(std::string_view line) {
    for (char c : line) {
        if (c == '#')
            return true;
        if (c != ' ' && c != '\t' && c != '\r')
            return false;
    }
    return true;
}

inline long long parse_int(std::string_view s, std::string_view what,
                           int line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("invalid integer for " + std::string(what) + ": '" +
                             std::string(s) + "'",
                         line);
    return v;
}

inline double parse_double(std::string_view s, std::string_view what,
                           int line) {
    // strtod accepts the usual textual forms; require full consumption.
    std::string buf(s);
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || std::isnan(v))
        throw ParseError("invalid number for " + std::string(what) + ": '" +
                             buf + "'",
                         line);
    return v;
}

inline int parse_bit(std::string_view s, std::string_view what, int line) {
    if (s == "0")
        return 0;
    if (s == "1")
        return 1;
    throw ParseError("expected 0 or 1 for " + std::string(what) + ", got '" +
                         std::string(s) + "'",
                     line);
}

/// Splits `key=value`; throws when there is no '='.
inline std::pair<std::string_view, std::string_view>
split_key_value(std::string_view token, int line) {
    auto pos = token.find('=');
    if (pos == std::string_view::npos || pos == 0)
        throw ParseError("expected key=value, got '" + std::string(token) +
                             "'",
                         line);
    return {token.substr(0, pos), token.substr(pos + 1)};
}

} // namespace outage::detail
