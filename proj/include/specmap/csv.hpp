#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "specmap/error.hpp"

namespace specmap {

// Shortest round-trip formatting; values written here parse back to the
// identical double.
inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, std::string_view context) {
    double v = 0.0;
    auto first = s.data();
    auto last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{})
        throw Error("non-numeric value '" + std::string(s) + "' in " + std::string(context));
    while (ptr != last && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
    if (ptr != last)
        throw Error("trailing garbage in numeric value '" + std::string(s) + "' in " + std::string(context));
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back() = out.back().substr(0, out.back().size() - 1);
    return out;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

// FNV-1a 64 over a file's bytes; the manifest's content-hash primitive.
inline std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot hash missing file: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

} // namespace specmap
