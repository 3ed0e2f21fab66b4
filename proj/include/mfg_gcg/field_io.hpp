#pragma once

// CSV snapshots of space-time fields: header `t,x[,y],value`, one row per
// grid point per stored slice, every number with 17 significant digits so a
// write/read cycle is bit-exact.

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace mfg {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_field_csv(std::ostream& os, const SpaceTimeField& f, const Grid& grid) {
    os << (grid.dim == 1 ? "t,x,value\n" : "t,x,y,value\n");
    for (int n = 0; n < f.slices(); ++n) {
        const auto s = f.slice(n);
        const std::string t = format_double(grid.time(n));
        for (std::size_t p = 0; p < s.size(); ++p) {
            os << t;
            for (int a = 0; a < grid.dim; ++a) os << ',' << format_double(grid.coord(p, a));
            os << ',' << format_double(s[p]) << '\n';
        }
    }
}

namespace detail {

inline double parse_double(std::string_view tok) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("not a number: '" + std::string(tok) + "'");
    return v;
}

} // namespace detail

inline SpaceTimeField read_field_csv(std::istream& is, const Grid& grid) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("field csv: missing header");
    const std::string expected = grid.dim == 1 ? "t,x,value" : "t,x,y,value";
    if (line != expected) throw ParseError("field csv: header '" + line + "' != '" + expected + "'");

    SpaceTimeField f(grid);
    auto& data = f.values();
    std::size_t row = 0;
    const std::size_t columns = static_cast<std::size_t>(grid.dim) + 2;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (row >= data.size()) throw ParseError("field csv: too many rows");
        std::vector<std::string_view> toks;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            toks.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (toks.size() != columns) throw ParseError("field csv: bad column count at row " + std::to_string(row));
        data[row] = detail::parse_double(toks.back());
        ++row;
    }
    if (row != data.size())
        throw ParseError("field csv: expected " + std::to_string(data.size()) + " rows, got " + std::to_string(row));
    return f;
}

} // namespace mfg
