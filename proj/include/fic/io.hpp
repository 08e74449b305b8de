#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fic/grid.hpp"
#include "fic/path.hpp"

namespace fic {

// Shortest exact decimal form: %.17g round-trips every double, so re-running
// a command can be checked by byte comparison of its files.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// One row per grid node: time, coordinates, jump flag at that node.
inline void write_path_csv(std::ostream& os, const GridPath& p) {
    const TimeGrid& grid = p.grid();
    os << "t";
    for (std::size_t i = 0; i < p.dim(); ++i) os << ",x_" << (i + 1);
    os << ",jump\n";
    for (std::size_t k = 0; k <= grid.n_steps; ++k) {
        os << fmt_g17(grid.time(k));
        for (std::size_t i = 0; i < p.dim(); ++i) os << ',' << fmt_g17(p.value(k, i));
        os << ',' << (p.has_jump(k) ? 1 : 0) << '\n';
    }
}

inline void write_path_csv(const std::string& file, const GridPath& p) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("write_path_csv: cannot open " + file);
    write_path_csv(os, p);
    if (!os) throw std::runtime_error("write_path_csv: write failed on " + file);
}

}  // namespace fic
