#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fic {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Sample mean with its standard error.  Single accumulation order so results
// do not depend on how callers batch their work.
inline MeanSe mean_se(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_se: empty sample");
    const double n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double m = s / n;
    if (xs.size() == 1) return {m, 0.0};
    double q = 0.0;
    for (double x : xs) q += (x - m) * (x - m);
    return {m, std::sqrt(q / (n - 1.0) / n)};
}

}  // namespace fic
