#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fic/linalg.hpp"

namespace fic {

// Gauss-Hermite rule via the Golub-Welsch tridiagonal: nodes are the
// eigenvalues, weights the squared first components of the eigenvectors.
// Normalised for standard normal expectations,
//   E f(Z) ~ sum_i weight[i] * f(sqrt(2) * node[i]).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermite(std::size_t k) {
        std::vector<double> jm(k * k, 0.0);
        for (std::size_t i = 0; i + 1 < k; ++i) {
            const double b = std::sqrt(0.5 * static_cast<double>(i + 1));
            jm[i * k + (i + 1)] = b;
            jm[(i + 1) * k + i] = b;
        }
        const EigenResult e = jacobi_eigen(std::move(jm), k);
        nodes = e.values;
        weights.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            const double v0 = e.vectors[0 * k + i];
            weights[i] = v0 * v0;
        }
    }

    // E f(mean + sd * Z) for Z standard normal
    template <class F>
    double normal_expectation(F&& f, double mean, double sd) const {
        if (sd == 0.0) return f(mean);
        double s = 0.0;
        const double r2 = std::sqrt(2.0);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            s += weights[i] * f(mean + sd * r2 * nodes[i]);
        return s;
    }
};

}  // namespace fic
