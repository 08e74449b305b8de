#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fic {

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Sizes here are tiny (model dimensions and quadrature orders), so the
// quadratic sweep cost is irrelevant and the accuracy is excellent.
struct EigenResult {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column i is the eigenvector of values[i], row-major n x n
};

inline EigenResult jacobi_eigen(std::vector<double> a, std::size_t n) {
    if (a.size() != n * n) throw std::invalid_argument("jacobi_eigen: bad matrix size");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a[i * n + j] - a[j * n + i]) >
                1e-12 * (1.0 + std::abs(a[i * n + j]) + std::abs(a[j * n + i])))
                throw std::invalid_argument("jacobi_eigen: matrix not symmetric");

    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto offdiag = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
        return s;
    };

    for (int sweep = 0; sweep < 100 && offdiag() > 1e-26; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p];
                    const double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenResult r;
    r.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.values[i] = a[i * n + i];

    // sort ascending, carrying the columns along
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (r.values[order[j]] < r.values[order[i]]) std::swap(order[i], order[j]);

    EigenResult out;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = r.values[order[i]];
        for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + i] = v[k * n + order[i]];
    }
    return out;
}

// Smallest eigenvalue of a symmetric matrix; the slack behind "is this
// difference of covariance matrices positive semidefinite".
inline double min_eigenvalue(const std::vector<double>& a, std::size_t n) {
    return jacobi_eigen(a, n).values.front();
}

}  // namespace fic
