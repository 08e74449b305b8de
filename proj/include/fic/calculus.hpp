#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fic/functionals.hpp"
#include "fic/path.hpp"
#include "fic/rng.hpp"

namespace fic {

// Finite-difference policy.  Steps are relative and get scaled by
// (1 + sup norm of the path), the usual balance between truncation and
// rounding for central differences: cube root of machine epsilon for first
// derivatives, fourth root for second.
struct DerivativeConfig {
    double grad_step = 6.0e-6;
    double hess_step = 1.2e-4;
    std::size_t horizontal_steps = 1;  // grid steps of the one-sided time extension
    bool richardson = false;           // halved-step extrapolation for gradients

    double grad_eps(const StoppedPath& sp) const { return grad_step * (1.0 + sp.sup_norm()); }
    double hess_eps(const StoppedPath& sp) const { return hess_step * (1.0 + sp.sup_norm()); }
};

// adapter so functional specs can be handed to the generic machinery
inline auto path_fn(const FunctionalSpec& F) {
    return [&F](const StoppedPath& sp) { return eval(F, sp); };
}

// One-sided time derivative: extend the frozen path m grid steps and
// difference.  Defined for stop times strictly before the horizon.
template <class Fn>
double horizontal_derivative(Fn&& f, const StoppedPath& sp, const DerivativeConfig& cfg = {}) {
    const std::size_t m = cfg.horizontal_steps;
    if (m == 0) throw std::invalid_argument("horizontal_derivative: need at least one step");
    if (sp.stop_index() + m > sp.grid().n_steps)
        throw std::out_of_range("horizontal_derivative: extension passes the horizon");
    const double span = static_cast<double>(m) * sp.grid().dt();
    return (f(horizontal_extend(sp, m)) - f(sp)) / span;
}

namespace detail {

inline std::vector<double> unit_bump(std::size_t d, std::size_t i, double eps) {
    std::vector<double> x(d, 0.0);
    x[i] = eps;
    return x;
}

template <class Fn>
double central_slope(Fn&& f, const StoppedPath& sp, std::size_t i, double eps) {
    const std::size_t d = sp.dim();
    const double up = f(vertical_bump(sp, unit_bump(d, i, eps)));
    const double dn = f(vertical_bump(sp, unit_bump(d, i, -eps)));
    return (up - dn) / (2.0 * eps);
}

}  // namespace detail

// Gradient of x -> F(w^t + x 1_[t,T]) at x = 0 by central differences.
template <class Fn>
std::vector<double> vertical_gradient(Fn&& f, const StoppedPath& sp,
                                      const DerivativeConfig& cfg = {}) {
    const std::size_t d = sp.dim();
    const double eps = cfg.grad_eps(sp);
    std::vector<double> g(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double full = detail::central_slope(f, sp, i, eps);
        if (!cfg.richardson) {
            g[i] = full;
        } else {
            const double half = detail::central_slope(f, sp, i, 0.5 * eps);
            g[i] = (4.0 * half - full) / 3.0;
        }
    }
    return g;
}

// Second vertical derivative, row-major d x d, symmetric by construction.
template <class Fn>
std::vector<double> vertical_hessian(Fn&& f, const StoppedPath& sp,
                                     const DerivativeConfig& cfg = {}) {
    const std::size_t d = sp.dim();
    const double eps = cfg.hess_eps(sp);
    std::vector<double> h(d * d, 0.0);
    const double f0 = f(sp);
    for (std::size_t i = 0; i < d; ++i) {
        const double up = f(vertical_bump(sp, detail::unit_bump(d, i, eps)));
        const double dn = f(vertical_bump(sp, detail::unit_bump(d, i, -eps)));
        h[i * d + i] = (up - 2.0 * f0 + dn) / (eps * eps);
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            auto at = [&](double si, double sj) {
                std::vector<double> x(d, 0.0);
                x[i] = si * eps;
                x[j] = sj * eps;
                return f(vertical_bump(sp, x));
            };
            const double v =
                (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * eps * eps);
            h[i * d + j] = v;
            h[j * d + i] = v;
        }
    }
    return h;
}

// Structural probes of x -> F(w^t + x 1_[t,T]).  These are not derivative
// estimates: the step is macroscopic and the report carries the worst slack
// found, so a failure names a concrete witness.
enum class VerticalProperty { monotone, convex, directionally_convex };

struct ProbeConfig {
    std::size_t n_probes = 200;
    double range = 1.0;  // base points drawn uniformly from [-range, range]^d
    double step = 0.05;
};

struct ProbeReport {
    VerticalProperty property = VerticalProperty::convex;
    std::size_t n_probes = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    std::vector<double> worst_base;
    std::vector<double> worst_dir;

    bool passed() const { return min_slack >= 0.0; }
};

template <class Fn>
ProbeReport probe_vertical_property(Fn&& f, const StoppedPath& sp, VerticalProperty property,
                                    const ProbeConfig& cfg, Rng& rng) {
    const std::size_t d = sp.dim();
    const double h = cfg.step;
    ProbeReport rep;
    rep.property = property;
    rep.n_probes = cfg.n_probes;

    auto phi = [&](const std::vector<double>& x) { return f(vertical_bump(sp, x)); };
    auto record = [&](double slack, const std::vector<double>& base,
                      const std::vector<double>& dir) {
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst_base = base;
            rep.worst_dir = dir;
        }
    };

    std::vector<double> base(d), shifted(d), dir(d);
    for (std::size_t p = 0; p < cfg.n_probes; ++p) {
        for (std::size_t i = 0; i < d; ++i)
            base[i] = (2.0 * rng.uniform() - 1.0) * cfg.range;

        switch (property) {
            case VerticalProperty::monotone: {
                const std::size_t i = p % d;
                shifted = base;
                shifted[i] += h;
                std::fill(dir.begin(), dir.end(), 0.0);
                dir[i] = 1.0;
                record((phi(shifted) - phi(base)) / h, base, dir);
                break;
            }
            case VerticalProperty::convex: {
                double norm = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    dir[i] = rng.normal();
                    norm += dir[i] * dir[i];
                }
                norm = std::sqrt(norm);
                for (std::size_t i = 0; i < d; ++i) dir[i] /= norm;
                std::vector<double> up(d), dn(d);
                for (std::size_t i = 0; i < d; ++i) {
                    up[i] = base[i] + h * dir[i];
                    dn[i] = base[i] - h * dir[i];
                }
                record((phi(up) + phi(dn) - 2.0 * phi(base)) / (h * h), base, dir);
                break;
            }
            case VerticalProperty::directionally_convex: {
                // second difference along a pair of coordinate directions;
                // i == j covers coordinatewise convexity, i != j supermodularity
                const std::size_t i = p % d;
                const std::size_t j = (d == 1) ? 0 : (p / d) % d;
                std::vector<double> xi = base, xj = base, xij = base;
                xi[i] += h;
                xj[j] += h;
                xij[i] += h;
                xij[j] += h;
                std::fill(dir.begin(), dir.end(), 0.0);
                dir[i] += 1.0;
                dir[j] += 1.0;
                record((phi(xij) - phi(xi) - phi(xj) + phi(base)) / (h * h), base, dir);
                break;
            }
        }
    }
    return rep;
}

}  // namespace fic
