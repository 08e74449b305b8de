#pragma once

#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fic/path.hpp"
#include "fic/scalar_functions.hpp"

namespace fic {

// Bounded weight of the path's left limits at the monitor dates.
struct MonitorWeight {
    enum class Kind { unit, mean, product };

    Kind kind = Kind::unit;
    ScalarFn fn;  // applied to each left limit before combining; unused for unit

    static MonitorWeight unit() { return {Kind::unit, ScalarFn::identity()}; }
    static MonitorWeight mean(ScalarFn f) { return {Kind::mean, f}; }
    static MonitorWeight product(ScalarFn f) { return {Kind::product, f}; }

    double value(const std::vector<double>& limits) const {
        switch (kind) {
            case Kind::unit: return 1.0;
            case Kind::mean: {
                double s = 0.0;
                for (double y : limits) s += fn.value(y);
                return s / static_cast<double>(limits.size());
            }
            case Kind::product: {
                double p = 1.0;
                for (double y : limits) p *= fn.value(y);
                return p;
            }
        }
        throw std::logic_error("MonitorWeight: bad kind");
    }

    bool operator==(const MonitorWeight& o) const { return kind == o.kind && fn == o.fn; }
};

// F(t, w) = integral_0^t g(w_s) rho(s) ds, discretized left-Riemann.
struct IntegralOfFunction {
    ScalarFn g;
    WeightFn rho = WeightFn::constant(1.0);
    bool operator==(const IntegralOfFunction&) const = default;
};

// F(t, w) = h(w_t - w_{tn-}) * weight(w_{t1-}, ..., w_{tn-}) * 1{t >= tn}
// for monitor dates t1 < ... < tn.  h must vanish at 0 so an unjumped arrival
// at tn contributes nothing.
struct DiscreteMonitor {
    std::vector<double> times;
    ScalarFn h;
    MonitorWeight weight = MonitorWeight::unit();
    bool operator==(const DiscreteMonitor&) const = default;
};

// F(t, w) = profile of the time average of the stopped path over [0, T].
struct AsianPayoff {
    ScalarFn profile;
    bool operator==(const AsianPayoff&) const = default;
};

// F(t, w) = profile(w_T) of the stopped path, i.e. profile of the frozen value.
struct TerminalPayoff {
    ScalarFn profile;
    bool operator==(const TerminalPayoff&) const = default;
};

// F(t, w) = integral_0^T profile(w_s) ds of the stopped path.
struct IntegralPayoff {
    ScalarFn profile;
    bool operator==(const IntegralPayoff&) const = default;
};

using FunctionalBody =
    std::variant<IntegralOfFunction, DiscreteMonitor, AsianPayoff, TerminalPayoff, IntegralPayoff>;

// A non-anticipative functional of a stopped path.  Multi-dimensional paths
// are read through a fixed coordinate weight vector; an empty vector means
// plain first-coordinate access on a one-dimensional path.  Composing the
// scalar profiles with a nonnegative linear map preserves the monotonicity
// and convexity classes the comparison probes rely on.
struct FunctionalSpec {
    FunctionalBody body;
    std::vector<double> coord_weights;

    bool operator==(const FunctionalSpec&) const = default;
};

inline FunctionalSpec make_functional(FunctionalBody body, std::vector<double> weights = {}) {
    return FunctionalSpec{std::move(body), std::move(weights)};
}

namespace detail {

inline void check_projection(const FunctionalSpec& F, const StoppedPath& sp) {
    if (F.coord_weights.empty()) {
        if (sp.dim() != 1)
            throw std::invalid_argument("FunctionalSpec: path has dim > 1, coord_weights required");
    } else if (F.coord_weights.size() != sp.dim()) {
        throw std::invalid_argument("FunctionalSpec: coord_weights size does not match path dim");
    }
}

inline double proj_value(const FunctionalSpec& F, const StoppedPath& sp, std::size_t k) {
    if (F.coord_weights.empty()) return sp.value(k, 0);
    double s = 0.0;
    for (std::size_t i = 0; i < sp.dim(); ++i) s += F.coord_weights[i] * sp.value(k, i);
    return s;
}

inline double proj_frozen(const FunctionalSpec& F, const StoppedPath& sp) {
    if (F.coord_weights.empty()) return sp.frozen(0);
    double s = 0.0;
    for (std::size_t i = 0; i < sp.dim(); ++i) s += F.coord_weights[i] * sp.frozen(i);
    return s;
}

inline double proj_left_limit(const FunctionalSpec& F, const StoppedPath& sp, std::size_t k) {
    if (F.coord_weights.empty()) return sp.left_limit_at(k, 0);
    double s = 0.0;
    for (std::size_t i = 0; i < sp.dim(); ++i) s += F.coord_weights[i] * sp.left_limit_at(k, i);
    return s;
}

}  // namespace detail

// Throws if the spec is internally inconsistent.  Config loading and the
// evaluators below both run this; it is cheap relative to any path loop.
inline void validate(const FunctionalSpec& F) {
    if (const auto* m = std::get_if<DiscreteMonitor>(&F.body)) {
        if (m->times.empty()) throw std::invalid_argument("DiscreteMonitor: no monitor dates");
        for (std::size_t i = 0; i < m->times.size(); ++i) {
            if (m->times[i] <= 0.0)
                throw std::invalid_argument("DiscreteMonitor: monitor dates must be positive");
            if (i > 0 && m->times[i] <= m->times[i - 1])
                throw std::invalid_argument("DiscreteMonitor: monitor dates must increase");
        }
        if (!m->h.vanishes_at_zero())
            throw std::invalid_argument("DiscreteMonitor: h must vanish at 0");
    }
}

inline double eval(const FunctionalSpec& F, const StoppedPath& sp) {
    detail::check_projection(F, sp);
    const TimeGrid& grid = sp.grid();
    const std::size_t n = grid.n_steps;
    const std::size_t k = sp.stop_index();
    const double dt = grid.dt();

    struct Visitor {
        const FunctionalSpec& F;
        const StoppedPath& sp;
        const TimeGrid& grid;
        std::size_t n, k;
        double dt;

        double operator()(const IntegralOfFunction& a) const {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                acc += a.g.value(detail::proj_value(F, sp, j)) * a.rho.value(grid.time(j));
            return acc * dt;
        }

        double operator()(const DiscreteMonitor& m) const {
            validate(F);
            std::vector<std::size_t> idx(m.times.size());
            for (std::size_t i = 0; i < m.times.size(); ++i) idx[i] = grid.index_of(m.times[i]);
            const std::size_t last = idx.back();
            if (k < last) return 0.0;
            std::vector<double> limits(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                limits[i] = detail::proj_left_limit(F, sp, idx[i]);
            const double incr = detail::proj_frozen(F, sp) - limits.back();
            return m.h.value(incr) * m.weight.value(limits);
        }

        double operator()(const AsianPayoff& a) const {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += detail::proj_value(F, sp, j);
            return a.profile.value(acc * dt / grid.horizon);
        }

        double operator()(const TerminalPayoff& a) const {
            return a.profile.value(detail::proj_frozen(F, sp));
        }

        double operator()(const IntegralPayoff& a) const {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += a.profile.value(detail::proj_value(F, sp, j));
            return acc * dt;
        }
    };

    return std::visit(Visitor{F, sp, grid, n, k, dt}, F.body);
}

// True for the payoff-style variants whose expectation under a model is a
// sensible valuation target.
inline bool is_payoff(const FunctionalSpec& F) {
    return std::holds_alternative<AsianPayoff>(F.body) ||
           std::holds_alternative<TerminalPayoff>(F.body) ||
           std::holds_alternative<IntegralPayoff>(F.body);
}

// Jump-increment remainder H(t, w, x) = F(w + x 1_[t,T]) - F(w) - grad . x
// evaluated at a pre-jump path.  The caller supplies the vertical gradient.
inline double increment_remainder(const FunctionalSpec& F, const StoppedPath& sp,
                                  const std::vector<double>& x, const std::vector<double>& grad) {
    if (x.size() != sp.dim() || grad.size() != x.size())
        throw std::invalid_argument("increment_remainder: size mismatch");
    const double base = eval(F, sp);
    const double bumped = eval(F, vertical_bump(sp, x));
    return bumped - base - std::inner_product(x.begin(), x.end(), grad.begin(), 0.0);
}

inline double increment_remainder(const FunctionalSpec& F, const StoppedPath& sp, double x,
                                  double grad) {
    return increment_remainder(F, sp, std::vector<double>{x}, std::vector<double>{grad});
}

}  // namespace fic
