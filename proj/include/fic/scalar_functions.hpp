#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fic {

// Small catalogue of smooth scalar functions with hand-coded first and second
// derivatives.  Payoff profiles, monitor kernels and integrands are all drawn
// from here so every consumer gets exact derivatives instead of nested
// differencing.
struct ScalarFn {
    enum class Kind {
        identity,    // x
        square,      // x^2
        expm1,       // e^x - 1, vanishes at 0
        exp_clipped, // exp(L tanh(x / L)): exponential flattened outside [-L, L], bounded
        smooth_call, // p2 * log(1 + exp((x - p1) / p2)): softplus call, increasing convex
        logistic,    // 1 / (1 + exp(-(x - p1) / p2)), bounded increasing
        gauss_bump,  // exp(-((x - p1) / p2)^2), bounded
    };

    Kind kind = Kind::identity;
    double p1 = 0.0;  // strike / centre / clip level, by kind
    double p2 = 1.0;  // width

    static ScalarFn identity() { return {Kind::identity, 0.0, 1.0}; }
    static ScalarFn square() { return {Kind::square, 0.0, 1.0}; }
    static ScalarFn expm1() { return {Kind::expm1, 0.0, 1.0}; }
    static ScalarFn exp_clipped(double level = 3.0) { return {Kind::exp_clipped, level, 1.0}; }
    static ScalarFn smooth_call(double strike, double width) {
        return {Kind::smooth_call, strike, width};
    }
    static ScalarFn logistic(double centre, double width) {
        return {Kind::logistic, centre, width};
    }
    static ScalarFn gauss_bump(double centre, double width) {
        return {Kind::gauss_bump, centre, width};
    }

    double value(double x) const {
        switch (kind) {
            case Kind::identity: return x;
            case Kind::square: return x * x;
            case Kind::expm1: return std::expm1(x);
            case Kind::exp_clipped: return std::exp(p1 * std::tanh(x / p1));
            case Kind::smooth_call: {
                const double z = (x - p1) / p2;
                return z > 32.0 ? x - p1 : p2 * std::log1p(std::exp(z));
            }
            case Kind::logistic: return 1.0 / (1.0 + std::exp(-(x - p1) / p2));
            case Kind::gauss_bump: {
                const double u = (x - p1) / p2;
                return std::exp(-u * u);
            }
        }
        throw std::logic_error("ScalarFn: bad kind");
    }

    double d1(double x) const {
        switch (kind) {
            case Kind::identity: return 1.0;
            case Kind::square: return 2.0 * x;
            case Kind::expm1: return std::exp(x);
            case Kind::exp_clipped: {
                const double th = std::tanh(x / p1);
                return std::exp(p1 * th) * (1.0 - th * th);
            }
            case Kind::smooth_call: {
                const double z = (x - p1) / p2;
                return z > 32.0 ? 1.0 : 1.0 / (1.0 + std::exp(-z));
            }
            case Kind::logistic: {
                const double s = value(x);
                return s * (1.0 - s) / p2;
            }
            case Kind::gauss_bump: {
                const double u = (x - p1) / p2;
                return -2.0 * u / p2 * std::exp(-u * u);
            }
        }
        throw std::logic_error("ScalarFn: bad kind");
    }

    double d2(double x) const {
        switch (kind) {
            case Kind::identity: return 0.0;
            case Kind::square: return 2.0;
            case Kind::expm1: return std::exp(x);
            case Kind::exp_clipped: {
                const double th = std::tanh(x / p1);
                const double g1 = 1.0 - th * th;                 // d/dx of p1 * tanh(x/p1)
                const double g2 = -2.0 * th * g1 / p1;
                return std::exp(p1 * th) * (g1 * g1 + g2);
            }
            case Kind::smooth_call: {
                const double z = (x - p1) / p2;
                if (z > 32.0 || z < -32.0) return 0.0;
                const double s = 1.0 / (1.0 + std::exp(-z));
                return s * (1.0 - s) / p2;
            }
            case Kind::logistic: {
                const double s = value(x);
                return s * (1.0 - s) * (1.0 - 2.0 * s) / (p2 * p2);
            }
            case Kind::gauss_bump: {
                const double u = (x - p1) / p2;
                return (4.0 * u * u - 2.0) / (p2 * p2) * std::exp(-u * u);
            }
        }
        throw std::logic_error("ScalarFn: bad kind");
    }

    bool vanishes_at_zero() const {
        return kind == Kind::identity || kind == Kind::square || kind == Kind::expm1;
    }

    bool operator==(const ScalarFn& o) const {
        return kind == o.kind && p1 == o.p1 && p2 == o.p2;
    }
};

// Bounded deterministic weight of time for running integrals.
struct WeightFn {
    enum class Kind { constant, exp_decay, cosine };

    Kind kind = Kind::constant;
    double param = 1.0;  // level / decay rate / angular frequency

    static WeightFn constant(double c = 1.0) { return {Kind::constant, c}; }
    static WeightFn exp_decay(double rate) { return {Kind::exp_decay, rate}; }
    static WeightFn cosine(double omega) { return {Kind::cosine, omega}; }

    double value(double t) const {
        switch (kind) {
            case Kind::constant: return param;
            case Kind::exp_decay: return std::exp(-param * t);
            case Kind::cosine: return std::cos(param * t);
        }
        throw std::logic_error("WeightFn: bad kind");
    }

    bool operator==(const WeightFn& o) const { return kind == o.kind && param == o.param; }
};

}  // namespace fic
