#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fic/functionals.hpp"
#include "fic/models.hpp"
#include "fic/quadrature.hpp"
#include "fic/rng.hpp"
#include "fic/stats.hpp"

namespace fic {

// Monte Carlo conditional-expectation target
//   G(t, w) = mean over stored continuations of F(T, w glued to the tail).
//
// The continuation panel is drawn once from the model started at zero and
// consumed time-shifted: stopped at index k with frozen value a, sample j
// contributes the tail a + c_j[i - k].  This is the law of the conditional
// tail precisely because the model has independent and stationary
// increments, and reusing one panel across every query point makes G a
// smooth deterministic function of (k, history, a) rather than a fresh noisy
// estimate per call.  Derivative probes of G then difference out the shared
// noise instead of amplifying it.
//
// Per continuation only the running statistics the target needs are kept, so
// each query costs O(history) + O(n_samples).
class EstimatedValuation {
  public:
    EstimatedValuation(ModelSpec model, TimeGrid grid, FunctionalSpec target,
                       std::size_t n_samples, std::uint64_t root_seed)
        : model_(std::move(model)),
          grid_(grid),
          target_(std::move(target)),
          m_(n_samples),
          root_(root_seed) {
        if (dim(model_) != 1)
            throw std::invalid_argument("EstimatedValuation: model must be one-dimensional");
        if (!has_independent_increments(model_))
            throw std::invalid_argument(
                "EstimatedValuation: continuation reuse needs independent increments");
        if (!is_payoff(target_))
            throw std::invalid_argument("EstimatedValuation: target must be a payoff functional");
        if (!target_.coord_weights.empty())
            throw std::invalid_argument("EstimatedValuation: coordinate weights not supported");
        if (m_ == 0) throw std::invalid_argument("EstimatedValuation: need at least one sample");
        validate(target_);

        if (std::holds_alternative<AsianPayoff>(target_.body)) {
            mode_ = Mode::asian;
        } else if (std::holds_alternative<TerminalPayoff>(target_.body)) {
            mode_ = Mode::terminal;
        } else {
            const auto& ip = std::get<IntegralPayoff>(target_.body);
            const bool poly = ip.profile.kind == ScalarFn::Kind::identity ||
                              ip.profile.kind == ScalarFn::Kind::square;
            mode_ = poly ? Mode::integral_poly : Mode::integral_generic;
        }

        const std::size_t n = grid_.n_steps;
        const std::size_t w = n + 1;
        const bool want_vals = mode_ == Mode::terminal || mode_ == Mode::integral_generic;
        const bool want_s1 = mode_ == Mode::asian || mode_ == Mode::integral_poly;
        const bool want_s2 =
            mode_ == Mode::integral_poly &&
            std::get<IntegralPayoff>(target_.body).profile.kind == ScalarFn::Kind::square;
        if (want_vals) vals_.resize(m_ * w);
        if (want_s1) s1_.resize(m_ * w);
        if (want_s2) s2_.resize(m_ * w);

        for (std::size_t j = 0; j < m_; ++j) {
            Rng rng(derive_seed(root_, stream::valuation, j));
            const GridPath c = simulate(model_, grid_, {0.0}, rng);
            if (want_vals)
                for (std::size_t i = 0; i < w; ++i) vals_[j * w + i] = c.value1(i);
            if (want_s1) {
                double acc = 0.0;
                for (std::size_t i = 0; i < w; ++i) {
                    s1_[j * w + i] = acc;
                    acc += c.value1(i);
                }
            }
            if (want_s2) {
                double acc = 0.0;
                for (std::size_t i = 0; i < w; ++i) {
                    s2_[j * w + i] = acc;
                    acc += c.value1(i) * c.value1(i);
                }
            }
        }
    }

    const ModelSpec& model() const { return model_; }
    const TimeGrid& grid() const { return grid_; }
    const FunctionalSpec& target() const { return target_; }
    std::size_t n_samples() const { return m_; }

    // per-continuation terminal payoff values at the queried stopped path
    void samples(const StoppedPath& sp, std::vector<double>& out) const {
        if (!(sp.grid() == grid_) || sp.dim() != 1)
            throw std::invalid_argument("EstimatedValuation: path grid or dimension mismatch");
        out.resize(m_);
        const std::size_t n = grid_.n_steps;
        const std::size_t w = n + 1;
        const std::size_t k = sp.stop_index();
        const std::size_t m = n - k;
        const double a = sp.frozen1();
        const double dt = grid_.dt();

        switch (mode_) {
            case Mode::asian: {
                const auto& profile = std::get<AsianPayoff>(target_.body).profile;
                double hist = 0.0;
                for (std::size_t j = 0; j < k; ++j) hist += sp.value1(j);
                const double scale = dt / grid_.horizon;
                const double base = (hist + static_cast<double>(m) * a) * scale;
                for (std::size_t j = 0; j < m_; ++j)
                    out[j] = profile.value(base + s1_[j * w + m] * scale);
                return;
            }
            case Mode::terminal: {
                const auto& profile = std::get<TerminalPayoff>(target_.body).profile;
                for (std::size_t j = 0; j < m_; ++j) out[j] = profile.value(a + vals_[j * w + m]);
                return;
            }
            case Mode::integral_poly: {
                const auto& profile = std::get<IntegralPayoff>(target_.body).profile;
                if (profile.kind == ScalarFn::Kind::identity) {
                    double hist = 0.0;
                    for (std::size_t j = 0; j < k; ++j) hist += sp.value1(j);
                    const double base = hist + static_cast<double>(m) * a;
                    for (std::size_t j = 0; j < m_; ++j)
                        out[j] = (base + s1_[j * w + m]) * dt;
                } else {
                    double hist = 0.0;
                    for (std::size_t j = 0; j < k; ++j) hist += sp.value1(j) * sp.value1(j);
                    const double base = hist + static_cast<double>(m) * a * a;
                    for (std::size_t j = 0; j < m_; ++j)
                        out[j] = (base + 2.0 * a * s1_[j * w + m] + s2_[j * w + m]) * dt;
                }
                return;
            }
            case Mode::integral_generic: {
                const auto& profile = std::get<IntegralPayoff>(target_.body).profile;
                double hist = 0.0;
                for (std::size_t j = 0; j < k; ++j) hist += profile.value(sp.value1(j));
                for (std::size_t j = 0; j < m_; ++j) {
                    double acc = hist;
                    for (std::size_t l = 0; l < m; ++l)
                        acc += profile.value(a + vals_[j * w + l]);
                    out[j] = acc * dt;
                }
                return;
            }
        }
        throw std::logic_error("EstimatedValuation: bad mode");
    }

    double value(const StoppedPath& sp) const {
        std::vector<double> buf;
        samples(sp, buf);
        double s = 0.0;
        for (double x : buf) s += x;
        return s / static_cast<double>(m_);
    }

    MeanSe value_se(const StoppedPath& sp) const {
        std::vector<double> buf;
        samples(sp, buf);
        return mean_se(buf);
    }

  private:
    enum class Mode { asian, terminal, integral_poly, integral_generic };

    ModelSpec model_;
    TimeGrid grid_;
    FunctionalSpec target_;
    std::size_t m_;
    std::uint64_t root_;
    Mode mode_ = Mode::terminal;
    std::vector<double> vals_;  // continuation values, per sample
    std::vector<double> s1_;    // prefix sums of values
    std::vector<double> s2_;    // prefix sums of squared values
};

// Exact conditional expectation for the Brownian model, against the same
// grid discretization the Monte Carlo target uses: tail sums are taken over
// the grid points, so the two targets estimate the identical quantity and
// differ only by sampling noise and quadrature truncation.
class SemigroupValuation {
  public:
    SemigroupValuation(BrownianModel model, TimeGrid grid, FunctionalSpec target,
                       std::size_t quad_order = 40)
        : model_(std::move(model)), grid_(grid), target_(std::move(target)), gh_(quad_order) {
        if (model_.drift.size() != 1 || model_.sigma.size() != 1)
            throw std::invalid_argument("SemigroupValuation: model must be one-dimensional");
        if (!is_payoff(target_))
            throw std::invalid_argument("SemigroupValuation: target must be a payoff functional");
        if (!target_.coord_weights.empty())
            throw std::invalid_argument("SemigroupValuation: coordinate weights not supported");
    }

    const TimeGrid& grid() const { return grid_; }

    double value(const StoppedPath& sp) const {
        if (!(sp.grid() == grid_) || sp.dim() != 1)
            throw std::invalid_argument("SemigroupValuation: path grid or dimension mismatch");
        const std::size_t n = grid_.n_steps;
        const std::size_t k = sp.stop_index();
        const std::size_t m = n - k;
        const double a = sp.frozen1();
        const double dt = grid_.dt();
        const double b = model_.drift[0];
        const double sig = model_.sigma[0];

        if (const auto* t = std::get_if<TerminalPayoff>(&target_.body)) {
            const double tau = static_cast<double>(m) * dt;
            return gh_.normal_expectation([&](double x) { return t->profile.value(x); },
                                          a + b * tau, sig * std::sqrt(tau));
        }
        if (const auto* asian = std::get_if<AsianPayoff>(&target_.body)) {
            double hist = 0.0;
            for (std::size_t j = 0; j < k; ++j) hist += sp.value1(j);
            const double md = static_cast<double>(m);
            const double tail_mean = md * a + b * dt * md * (md - 1.0) * 0.5;
            // Var of the tail sum: dt * sum over pairs of min(l, l')
            double smin = 0.0;
            for (std::size_t l = 0; l < m; ++l) {
                const double ld = static_cast<double>(l);
                smin += ld * (ld - 1.0) * 0.5 + ld * (md - ld);
            }
            const double scale = dt / grid_.horizon;
            const double mean = (hist + tail_mean) * scale;
            const double sd = sig * std::sqrt(dt * smin) * scale;
            return gh_.normal_expectation([&](double x) { return asian->profile.value(x); }, mean,
                                          sd);
        }
        const auto& ip = std::get<IntegralPayoff>(target_.body);
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += ip.profile.value(sp.value1(j));
        for (std::size_t l = 0; l < m; ++l) {
            const double tau = static_cast<double>(l) * dt;
            acc += gh_.normal_expectation([&](double x) { return ip.profile.value(x); },
                                          a + b * tau, sig * std::sqrt(tau));
        }
        return acc * dt;
    }

  private:
    BrownianModel model_;
    TimeGrid grid_;
    FunctionalSpec target_;
    GaussHermite gh_;
};

}  // namespace fic
