#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fic/calculus.hpp"
#include "fic/functionals.hpp"
#include "fic/models.hpp"
#include "fic/parallel.hpp"
#include "fic/stats.hpp"
#include "fic/valuation.hpp"

namespace fic {

// Pathwise change decomposition of a functional along one grid path:
//
//   F(T, w^T) - F(0, w^0)  =  time term + drive term + quadratic term + jump term
//
// with the one-sided time derivative summed left-Riemann over every step, the
// gradient applied to every step increment, the half-Hessian applied to the
// realized squared increments of the unflagged steps, and the flagged steps
// carrying their remainder beyond the gradient.  At a flagged index the
// gradient is taken at the pre-jump path, whose time slot already sits at the
// jump date; the ledger makes the frozen pre-jump path identical to the
// one-step extension of the previous stop, so the time term telescopes
// exactly across jumps.
struct ItoDecomposition {
    double change = 0.0;
    double time_term = 0.0;
    double drive_term = 0.0;
    double qv_term = 0.0;
    double jump_term = 0.0;

    double residual() const {
        return change - time_term - drive_term - qv_term - jump_term;
    }
};

inline ItoDecomposition ito_decompose(const FunctionalSpec& F, const GridPath& p,
                                      const DerivativeConfig& cfg = {}) {
    const std::size_t n = p.n_steps();
    const std::size_t d = p.dim();
    const double dt = p.grid().dt();
    auto f = path_fn(F);

    ItoDecomposition out;
    out.change = eval(F, stop(p, n)) - eval(F, stop(p, 0));

    std::vector<double> delta(d);
    for (std::size_t k = 0; k < n; ++k) {
        const StoppedPath spk = stop(p, k);
        out.time_term += horizontal_derivative(f, spk, cfg) * dt;

        for (std::size_t i = 0; i < d; ++i)
            delta[i] = p.value(k + 1, i) - p.value(k, i);

        if (!p.has_jump(k + 1)) {
            const auto grad = vertical_gradient(f, spk, cfg);
            const auto hess = vertical_hessian(f, spk, cfg);
            double drive = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                drive += grad[i] * delta[i];
                for (std::size_t j = 0; j < d; ++j)
                    quad += hess[i * d + j] * delta[i] * delta[j];
            }
            out.drive_term += drive;
            out.qv_term += 0.5 * quad;
        } else {
            const StoppedPath pre = stop_pre(p, k + 1);
            const auto grad = vertical_gradient(f, pre, cfg);
            double drive = 0.0;
            for (std::size_t i = 0; i < d; ++i) drive += grad[i] * delta[i];
            out.drive_term += drive;
            out.jump_term += f(stop(p, k + 1)) - f(pre) - drive;
        }
    }
    return out;
}

// Linear stencil realizing the backward operator of a scalar model at one
// stopped path:
//
//   L[G] = dG/dt + drift * grad G + (c / 2) * hess G
//        + sum over atoms rate * (G(bumped) - G - grad G * jump)
//
// coefficients read from the model's characteristics at the predictable
// state.  Keeping the operator as explicit (point, weight) pairs lets a
// sampled target apply it continuation by continuation, which is what makes
// the reported standard error honest: the stencil differences each
// continuation against itself before anything is averaged.
struct GeneratorStencil {
    std::vector<StoppedPath> points;
    std::vector<double> weights;

    static GeneratorStencil build(const Characteristics& ch, const StoppedPath& sp,
                                  const DerivativeConfig& cfg = {}, bool include_drift = true) {
        if (ch.drift.size() != 1 || sp.dim() != 1)
            throw std::invalid_argument("GeneratorStencil: scalar models only");
        const std::size_t m = cfg.horizontal_steps;
        if (sp.stop_index() + m > sp.grid().n_steps)
            throw std::out_of_range("GeneratorStencil: stop too close to the horizon");

        const double c = ch.cov[0];
        const double span = static_cast<double>(m) * sp.grid().dt();
        const double eg = cfg.grad_eps(sp);
        const double eh = cfg.hess_eps(sp);

        // gradient coefficient: optional drift minus the atom compensator
        double gamma = include_drift ? ch.drift[0] : 0.0;
        for (const auto& a : ch.atoms) gamma -= a.rate * a.x[0];

        GeneratorStencil st;
        double base_weight = -1.0 / span;  // from the time difference
        st.points.push_back(horizontal_extend(sp, m));
        st.weights.push_back(1.0 / span);

        if (gamma != 0.0) {
            st.points.push_back(vertical_bump(sp, eg));
            st.weights.push_back(gamma / (2.0 * eg));
            st.points.push_back(vertical_bump(sp, -eg));
            st.weights.push_back(-gamma / (2.0 * eg));
        }
        if (c != 0.0) {
            st.points.push_back(vertical_bump(sp, eh));
            st.weights.push_back(0.5 * c / (eh * eh));
            st.points.push_back(vertical_bump(sp, -eh));
            st.weights.push_back(0.5 * c / (eh * eh));
            base_weight -= c / (eh * eh);
        }
        for (const auto& a : ch.atoms) {
            if (a.rate == 0.0) continue;
            st.points.push_back(vertical_bump(sp, a.x[0]));
            st.weights.push_back(a.rate);
            base_weight -= a.rate;
        }
        st.points.push_back(sp);
        st.weights.push_back(base_weight);
        return st;
    }

    static GeneratorStencil build(const ModelSpec& model, const StoppedPath& sp,
                                  const DerivativeConfig& cfg = {}, bool include_drift = true) {
        if (dim(model) != 1)
            throw std::invalid_argument("GeneratorStencil: scalar models only");
        return build(characteristics_at(model, sp), sp, cfg, include_drift);
    }

    template <class Fn>
    double apply(Fn&& value) const {
        double s = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * value(points[i]);
        return s;
    }

    // apply against each stored continuation of a sampled target; the mean is
    // the operator value, the se its honest sampling error
    MeanSe apply_sampled(const EstimatedValuation& G, std::vector<double>& per_sample,
                         std::vector<double>& scratch) const {
        per_sample.assign(G.n_samples(), 0.0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            G.samples(points[i], scratch);
            const double w = weights[i];
            for (std::size_t j = 0; j < per_sample.size(); ++j) per_sample[j] += w * scratch[j];
        }
        return mean_se(per_sample);
    }
};

// One probe of the backward identity L[G] = 0 at a grid index.
struct ResidualPoint {
    std::size_t index = 0;
    double time = 0.0;
    double residual = 0.0;
    double se = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct ResidualProfile {
    std::vector<ResidualPoint> points;
    std::size_t n_pass = 0;
    double max_ratio = 0.0;  // max |residual| / tol

    double pass_rate() const {
        return points.empty() ? 1.0
                              : static_cast<double>(n_pass) / static_cast<double>(points.size());
    }
    bool all_pass() const { return n_pass == points.size(); }
};

// One probe of L[G] against the sampled target, with the operator built from
// the supplied characteristics.  The tolerance budgets the sampling error
// plus the two deterministic bias sources, time discretization and
// difference-step truncation.
inline ResidualPoint kbe_residual_at(const EstimatedValuation& G, const Characteristics& ch,
                                     const StoppedPath& sp_pre, std::size_t index,
                                     const DerivativeConfig& cfg, bool include_drift,
                                     double se_mult, double bias_mult,
                                     std::vector<double>& per_sample,
                                     std::vector<double>& scratch) {
    const GeneratorStencil st = GeneratorStencil::build(ch, sp_pre, cfg, include_drift);
    const MeanSe r = st.apply_sampled(G, per_sample, scratch);
    const double eg = cfg.grad_eps(sp_pre);
    const double dt = G.grid().dt();

    ResidualPoint pt;
    pt.index = index;
    pt.time = sp_pre.stop_time();
    pt.residual = r.mean;
    pt.se = r.se;
    pt.tol = se_mult * r.se + bias_mult * (dt + eg * eg);
    pt.pass = std::abs(pt.residual) <= pt.tol;
    return pt;
}

inline void finalize_profile(ResidualProfile& prof) {
    prof.n_pass = 0;
    prof.max_ratio = 0.0;
    for (const auto& pt : prof.points) {
        if (pt.pass) ++prof.n_pass;
        if (pt.tol > 0.0) prof.max_ratio = std::max(prof.max_ratio, std::abs(pt.residual) / pt.tol);
    }
}

// Evaluates the backward residual of a sampled target along a witness path at
// the requested indices, at the pre-jump stopped path of each.  Passing
// include_drift = false drops the drift term, which is the correct operator
// only for a driftless model; on a drifted model it serves as a negative
// control that must fail.
inline ResidualProfile backward_residual_profile(const EstimatedValuation& G,
                                                 const GridPath& witness,
                                                 const std::vector<std::size_t>& indices,
                                                 const DerivativeConfig& cfg = {},
                                                 bool include_drift = true, double se_mult = 3.0,
                                                 double bias_mult = 10.0) {
    if (!(witness.grid() == G.grid()))
        throw std::invalid_argument("backward_residual_profile: grid mismatch");

    ResidualProfile prof;
    std::vector<double> per_sample, scratch;
    for (std::size_t k : indices) {
        if (k + cfg.horizontal_steps > G.grid().n_steps)
            throw std::out_of_range("backward_residual_profile: index too close to the horizon");
        const StoppedPath sp = stop_pre(witness, k);
        const Characteristics ch = characteristics_at(G.model(), sp);
        prof.points.push_back(kbe_residual_at(G, ch, sp, k, cfg, include_drift, se_mult, bias_mult,
                                              per_sample, scratch));
    }
    finalize_profile(prof);
    return prof;
}

// Spot check of the backward identity at sampled (path, time) probes: each
// probe simulates a fresh path from path_model, draws an interior index, and
// evaluates the operator of generator_model there.  Passing a generator
// model different from the one the target was estimated under is the
// mismatched-coefficients control.
inline ResidualProfile kbe_residual_profile(const EstimatedValuation& G,
                                            const ModelSpec& path_model,
                                            const ModelSpec& generator_model, double x0,
                                            std::size_t n_probes, std::uint64_t seed,
                                            const DerivativeConfig& cfg = {},
                                            bool include_drift = true, double se_mult = 3.0,
                                            double bias_mult = 10.0) {
    const std::size_t n = G.grid().n_steps;
    if (n < 2) throw std::invalid_argument("kbe_residual_profile: grid too coarse");
    if (dim(path_model) != 1 || dim(generator_model) != 1)
        throw std::invalid_argument("kbe_residual_profile: scalar models only");

    ResidualProfile prof;
    prof.points.resize(n_probes);
    parallel_for(n_probes, [&](std::size_t i) {
        thread_local std::vector<double> per_sample, scratch;
        Rng rng(derive_seed(seed, stream::probes, i));
        const GridPath p = simulate(path_model, G.grid(), {x0}, rng);
        std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
        if (k > n - 1) k = n - 1;
        const StoppedPath sp = stop_pre(p, k);
        const Characteristics ch = characteristics_at(generator_model, sp);
        prof.points[i] = kbe_residual_at(G, ch, sp, k, cfg, include_drift, se_mult, bias_mult,
                                         per_sample, scratch);
    });
    finalize_profile(prof);
    return prof;
}

}  // namespace fic
