#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fic/backward.hpp"
#include "fic/calculus.hpp"
#include "fic/comparison.hpp"
#include "fic/config.hpp"
#include "fic/io.hpp"
#include "fic/models.hpp"
#include "fic/parallel.hpp"
#include "fic/rng.hpp"
#include "fic/valuation.hpp"

namespace fic::cli {

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

// What a command did: the JSON document it wrote, the files it produced, and
// the verdicts that decide the process exit code.
struct CommandReport {
    std::string command;
    json doc;
    std::vector<std::string> files;
    std::vector<CheckOutcome> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const CheckOutcome& c) { return c.pass; });
    }
};

namespace detail {

inline const json& command_block(const ExperimentConfig& cfg, const char* name) {
    const auto it = cfg.commands.find(name);
    if (it == cfg.commands.end())
        throw std::invalid_argument(std::string("config: missing \"") + name + "\" block");
    return *it;
}

inline json skeleton(const char* command, const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["config"] = to_json(cfg);
    return j;
}

inline std::string write_json(const std::filesystem::path& out_dir, const std::string& name,
                              const json& doc) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path file = out_dir / name;
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + file.string());
    os << doc.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed on " + file.string());
    return file.string();
}

inline std::string write_text(const std::filesystem::path& out_dir, const std::string& name,
                              const std::string& text) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path file = out_dir / name;
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + file.string());
    os << text;
    if (!os) throw std::runtime_error("write failed on " + file.string());
    return file.string();
}

inline std::size_t jump_step_count(const GridPath& p) {
    std::size_t c = 0;
    for (std::size_t k = 1; k <= p.grid().n_steps; ++k)
        if (p.has_jump(k)) ++c;
    return c;
}

// Least-squares slope of log(y) against log(1/n): the fitted convergence
// order of a residual ladder.
inline double fitted_order(const std::vector<std::size_t>& ns, const std::vector<double>& ys) {
    const std::size_t m = ns.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = -std::log(static_cast<double>(ns[i]));
        const double y = std::log(ys[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dm = static_cast<double>(m);
    return (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
}

}  // namespace detail

// Writes one CSV per path (capped by max_files) plus a manifest covering
// every path: derived seed, jump-step count, terminal value.  Paths beyond
// the file cap are still simulated and accounted in the manifest.
inline CommandReport cmd_simulate(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir) {
    const json& block = detail::command_block(cfg, "simulate");
    const std::string model_name = cfg_detail::get<std::string>(block, "model", "simulate");
    const std::size_t n_paths = cfg_detail::get_or<std::size_t>(block, "n_paths", 100);
    const std::size_t max_files = cfg_detail::get_or<std::size_t>(block, "max_files", 64);
    if (n_paths == 0) throw std::invalid_argument("simulate: n_paths must be positive");
    const ModelSpec& model = find_model(cfg, model_name);
    const std::vector<double> x0(dim(model), cfg.x0);

    struct Row {
        std::uint64_t seed;
        std::size_t n_jumps;
        double terminal;
    };
    std::vector<Row> rows(n_paths);
    parallel_for(n_paths, [&](std::size_t p) {
        const std::uint64_t s = derive_seed(cfg.seed, stream::simulate, p);
        Rng rng(s);
        const GridPath path = simulate(model, cfg.grid, x0, rng);
        rows[p] = {s, detail::jump_step_count(path), path.value(cfg.grid.n_steps, 0)};
    });

    CommandReport rep;
    rep.command = "simulate";
    const std::size_t n_files = std::min(n_paths, max_files);
    for (std::size_t p = 0; p < n_files; ++p) {
        Rng rng(rows[p].seed);
        const GridPath path = simulate(model, cfg.grid, x0, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "path_%05zu.csv", p);
        std::ostringstream ss;
        write_path_csv(ss, path);
        rep.files.push_back(detail::write_text(out_dir, name, ss.str()));
    }

    double jump_sum = 0.0, term_sum = 0.0;
    json manifest_rows = json::array();
    for (std::size_t p = 0; p < n_paths; ++p) {
        jump_sum += static_cast<double>(rows[p].n_jumps);
        term_sum += rows[p].terminal;
        manifest_rows.push_back({{"seed", rows[p].seed},
                                 {"n_jump_steps", rows[p].n_jumps},
                                 {"terminal", rows[p].terminal}});
    }

    json doc = detail::skeleton("simulate", cfg);
    doc["model"] = model_name;
    doc["n_paths"] = n_paths;
    doc["files_written"] = n_files;
    doc["paths"] = std::move(manifest_rows);
    doc["summary"] = {{"mean_jump_steps", jump_sum / static_cast<double>(n_paths)},
                      {"mean_terminal", term_sum / static_cast<double>(n_paths)}};
    rep.doc = doc;
    rep.files.push_back(detail::write_json(out_dir, "manifest.json", doc));
    return rep;
}

// Mean absolute decomposition residual over a ladder of step counts, with
// the fitted order.  Residuals at machine scale short-circuit the order fit:
// a flat noise floor has no slope worth fitting.
inline CommandReport cmd_check_ito(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
    const json& block = detail::command_block(cfg, "check_ito");
    const std::string model_name = cfg_detail::get<std::string>(block, "model", "check_ito");
    const std::string fn_name = cfg_detail::get<std::string>(block, "functional", "check_ito");
    const std::size_t n_paths = cfg_detail::get_or<std::size_t>(block, "n_paths", 50);
    const std::vector<std::size_t> ladder = cfg_detail::get_or<std::vector<std::size_t>>(
        block, "ladder", {50, 100, 200, 400});
    const double min_order = cfg_detail::get_or(block, "min_order", 0.8);
    const double exact_floor = cfg_detail::get_or(block, "exact_floor", 1e-12);
    if (n_paths == 0 || ladder.size() < 2)
        throw std::invalid_argument("check_ito: need paths and at least two ladder rungs");
    const ModelSpec& model = find_model(cfg, model_name);
    const FunctionalSpec& F = find_functional(cfg, fn_name);
    const std::vector<double> x0(dim(model), cfg.x0);

    std::vector<double> means(ladder.size());
    json table = json::array();
    std::string csv = "n_steps,dt,mean_abs_residual\n";
    for (std::size_t r = 0; r < ladder.size(); ++r) {
        const TimeGrid grid{cfg.grid.horizon, ladder[r]};
        const std::uint64_t rung_seed = derive_seed(cfg.seed, stream::scenario, ladder[r]);
        std::vector<double> abs_res(n_paths);
        parallel_for(n_paths, [&](std::size_t p) {
            Rng rng(derive_seed(rung_seed, stream::simulate, p));
            const GridPath path = simulate(model, grid, x0, rng);
            abs_res[p] = std::abs(ito_decompose(F, path).residual());
        });
        double s = 0.0;
        for (double v : abs_res) s += v;
        means[r] = s / static_cast<double>(n_paths);
        table.push_back(
            {{"n_steps", ladder[r]}, {"dt", grid.dt()}, {"mean_abs_residual", means[r]}});
        csv += std::to_string(ladder[r]) + "," + fmt_g17(grid.dt()) + "," + fmt_g17(means[r]) +
               "\n";
    }

    const bool exact = *std::max_element(means.begin(), means.end()) <= exact_floor;
    const double order = exact ? 0.0 : detail::fitted_order(ladder, means);

    json doc = detail::skeleton("check_ito", cfg);
    doc["model"] = model_name;
    doc["functional"] = fn_name;
    doc["n_paths"] = n_paths;
    doc["table"] = std::move(table);
    doc["exact"] = exact;
    if (!exact) doc["fitted_order"] = order;

    CheckOutcome check;
    check.name = "ito residual order";
    check.pass = exact || order >= min_order;
    check.detail = exact ? "residuals at machine scale"
                         : "fitted order " + fmt_g17(order) + " vs minimum " + fmt_g17(min_order);
    doc["pass"] = check.pass;

    CommandReport rep;
    rep.command = "check_ito";
    rep.doc = doc;
    rep.files.push_back(detail::write_json(out_dir, "check_ito.json", doc));
    rep.files.push_back(detail::write_text(out_dir, "check_ito.csv", csv));
    rep.checks.push_back(std::move(check));
    return rep;
}

// Backward-equation residual profile of a conditional valuation along
// sampled paths.  path_model and generator_model default to the valuation
// model; overriding either turns the command into a mismatch control.
inline CommandReport cmd_check_kbe(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
    const json& block = detail::command_block(cfg, "check_kbe");
    const std::string model_name = cfg_detail::get<std::string>(block, "model", "check_kbe");
    const std::string fn_name = cfg_detail::get<std::string>(block, "functional", "check_kbe");
    const std::string path_name = cfg_detail::get_or(block, "path_model", model_name);
    const std::string gen_name = cfg_detail::get_or(block, "generator_model", model_name);
    const std::size_t n_probes = cfg_detail::get_or<std::size_t>(block, "n_probes", 200);
    const std::size_t n_valuation = cfg_detail::get_or<std::size_t>(block, "n_valuation", 4000);
    const bool include_drift = cfg_detail::get_or(block, "include_drift", true);
    const double se_mult = cfg_detail::get_or(block, "se_mult", 3.0);
    const double bias_mult = cfg_detail::get_or(block, "bias_mult", 10.0);
    const double pass_rate = cfg_detail::get_or(block, "pass_rate", 0.95);
    if (n_probes == 0 || n_valuation == 0)
        throw std::invalid_argument("check_kbe: budgets must be positive");

    const EstimatedValuation G(find_model(cfg, model_name), cfg.grid, find_functional(cfg, fn_name),
                               n_valuation, cfg.seed);
    const ResidualProfile prof =
        kbe_residual_profile(G, find_model(cfg, path_name), find_model(cfg, gen_name), cfg.x0,
                             n_probes, cfg.seed, DerivativeConfig{}, include_drift, se_mult,
                             bias_mult);

    json points = json::array();
    std::string csv = "index,time,residual,se,tol,pass\n";
    for (const auto& pt : prof.points) {
        points.push_back({{"index", pt.index},
                          {"time", pt.time},
                          {"residual", pt.residual},
                          {"se", pt.se},
                          {"tol", pt.tol},
                          {"pass", pt.pass}});
        csv += std::to_string(pt.index) + "," + fmt_g17(pt.time) + "," + fmt_g17(pt.residual) +
               "," + fmt_g17(pt.se) + "," + fmt_g17(pt.tol) + "," + (pt.pass ? "1" : "0") + "\n";
    }

    json doc = detail::skeleton("check_kbe", cfg);
    doc["model"] = model_name;
    doc["path_model"] = path_name;
    doc["generator_model"] = gen_name;
    doc["functional"] = fn_name;
    doc["include_drift"] = include_drift;
    doc["points"] = std::move(points);
    doc["pass_rate"] = prof.pass_rate();
    doc["max_ratio"] = prof.max_ratio;

    CheckOutcome check;
    check.name = "backward residual gate";
    check.pass = prof.pass_rate() >= pass_rate;
    check.detail = "pass rate " + fmt_g17(prof.pass_rate()) + " vs gate " + fmt_g17(pass_rate);
    doc["pass"] = check.pass;

    CommandReport rep;
    rep.command = "check_kbe";
    rep.doc = doc;
    rep.files.push_back(detail::write_json(out_dir, "check_kbe.json", doc));
    rep.files.push_back(detail::write_text(out_dir, "check_kbe.csv", csv));
    rep.checks.push_back(std::move(check));
    return rep;
}

namespace detail {

inline CompareBudgets budgets_from_json(const json& block) {
    CompareBudgets b;
    if (const auto it = block.find("budgets"); it != block.end()) {
        b.n_outer = cfg_detail::get_or(*it, "n_outer", b.n_outer);
        b.n_valuation = cfg_detail::get_or(*it, "n_valuation", b.n_valuation);
        b.n_hyp_probes = cfg_detail::get_or(*it, "n_hyp_probes", b.n_hyp_probes);
        b.shape_points = cfg_detail::get_or(*it, "shape_points", b.shape_points);
        b.shape_probes = cfg_detail::get_or(*it, "shape_probes", b.shape_probes);
    }
    return b;
}

inline CompareTolerances tolerances_from_json(const json& block) {
    CompareTolerances t;
    if (const auto it = block.find("tolerances"); it != block.end()) {
        t.order_band = cfg_detail::get_or(*it, "order_band", t.order_band);
        t.se_mult = cfg_detail::get_or(*it, "se_mult", t.se_mult);
        t.bias_mult = cfg_detail::get_or(*it, "bias_mult", t.bias_mult);
        t.kbe_pass_rate = cfg_detail::get_or(*it, "kbe_pass_rate", t.kbe_pass_rate);
        t.probe_time_cap = cfg_detail::get_or(*it, "probe_time_cap", t.probe_time_cap);
        t.shape_range = cfg_detail::get_or(*it, "shape_range", t.shape_range);
        t.shape_step = cfg_detail::get_or(*it, "shape_step", t.shape_step);
    }
    return t;
}

}  // namespace detail

// Full ordering study: hypothesis checks plus the independent two-sided
// expectation estimate.  Every hypothesis row becomes a verdict; the
// conclusion row passes iff the Monte Carlo margin respects the claimed
// direction.
inline CommandReport cmd_compare(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir) {
    const json& block = detail::command_block(cfg, "compare");
    ComparisonScenario sc;
    sc.model_x = find_model(cfg, cfg_detail::get<std::string>(block, "model_x", "compare"));
    sc.model_y = find_model(cfg, cfg_detail::get<std::string>(block, "model_y", "compare"));
    sc.payoff = find_functional(cfg, cfg_detail::get<std::string>(block, "functional", "compare"));
    sc.selector = selector_from_name(cfg_detail::get<std::string>(block, "selector", "compare"));
    sc.reversed = cfg_detail::get_or(block, "reversed", false);
    sc.grid = cfg.grid;
    sc.x0 = cfg.x0;
    sc.seed = cfg.seed;
    sc.budgets = detail::budgets_from_json(block);
    sc.tol = detail::tolerances_from_json(block);

    const OrderReport order = run_comparison(sc);

    json hyp = json::array();
    std::string csv = "hypothesis,checked,passed,worst_slack,band,n_probes\n";
    CommandReport rep;
    rep.command = "compare";
    for (const auto& h : order.hypotheses) {
        hyp.push_back({{"name", h.name},
                       {"checked", h.checked},
                       {"passed", h.passed},
                       {"worst_slack", h.worst_slack},
                       {"band", h.band},
                       {"n_probes", h.n_probes},
                       {"note", h.note}});
        csv += "\"" + h.name + "\"," + (h.checked ? "1" : "0") + "," + (h.passed ? "1" : "0") +
               "," + fmt_g17(h.worst_slack) + "," + fmt_g17(h.band) + "," +
               std::to_string(h.n_probes) + "\n";
        if (h.checked)
            rep.checks.push_back({"hypothesis: " + h.name, h.passed,
                                  "worst slack " + fmt_g17(h.worst_slack) + " at band " +
                                      fmt_g17(h.band)});
    }

    json doc = detail::skeleton("compare", cfg);
    doc["selector"] = selector_name(order.selector);
    doc["reversed"] = order.reversed;
    doc["hypotheses"] = std::move(hyp);
    doc["conclusion"] = {{"e_x", order.conclusion.e_x},     {"e_y", order.conclusion.e_y},
                         {"se_x", order.conclusion.se_x},   {"se_y", order.conclusion.se_y},
                         {"margin", order.conclusion.margin}, {"verdict", order.conclusion.verdict}};
    rep.checks.push_back({"conclusion", order.conclusion.verdict == "ordered",
                          "verdict " + order.conclusion.verdict + ", margin " +
                              fmt_g17(order.conclusion.margin)});
    doc["pass"] = rep.all_pass();

    rep.doc = doc;
    rep.files.push_back(detail::write_json(out_dir, "compare.json", doc));
    rep.files.push_back(detail::write_text(out_dir, "compare.csv", csv));
    return rep;
}

// Pathwise derivative report of a functional at sampled stopped paths, with
// an optional vertical shape probe.  Without a property the command is
// informational and always exits clean.
inline CommandReport cmd_probe(const ExperimentConfig& cfg,
                               const std::filesystem::path& out_dir) {
    const json& block = detail::command_block(cfg, "probe");
    const std::string model_name = cfg_detail::get<std::string>(block, "model", "probe");
    const std::string fn_name = cfg_detail::get<std::string>(block, "functional", "probe");
    const std::size_t n_paths = cfg_detail::get_or<std::size_t>(block, "n_paths", 20);
    const std::string property = cfg_detail::get_or<std::string>(block, "property", "");
    if (n_paths == 0) throw std::invalid_argument("probe: n_paths must be positive");
    const ModelSpec& model = find_model(cfg, model_name);
    const FunctionalSpec& F = find_functional(cfg, fn_name);
    const std::vector<double> x0(dim(model), cfg.x0);
    const std::size_t n = cfg.grid.n_steps;

    VerticalProperty prop = VerticalProperty::convex;
    bool with_property = !property.empty();
    if (property == "monotone")
        prop = VerticalProperty::monotone;
    else if (property == "convex")
        prop = VerticalProperty::convex;
    else if (property == "directionally_convex")
        prop = VerticalProperty::directionally_convex;
    else if (with_property)
        throw std::invalid_argument("probe: unknown property \"" + property + "\"");

    ProbeConfig pc;
    pc.n_probes = cfg_detail::get_or<std::size_t>(block, "n_probes", pc.n_probes);
    pc.range = cfg_detail::get_or(block, "range", pc.range);
    pc.step = cfg_detail::get_or(block, "step", pc.step);

    const DerivativeConfig dcfg;
    auto f = path_fn(F);

    struct Row {
        std::size_t stop_index;
        double stop_time, grad, hess, horizontal;
        double slack = 0.0;
        bool slack_pass = true;
    };
    std::vector<Row> rows(n_paths);
    parallel_for(n_paths, [&](std::size_t p) {
        Rng rng(derive_seed(cfg.seed, stream::probes, p));
        const GridPath path = simulate(model, cfg.grid, x0, rng);
        std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
        if (k > n - 1) k = n - 1;
        const StoppedPath sp = stop(path, k);
        Row& row = rows[p];
        row.stop_index = k;
        row.stop_time = sp.stop_time();
        row.grad = vertical_gradient(f, sp, dcfg)[0];
        row.hess = vertical_hessian(f, sp, dcfg)[0];
        row.horizontal = horizontal_derivative(f, sp, dcfg);
        if (with_property) {
            Rng prng(derive_seed(cfg.seed, stream::scenario, p));
            const ProbeReport pr = probe_vertical_property(f, sp, prop, pc, prng);
            row.slack = pr.min_slack;
            row.slack_pass = pr.passed();
        }
    });

    json points = json::array();
    std::string csv = "index,stop_index,stop_time,grad,hess,horizontal";
    if (with_property) csv += ",property_slack";
    csv += "\n";
    bool all_slack = true;
    double worst = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        const Row& row = rows[p];
        json pt{{"index", p},
                {"stop_index", row.stop_index},
                {"stop_time", row.stop_time},
                {"vertical_gradient", row.grad},
                {"vertical_hessian", row.hess},
                {"horizontal_derivative", row.horizontal}};
        csv += std::to_string(p) + "," + std::to_string(row.stop_index) + "," +
               fmt_g17(row.stop_time) + "," + fmt_g17(row.grad) + "," + fmt_g17(row.hess) + "," +
               fmt_g17(row.horizontal);
        if (with_property) {
            pt["property_slack"] = row.slack;
            csv += "," + fmt_g17(row.slack);
            if (p == 0 || row.slack < worst) worst = row.slack;
            all_slack = all_slack && row.slack_pass;
        }
        csv += "\n";
        points.push_back(std::move(pt));
    }

    json doc = detail::skeleton("probe", cfg);
    doc["model"] = model_name;
    doc["functional"] = fn_name;
    doc["points"] = std::move(points);

    CommandReport rep;
    rep.command = "probe";
    if (with_property) {
        doc["property"] = property;
        doc["worst_slack"] = worst;
        rep.checks.push_back({"vertical property: " + property, all_slack,
                              "worst slack " + fmt_g17(worst) + " over " +
                                  std::to_string(n_paths) + " paths"});
        doc["pass"] = all_slack;
    }
    rep.doc = doc;
    rep.files.push_back(detail::write_json(out_dir, "probe.json", doc));
    rep.files.push_back(detail::write_text(out_dir, "probe.csv", csv));
    return rep;
}

}  // namespace fic::cli
