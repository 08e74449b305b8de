#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fic/functionals.hpp"
#include "fic/grid.hpp"
#include "fic/models.hpp"
#include "fic/scalar_functions.hpp"

namespace fic {

using json = nlohmann::ordered_json;

// Experiment file: one grid, one start value, one root seed, named model and
// functional blocks, and per-command parameter blocks kept verbatim.  The
// serializer emits a canonical key order, so parse -> serialize -> parse is
// the identity and serialized forms can be compared byte-wise.
struct ExperimentConfig {
    int schema_version = 1;
    TimeGrid grid{1.0, 100};
    double x0 = 1.0;
    std::uint64_t seed = 1;
    std::vector<std::pair<std::string, ModelSpec>> models;
    std::vector<std::pair<std::string, FunctionalSpec>> functionals;
    json commands = json::object();
};

namespace cfg_detail {

[[noreturn]] inline void bad(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

inline const json& field(const json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) bad(where + ": missing field \"" + key + "\"");
    return *it;
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return field(j, key, where).get<T>();
    } catch (const json::exception& e) {
        bad(where + ": field \"" + key + "\": " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : it->get<T>();
}

}  // namespace cfg_detail

// --- scalar functions -----------------------------------------------------

inline const char* scalar_kind_name(ScalarFn::Kind k) {
    switch (k) {
        case ScalarFn::Kind::identity: return "identity";
        case ScalarFn::Kind::square: return "square";
        case ScalarFn::Kind::expm1: return "expm1";
        case ScalarFn::Kind::exp_clipped: return "exp_clipped";
        case ScalarFn::Kind::smooth_call: return "smooth_call";
        case ScalarFn::Kind::logistic: return "logistic";
        case ScalarFn::Kind::gauss_bump: return "gauss_bump";
    }
    throw std::logic_error("scalar_kind_name: bad kind");
}

inline json to_json(const ScalarFn& f) {
    return {{"kind", scalar_kind_name(f.kind)}, {"p1", f.p1}, {"p2", f.p2}};
}

inline ScalarFn scalar_fn_from_json(const json& j) {
    const std::string kind = cfg_detail::get<std::string>(j, "kind", "scalar function");
    ScalarFn f;
    f.p1 = cfg_detail::get_or(j, "p1", 0.0);
    f.p2 = cfg_detail::get_or(j, "p2", 1.0);
    for (ScalarFn::Kind k :
         {ScalarFn::Kind::identity, ScalarFn::Kind::square, ScalarFn::Kind::expm1,
          ScalarFn::Kind::exp_clipped, ScalarFn::Kind::smooth_call, ScalarFn::Kind::logistic,
          ScalarFn::Kind::gauss_bump})
        if (kind == scalar_kind_name(k)) {
            f.kind = k;
            return f;
        }
    cfg_detail::bad("unknown scalar function kind \"" + kind + "\"");
}

inline const char* weight_kind_name(WeightFn::Kind k) {
    switch (k) {
        case WeightFn::Kind::constant: return "constant";
        case WeightFn::Kind::exp_decay: return "exp_decay";
        case WeightFn::Kind::cosine: return "cosine";
    }
    throw std::logic_error("weight_kind_name: bad kind");
}

inline json to_json(const WeightFn& w) {
    return {{"kind", weight_kind_name(w.kind)}, {"param", w.param}};
}

inline WeightFn weight_fn_from_json(const json& j) {
    const std::string kind = cfg_detail::get<std::string>(j, "kind", "time weight");
    WeightFn w;
    w.param = cfg_detail::get_or(j, "param", 1.0);
    for (WeightFn::Kind k :
         {WeightFn::Kind::constant, WeightFn::Kind::exp_decay, WeightFn::Kind::cosine})
        if (kind == weight_kind_name(k)) {
            w.kind = k;
            return w;
        }
    cfg_detail::bad("unknown time weight kind \"" + kind + "\"");
}

// --- coefficients ---------------------------------------------------------

inline const char* coefficient_kind_name(CoefficientSpec::Kind k) {
    switch (k) {
        case CoefficientSpec::Kind::constant: return "constant";
        case CoefficientSpec::Kind::affine_value: return "affine_value";
        case CoefficientSpec::Kind::affine_time: return "affine_time";
        case CoefficientSpec::Kind::sin_value: return "sin_value";
        case CoefficientSpec::Kind::sin_mean: return "sin_mean";
    }
    throw std::logic_error("coefficient_kind_name: bad kind");
}

inline json to_json(const CoefficientSpec& c) {
    return {{"kind", coefficient_kind_name(c.kind)}, {"a", c.a}, {"b", c.b}, {"omega", c.omega}};
}

inline CoefficientSpec coefficient_from_json(const json& j) {
    const std::string kind = cfg_detail::get<std::string>(j, "kind", "coefficient");
    CoefficientSpec c;
    c.a = cfg_detail::get_or(j, "a", 0.0);
    c.b = cfg_detail::get_or(j, "b", 0.0);
    c.omega = cfg_detail::get_or(j, "omega", 1.0);
    for (CoefficientSpec::Kind k :
         {CoefficientSpec::Kind::constant, CoefficientSpec::Kind::affine_value,
          CoefficientSpec::Kind::affine_time, CoefficientSpec::Kind::sin_value,
          CoefficientSpec::Kind::sin_mean})
        if (kind == coefficient_kind_name(k)) {
            c.kind = k;
            return c;
        }
    cfg_detail::bad("unknown coefficient kind \"" + kind + "\"");
}

// --- functionals ----------------------------------------------------------

inline json to_json(const MonitorWeight& w) {
    const char* kind = w.kind == MonitorWeight::Kind::unit
                           ? "unit"
                           : (w.kind == MonitorWeight::Kind::mean ? "mean" : "product");
    json j{{"kind", kind}};
    if (w.kind != MonitorWeight::Kind::unit) j["fn"] = to_json(w.fn);
    return j;
}

inline MonitorWeight monitor_weight_from_json(const json& j) {
    const std::string kind = cfg_detail::get<std::string>(j, "kind", "monitor weight");
    if (kind == "unit") return MonitorWeight::unit();
    const ScalarFn fn = scalar_fn_from_json(cfg_detail::field(j, "fn", "monitor weight"));
    if (kind == "mean") return MonitorWeight::mean(fn);
    if (kind == "product") return MonitorWeight::product(fn);
    cfg_detail::bad("unknown monitor weight kind \"" + kind + "\"");
}

inline json to_json(const FunctionalSpec& F) {
    json j = std::visit(
        [](const auto& body) -> json {
            using B = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<B, IntegralOfFunction>)
                return {{"type", "integral_of_function"},
                        {"g", to_json(body.g)},
                        {"rho", to_json(body.rho)}};
            else if constexpr (std::is_same_v<B, DiscreteMonitor>)
                return {{"type", "discrete_monitor"},
                        {"times", body.times},
                        {"h", to_json(body.h)},
                        {"weight", to_json(body.weight)}};
            else if constexpr (std::is_same_v<B, AsianPayoff>)
                return {{"type", "asian"}, {"profile", to_json(body.profile)}};
            else if constexpr (std::is_same_v<B, TerminalPayoff>)
                return {{"type", "terminal"}, {"profile", to_json(body.profile)}};
            else
                return {{"type", "integral"}, {"profile", to_json(body.profile)}};
        },
        F.body);
    if (!F.coord_weights.empty()) j["coord_weights"] = F.coord_weights;
    return j;
}

inline FunctionalSpec functional_from_json(const json& j) {
    const std::string type = cfg_detail::get<std::string>(j, "type", "functional");
    FunctionalSpec F;
    if (type == "integral_of_function") {
        IntegralOfFunction b;
        b.g = scalar_fn_from_json(cfg_detail::field(j, "g", "integral_of_function"));
        if (j.contains("rho")) b.rho = weight_fn_from_json(j.at("rho"));
        F.body = b;
    } else if (type == "discrete_monitor") {
        DiscreteMonitor b;
        b.times = cfg_detail::get<std::vector<double>>(j, "times", "discrete_monitor");
        b.h = scalar_fn_from_json(cfg_detail::field(j, "h", "discrete_monitor"));
        if (j.contains("weight")) b.weight = monitor_weight_from_json(j.at("weight"));
        F.body = b;
    } else if (type == "asian") {
        F.body = AsianPayoff{scalar_fn_from_json(cfg_detail::field(j, "profile", "asian"))};
    } else if (type == "terminal") {
        F.body = TerminalPayoff{scalar_fn_from_json(cfg_detail::field(j, "profile", "terminal"))};
    } else if (type == "integral") {
        F.body = IntegralPayoff{scalar_fn_from_json(cfg_detail::field(j, "profile", "integral"))};
    } else {
        cfg_detail::bad("unknown functional type \"" + type + "\"");
    }
    F.coord_weights = cfg_detail::get_or(j, "coord_weights", std::vector<double>{});
    validate(F);
    return F;
}

// --- models ---------------------------------------------------------------

inline json to_json(const JumpAtom& a) { return {{"x", a.x}, {"rate", a.rate}}; }

inline JumpAtom jump_atom_from_json(const json& j) {
    JumpAtom a;
    a.x = cfg_detail::get<std::vector<double>>(j, "x", "jump atom");
    a.rate = cfg_detail::get<double>(j, "rate", "jump atom");
    return a;
}

inline json to_json(const ModelSpec& m) {
    return std::visit(
        [](const auto& model) -> json {
            using M = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<M, BrownianModel>)
                return {{"type", "brownian"}, {"drift", model.drift}, {"sigma", model.sigma}};
            else if constexpr (std::is_same_v<M, CompoundPoissonModel>) {
                json atoms = json::array();
                for (const auto& a : model.atoms) atoms.push_back(to_json(a));
                return {{"type", "compound_poisson"}, {"drift", model.drift},
                        {"atoms", std::move(atoms)}};
            } else if constexpr (std::is_same_v<M, LevyJumpDiffusion>) {
                json atoms = json::array();
                for (const auto& a : model.atoms) atoms.push_back(to_json(a));
                return {{"type", "levy_jump_diffusion"},
                        {"drift", model.drift},
                        {"sigma", model.sigma},
                        {"atoms", std::move(atoms)}};
            } else {
                json atoms = json::array();
                for (const auto& a : model.atoms)
                    atoms.push_back(json{{"x", a.x}, {"rate", to_json(a.rate)}});
                return {{"type", "ito_semimartingale"},
                        {"beta", to_json(model.beta)},
                        {"delta", to_json(model.delta)},
                        {"atoms", std::move(atoms)}};
            }
        },
        m);
}

inline ModelSpec model_from_json(const json& j) {
    const std::string type = cfg_detail::get<std::string>(j, "type", "model");
    ModelSpec m;
    if (type == "brownian") {
        BrownianModel b;
        b.drift = cfg_detail::get<std::vector<double>>(j, "drift", "brownian");
        b.sigma = cfg_detail::get<std::vector<double>>(j, "sigma", "brownian");
        m = b;
    } else if (type == "compound_poisson") {
        CompoundPoissonModel c;
        c.drift = cfg_detail::get<std::vector<double>>(j, "drift", "compound_poisson");
        for (const auto& a : cfg_detail::field(j, "atoms", "compound_poisson"))
            c.atoms.push_back(jump_atom_from_json(a));
        m = c;
    } else if (type == "levy_jump_diffusion") {
        LevyJumpDiffusion l;
        l.drift = cfg_detail::get<std::vector<double>>(j, "drift", "levy_jump_diffusion");
        l.sigma = cfg_detail::get<std::vector<double>>(j, "sigma", "levy_jump_diffusion");
        for (const auto& a : cfg_detail::field(j, "atoms", "levy_jump_diffusion"))
            l.atoms.push_back(jump_atom_from_json(a));
        m = l;
    } else if (type == "ito_semimartingale") {
        ItoSemimartingale s;
        s.beta = coefficient_from_json(cfg_detail::field(j, "beta", "ito_semimartingale"));
        s.delta = coefficient_from_json(cfg_detail::field(j, "delta", "ito_semimartingale"));
        for (const auto& a : cfg_detail::field(j, "atoms", "ito_semimartingale")) {
            PredictableAtom pa;
            pa.x = cfg_detail::get<double>(a, "x", "predictable atom");
            pa.rate = coefficient_from_json(cfg_detail::field(a, "rate", "predictable atom"));
            s.atoms.push_back(pa);
        }
        m = s;
    } else {
        cfg_detail::bad("unknown model type \"" + type + "\"");
    }
    validate(m);
    return m;
}

// --- experiment file ------------------------------------------------------

inline json to_json(const TimeGrid& g) {
    return {{"horizon", g.horizon}, {"n_steps", g.n_steps}};
}

inline TimeGrid grid_from_json(const json& j) {
    const double horizon = cfg_detail::get<double>(j, "horizon", "grid");
    const std::size_t n = cfg_detail::get<std::size_t>(j, "n_steps", "grid");
    if (horizon <= 0.0 || n == 0) cfg_detail::bad("grid: horizon and n_steps must be positive");
    return TimeGrid{horizon, n};
}

inline json to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["grid"] = to_json(cfg.grid);
    j["x0"] = cfg.x0;
    j["seed"] = cfg.seed;
    json models = json::object();
    for (const auto& [name, m] : cfg.models) models[name] = to_json(m);
    j["models"] = std::move(models);
    json functionals = json::object();
    for (const auto& [name, f] : cfg.functionals) functionals[name] = to_json(f);
    j["functionals"] = std::move(functionals);
    for (const auto& [key, block] : cfg.commands.items()) j[key] = block;
    return j;
}

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) cfg_detail::bad("top level must be an object");
    ExperimentConfig cfg;
    cfg.schema_version = cfg_detail::get_or(j, "schema_version", 1);
    if (cfg.schema_version != 1)
        cfg_detail::bad("unsupported schema_version " + std::to_string(cfg.schema_version));
    cfg.grid = grid_from_json(cfg_detail::field(j, "grid", "experiment"));
    cfg.x0 = cfg_detail::get_or(j, "x0", 1.0);
    cfg.seed = cfg_detail::get_or<std::uint64_t>(j, "seed", 1);
    if (j.contains("models"))
        for (const auto& [name, block] : j.at("models").items())
            cfg.models.emplace_back(name, model_from_json(block));
    if (j.contains("functionals"))
        for (const auto& [name, block] : j.at("functionals").items())
            cfg.functionals.emplace_back(name, functional_from_json(block));
    for (const auto& [key, block] : j.items()) {
        if (key == "schema_version" || key == "grid" || key == "x0" || key == "seed" ||
            key == "models" || key == "functionals")
            continue;
        cfg.commands[key] = block;
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        cfg_detail::bad(std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config_file(const std::string& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("config: cannot open " + file);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

inline const ModelSpec& find_model(const ExperimentConfig& cfg, const std::string& name) {
    for (const auto& [n, m] : cfg.models)
        if (n == name) return m;
    cfg_detail::bad("model \"" + name + "\" is not defined");
}

inline const FunctionalSpec& find_functional(const ExperimentConfig& cfg,
                                             const std::string& name) {
    for (const auto& [n, f] : cfg.functionals)
        if (n == name) return f;
    cfg_detail::bad("functional \"" + name + "\" is not defined");
}

}  // namespace fic
