#include "rlhedge/eval/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace rlhedge::eval {

using nlohmann::json;

ConfigError::ConfigError(Kind kind, std::string key, const std::string& message)
    : ValidationError(message), kind_(kind), key_(std::move(key)) {}

std::string ConfigError::kind_name() const {
    switch (kind_) {
        case Kind::missing_key: return "missing_key";
        case Kind::unknown_key: return "unknown_key";
        case Kind::invalid_value: return "invalid_value";
        case Kind::unreadable: return "unreadable";
    }
    return "invalid_value";
}

namespace {

/// Object view that records which keys were read.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(ConfigError::Kind::invalid_value, path_, "'" + path_ + "' must be an object");
    }

    std::string key_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        if (!j_.contains(k))
            throw ConfigError(ConfigError::Kind::missing_key, key_path(k), "missing required key '" + key_path(k) + "'");
        seen_.insert(k);
        return j_.at(k);
    }

    template <typename T>
    T req(const std::string& k) {
        return convert<T>(raw(k), k);
    }

    template <typename T>
    T opt(const std::string& k, T fallback) {
        if (!j_.contains(k)) return fallback;
        return req<T>(k);
    }

    Obj child(const std::string& k) { return Obj(raw(k), key_path(k)); }
    Obj child_or_empty(const std::string& k) {
        static const json empty = json::object();
        if (!j_.contains(k)) return Obj(empty, key_path(k));
        return child(k);
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key()))
                throw ConfigError(ConfigError::Kind::unknown_key, key_path(it.key()),
                                  "unknown key '" + key_path(it.key()) + "'");
        }
    }

private:
    template <typename T>
    T convert(const json& v, const std::string& k) const {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0))
                    throw std::invalid_argument("expected a non-negative integer");
            }
            return v.get<T>();
        } catch (const std::exception& e) {
            throw ConfigError(ConfigError::Kind::invalid_value, key_path(k),
                              "invalid value for '" + key_path(k) + "': " + e.what());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

sim::ProcessSpec parse_process(Obj& o, const std::string& model) {
    if (model == "gbm") {
        sim::GbmSpec g;
        g.s0 = o.opt("s0", 100.0);
        g.mu = o.opt("mu", 0.05);
        g.sigma = o.opt("sigma", 0.2);
        return g;
    }
    if (model == "sabr") {
        sim::SabrSpec s;
        s.s0 = o.opt("s0", 100.0);
        s.mu = o.opt("mu", 0.05);
        s.sigma0 = o.opt("sigma0", 0.2);
        s.vol_of_vol = o.req<double>("vol_of_vol");
        s.rho = o.req<double>("rho");
        return s;
    }
    throw ConfigError(ConfigError::Kind::invalid_value, o.key_path("model"),
                      "unknown market model '" + model + "' (expected gbm, sabr or mixture)");
}

sim::MarketModel parse_market(Obj o) {
    const auto model = o.req<std::string>("model");
    sim::MarketModel out;
    if (model == "mixture") {
        sim::MixtureSpec mix;
        const json& list = o.raw("components");
        if (!list.is_array() || list.empty())
            throw ConfigError(ConfigError::Kind::invalid_value, o.key_path("components"),
                              "'" + o.key_path("components") + "' must be a nonempty list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Obj c(list[i], o.key_path("components[" + std::to_string(i) + "]"));
            sim::MixtureComponent comp;
            comp.weight = c.req<double>("weight");
            comp.model = parse_process(c, c.req<std::string>("model"));
            c.done();
            mix.components.push_back(comp);
        }
        out = mix;
    } else {
        const auto p = parse_process(o, model);
        if (const auto* g = std::get_if<sim::GbmSpec>(&p)) out = *g;
        else out = std::get<sim::SabrSpec>(p);
    }
    o.done();
    return out;
}

json process_json(const sim::ProcessSpec& p) {
    if (const auto* g = std::get_if<sim::GbmSpec>(&p)) return {{"model", "gbm"}, {"s0", g->s0}, {"mu", g->mu}, {"sigma", g->sigma}};
    const auto& s = std::get<sim::SabrSpec>(p);
    return {{"model", "sabr"}, {"s0", s.s0},        {"mu", s.mu},
            {"sigma0", s.sigma0}, {"vol_of_vol", s.vol_of_vol}, {"rho", s.rho}};
}

json market_json(const sim::MarketModel& m) {
    if (const auto* g = std::get_if<sim::GbmSpec>(&m)) return process_json(*g);
    if (const auto* s = std::get_if<sim::SabrSpec>(&m)) return process_json(*s);
    json comps = json::array();
    for (const auto& c : std::get<sim::MixtureSpec>(m).components) {
        json j = process_json(c.model);
        j["weight"] = c.weight;
        comps.push_back(j);
    }
    return {{"model", "mixture"}, {"components", comps}};
}

template <typename F>
void checked(const std::string& key, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError(ConfigError::Kind::invalid_value, key, e.what());
    }
}

}  // namespace

Frequency parse_frequency(const std::string& label) {
    if (label == "weekly") return {label, 5.0};
    if (label == "daily") return {label, 1.0};
    const auto pos = label.find("day");
    if (pos != std::string::npos && pos > 0 && pos + 3 == label.size()) {
        try {
            std::size_t used = 0;
            const int n = std::stoi(label.substr(0, pos), &used);
            if (used == pos && n >= 1) return {label, static_cast<double>(n)};
        } catch (const std::exception&) {
        }
    }
    throw ValidationError("unknown rebalance frequency '" + label + "' (expected weekly, daily or <n>day)");
}

env::EnvConfig RunConfig::env_for(const Frequency& f) const {
    env::EnvConfig e;
    e.option = option;
    e.rates = rates;
    e.model = market;
    e.grid = sim::PathGrid::from_days(maturity_days, f.days);
    e.kappa = kappa;
    e.formulation = formulation;
    e.pricer = pricer;
    e.gamma = objective.gamma;
    e.validate();
    return e;
}

bool RunConfig::wants_rl() const {
    for (const auto& p : evaluation.policies)
        if (p == "rl" || p == "rl_discrete") return true;
    return false;
}

RunConfig parse_run_config(const json& doc) {
    RunConfig cfg;
    cfg.source = doc;
    Obj root(doc, "");

    cfg.market = parse_market(root.child("market"));

    {
        auto o = root.child("option");
        cfg.option.strike = o.req<double>("strike");
        cfg.maturity_days = o.req<double>("maturity_days");
        o.done();
        if (!(cfg.maturity_days > 0.0))
            throw ConfigError(ConfigError::Kind::invalid_value, "option.maturity_days", "option.maturity_days must be > 0");
        cfg.option.expiry = cfg.maturity_days / sim::kTradingDaysPerYear;
        checked("option.strike", [&] { cfg.option.validate(); });
    }
    {
        auto o = root.child_or_empty("rates");
        cfg.rates.risk_free = o.opt("risk_free", 0.0);
        cfg.rates.dividend_yield = o.opt("dividend_yield", 0.0);
        o.done();
        checked("rates", [&] { cfg.rates.validate(); });
    }
    {
        auto o = root.child("hedging");
        cfg.kappa = o.req<double>("kappa");
        for (const auto& f : o.req<std::vector<std::string>>("frequencies"))
            checked("hedging.frequencies", [&] { cfg.frequencies.push_back(parse_frequency(f)); });
        if (cfg.frequencies.empty())
            throw ConfigError(ConfigError::Kind::invalid_value, "hedging.frequencies", "hedging.frequencies is empty");
        const auto form = o.opt<std::string>("formulation", "accounting");
        if (form == "accounting") cfg.formulation = env::Formulation::accounting;
        else if (form == "cashflow") cfg.formulation = env::Formulation::cashflow;
        else throw ConfigError(ConfigError::Kind::invalid_value, "hedging.formulation", "hedging.formulation must be accounting or cashflow");
        const auto pricer = o.opt<std::string>("pricer", "matched");
        const double sigma_bar = o.opt("pricer_sigma", 0.2);
        if (pricer == "matched") cfg.pricer = env::PricerChoice::matched();
        else if (pricer == "constant_vol_bs") cfg.pricer = env::PricerChoice::constant_vol(sigma_bar);
        else throw ConfigError(ConfigError::Kind::invalid_value, "hedging.pricer", "hedging.pricer must be matched or constant_vol_bs");
        o.done();
    }
    {
        auto o = root.child("objective");
        cfg.objective.c = o.req<double>("c");
        cfg.objective.gamma = o.opt("gamma", 1.0);
        o.done();
        checked("objective", [&] { cfg.objective.validate(); });
    }
    {
        auto o = root.child("evaluation");
        auto& e = cfg.evaluation;
        e.n_paths = o.req<std::size_t>("n_paths");
        e.seed = o.req<std::uint64_t>("seed");
        e.policies = o.req<std::vector<std::string>>("policies");
        e.baselines = o.opt("baselines", e.baselines);
        e.threads = o.opt("threads", 1u);
        e.structure_paths = o.opt("structure_paths", e.structure_paths);
        o.done();
        if (e.n_paths < 2) throw ConfigError(ConfigError::Kind::invalid_value, "evaluation.n_paths", "evaluation.n_paths must be >= 2");
        if (e.policies.empty()) throw ConfigError(ConfigError::Kind::invalid_value, "evaluation.policies", "evaluation.policies is empty");
        for (const auto& p : e.policies)
            checked("evaluation.policies", [&] { agents::policy_kind_from_string(p); });
        for (const auto& b : e.baselines) {
            if (std::find(e.policies.begin(), e.policies.end(), b) == e.policies.end())
                throw ConfigError(ConfigError::Kind::invalid_value, "evaluation.baselines",
                                  "baseline '" + b + "' is not among evaluation.policies");
        }
        if (e.threads < 1) e.threads = 1;
    }
    {
        auto o = root.child_or_empty("training");
        auto& t = cfg.training;
        t.enabled = o.opt("enabled", false);
        t.config.episodes = o.opt("episodes", t.config.episodes);
        t.seeds = o.opt("seeds", t.seeds);
        t.config.eval_every = o.opt("eval_every", t.config.eval_every);
        t.config.eval_paths = o.opt("eval_paths", t.config.eval_paths);
        t.config.eval_seed = o.opt("eval_seed", t.config.eval_seed);
        t.config.keep_best = o.opt("keep_best", t.config.keep_best);
        t.load_from = o.opt<std::string>("load_from", "");
        o.done();
        if (t.seeds.empty()) throw ConfigError(ConfigError::Kind::invalid_value, "training.seeds", "training.seeds is empty");
        t.config.seed = t.seeds.front();
        checked("training", [&] { t.config.validate(); });
    }
    {
        auto o = root.child_or_empty("agent");
        auto& a = cfg.agent;
        a.hidden = o.opt("hidden", a.hidden);
        a.actor_adam.learning_rate = o.opt("actor_lr", a.actor_adam.learning_rate);
        a.critic_adam.learning_rate = o.opt("critic_lr", a.critic_adam.learning_rate);
        const double b1 = o.opt("adam_beta1", a.actor_adam.beta1);
        const double b2 = o.opt("adam_beta2", a.actor_adam.beta2);
        const double eps = o.opt("adam_epsilon", a.actor_adam.epsilon);
        for (auto* adam : {&a.actor_adam, &a.critic_adam}) {
            adam->beta1 = b1;
            adam->beta2 = b2;
            adam->epsilon = eps;
        }
        a.soft_update_tau = o.opt("soft_update_tau", a.soft_update_tau);
        a.batch_size = o.opt("batch_size", a.batch_size);
        a.buffer_capacity = o.opt("buffer_capacity", a.buffer_capacity);
        a.warmup_transitions = o.opt("warmup_transitions", a.warmup_transitions);
        a.update_every = o.opt("update_every", a.update_every);
        a.per_alpha = o.opt("per_alpha", a.per_alpha);
        a.per_beta_start = o.opt("per_beta_start", a.per_beta_start);
        a.per_beta_end = o.opt("per_beta_end", a.per_beta_end);
        a.importance_weights = o.opt("importance_weights", a.importance_weights);
        a.epsilon_start = o.opt("epsilon_start", a.epsilon_start);
        a.epsilon_end = o.opt("epsilon_end", a.epsilon_end);
        a.epsilon_decay_fraction = o.opt("epsilon_decay_fraction", a.epsilon_decay_fraction);
        a.final_layer_init = o.opt("final_layer_init", a.final_layer_init);
        a.moneyness_scale = o.opt("moneyness_scale", a.moneyness_scale);
        a.normalize_costs = o.opt("normalize_costs", a.normalize_costs);
        a.grid_points = o.opt("grid_points", a.grid_points);
        o.done();
        checked("agent", [&] { a.validate(); });
    }
    {
        auto o = root.child_or_empty("output");
        cfg.output_dir = o.opt<std::string>("directory", cfg.output_dir);
        o.done();
    }
    root.done();

    checked("market", [&] { sim::validate(cfg.market); });
    checked("hedging", [&] { cfg.env_for(cfg.frequencies.front()); });
    if (cfg.wants_rl() && !cfg.training.enabled && cfg.training.load_from.empty())
        throw ConfigError(ConfigError::Kind::invalid_value, "training.enabled",
                          "learned policies need training.enabled or training.load_from");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::unreadable, "", "cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(ConfigError::Kind::unreadable, "", std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
    json freqs = json::array();
    for (const auto& f : c.frequencies) freqs.push_back(f.label);
    const auto& a = c.agent;
    const auto& t = c.training;
    return {
        {"market", market_json(c.market)},
        {"option", {{"strike", c.option.strike}, {"maturity_days", c.maturity_days}}},
        {"rates", {{"risk_free", c.rates.risk_free}, {"dividend_yield", c.rates.dividend_yield}}},
        {"hedging",
         {{"kappa", c.kappa},
          {"frequencies", freqs},
          {"formulation", c.formulation == env::Formulation::accounting ? "accounting" : "cashflow"},
          {"pricer", c.pricer.kind == env::PricerChoice::Kind::matched ? "matched" : "constant_vol_bs"},
          {"pricer_sigma", c.pricer.sigma_bar}}},
        {"objective", {{"c", c.objective.c}, {"gamma", c.objective.gamma}}},
        {"evaluation",
         {{"n_paths", c.evaluation.n_paths},
          {"seed", c.evaluation.seed},
          {"policies", c.evaluation.policies},
          {"baselines", c.evaluation.baselines},
          {"threads", c.evaluation.threads},
          {"structure_paths", c.evaluation.structure_paths}}},
        {"training",
         {{"enabled", t.enabled},
          {"episodes", t.config.episodes},
          {"seeds", t.seeds},
          {"eval_every", t.config.eval_every},
          {"eval_paths", t.config.eval_paths},
          {"eval_seed", t.config.eval_seed},
          {"keep_best", t.config.keep_best},
          {"load_from", t.load_from}}},
        {"agent",
         {{"hidden", a.hidden},
          {"actor_lr", a.actor_adam.learning_rate},
          {"critic_lr", a.critic_adam.learning_rate},
          {"adam_beta1", a.actor_adam.beta1},
          {"adam_beta2", a.actor_adam.beta2},
          {"adam_epsilon", a.actor_adam.epsilon},
          {"soft_update_tau", a.soft_update_tau},
          {"batch_size", a.batch_size},
          {"buffer_capacity", a.buffer_capacity},
          {"warmup_transitions", a.warmup_transitions},
          {"update_every", a.update_every},
          {"per_alpha", a.per_alpha},
          {"per_beta_start", a.per_beta_start},
          {"per_beta_end", a.per_beta_end},
          {"importance_weights", a.importance_weights},
          {"epsilon_start", a.epsilon_start},
          {"epsilon_end", a.epsilon_end},
          {"epsilon_decay_fraction", a.epsilon_decay_fraction},
          {"final_layer_init", a.final_layer_init},
          {"moneyness_scale", a.moneyness_scale},
          {"normalize_costs", a.normalize_costs},
          {"grid_points", a.grid_points}}},
        {"output", {{"directory", c.output_dir}}},
    };
}

}  // namespace rlhedge::eval
