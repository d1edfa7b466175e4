#pragma once

// Experiment configuration read from JSON. Every object is checked for
// unknown keys; missing required keys raise ConfigError naming the key path.
//
// Schema (defaults in brackets, * = required):
//   market:     model* ("gbm" | "sabr" | "mixture"), s0 [100], mu [0.05],
//               sigma [0.2] (gbm) / sigma0 [0.2], vol_of_vol*, rho* (sabr),
//               components* (mixture: list of {weight*, market object})
//   option:     strike*, maturity_days* (trading days; 252 per year)
//   rates:      risk_free [0], dividend_yield [0]
//   hedging:    kappa*, frequencies* (labels "weekly", "daily" or "<n>day"),
//               formulation ["accounting"], pricer ["matched" | "constant_vol_bs"],
//               pricer_sigma [0.2]
//   objective:  c*, gamma [1]
//   evaluation: n_paths*, seed*, policies* (labels), baselines [["delta"]],
//               threads [1], structure_paths [2000]
//   training:   enabled [false], episodes [50000],
//               seeds [[1]], eval_every [2500], eval_paths [2000], eval_seed [0],
//               keep_best [false], load_from [""] (directory with checkpoints)
//   agent:      hidden, actor_lr, critic_lr, adam_beta1, adam_beta2, adam_epsilon,
//               soft_update_tau, batch_size, buffer_capacity, warmup_transitions,
//               update_every, per_alpha, per_beta_start, per_beta_end,
//               importance_weights, epsilon_start, epsilon_end,
//               epsilon_decay_fraction, final_layer_init, moneyness_scale,
//               normalize_costs, grid_points
//   output:     directory ["out"]

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlhedge/agents/qlearn.hpp"
#include "rlhedge/errors.hpp"
#include "rlhedge/hedging_env.hpp"

namespace rlhedge::eval {

class ConfigError : public ValidationError {
public:
    enum class Kind { missing_key, unknown_key, invalid_value, unreadable };
    ConfigError(Kind kind, std::string key, const std::string& message);
    Kind kind() const noexcept { return kind_; }
    const std::string& key() const noexcept { return key_; }
    std::string kind_name() const;

private:
    Kind kind_;
    std::string key_;
};

struct Frequency {
    std::string label;
    double days = 1.0;  // trading days between rebalances
};

/// "weekly" = 5 days, "daily" = 1 day, "<n>day" = n days.
Frequency parse_frequency(const std::string& label);

struct RunConfig {
    sim::MarketModel market;
    double maturity_days = 21.0;
    pricing::OptionSpec option;
    pricing::RateSpec rates;
    double kappa = 0.01;
    env::Formulation formulation = env::Formulation::accounting;
    env::PricerChoice pricer;
    std::vector<Frequency> frequencies;
    agents::ObjectiveSpec objective;

    struct Evaluation {
        std::size_t n_paths = 100000;
        std::uint64_t seed = 0;
        std::vector<std::string> policies;
        std::vector<std::string> baselines{"delta"};
        unsigned threads = 1;
        std::size_t structure_paths = 2000;
    } evaluation;

    struct Training {
        bool enabled = false;
        std::vector<std::uint64_t> seeds{1};
        agents::TrainingConfig config;
        std::string load_from;
    } training;

    agents::DiscreteQConfig agent;
    std::string output_dir = "out";
    nlohmann::json source;  // the document as read

    env::EnvConfig env_for(const Frequency& f) const;
    bool wants_rl() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// Normalised, fully defaulted form of a configuration.
nlohmann::json to_json(const RunConfig& config);

}  // namespace rlhedge::eval
