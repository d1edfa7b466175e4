#pragma once

// Monte Carlo evaluation of frozen policies, paired comparisons across
// policies, and policy slices.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rlhedge/agents/policy.hpp"
#include "rlhedge/hedging_env.hpp"

namespace rlhedge::eval {

/// Hedging cost statistics in percent of the option premium.
struct EvalReport {
    std::string label;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double c = 0.0;
    double mean_cost_pct = 0.0;
    double sd_cost_pct = 0.0;
    double y0_pct = 0.0;  // mean + c * sd
    double se_mean = 0.0;
    double se_sd = 0.0;
    double se_y0 = 0.0;
    std::uint64_t path_checksum = 0;
    std::size_t clamp_count = 0;

    bool operator==(const EvalReport&) const = default;
};

/// Statistics of per-path costs already expressed in percent. Standard errors
/// use the large-sample moments: Var(sd) ~ (m4 - s^4) / (4 s^2 n),
/// Cov(mean, sd) ~ m3 / (2 s n), and the delta method for Y(0).
EvalReport summarize(std::string label, std::span<const double> costs_pct, double c, std::uint64_t seed = 0,
                     std::uint64_t path_checksum = 0);

/// Runs `policy` on n_paths episodes; each total cost is divided by that
/// path's premium under the environment's pricer. Throws for n_paths < 2.
EvalReport evaluate_policy(const agents::HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n_paths,
                           std::uint64_t seed, double c, unsigned threads = 1);

/// (Y0_base - Y0_other) / Y0_base * 100.
double improvement_pct(const EvalReport& base, const EvalReport& other);

struct ComparisonRow {
    std::string frequency;
    std::vector<EvalReport> reports;                  // one per policy, same paths
    std::vector<std::string> baselines;               // labels
    std::vector<std::vector<double>> improvement;     // [policy][baseline]

    const EvalReport& report(const std::string& label) const;
    double improvement_vs(const std::string& policy, const std::string& baseline) const;
};

struct FrequencyCase {
    std::string label;
    env::EnvConfig env;
    std::vector<std::shared_ptr<const agents::HedgingPolicy>> policies;
};

/// Every policy of a case is evaluated on the same paths. Baselines are
/// policy labels present in every case.
std::vector<ComparisonRow> compare(std::span<const FrequencyCase> cases, std::span<const std::string> baselines,
                                   std::size_t n_paths, std::uint64_t seed, double c, unsigned threads = 1);

struct PolicySlice {
    double tau = 0.0;
    std::vector<double> prices;
    std::vector<double> holdings;
    std::vector<double> actions;  // prices.size() x holdings.size(), row per price
    std::vector<double> delta;    // Black-Scholes delta per price
};

/// Policy action on a (price, holding_prev) grid at fixed time to maturity;
/// model policies are evaluated at the initial volatility of `process`.
PolicySlice policy_slice(const agents::HedgingPolicy& policy, const env::EnvConfig& env,
                         const sim::ProcessSpec& process, std::span<const double> prices,
                         std::span<const double> holdings, double tau);

/// Header `price,bs_delta,h=<holding>...`.
void write_slice_csv(std::ostream& out, const PolicySlice& slice);

}  // namespace rlhedge::eval
