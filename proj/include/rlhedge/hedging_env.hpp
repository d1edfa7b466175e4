#pragma once

// Hedging MDP for a short European call on one unit of the underlying.
//
// Timing convention: decisions are taken at nodes 0..n-1, the action at node i
// being the holding H_i kept over [t_i, t_{i+1}]. There is no decision at
// expiry; the position H_{n-1} is liquidated there. The cost attributed to
// action H_i is the trading cost of moving from H_{i-1} to H_i at node i (with
// H_{-1} = 0, so the set-up cost lands on the first action) plus the outcome of
// the period, plus the liquidation terms on the last step.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rlhedge/market_sim.hpp"
#include "rlhedge/pricing.hpp"
#include "rlhedge/rng.hpp"

namespace rlhedge::env {

enum class Formulation { accounting, cashflow };

/// Model used to mark the option in the accounting formulation.
struct PricerChoice {
    enum class Kind { matched, constant_vol_bs };
    Kind kind = Kind::matched;
    double sigma_bar = 0.2;  // used by constant_vol_bs

    static PricerChoice matched() { return {}; }
    static PricerChoice constant_vol(double sigma) { return {Kind::constant_vol_bs, sigma}; }
};

struct EnvConfig {
    pricing::OptionSpec option;
    pricing::RateSpec rates;
    sim::MarketModel model = sim::GbmSpec{};
    sim::PathGrid grid{1.0 / 12.0, 21};
    double kappa = 0.01;
    Formulation formulation = Formulation::accounting;
    PricerChoice pricer;
    double gamma = 1.0;

    void validate() const;
};

struct HedgeState {
    double holding_prev = 0.0;
    double price = 0.0;
    double tau = 0.0;
};

struct StepOutcome {
    double cost = 0.0;  // negative reward, per option unit
    HedgeState next_state;
    bool terminal = false;
};

double payoff(double price_at_expiry, const pricing::OptionSpec& option) noexcept;

/// Period reward of the accounting P&L formulation:
/// V_{i+1} - V_i + H_i (S_{i+1} - S_i) - kappa |S_{i+1} (H_{i+1} - H_i)|.
double accounting_reward(double value, double value_next, double holding, double price, double price_next,
                         double holding_next, double kappa) noexcept;

/// Period reward of the cash-flow formulation:
/// S_{i+1} (H_i - H_{i+1}) - kappa |S_{i+1} (H_{i+1} - H_i)|.
double cashflow_reward(double price_next, double holding, double holding_next, double kappa) noexcept;

/// Price of the (long) call under the chosen pricer; `vol` is the current
/// instantaneous volatility from the path.
double option_price(const PricerChoice& pricer, const sim::ProcessSpec& process, const pricing::OptionSpec& option,
                    const pricing::RateSpec& rates, double spot, double vol, double tau);

struct TraceRow {
    int step = 0;
    double price = 0.0;
    double vol = 0.0;
    double holding = 0.0;
    double cost = 0.0;
    double option_value = 0.0;
};

/// One simulated option life. The whole path is drawn at construction; the
/// episode then replays it deterministically. Single owner, not thread-safe.
class Episode {
public:
    Episode(const EnvConfig& config, sim::ProcessSpec process, sim::PricePath path);

    /// Draws the mixture component (if any) and the full path from `rng`.
    static Episode reset(const EnvConfig& config, CounterRng& rng);
    /// Episode on the path of CounterRng::substream(seed, index).
    static Episode from_substream(const EnvConfig& config, std::uint64_t seed, std::uint64_t index);

    const HedgeState& state() const noexcept { return state_; }
    int step_index() const noexcept { return step_; }
    bool terminal() const noexcept { return step_ >= config_.grid.n_steps; }

    /// Applies the configured formulation.
    StepOutcome step(double action);
    StepOutcome step_accounting(double action);
    StepOutcome step_cashflow(double action);

    /// Sum of step costs discounted by gamma per elapsed step. Throws
    /// StateError before the episode is terminal.
    double total_cost() const;

    /// Initial option price under the episode's pricer (the premium).
    double premium() const noexcept { return -values_.front(); }
    /// V_i: value of the short option position at node i (V_n = -payoff).
    double short_option_value(int i) const { return values_.at(static_cast<std::size_t>(i)); }
    double current_vol() const noexcept;

    std::size_t clamp_count() const noexcept { return clamps_; }
    const sim::PricePath& path() const noexcept { return path_; }
    const sim::ProcessSpec& process() const noexcept { return process_; }
    const EnvConfig& config() const noexcept { return config_; }

    void enable_trace(bool on) { tracing_ = on; }
    const std::vector<TraceRow>& trace() const noexcept { return trace_; }

private:
    double admit(double action);
    StepOutcome advance(double action, double cost);

    EnvConfig config_;
    sim::ProcessSpec process_;
    sim::PricePath path_;
    std::vector<double> values_;
    HedgeState state_;
    int step_ = 0;
    double total_ = 0.0;
    double discount_ = 1.0;
    std::size_t clamps_ = 0;
    bool tracing_ = false;
    std::vector<TraceRow> trace_;
};

/// CSV with header `step,price,vol,holding,cost,option_value`.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

}  // namespace rlhedge::env
