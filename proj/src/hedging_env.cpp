#include "rlhedge/hedging_env.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "rlhedge/errors.hpp"

namespace rlhedge::env {

void EnvConfig::validate() const {
    option.validate();
    rates.validate();
    sim::validate(model);
    grid.validate();
    require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be >= 0");
    require(std::isfinite(gamma) && gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
    if (pricer.kind == PricerChoice::Kind::constant_vol_bs)
        require(std::isfinite(pricer.sigma_bar) && pricer.sigma_bar > 0.0, "pricer.sigma must be > 0");
    require(std::fabs(grid.expiry - option.expiry) <= 1e-12 * option.expiry,
            "grid.expiry must equal option.expiry");
}

double payoff(double price_at_expiry, const pricing::OptionSpec& option) noexcept {
    return std::max(price_at_expiry - option.strike, 0.0);
}

double accounting_reward(double value, double value_next, double holding, double price, double price_next,
                         double holding_next, double kappa) noexcept {
    return value_next - value + holding * (price_next - price) - kappa * std::fabs(price_next * (holding_next - holding));
}

double cashflow_reward(double price_next, double holding, double holding_next, double kappa) noexcept {
    return price_next * (holding - holding_next) - kappa * std::fabs(price_next * (holding_next - holding));
}

double option_price(const PricerChoice& pricer, const sim::ProcessSpec& process, const pricing::OptionSpec& option,
                    const pricing::RateSpec& rates, double spot, double vol, double tau) {
    if (pricer.kind == PricerChoice::Kind::constant_vol_bs)
        return pricing::bs_price(spot, option, rates, pricer.sigma_bar, tau);
    if (const auto* sabr = std::get_if<sim::SabrSpec>(&process))
        return pricing::sabr_price(spot, option, rates, {vol, sabr->vol_of_vol, sabr->rho}, tau);
    return pricing::bs_price(spot, option, rates, std::get<sim::GbmSpec>(process).sigma, tau);
}

Episode::Episode(const EnvConfig& config, sim::ProcessSpec process, sim::PricePath path)
    : config_(config), process_(std::move(process)), path_(std::move(path)) {
    config_.validate();
    const int n = config_.grid.n_steps;
    require(path_.prices.size() == static_cast<std::size_t>(n) + 1, "path length must be n_steps + 1");

    const double vol0 = sim::initial_vol(process_);
    values_.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        values_[idx] = -option_price(config_.pricer, process_, config_.option, config_.rates, path_.prices[idx],
                                     path_.vol_at(idx, vol0), config_.grid.tau_at(i));
    }
    values_.back() = -payoff(path_.prices.back(), config_.option);
    state_ = {0.0, path_.prices.front(), config_.grid.expiry};
}

Episode Episode::reset(const EnvConfig& config, CounterRng& rng) {
    config.validate();
    auto sampled = sim::simulate_path(config.model, config.grid, rng);
    return Episode(config, std::move(sampled.process), std::move(sampled.path));
}

Episode Episode::from_substream(const EnvConfig& config, std::uint64_t seed, std::uint64_t index) {
    CounterRng rng = CounterRng::substream(seed, index);
    return reset(config, rng);
}

double Episode::current_vol() const noexcept {
    return path_.vol_at(static_cast<std::size_t>(std::min(step_, config_.grid.n_steps)), sim::initial_vol(process_));
}

double Episode::admit(double action) {
    if (terminal()) throw StateError("step called on a terminal episode");
    require(!std::isnan(action), "action must not be NaN");
    if (action < 0.0 || action > 1.0) {
        ++clamps_;
        action = std::clamp(action, 0.0, 1.0);
    }
    return action;
}

StepOutcome Episode::step(double action) {
    return config_.formulation == Formulation::accounting ? step_accounting(action) : step_cashflow(action);
}

StepOutcome Episode::step_accounting(double action) {
    const double h = admit(action);
    const auto i = static_cast<std::size_t>(step_);
    const double s = path_.prices[i], s_next = path_.prices[i + 1];
    const double kappa = config_.kappa, gamma = config_.gamma;

    double cost = kappa * s * std::fabs(h - state_.holding_prev);
    cost -= gamma * (values_[i + 1] - values_[i] + h * (s_next - s));
    if (step_ + 1 == config_.grid.n_steps) cost += gamma * kappa * s_next * std::fabs(h);
    return advance(h, cost);
}

StepOutcome Episode::step_cashflow(double action) {
    const double h = admit(action);
    const auto i = static_cast<std::size_t>(step_);
    const double s = path_.prices[i], s_next = path_.prices[i + 1];
    const double kappa = config_.kappa, gamma = config_.gamma;

    double cost = s * (h - state_.holding_prev) + kappa * s * std::fabs(h - state_.holding_prev);
    if (step_ + 1 == config_.grid.n_steps)
        cost += gamma * (-s_next * h + kappa * s_next * std::fabs(h) + payoff(s_next, config_.option));
    return advance(h, cost);
}

StepOutcome Episode::advance(double action, double cost) {
    if (tracing_) {
        const auto i = static_cast<std::size_t>(step_);
        trace_.push_back({step_, path_.prices[i], current_vol(), action, cost, values_[i]});
    }
    total_ += discount_ * cost;
    discount_ *= config_.gamma;
    ++step_;
    const auto i = static_cast<std::size_t>(step_);
    state_ = {action, path_.prices[i], config_.grid.tau_at(step_)};
    const bool done = terminal();
    if (done && tracing_)
        trace_.push_back({step_, path_.prices[i], current_vol(), action, 0.0, values_[i]});
    return {cost, state_, done};
}

double Episode::total_cost() const {
    if (!terminal()) throw StateError("total_cost requested before the episode is terminal");
    return total_;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << "step,price,vol,holding,cost,option_value\n" << std::setprecision(17);
    for (const auto& r : rows)
        out << r.step << ',' << r.price << ',' << r.vol << ',' << r.holding << ',' << r.cost << ',' << r.option_value
            << '\n';
}

}  // namespace rlhedge::env
