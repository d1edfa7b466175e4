#include "rlhedge/agents/objective.hpp"

#include <algorithm>
#include <cmath>

#include "rlhedge/errors.hpp"

namespace rlhedge::agents {

void ObjectiveSpec::validate() const {
    require(std::isfinite(c) && c >= 0.0, "objective.c must be >= 0");
    require(std::isfinite(gamma) && gamma > 0.0 && gamma <= 1.0, "objective.gamma must lie in (0, 1]");
}

double f_objective(double q1, double q2, double c) noexcept {
    return q1 + c * std::sqrt(std::max(q2 - q1 * q1, 0.0));
}

double f_action_gradient(double q1, double q2, double dq1, double dq2, double c) noexcept {
    const double variance = q2 - q1 * q1;
    if (!(variance > 0.0) || c == 0.0) return dq1;
    return dq1 + c * (dq2 - 2.0 * q1 * dq1) / (2.0 * std::sqrt(variance));
}

double EpsilonSchedule::at(std::size_t episode) const noexcept {
    if (decay_episodes == 0 || episode >= decay_episodes) return end;
    const double frac = static_cast<double>(episode) / static_cast<double>(decay_episodes);
    return start + (end - start) * frac;
}

void EpsilonSchedule::validate() const {
    require(start <= 1.0 && start >= end && end >= 0.0, "epsilon schedule needs 1 >= start >= end >= 0");
}

StateNormalizer make_normalizer(const env::EnvConfig& env, double reference_vol) {
    require(reference_vol > 0.0, "reference volatility must be > 0");
    return {env.option.strike, env.option.expiry, 1.0 / (reference_vol * std::sqrt(env.option.expiry))};
}

double reference_premium(const env::EnvConfig& env) {
    auto premium_of = [&](const sim::ProcessSpec& p) {
        return env::option_price(env.pricer, p, env.option, env.rates, sim::initial_price(p), sim::initial_vol(p),
                                 env.option.expiry);
    };
    if (const auto* mix = std::get_if<sim::MixtureSpec>(&env.model)) {
        double total = 0.0;
        for (const auto& c : mix->components) total += c.weight * premium_of(c.model);
        return total;
    }
    if (const auto* g = std::get_if<sim::GbmSpec>(&env.model)) return premium_of(*g);
    return premium_of(std::get<sim::SabrSpec>(env.model));
}

}  // namespace rlhedge::agents
