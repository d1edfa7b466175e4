#pragma once

// Mean / standard-deviation objective tracked through two action-value
// functions: Q1 estimates E[C] and Q2 estimates E[C^2] of the remaining cost.

#include <array>
#include <cstddef>

#include "rlhedge/hedging_env.hpp"

namespace rlhedge::agents {

struct ObjectiveSpec {
    double c = 1.5;      // weight on the standard deviation
    double gamma = 1.0;  // per-step discount
    void validate() const;
};

/// F = q1 + c * sqrt(max(q2 - q1^2, 0)).
double f_objective(double q1, double q2, double c) noexcept;

/// dF/da from the critics' action derivatives. When q2 - q1^2 <= 0 the square
/// root contributes nothing (subgradient 0).
double f_action_gradient(double q1, double q2, double dq1, double dq2, double c) noexcept;

struct CriticTargets {
    double y1 = 0.0;
    double y2 = 0.0;
};

/// Bootstrapped regression targets for one transition with (scaled) cost x:
///   y1 = x + gamma Q1'(s', a'),  y2 = x^2 + gamma^2 Q2'(s', a') + 2 gamma x Q1'(s', a'),
/// and (x, x^2) for terminal transitions, in which case `next_values` is never
/// called. `next_values` returns {Q1', Q2'} at the next state.
template <typename NextValues>
CriticTargets critic_targets(double cost, bool terminal, double gamma, NextValues&& next_values) {
    if (terminal) return {cost, cost * cost};
    const std::array<double, 2> q = next_values();
    return {cost + gamma * q[0], cost * cost + gamma * gamma * q[1] + 2.0 * gamma * cost * q[0]};
}

/// Linear decay from `start` to `end` over the first `decay_episodes`
/// episodes, constant afterwards.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    std::size_t decay_episodes = 1;

    double at(std::size_t episode) const noexcept;
    void validate() const;
};

/// Dimensionless network input: ((S/K - 1) * moneyness_scale, tau / T, H_prev).
struct StateNormalizer {
    double strike = 100.0;
    double expiry = 1.0;
    double moneyness_scale = 1.0;

    std::array<double, 3> operator()(const env::HedgeState& s) const noexcept {
        return {(s.price / strike - 1.0) * moneyness_scale, s.tau / expiry, s.holding_prev};
    }
};

/// Normaliser for an environment: moneyness is divided by
/// reference_vol * sqrt(expiry), the typical terminal log-move.
StateNormalizer make_normalizer(const env::EnvConfig& env, double reference_vol);

/// Option price at inception under the environment's pricer (weighted over
/// mixture components); used to express costs as a fraction of the premium.
double reference_premium(const env::EnvConfig& env);

}  // namespace rlhedge::agents
