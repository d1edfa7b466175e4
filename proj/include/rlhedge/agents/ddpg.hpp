#pragma once

// Deterministic policy gradient agent with two critics estimating the first
// and second moments of the remaining hedging cost. The actor minimises
// F = Q1 + c sqrt(Q2 - Q1^2) at its own action.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rlhedge/agents/objective.hpp"
#include "rlhedge/agents/policy.hpp"
#include "rlhedge/hedging_env.hpp"
#include "rlhedge/nn/adam.hpp"
#include "rlhedge/nn/mlp.hpp"
#include "rlhedge/nn/replay_buffer.hpp"

namespace rlhedge::agents {

struct DdpgConfig {
    std::vector<std::size_t> hidden{64, 64, 64};
    nn::AdamConfig actor_adam{1e-4, 0.9, 0.999, 1e-8};
    nn::AdamConfig critic_adam{1e-3, 0.9, 0.999, 1e-8};
    double soft_update_tau = 0.005;
    std::size_t batch_size = 128;
    std::size_t buffer_capacity = 500000;
    std::size_t warmup_transitions = 1000;
    std::size_t update_every = 1;  // environment steps between gradient updates
    double per_alpha = 0.6;
    double per_beta_start = 0.4;
    double per_beta_end = 1.0;
    bool importance_weights = true;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.6;  // of the training episodes
    double final_layer_init = 3e-3;
    double moneyness_scale = 1.0;  // multiplies S/K - 1 in the network input
    bool normalize_costs = true;   // learn costs in units of the option premium

    void validate() const;
};

struct TrainingConfig {
    std::size_t episodes = 50000;
    std::uint64_t seed = 1;
    std::size_t eval_every = 2500;  // 0 disables the learning curve
    std::size_t eval_paths = 2000;
    std::uint64_t eval_seed = 0;  // 0 = derived from seed
    bool keep_best = false;       // restore the actor with the best validation Y(0)

    void validate() const;
    std::uint64_t validation_seed() const noexcept;
};

struct LearningCurvePoint {
    std::size_t episode = 0;
    double epsilon = 0.0;
    double mean_cost_pct = 0.0;
    double sd_cost_pct = 0.0;
    double y0_pct = 0.0;
    double critic_loss = 0.0;  // running mean since the previous point
    double validation_f = 0.0; // mean F(s, actor(s)) on fixed validation states
};

struct UpdateStats {
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    double mean_f = 0.0;
};

template <typename Real>
class DdpgAgent {
public:
    using Net = nn::Mlp<Real>;
    using State = std::array<double, 3>;

    DdpgAgent(const DdpgConfig& config, const ObjectiveSpec& objective, StateNormalizer normalizer,
              double cost_scale, std::uint64_t seed);

    const DdpgConfig& config() const noexcept { return config_; }
    const ObjectiveSpec& objective() const noexcept { return objective_; }
    const StateNormalizer& normalizer() const noexcept { return normalizer_; }
    double cost_scale() const noexcept { return cost_scale_; }

    Net& actor() noexcept { return actor_; }
    Net& critic1() noexcept { return critic1_; }
    Net& critic2() noexcept { return critic2_; }
    const Net& actor() const noexcept { return actor_; }
    const Net& critic1() const noexcept { return critic1_; }
    const Net& critic2() const noexcept { return critic2_; }
    const Net& target_actor() const noexcept { return target_actor_; }
    const Net& target_critic1() const noexcept { return target_critic1_; }
    const Net& target_critic2() const noexcept { return target_critic2_; }
    nn::ReplayBuffer& buffer() noexcept { return buffer_; }
    const nn::ReplayBuffer& buffer() const noexcept { return buffer_; }

    /// Deterministic action for a normalised state.
    double act(const State& state) const;
    /// Uniform random action in [0, 1] with probability epsilon, else act().
    double explore(const State& state, double epsilon, CounterRng& rng) const;

    /// Stores a transition whose cost is in currency per option unit; it is
    /// multiplied by cost_scale() on the way in.
    void remember(const env::HedgeState& state, double action, double cost, const env::HedgeState& next,
                  bool terminal);

    bool ready() const noexcept;

    /// One full learning step: sample, critic regression, priority update,
    /// actor step, soft target update. Requires ready().
    UpdateStats update(double beta);

    /// Critic regression on buffer items `indices` with importance weights;
    /// returns the weighted losses and writes |y1 - Q1| + floor as priorities.
    UpdateStats critic_step(std::span<const std::size_t> indices, std::span<const double> weights);

    /// Applies the batch-mean gradient of F(s, actor(s)) through Adam.
    double policy_gradient_step(std::span<const State> states);

    /// Gradient of mean F(s, actor(s)) w.r.t. the actor parameters, critics
    /// held fixed. Returns mean F.
    double objective_gradient(std::span<const State> states, std::vector<Real>& grad) const;
    double mean_objective(std::span<const State> states) const;

    void soft_update_targets();

    /// Frozen float copy of the actor for evaluation.
    std::shared_ptr<const nn::Mlp<float>> actor_snapshot() const;

private:
    void forward_critics_at_actor(std::span<const State> states, std::vector<Real>& q1, std::vector<Real>& q2,
                                  std::vector<Real>& dq1, std::vector<Real>& dq2, bool want_grad) const;

    DdpgConfig config_;
    ObjectiveSpec objective_;
    StateNormalizer normalizer_;
    double cost_scale_;
    CounterRng rng_;

    Net actor_, critic1_, critic2_;
    Net target_actor_, target_critic1_, target_critic2_;
    nn::AdamState<Real> actor_opt_, critic1_opt_, critic2_opt_;
    nn::ReplayBuffer buffer_;

    mutable typename Net::Workspace ws_a_, ws_c1_, ws_c2_, ws_t_;
    std::vector<Real> grad_a_, grad_c1_, grad_c2_;
};

extern template class DdpgAgent<float>;
extern template class DdpgAgent<double>;

template <typename Real>
struct DdpgTrainResult {
    DdpgAgent<Real> agent;
    std::vector<LearningCurvePoint> curve;
    std::size_t updates = 0;
    std::size_t selected_episode = 0;  // checkpoint restored when keep_best
};

/// Trains one agent on one environment. Training paths come from
/// substream(seed, episode); validation uses an independent seed.
/// Throws StateError (with a diagnostic) if a loss turns non-finite.
template <typename Real>
DdpgTrainResult<Real> ddpg_train(const env::EnvConfig& env, const DdpgConfig& config, const ObjectiveSpec& objective,
                                 const TrainingConfig& training);

/// Normaliser and cost scale the trainer uses for `env`.
StateNormalizer ddpg_normalizer(const env::EnvConfig& env, const DdpgConfig& config);
double ddpg_cost_scale(const env::EnvConfig& env, const DdpgConfig& config);

}  // namespace rlhedge::agents
