#pragma once

// Twin-critic Q-learning over a uniform grid of holdings. Both critics are
// bootstrapped with the same greedy next action, the minimiser of F.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "rlhedge/agents/ddpg.hpp"

namespace rlhedge::agents {

/// Shares the network, replay and exploration settings of DdpgConfig (the
/// actor settings are unused).
struct DiscreteQConfig : DdpgConfig {
    std::size_t grid_points = 11;  // {0, 1/(n-1), ..., 1}
    void validate() const;
};

std::vector<double> uniform_action_grid(std::size_t points);

class DiscreteQAgent {
public:
    using Net = nn::Mlp<float>;
    using State = std::array<double, 3>;

    DiscreteQAgent(const DiscreteQConfig& config, const ObjectiveSpec& objective, StateNormalizer normalizer,
                   double cost_scale, std::uint64_t seed);

    const DiscreteQConfig& config() const noexcept { return config_; }
    const std::vector<double>& grid() const noexcept { return grid_; }
    const StateNormalizer& normalizer() const noexcept { return normalizer_; }
    const Net& critic1() const noexcept { return critic1_; }
    const Net& critic2() const noexcept { return critic2_; }
    nn::ReplayBuffer& buffer() noexcept { return buffer_; }

    /// Greedy grid index at a normalised state (third entry is holding_prev).
    std::size_t greedy_index(const State& state) const;
    double act(const State& state) const { return grid_[greedy_index(state)]; }
    /// Uniformly random grid point with probability epsilon, else greedy.
    double explore(const State& state, double epsilon, CounterRng& rng) const;

    void remember(const env::HedgeState& state, double action, double cost, const env::HedgeState& next,
                  bool terminal);
    bool ready() const noexcept;
    UpdateStats update(double beta);

    std::shared_ptr<const DiscreteQPolicy> policy(std::string label = "rl_discrete") const;

private:
    void evaluate_grid(const Net& q1, const Net& q2, std::span<const State> states, std::vector<float>& v1,
                       std::vector<float>& v2) const;

    DiscreteQConfig config_;
    ObjectiveSpec objective_;
    StateNormalizer normalizer_;
    double cost_scale_;
    std::vector<double> grid_;
    CounterRng rng_;
    Net critic1_, critic2_, target1_, target2_;
    nn::AdamState<float> opt1_, opt2_;
    nn::ReplayBuffer buffer_;
    mutable Net::Workspace ws1_, ws2_;
    std::vector<float> grad1_, grad2_;
};

struct QlearnTrainResult {
    DiscreteQAgent agent;
    std::vector<LearningCurvePoint> curve;
    std::size_t updates = 0;
};

QlearnTrainResult qlearn_train(const env::EnvConfig& env, const DiscreteQConfig& config,
                               const ObjectiveSpec& objective, const TrainingConfig& training);

}  // namespace rlhedge::agents
