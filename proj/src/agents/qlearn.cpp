#include "rlhedge/agents/qlearn.hpp"

#include <algorithm>
#include <cmath>

#include "rlhedge/errors.hpp"

namespace rlhedge::agents {

void DiscreteQConfig::validate() const {
    DdpgConfig::validate();
    require(grid_points >= 2, "agent.grid_points must be >= 2");
}

std::vector<double> uniform_action_grid(std::size_t points) {
    require(points >= 2, "action grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

namespace {

std::vector<std::size_t> critic_sizes(const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> s{4};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(1);
    return s;
}

}  // namespace

DiscreteQAgent::DiscreteQAgent(const DiscreteQConfig& config, const ObjectiveSpec& objective,
                               StateNormalizer normalizer, double cost_scale, std::uint64_t seed)
    : config_(config),
      objective_(objective),
      normalizer_(normalizer),
      cost_scale_(cost_scale),
      grid_(uniform_action_grid(config.grid_points)),
      rng_(CounterRng::substream(seed, 0x7167ULL)),
      critic1_(critic_sizes(config.hidden), nn::OutputActivation::identity),
      critic2_(critic_sizes(config.hidden), nn::OutputActivation::identity),
      buffer_(config.buffer_capacity, config.per_alpha) {
    config_.validate();
    objective_.validate();
    require(cost_scale > 0.0, "cost scale must be > 0");
    CounterRng init = rng_.fork(1);
    critic1_.initialize(init, config.final_layer_init);
    critic2_.initialize(init, config.final_layer_init);
    target1_ = critic1_;
    target2_ = critic2_;
    opt1_ = nn::AdamState<float>(critic1_.parameter_count(), config.critic_adam);
    opt2_ = nn::AdamState<float>(critic2_.parameter_count(), config.critic_adam);
    grad1_.resize(critic1_.parameter_count());
    grad2_.resize(critic2_.parameter_count());
    rng_ = rng_.fork(2);
}

void DiscreteQAgent::evaluate_grid(const Net& q1, const Net& q2, std::span<const State> states,
                                   std::vector<float>& v1, std::vector<float>& v2) const {
    const std::size_t g = grid_.size();
    const std::size_t rows = states.size() * g;
    std::vector<float> in(4 * rows);
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t a = 0; a < g; ++a) {
            float* r = &in[4 * (i * g + a)];
            for (int j = 0; j < 3; ++j) r[j] = static_cast<float>(states[i][j]);
            r[3] = static_cast<float>(grid_[a]);
        }
    }
    const auto o1 = q1.forward_batch(in, rows, ws1_);
    v1.assign(o1.begin(), o1.end());
    const auto o2 = q2.forward_batch(in, rows, ws2_);
    v2.assign(o2.begin(), o2.end());
}

std::size_t DiscreteQAgent::greedy_index(const State& state) const {
    std::vector<float> v1, v2;
    evaluate_grid(critic1_, critic2_, std::span(&state, 1), v1, v2);
    const std::vector<double> d1(v1.begin(), v1.end()), d2(v2.begin(), v2.end());
    return greedy_grid_index(d1, d2, grid_, objective_.c, state[2]);
}

double DiscreteQAgent::explore(const State& state, double epsilon, CounterRng& rng) const {
    if (epsilon > 0.0 && rng.uniform() < epsilon) return grid_[rng.uniform_index(grid_.size())];
    return act(state);
}

void DiscreteQAgent::remember(const env::HedgeState& state, double action, double cost, const env::HedgeState& next,
                              bool terminal) {
    buffer_.push({normalizer_(state), action, cost * cost_scale_, normalizer_(next), terminal});
}

bool DiscreteQAgent::ready() const noexcept {
    return buffer_.size() >= std::max(config_.warmup_transitions, config_.batch_size);
}

UpdateStats DiscreteQAgent::update(double beta) {
    if (!ready()) throw StateError("agent update before the replay buffer is warm");
    const auto batch = buffer_.sample(config_.batch_size, beta, rng_);
    const std::size_t b = batch.indices.size();
    const std::size_t g = grid_.size();
    const double gamma = objective_.gamma;

    std::vector<State> next(b);
    for (std::size_t k = 0; k < b; ++k) next[k] = buffer_.at(batch.indices[k]).next_state;
    std::vector<float> n1, n2;
    evaluate_grid(target1_, target2_, next, n1, n2);

    std::vector<double> y1(b), y2(b), a1(g), a2(g);
    for (std::size_t k = 0; k < b; ++k) {
        const auto& t = buffer_.at(batch.indices[k]);
        const auto y = critic_targets(t.cost, t.terminal, gamma, [&] {
            for (std::size_t a = 0; a < g; ++a) {
                a1[a] = n1[k * g + a];
                a2[a] = n2[k * g + a];
            }
            const std::size_t best = greedy_grid_index(a1, a2, grid_, objective_.c, t.next_state[2]);
            return std::array<double, 2>{a1[best], a2[best]};
        });
        y1[k] = y.y1;
        y2[k] = y.y2;
    }

    std::vector<float> in(4 * b), up(b);
    for (std::size_t k = 0; k < b; ++k) {
        const auto& t = buffer_.at(batch.indices[k]);
        for (int j = 0; j < 3; ++j) in[4 * k + j] = static_cast<float>(t.state[j]);
        in[4 * k + 3] = static_cast<float>(t.action);
    }
    UpdateStats stats;
    std::vector<double> priorities(b);
    const double inv_b = 1.0 / static_cast<double>(b);

    const auto q1 = critic1_.forward_batch(in, b, ws1_);
    for (std::size_t k = 0; k < b; ++k) {
        const double w = config_.importance_weights ? batch.weights[k] : 1.0;
        const double err = static_cast<double>(q1[k]) - y1[k];
        stats.critic1_loss += w * err * err * inv_b;
        up[k] = static_cast<float>(2.0 * w * err * inv_b);
        priorities[k] = std::abs(err) + nn::kPriorityFloor;
    }
    critic1_.backward_batch(ws1_, up, grad1_, {});
    const auto q2 = critic2_.forward_batch(in, b, ws2_);
    for (std::size_t k = 0; k < b; ++k) {
        const double w = config_.importance_weights ? batch.weights[k] : 1.0;
        const double err = static_cast<double>(q2[k]) - y2[k];
        stats.critic2_loss += w * err * err * inv_b;
        up[k] = static_cast<float>(2.0 * w * err * inv_b);
    }
    critic2_.backward_batch(ws2_, up, grad2_, {});
    if (!std::isfinite(stats.critic1_loss) || !std::isfinite(stats.critic2_loss))
        throw StateError("training diverged: non-finite critic loss after " + std::to_string(opt1_.step) +
                         " updates");

    nn::adam_step(opt1_, critic1_.parameters(), std::span<const float>(grad1_));
    nn::adam_step(opt2_, critic2_.parameters(), std::span<const float>(grad2_));
    buffer_.update_priorities(batch.indices, priorities);
    const double tau = config_.soft_update_tau;
    nn::soft_update(target1_.parameters(), std::span<const float>(critic1_.parameters()), tau);
    nn::soft_update(target2_.parameters(), std::span<const float>(critic2_.parameters()), tau);
    return stats;
}

std::shared_ptr<const DiscreteQPolicy> DiscreteQAgent::policy(std::string label) const {
    return std::make_shared<DiscreteQPolicy>(std::make_shared<Net>(critic1_), std::make_shared<Net>(critic2_),
                                             normalizer_, grid_, objective_.c, std::move(label));
}

QlearnTrainResult qlearn_train(const env::EnvConfig& env, const DiscreteQConfig& config,
                               const ObjectiveSpec& objective, const TrainingConfig& training) {
    env.validate();
    config.validate();
    objective.validate();
    training.validate();
    require(std::abs(objective.gamma - env.gamma) <= 1e-15, "objective.gamma must equal the environment gamma");

    QlearnTrainResult result{
        DiscreteQAgent(config, objective, ddpg_normalizer(env, config), ddpg_cost_scale(env, config), training.seed),
        {}, 0};
    auto& agent = result.agent;
    const EpsilonSchedule schedule{config.epsilon_start, config.epsilon_end,
                                   static_cast<std::size_t>(config.epsilon_decay_fraction *
                                                            static_cast<double>(training.episodes))};
    const std::uint64_t path_seed = mix64(training.seed ^ 0x747261696eULL);
    CounterRng explore_rng = CounterRng::substream(training.seed, 0x6578706cULL);
    double loss_sum = 0.0;
    std::size_t loss_count = 0, env_steps = 0;

    for (std::size_t ep = 0; ep < training.episodes; ++ep) {
        const double epsilon = schedule.at(ep);
        const double progress = static_cast<double>(ep) / static_cast<double>(training.episodes);
        const double beta = config.per_beta_start + (config.per_beta_end - config.per_beta_start) * progress;
        auto episode = env::Episode::from_substream(env, path_seed, ep);
        while (!episode.terminal()) {
            const auto state = episode.state();
            const double action = agent.explore(agent.normalizer()(state), epsilon, explore_rng);
            const auto out = episode.step(action);
            agent.remember(state, action, out.cost, out.next_state, out.terminal);
            if (agent.ready() && ++env_steps % config.update_every == 0) {
                loss_sum += agent.update(beta).critic1_loss;
                ++loss_count;
                ++result.updates;
            }
        }
        if (training.eval_every > 0 && ((ep + 1) % training.eval_every == 0 || ep + 1 == training.episodes)) {
            const auto r = rollout(*agent.policy(), env, training.eval_paths, training.validation_seed(), 1);
            double sum = 0.0, ss = 0.0;
            const auto n = static_cast<double>(training.eval_paths);
            for (std::size_t i = 0; i < training.eval_paths; ++i) sum += 100.0 * r.total_costs[i] / r.premiums[i];
            const double mean = sum / n;
            for (std::size_t i = 0; i < training.eval_paths; ++i) {
                const double d = 100.0 * r.total_costs[i] / r.premiums[i] - mean;
                ss += d * d;
            }
            LearningCurvePoint p;
            p.episode = ep + 1;
            p.epsilon = epsilon;
            p.mean_cost_pct = mean;
            p.sd_cost_pct = std::sqrt(ss / (n - 1.0));
            p.y0_pct = p.mean_cost_pct + objective.c * p.sd_cost_pct;
            p.critic_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
            result.curve.push_back(p);
            loss_sum = 0.0;
            loss_count = 0;
        }
    }
    return result;
}

}  // namespace rlhedge::agents
