#include "rlhedge/agents/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rlhedge/errors.hpp"

namespace rlhedge::agents {

void DdpgConfig::validate() const {
    require(!hidden.empty(), "agent.hidden must list at least one layer");
    for (auto h : hidden) require(h >= 1, "agent.hidden widths must be >= 1");
    require(actor_adam.learning_rate > 0.0 && critic_adam.learning_rate > 0.0, "learning rates must be > 0");
    require(soft_update_tau > 0.0 && soft_update_tau <= 1.0, "agent.soft_update_tau must lie in (0, 1]");
    require(batch_size >= 1, "agent.batch_size must be >= 1");
    require(buffer_capacity >= batch_size, "agent.buffer_capacity must be >= batch_size");
    require(update_every >= 1, "agent.update_every must be >= 1");
    require(per_alpha >= 0.0, "agent.per_alpha must be >= 0");
    require(per_beta_start >= 0.0 && per_beta_start <= per_beta_end && per_beta_end <= 1.0,
            "agent.per_beta must satisfy 0 <= start <= end <= 1");
    require(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0,
            "agent.epsilon_decay_fraction must lie in [0, 1]");
    EpsilonSchedule{epsilon_start, epsilon_end, 1}.validate();
    require(final_layer_init > 0.0, "agent.final_layer_init must be > 0");
    require(moneyness_scale > 0.0, "agent.moneyness_scale must be > 0");
}

void TrainingConfig::validate() const {
    require(episodes >= 1, "training.episodes must be >= 1");
    require(eval_every == 0 || eval_paths >= 2, "training.eval_paths must be >= 2");
}

std::uint64_t TrainingConfig::validation_seed() const noexcept {
    return eval_seed != 0 ? eval_seed : mix64(seed ^ 0x76616c6964ULL);
}

StateNormalizer ddpg_normalizer(const env::EnvConfig& env, const DdpgConfig& config) {
    return {env.option.strike, env.option.expiry, config.moneyness_scale};
}

double ddpg_cost_scale(const env::EnvConfig& env, const DdpgConfig& config) {
    if (!config.normalize_costs) return 1.0;
    const double premium = reference_premium(env);
    require(premium > 0.0, "option premium must be > 0 to normalise costs");
    return 1.0 / premium;
}

namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(1);
    return s;
}

template <typename Real>
void check_finite(double value, const char* what, std::size_t step) {
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "training diverged: " << what << " = " << value << " after " << step << " updates";
        throw StateError(msg.str());
    }
}

}  // namespace

template <typename Real>
DdpgAgent<Real>::DdpgAgent(const DdpgConfig& config, const ObjectiveSpec& objective, StateNormalizer normalizer,
                           double cost_scale, std::uint64_t seed)
    : config_(config),
      objective_(objective),
      normalizer_(normalizer),
      cost_scale_(cost_scale),
      rng_(CounterRng::substream(seed, 0x616765ULL)),
      actor_(layer_sizes(3, config.hidden), nn::OutputActivation::logistic),
      critic1_(layer_sizes(4, config.hidden), nn::OutputActivation::identity),
      critic2_(layer_sizes(4, config.hidden), nn::OutputActivation::identity),
      buffer_(config.buffer_capacity, config.per_alpha) {
    config_.validate();
    objective_.validate();
    require(cost_scale > 0.0 && std::isfinite(cost_scale), "cost scale must be > 0");
    CounterRng init = rng_.fork(1);
    actor_.initialize(init, config.final_layer_init);
    critic1_.initialize(init, config.final_layer_init);
    critic2_.initialize(init, config.final_layer_init);
    target_actor_ = actor_;
    target_critic1_ = critic1_;
    target_critic2_ = critic2_;
    actor_opt_ = nn::AdamState<Real>(actor_.parameter_count(), config.actor_adam);
    critic1_opt_ = nn::AdamState<Real>(critic1_.parameter_count(), config.critic_adam);
    critic2_opt_ = nn::AdamState<Real>(critic2_.parameter_count(), config.critic_adam);
    grad_a_.resize(actor_.parameter_count());
    grad_c1_.resize(critic1_.parameter_count());
    grad_c2_.resize(critic2_.parameter_count());
    rng_ = rng_.fork(2);
}

template <typename Real>
double DdpgAgent<Real>::act(const State& s) const {
    const Real in[3] = {static_cast<Real>(s[0]), static_cast<Real>(s[1]), static_cast<Real>(s[2])};
    const auto y = actor_.forward_batch(in, 1, ws_a_);
    return static_cast<double>(y[0]);
}

template <typename Real>
double DdpgAgent<Real>::explore(const State& state, double epsilon, CounterRng& rng) const {
    if (epsilon > 0.0 && rng.uniform() < epsilon) return rng.uniform();
    return act(state);
}

template <typename Real>
void DdpgAgent<Real>::remember(const env::HedgeState& state, double action, double cost,
                               const env::HedgeState& next, bool terminal) {
    nn::Transition t;
    t.state = normalizer_(state);
    t.action = action;
    t.cost = cost * cost_scale_;
    t.next_state = normalizer_(next);
    t.terminal = terminal;
    buffer_.push(t);
}

template <typename Real>
bool DdpgAgent<Real>::ready() const noexcept {
    return buffer_.size() >= std::max(config_.warmup_transitions, config_.batch_size);
}

template <typename Real>
UpdateStats DdpgAgent<Real>::critic_step(std::span<const std::size_t> indices, std::span<const double> weights) {
    const std::size_t b = indices.size();
    require(b >= 1 && weights.size() == b, "critic step: bad batch");
    const double gamma = objective_.gamma;

    std::vector<Real> next_in(3 * b), in(4 * b);
    for (std::size_t k = 0; k < b; ++k) {
        const auto& t = buffer_.at(indices[k]);
        for (int j = 0; j < 3; ++j) {
            next_in[3 * k + j] = static_cast<Real>(t.next_state[j]);
            in[4 * k + j] = static_cast<Real>(t.state[j]);
        }
        in[4 * k + 3] = static_cast<Real>(t.action);
    }

    // Bootstrap values at (s', actor'(s')); masked for terminal transitions.
    std::vector<Real> next_sa(4 * b);
    {
        const auto a_next = target_actor_.forward_batch(next_in, b, ws_t_);
        for (std::size_t k = 0; k < b; ++k) {
            for (int j = 0; j < 3; ++j) next_sa[4 * k + j] = next_in[3 * k + j];
            next_sa[4 * k + 3] = a_next[k];
        }
    }
    std::vector<double> q1n(b), q2n(b);
    {
        const auto v1 = target_critic1_.forward_batch(next_sa, b, ws_t_);
        for (std::size_t k = 0; k < b; ++k) q1n[k] = v1[k];
        const auto v2 = target_critic2_.forward_batch(next_sa, b, ws_t_);
        for (std::size_t k = 0; k < b; ++k) q2n[k] = v2[k];
    }
    std::vector<double> y1(b), y2(b);
    for (std::size_t k = 0; k < b; ++k) {
        const auto& t = buffer_.at(indices[k]);
        const auto y = critic_targets(t.cost, t.terminal, gamma, [&] { return std::array<double, 2>{q1n[k], q2n[k]}; });
        y1[k] = y.y1;
        y2[k] = y.y2;
    }

    UpdateStats stats;
    std::vector<Real> up(b);
    std::vector<double> priorities(b);
    const double inv_b = 1.0 / static_cast<double>(b);

    const auto q1 = critic1_.forward_batch(in, b, ws_c1_);
    for (std::size_t k = 0; k < b; ++k) {
        const double w = config_.importance_weights ? weights[k] : 1.0;
        const double err = static_cast<double>(q1[k]) - y1[k];
        stats.critic1_loss += w * err * err * inv_b;
        up[k] = static_cast<Real>(2.0 * w * err * inv_b);
        priorities[k] = std::abs(err) + nn::kPriorityFloor;
    }
    critic1_.backward_batch(ws_c1_, up, grad_c1_, {});

    const auto q2 = critic2_.forward_batch(in, b, ws_c2_);
    for (std::size_t k = 0; k < b; ++k) {
        const double w = config_.importance_weights ? weights[k] : 1.0;
        const double err = static_cast<double>(q2[k]) - y2[k];
        stats.critic2_loss += w * err * err * inv_b;
        up[k] = static_cast<Real>(2.0 * w * err * inv_b);
    }
    critic2_.backward_batch(ws_c2_, up, grad_c2_, {});

    check_finite<Real>(stats.critic1_loss, "critic1 loss", critic1_opt_.step);
    check_finite<Real>(stats.critic2_loss, "critic2 loss", critic2_opt_.step);
    nn::adam_step(critic1_opt_, critic1_.parameters(), std::span<const Real>(grad_c1_));
    nn::adam_step(critic2_opt_, critic2_.parameters(), std::span<const Real>(grad_c2_));
    buffer_.update_priorities(indices, priorities);
    return stats;
}

template <typename Real>
void DdpgAgent<Real>::forward_critics_at_actor(std::span<const State> states, std::vector<Real>& q1,
                                               std::vector<Real>& q2, std::vector<Real>& dq1, std::vector<Real>& dq2,
                                               bool want_grad) const {
    const std::size_t b = states.size();
    std::vector<Real> in(3 * b);
    for (std::size_t k = 0; k < b; ++k)
        for (int j = 0; j < 3; ++j) in[3 * k + j] = static_cast<Real>(states[k][j]);
    const auto a = actor_.forward_batch(in, b, ws_a_);
    std::vector<Real> sa(4 * b);
    for (std::size_t k = 0; k < b; ++k) {
        for (int j = 0; j < 3; ++j) sa[4 * k + j] = in[3 * k + j];
        sa[4 * k + 3] = a[k];
    }
    const auto v1 = critic1_.forward_batch(sa, b, ws_c1_);
    q1.assign(v1.begin(), v1.end());
    const auto v2 = critic2_.forward_batch(sa, b, ws_c2_);
    q2.assign(v2.begin(), v2.end());
    if (!want_grad) return;

    const std::vector<Real> ones(b, Real(1));
    std::vector<Real> din(4 * b);
    dq1.resize(b);
    dq2.resize(b);
    critic1_.backward_batch(ws_c1_, ones, {}, din);
    for (std::size_t k = 0; k < b; ++k) dq1[k] = din[4 * k + 3];
    critic2_.backward_batch(ws_c2_, ones, {}, din);
    for (std::size_t k = 0; k < b; ++k) dq2[k] = din[4 * k + 3];
}

template <typename Real>
double DdpgAgent<Real>::objective_gradient(std::span<const State> states, std::vector<Real>& grad) const {
    const std::size_t b = states.size();
    require(b >= 1, "policy gradient needs a nonempty batch");
    std::vector<Real> q1, q2, dq1, dq2;
    forward_critics_at_actor(states, q1, q2, dq1, dq2, true);
    const double c = objective_.c;
    const double inv_b = 1.0 / static_cast<double>(b);
    std::vector<Real> up(b);
    double mean_f = 0.0;
    for (std::size_t k = 0; k < b; ++k) {
        mean_f += f_objective(q1[k], q2[k], c) * inv_b;
        up[k] = static_cast<Real>(f_action_gradient(q1[k], q2[k], dq1[k], dq2[k], c) * inv_b);
    }
    grad.resize(actor_.parameter_count());
    actor_.backward_batch(ws_a_, up, grad, {});
    return mean_f;
}

template <typename Real>
double DdpgAgent<Real>::mean_objective(std::span<const State> states) const {
    require(!states.empty(), "mean objective needs a nonempty batch");
    std::vector<Real> q1, q2, dq1, dq2;
    forward_critics_at_actor(states, q1, q2, dq1, dq2, false);
    double total = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) total += f_objective(q1[k], q2[k], objective_.c);
    return total / static_cast<double>(states.size());
}

template <typename Real>
double DdpgAgent<Real>::policy_gradient_step(std::span<const State> states) {
    const double mean_f = objective_gradient(states, grad_a_);
    check_finite<Real>(mean_f, "actor objective", actor_opt_.step);
    nn::adam_step(actor_opt_, actor_.parameters(), std::span<const Real>(grad_a_));
    return mean_f;
}

template <typename Real>
void DdpgAgent<Real>::soft_update_targets() {
    const double tau = config_.soft_update_tau;
    nn::soft_update(target_actor_.parameters(), std::span<const Real>(actor_.parameters()), tau);
    nn::soft_update(target_critic1_.parameters(), std::span<const Real>(critic1_.parameters()), tau);
    nn::soft_update(target_critic2_.parameters(), std::span<const Real>(critic2_.parameters()), tau);
}

template <typename Real>
UpdateStats DdpgAgent<Real>::update(double beta) {
    if (!ready()) throw StateError("agent update before the replay buffer is warm");
    const auto batch = buffer_.sample(config_.batch_size, beta, rng_);
    UpdateStats stats = critic_step(batch.indices, batch.weights);
    std::vector<State> states(batch.indices.size());
    for (std::size_t k = 0; k < states.size(); ++k) states[k] = buffer_.at(batch.indices[k]).state;
    stats.mean_f = policy_gradient_step(states);
    soft_update_targets();
    return stats;
}

template <typename Real>
std::shared_ptr<const nn::Mlp<float>> DdpgAgent<Real>::actor_snapshot() const {
    auto net = std::make_shared<nn::Mlp<float>>(actor_.layer_sizes(), actor_.output_activation());
    const auto src = actor_.parameters();
    auto dst = net->parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
    return net;
}

template class DdpgAgent<float>;
template class DdpgAgent<double>;

namespace {

struct Validation {
    double mean_pct = 0.0;
    double sd_pct = 0.0;
};

Validation validate_policy(const HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n, std::uint64_t seed) {
    const auto r = rollout(policy, env, n, seed, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += 100.0 * r.total_costs[i] / r.premiums[i];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = 100.0 * r.total_costs[i] / r.premiums[i] - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

/// States visited by delta hedging on a few validation paths; fixed across
/// checkpoints so that F can be tracked.
std::vector<std::array<double, 3>> validation_states(const env::EnvConfig& env, const StateNormalizer& norm,
                                                     std::uint64_t seed) {
    std::vector<std::array<double, 3>> out;
    DeltaBsPolicy delta;
    for (std::size_t i = 0; i < 32; ++i) {
        auto ep = env::Episode::from_substream(env, seed, i);
        while (!ep.terminal()) {
            out.push_back(norm(ep.state()));
            const auto ctx = make_context(ep);
            ep.step(delta.act(ep.state(), &ctx));
        }
    }
    return out;
}

}  // namespace

template <typename Real>
DdpgTrainResult<Real> ddpg_train(const env::EnvConfig& env, const DdpgConfig& config, const ObjectiveSpec& objective,
                                 const TrainingConfig& training) {
    env.validate();
    config.validate();
    objective.validate();
    training.validate();
    require(std::abs(objective.gamma - env.gamma) <= 1e-15, "objective.gamma must equal the environment gamma");

    DdpgTrainResult<Real> result{DdpgAgent<Real>(config, objective, ddpg_normalizer(env, config),
                                                 ddpg_cost_scale(env, config), training.seed),
                                 {}, 0, training.episodes};
    auto& agent = result.agent;
    const EpsilonSchedule schedule{config.epsilon_start, config.epsilon_end,
                                   static_cast<std::size_t>(config.epsilon_decay_fraction *
                                                            static_cast<double>(training.episodes))};
    const std::uint64_t path_seed = mix64(training.seed ^ 0x747261696eULL);
    const std::uint64_t val_seed = training.validation_seed();
    CounterRng explore_rng = CounterRng::substream(training.seed, 0x6578706cULL);
    const auto val_states = training.eval_every > 0 ? validation_states(env, agent.normalizer(), val_seed)
                                                    : std::vector<std::array<double, 3>>{};

    double best_y0 = std::numeric_limits<double>::infinity();
    std::vector<Real> best_params;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::size_t env_steps = 0;

    for (std::size_t ep = 0; ep < training.episodes; ++ep) {
        const double epsilon = schedule.at(ep);
        const double progress = static_cast<double>(ep) / static_cast<double>(training.episodes);
        const double beta = config.per_beta_start + (config.per_beta_end - config.per_beta_start) * progress;

        auto episode = env::Episode::from_substream(env, path_seed, ep);
        while (!episode.terminal()) {
            const auto state = episode.state();
            const double action = agent.explore(agent.normalizer()(state), epsilon, explore_rng);
            const auto out = episode.step(action);
            agent.remember(state, std::clamp(action, 0.0, 1.0), out.cost, out.next_state, out.terminal);
            ++env_steps;
            if (agent.ready() && env_steps % config.update_every == 0) {
                const auto s = agent.update(beta);
                loss_sum += s.critic1_loss;
                ++loss_count;
                ++result.updates;
            }
        }

        if (training.eval_every > 0 && ((ep + 1) % training.eval_every == 0 || ep + 1 == training.episodes)) {
            ActorPolicy policy(agent.actor_snapshot(), agent.normalizer());
            const auto v = validate_policy(policy, env, training.eval_paths, val_seed);
            LearningCurvePoint p;
            p.episode = ep + 1;
            p.epsilon = epsilon;
            p.mean_cost_pct = v.mean_pct;
            p.sd_cost_pct = v.sd_pct;
            p.y0_pct = v.mean_pct + objective.c * v.sd_pct;
            p.critic_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
            p.validation_f = agent.mean_objective(val_states);
            result.curve.push_back(p);
            loss_sum = 0.0;
            loss_count = 0;
            if (training.keep_best && p.y0_pct < best_y0) {
                best_y0 = p.y0_pct;
                const auto params = agent.actor().parameters();
                best_params.assign(params.begin(), params.end());
                result.selected_episode = ep + 1;
            }
        }
    }

    if (training.keep_best && !best_params.empty()) {
        auto params = agent.actor().parameters();
        std::copy(best_params.begin(), best_params.end(), params.begin());
    }
    return result;
}

template DdpgTrainResult<float> ddpg_train<float>(const env::EnvConfig&, const DdpgConfig&, const ObjectiveSpec&,
                                                  const TrainingConfig&);
template DdpgTrainResult<double> ddpg_train<double>(const env::EnvConfig&, const DdpgConfig&, const ObjectiveSpec&,
                                                    const TrainingConfig&);

}  // namespace rlhedge::agents
