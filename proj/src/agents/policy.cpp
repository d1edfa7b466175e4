#include "rlhedge/agents/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

#include "rlhedge/errors.hpp"

namespace rlhedge::agents {

namespace {

const PricingContext& need(const PricingContext* context, const char* who) {
    if (context == nullptr) throw ValidationError(std::string(who) + " needs a pricing context");
    return *context;
}

pricing::SabrParams sabr_params(const PricingContext& ctx) {
    if (const auto* s = std::get_if<sim::SabrSpec>(&ctx.process)) return {ctx.current_vol, s->vol_of_vol, s->rho};
    return {ctx.current_vol, 0.0, 0.0};
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_double(std::uint64_t h, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t path_hash(const sim::PricePath& path) {
    std::uint64_t h = kFnvOffset;
    for (double p : path.prices) h = fnv_double(h, p);
    for (double v : path.vols) h = fnv_double(h, v);
    return h;
}

}  // namespace

PricingContext make_context(const env::Episode& episode) {
    const auto& cfg = episode.config();
    return {cfg.option, cfg.rates, episode.process(), episode.current_vol()};
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::no_hedge: return "no_hedge";
        case PolicyKind::delta_bs: return "delta";
        case PolicyKind::delta_practitioner: return "practitioner_delta";
        case PolicyKind::delta_bartlett: return "bartlett_delta";
        case PolicyKind::rl: return "rl";
        case PolicyKind::discrete_q: return "rl_discrete";
    }
    return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
    for (auto k : {PolicyKind::no_hedge, PolicyKind::delta_bs, PolicyKind::delta_practitioner,
                   PolicyKind::delta_bartlett, PolicyKind::rl, PolicyKind::discrete_q}) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown policy '" + name + "'");
}

void HedgingPolicy::act_batch(std::span<const env::HedgeState> states, std::span<const PricingContext> contexts,
                              std::span<double> out) const {
    require(out.size() == states.size(), "act_batch: output size mismatch");
    require(contexts.empty() || contexts.size() == states.size(), "act_batch: context size mismatch");
    for (std::size_t i = 0; i < states.size(); ++i) out[i] = act(states[i], contexts.empty() ? nullptr : &contexts[i]);
}

DeltaBsPolicy::DeltaBsPolicy(double fixed_sigma) : fixed_sigma_(fixed_sigma) {
    require(fixed_sigma > 0.0, "delta policy volatility must be > 0");
}

double DeltaBsPolicy::act(const env::HedgeState& state, const PricingContext* context) const {
    const auto& ctx = need(context, "delta policy");
    const double sigma = fixed_sigma_ > 0.0 ? fixed_sigma_ : ctx.current_vol;
    return pricing::bs_delta(state.price, ctx.option, ctx.rates, sigma, state.tau);
}

double PractitionerDeltaPolicy::act(const env::HedgeState& state, const PricingContext* context) const {
    const auto& ctx = need(context, "practitioner delta policy");
    return pricing::practitioner_delta(state.price, ctx.option, ctx.rates, sabr_params(ctx), state.tau);
}

double BartlettDeltaPolicy::act(const env::HedgeState& state, const PricingContext* context) const {
    const auto& ctx = need(context, "Bartlett delta policy");
    return pricing::bartlett_delta(state.price, ctx.option, ctx.rates, sabr_params(ctx), state.tau);
}

ActorPolicy::ActorPolicy(std::shared_ptr<const nn::Mlp<float>> actor, StateNormalizer normalizer, std::string label)
    : actor_(std::move(actor)), normalizer_(normalizer), label_(std::move(label)) {
    require(actor_ != nullptr, "actor policy needs a network");
    require(actor_->input_size() == 3 && actor_->output_size() == 1, "actor network must map 3 inputs to 1 output");
}

double ActorPolicy::act(const env::HedgeState& state, const PricingContext*) const {
    const auto x = normalizer_(state);
    const float in[3] = {static_cast<float>(x[0]), static_cast<float>(x[1]), static_cast<float>(x[2])};
    return static_cast<double>(actor_->forward(in)[0]);
}

void ActorPolicy::act_batch(std::span<const env::HedgeState> states, std::span<const PricingContext>,
                            std::span<double> out) const {
    require(out.size() == states.size(), "act_batch: output size mismatch");
    if (states.empty()) return;
    std::vector<float> in(states.size() * 3);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto x = normalizer_(states[i]);
        for (int j = 0; j < 3; ++j) in[3 * i + j] = static_cast<float>(x[j]);
    }
    nn::Mlp<float>::Workspace ws;
    const auto y = actor_->forward_batch(in, states.size(), ws);
    for (std::size_t i = 0; i < states.size(); ++i) out[i] = static_cast<double>(y[i]);
}

DiscreteQPolicy::DiscreteQPolicy(std::shared_ptr<const nn::Mlp<float>> q1, std::shared_ptr<const nn::Mlp<float>> q2,
                                 StateNormalizer normalizer, std::vector<double> grid, double c, std::string label)
    : q1_(std::move(q1)), q2_(std::move(q2)), normalizer_(normalizer), grid_(std::move(grid)), c_(c),
      label_(std::move(label)) {
    require(q1_ && q2_, "discrete policy needs two critics");
    require(q1_->input_size() == 4 && q2_->input_size() == 4, "critics must take 4 inputs");
    require(!grid_.empty(), "action grid must be nonempty");
}

double DiscreteQPolicy::act(const env::HedgeState& state, const PricingContext* context) const {
    double out = 0.0;
    act_batch(std::span(&state, 1), context ? std::span(context, 1) : std::span<const PricingContext>{},
              std::span(&out, 1));
    return out;
}

void DiscreteQPolicy::act_batch(std::span<const env::HedgeState> states, std::span<const PricingContext>,
                                std::span<double> out) const {
    require(out.size() == states.size(), "act_batch: output size mismatch");
    const std::size_t g = grid_.size();
    const std::size_t rows = states.size() * g;
    if (rows == 0) return;
    std::vector<float> in(rows * 4);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto x = normalizer_(states[i]);
        for (std::size_t a = 0; a < g; ++a) {
            float* r = &in[4 * (i * g + a)];
            r[0] = static_cast<float>(x[0]);
            r[1] = static_cast<float>(x[1]);
            r[2] = static_cast<float>(x[2]);
            r[3] = static_cast<float>(grid_[a]);
        }
    }
    nn::Mlp<float>::Workspace w1, w2;
    const auto v1 = q1_->forward_batch(in, rows, w1);
    const auto v2 = q2_->forward_batch(in, rows, w2);
    std::vector<double> a1(g), a2(g);
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t a = 0; a < g; ++a) {
            a1[a] = v1[i * g + a];
            a2[a] = v2[i * g + a];
        }
        out[i] = grid_[greedy_grid_index(a1, a2, grid_, c_, states[i].holding_prev)];
    }
}

std::size_t greedy_grid_index(std::span<const double> q1, std::span<const double> q2, std::span<const double> grid,
                              double c, double holding_prev) {
    require(!grid.empty() && q1.size() == grid.size() && q2.size() == grid.size(), "greedy: size mismatch");
    std::size_t best = 0;
    double best_f = f_objective(q1[0], q2[0], c);
    for (std::size_t a = 1; a < grid.size(); ++a) {
        const double f = f_objective(q1[a], q2[a], c);
        const bool tie = std::abs(f - best_f) <= 1e-12 * std::max(1.0, std::abs(best_f));
        if ((!tie && f < best_f) ||
            (tie && std::abs(grid[a] - holding_prev) < std::abs(grid[best] - holding_prev))) {
            best = a;
            best_f = std::min(f, best_f);
        }
    }
    return best;
}

std::shared_ptr<const HedgingPolicy> make_baseline_policy(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::no_hedge: return std::make_shared<NoHedgePolicy>();
        case PolicyKind::delta_bs: return std::make_shared<DeltaBsPolicy>();
        case PolicyKind::delta_practitioner: return std::make_shared<PractitionerDeltaPolicy>();
        case PolicyKind::delta_bartlett: return std::make_shared<BartlettDeltaPolicy>();
        default: throw ValidationError("policy '" + to_string(kind) + "' needs trained networks");
    }
}

double act(const HedgingPolicy& policy, const env::HedgeState& state, const PricingContext* context) {
    return policy.act(state, context);
}

RolloutResult rollout(const HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n_paths,
                      std::uint64_t seed, unsigned threads) {
    env.validate();
    constexpr std::size_t kBlock = 512;
    const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;

    RolloutResult result;
    result.total_costs.resize(n_paths);
    result.premiums.resize(n_paths);
    std::vector<std::uint64_t> hashes(n_paths);
    std::vector<std::size_t> clamps(n_blocks, 0);

    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(n_paths, lo + kBlock);
        std::vector<env::Episode> eps;
        eps.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
            eps.push_back(env::Episode::from_substream(env, seed, i));
            hashes[i] = path_hash(eps.back().path());
        }
        std::vector<env::HedgeState> states(eps.size());
        std::vector<PricingContext> contexts(eps.size());
        std::vector<double> actions(eps.size());
        for (int step = 0; step < env.grid.n_steps; ++step) {
            for (std::size_t k = 0; k < eps.size(); ++k) {
                states[k] = eps[k].state();
                contexts[k] = make_context(eps[k]);
            }
            policy.act_batch(states, contexts, actions);
            for (std::size_t k = 0; k < eps.size(); ++k) eps[k].step(actions[k]);
        }
        for (std::size_t k = 0; k < eps.size(); ++k) {
            result.total_costs[lo + k] = eps[k].total_cost();
            result.premiums[lo + k] = eps[k].premium();
            clamps[b] += eps[k].clamp_count();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t b = w; b < n_blocks; b += workers) run_block(b);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::uint64_t h = kFnvOffset;
    for (auto x : hashes) {
        h ^= x;
        h *= kFnvPrime;
    }
    result.path_checksum = h;
    for (auto c : clamps) result.clamp_count += c;
    return result;
}

}  // namespace rlhedge::agents
