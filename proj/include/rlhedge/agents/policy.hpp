#pragma once

// Hedging policies and the rollout engine that runs a frozen policy over many
// simulated option lives.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rlhedge/agents/objective.hpp"
#include "rlhedge/hedging_env.hpp"
#include "rlhedge/nn/mlp.hpp"

namespace rlhedge::agents {

/// Market information a model-based policy needs besides the hedge state.
struct PricingContext {
    pricing::OptionSpec option;
    pricing::RateSpec rates;
    sim::ProcessSpec process;
    double current_vol = 0.2;
};

PricingContext make_context(const env::Episode& episode);

enum class PolicyKind { no_hedge, delta_bs, delta_practitioner, delta_bartlett, rl, discrete_q };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

class HedgingPolicy {
public:
    virtual ~HedgingPolicy() = default;

    virtual PolicyKind kind() const noexcept = 0;
    virtual std::string label() const = 0;

    /// Holding for one state. Delta policies throw ValidationError when
    /// `context` is null.
    virtual double act(const env::HedgeState& state, const PricingContext* context) const = 0;

    /// Holdings for many states at once; contexts may be empty for policies
    /// that ignore them. Defaults to a loop over act().
    virtual void act_batch(std::span<const env::HedgeState> states, std::span<const PricingContext> contexts,
                           std::span<double> out) const;
};

class NoHedgePolicy final : public HedgingPolicy {
public:
    PolicyKind kind() const noexcept override { return PolicyKind::no_hedge; }
    std::string label() const override { return "no_hedge"; }
    double act(const env::HedgeState&, const PricingContext*) const override { return 0.0; }
};

/// Black-Scholes delta at the context's current volatility, or at a fixed
/// volatility when one is given.
class DeltaBsPolicy final : public HedgingPolicy {
public:
    DeltaBsPolicy() = default;
    explicit DeltaBsPolicy(double fixed_sigma);
    PolicyKind kind() const noexcept override { return PolicyKind::delta_bs; }
    std::string label() const override { return "delta"; }
    double act(const env::HedgeState& state, const PricingContext* context) const override;

private:
    double fixed_sigma_ = 0.0;  // 0 = use the current volatility
};

class PractitionerDeltaPolicy final : public HedgingPolicy {
public:
    PolicyKind kind() const noexcept override { return PolicyKind::delta_practitioner; }
    std::string label() const override { return "practitioner_delta"; }
    double act(const env::HedgeState& state, const PricingContext* context) const override;
};

class BartlettDeltaPolicy final : public HedgingPolicy {
public:
    PolicyKind kind() const noexcept override { return PolicyKind::delta_bartlett; }
    std::string label() const override { return "bartlett_delta"; }
    double act(const env::HedgeState& state, const PricingContext* context) const override;
};

/// Deterministic actor network (no exploration).
class ActorPolicy final : public HedgingPolicy {
public:
    ActorPolicy(std::shared_ptr<const nn::Mlp<float>> actor, StateNormalizer normalizer, std::string label = "rl");
    PolicyKind kind() const noexcept override { return PolicyKind::rl; }
    std::string label() const override { return label_; }
    double act(const env::HedgeState& state, const PricingContext* context) const override;
    void act_batch(std::span<const env::HedgeState> states, std::span<const PricingContext> contexts,
                   std::span<double> out) const override;

    const nn::Mlp<float>& actor() const noexcept { return *actor_; }
    const StateNormalizer& normalizer() const noexcept { return normalizer_; }

private:
    std::shared_ptr<const nn::Mlp<float>> actor_;
    StateNormalizer normalizer_;
    std::string label_;
};

/// Twin-critic networks over (state, action) with greedy selection on a
/// uniform action grid.
class DiscreteQPolicy final : public HedgingPolicy {
public:
    DiscreteQPolicy(std::shared_ptr<const nn::Mlp<float>> q1, std::shared_ptr<const nn::Mlp<float>> q2,
                    StateNormalizer normalizer, std::vector<double> grid, double c, std::string label = "rl_discrete");
    PolicyKind kind() const noexcept override { return PolicyKind::discrete_q; }
    std::string label() const override { return label_; }
    double act(const env::HedgeState& state, const PricingContext* context) const override;
    void act_batch(std::span<const env::HedgeState> states, std::span<const PricingContext> contexts,
                   std::span<double> out) const override;

private:
    std::shared_ptr<const nn::Mlp<float>> q1_, q2_;
    StateNormalizer normalizer_;
    std::vector<double> grid_;
    double c_;
    std::string label_;
};

/// Index into `grid` minimising F; ties (within 1e-12) go to the grid point
/// closest to `holding_prev`.
std::size_t greedy_grid_index(std::span<const double> q1, std::span<const double> q2, std::span<const double> grid,
                              double c, double holding_prev);

/// Baseline policies by kind (rl and discrete_q need networks and throw).
std::shared_ptr<const HedgingPolicy> make_baseline_policy(PolicyKind kind);

/// Convenience wrapper for act().
double act(const HedgingPolicy& policy, const env::HedgeState& state, const PricingContext* context);

struct RolloutResult {
    std::vector<double> total_costs;  // per path, currency per option unit
    std::vector<double> premiums;     // per path
    std::uint64_t path_checksum = 0;  // hash of every simulated price (and vol) in path order
    std::size_t clamp_count = 0;
};

/// Runs `policy` on paths substream(seed, 0..n_paths-1). Paths are processed
/// in lockstep blocks so batched policies amortise their forward passes. The
/// result does not depend on `threads`.
RolloutResult rollout(const HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n_paths,
                      std::uint64_t seed, unsigned threads = 1);

}  // namespace rlhedge::agents
