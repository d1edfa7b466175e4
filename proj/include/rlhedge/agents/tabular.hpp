#pragma once

// Tabular twin-Q learning on small finite MDPs whose transition law can be
// enumerated, used to check the moment recursions exactly.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rlhedge/agents/objective.hpp"
#include "rlhedge/rng.hpp"

namespace rlhedge::agents {

struct Branch {
    double probability = 0.0;
    double cost = 0.0;
    std::size_t next = 0;
    bool terminal = false;
};

class FiniteMdp {
public:
    virtual ~FiniteMdp() = default;
    virtual std::size_t n_states() const = 0;
    virtual std::size_t n_actions() const = 0;
    virtual std::size_t initial_state() const = 0;
    /// Full outcome distribution of taking action a in state s.
    virtual std::vector<Branch> branches(std::size_t s, std::size_t a) const = 0;
    /// Value used to break ties between actions (the action closest to it wins).
    virtual double tie_anchor(std::size_t s) const = 0;
    virtual double action_value(std::size_t a) const = 0;

    /// One outcome drawn from branches(s, a).
    Branch sample(std::size_t s, std::size_t a, CounterRng& rng) const;
};

/// Short call hedged on a recombining binomial tree with the accounting
/// formulation. Option values come from the risk-neutral tree with zero rates;
/// the real-world up probability may differ. Holdings live on a uniform grid
/// that includes 0; the state is (step, up moves, previous holding).
class BinomialHedgeMdp final : public FiniteMdp {
public:
    struct Params {
        double s0 = 100.0;
        double strike = 100.0;
        double up = 1.1;
        double down = 0.9;
        double p_up = 0.55;
        int n_steps = 2;
        double kappa = 0.01;
        std::size_t grid_points = 5;
    };

    explicit BinomialHedgeMdp(Params params);

    std::size_t n_states() const override;
    std::size_t n_actions() const override { return params_.grid_points; }
    std::size_t initial_state() const override { return encode(0, 0, 0); }
    std::vector<Branch> branches(std::size_t s, std::size_t a) const override;
    double tie_anchor(std::size_t s) const override;
    double action_value(std::size_t a) const override;

    double price(int step, int ups) const;
    /// Risk-neutral value of the long call at node (step, ups).
    double call_value(int step, int ups) const;

private:
    std::size_t encode(int step, int ups, std::size_t prev) const;
    void decode(std::size_t s, int& step, int& ups, std::size_t& prev) const;

    Params params_;
    std::vector<std::size_t> step_offset_;
};

class TabularTwinQ {
public:
    TabularTwinQ(std::size_t n_states, std::size_t n_actions, double c, double gamma);

    double q1(std::size_t s, std::size_t a) const { return q1_[s * n_actions_ + a]; }
    double q2(std::size_t s, std::size_t a) const { return q2_[s * n_actions_ + a]; }
    std::size_t visits(std::size_t s, std::size_t a) const { return visits_[s * n_actions_ + a]; }

    /// argmin_a F(Q1(s,a), Q2(s,a)); ties go to the action closest to the anchor.
    std::size_t greedy(const FiniteMdp& mdp, std::size_t s) const;

    /// One twin update with step size lr; both critics bootstrap on the same
    /// greedy next action.
    void update(const FiniteMdp& mdp, std::size_t s, std::size_t a, const Branch& outcome, double lr);

    /// Epsilon-greedy episodes with step size visits^-lr_exponent.
    void train(const FiniteMdp& mdp, std::size_t episodes, const EpsilonSchedule& schedule, CounterRng& rng,
               double lr_exponent = 0.6);

private:
    std::size_t n_states_, n_actions_;
    double c_, gamma_;
    std::vector<double> q1_, q2_;
    std::vector<std::size_t> visits_;
};

}  // namespace rlhedge::agents
