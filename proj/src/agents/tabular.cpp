#include "rlhedge/agents/tabular.hpp"

#include <algorithm>
#include <cmath>

#include "rlhedge/agents/policy.hpp"
#include "rlhedge/errors.hpp"

namespace rlhedge::agents {

Branch FiniteMdp::sample(std::size_t s, std::size_t a, CounterRng& rng) const {
    const auto bs = branches(s, a);
    require(!bs.empty(), "state-action has no outcomes");
    double u = rng.uniform();
    for (const auto& b : bs) {
        if (u < b.probability) return b;
        u -= b.probability;
    }
    return bs.back();
}

BinomialHedgeMdp::BinomialHedgeMdp(Params params) : params_(params) {
    require(params_.s0 > 0.0 && params_.strike > 0.0, "binomial prices must be > 0");
    require(params_.down > 0.0 && params_.down < 1.0 && params_.up > 1.0, "binomial moves need down < 1 < up");
    require(params_.p_up > 0.0 && params_.p_up < 1.0, "binomial p_up must lie in (0, 1)");
    require(params_.n_steps >= 1, "binomial tree needs >= 1 step");
    require(params_.kappa >= 0.0, "kappa must be >= 0");
    require(params_.grid_points >= 2, "binomial holding grid needs >= 2 points");
    std::size_t offset = 0;
    for (int i = 0; i < params_.n_steps; ++i) {
        step_offset_.push_back(offset);
        offset += static_cast<std::size_t>(i + 1) * params_.grid_points;
    }
    step_offset_.push_back(offset);  // terminal state
}

std::size_t BinomialHedgeMdp::n_states() const { return step_offset_.back() + 1; }

std::size_t BinomialHedgeMdp::encode(int step, int ups, std::size_t prev) const {
    if (step >= params_.n_steps) return step_offset_.back();
    return step_offset_[static_cast<std::size_t>(step)] + static_cast<std::size_t>(ups) * params_.grid_points + prev;
}

void BinomialHedgeMdp::decode(std::size_t s, int& step, int& ups, std::size_t& prev) const {
    require(s < step_offset_.back(), "terminal state has no actions");
    step = 0;
    while (s >= step_offset_[static_cast<std::size_t>(step) + 1]) ++step;
    const std::size_t local = s - step_offset_[static_cast<std::size_t>(step)];
    ups = static_cast<int>(local / params_.grid_points);
    prev = local % params_.grid_points;
}

double BinomialHedgeMdp::action_value(std::size_t a) const {
    return static_cast<double>(a) / static_cast<double>(params_.grid_points - 1);
}

double BinomialHedgeMdp::tie_anchor(std::size_t s) const {
    if (s >= step_offset_.back()) return 0.0;
    int step = 0, ups = 0;
    std::size_t prev = 0;
    decode(s, step, ups, prev);
    return action_value(prev);
}

double BinomialHedgeMdp::price(int step, int ups) const {
    return params_.s0 * std::pow(params_.up, ups) * std::pow(params_.down, step - ups);
}

double BinomialHedgeMdp::call_value(int step, int ups) const {
    const double q = (1.0 - params_.down) / (params_.up - params_.down);
    const int remaining = params_.n_steps - step;
    double value = 0.0;
    for (int k = 0; k <= remaining; ++k) {
        const double prob = std::exp(std::lgamma(remaining + 1.0) - std::lgamma(k + 1.0) -
                                     std::lgamma(remaining - k + 1.0)) *
                            std::pow(q, k) * std::pow(1.0 - q, remaining - k);
        value += prob * std::max(price(params_.n_steps, ups + k) - params_.strike, 0.0);
    }
    return value;
}

std::vector<Branch> BinomialHedgeMdp::branches(std::size_t s, std::size_t a) const {
    require(a < params_.grid_points, "action out of range");
    int step = 0, ups = 0;
    std::size_t prev = 0;
    decode(s, step, ups, prev);
    const double h = action_value(a);
    const double h_prev = action_value(prev);
    const double spot = price(step, ups);
    const double v_now = -call_value(step, ups);
    const bool last = step + 1 == params_.n_steps;

    std::vector<Branch> out;
    for (int up = 1; up >= 0; --up) {
        const int ups_next = ups + up;
        const double spot_next = price(step + 1, ups_next);
        const double v_next = -call_value(step + 1, ups_next);
        double cost = params_.kappa * spot * std::abs(h - h_prev) - (v_next - v_now + h * (spot_next - spot));
        if (last) cost += params_.kappa * spot_next * h;
        out.push_back({up ? params_.p_up : 1.0 - params_.p_up, cost, encode(step + 1, ups_next, a), last});
    }
    return out;
}

TabularTwinQ::TabularTwinQ(std::size_t n_states, std::size_t n_actions, double c, double gamma)
    : n_states_(n_states), n_actions_(n_actions), c_(c), gamma_(gamma), q1_(n_states * n_actions, 0.0),
      q2_(n_states * n_actions, 0.0), visits_(n_states * n_actions, 0) {
    require(n_states >= 1 && n_actions >= 1, "tabular learner needs states and actions");
    ObjectiveSpec{c, gamma}.validate();
}

std::size_t TabularTwinQ::greedy(const FiniteMdp& mdp, std::size_t s) const {
    std::vector<double> a1(n_actions_), a2(n_actions_), grid(n_actions_);
    for (std::size_t a = 0; a < n_actions_; ++a) {
        a1[a] = q1(s, a);
        a2[a] = q2(s, a);
        grid[a] = mdp.action_value(a);
    }
    return greedy_grid_index(a1, a2, grid, c_, mdp.tie_anchor(s));
}

void TabularTwinQ::update(const FiniteMdp& mdp, std::size_t s, std::size_t a, const Branch& outcome, double lr) {
    const auto y = critic_targets(outcome.cost, outcome.terminal, gamma_, [&] {
        const std::size_t best = greedy(mdp, outcome.next);
        return std::array<double, 2>{q1(outcome.next, best), q2(outcome.next, best)};
    });
    const std::size_t i = s * n_actions_ + a;
    q1_[i] += lr * (y.y1 - q1_[i]);
    q2_[i] += lr * (y.y2 - q2_[i]);
}

void TabularTwinQ::train(const FiniteMdp& mdp, std::size_t episodes, const EpsilonSchedule& schedule,
                         CounterRng& rng, double lr_exponent) {
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        const double epsilon = schedule.at(ep);
        std::size_t s = mdp.initial_state();
        for (;;) {
            const std::size_t a =
                rng.uniform() < epsilon ? static_cast<std::size_t>(rng.uniform_index(n_actions_)) : greedy(mdp, s);
            const Branch outcome = mdp.sample(s, a, rng);
            const std::size_t i = s * n_actions_ + a;
            ++visits_[i];
            update(mdp, s, a, outcome, std::pow(static_cast<double>(visits_[i]), -lr_exponent));
            if (outcome.terminal) break;
            s = outcome.next;
        }
    }
}

}  // namespace rlhedge::agents
