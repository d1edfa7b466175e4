#pragma once

// Proportional prioritized experience replay over a FIFO ring. Item i is drawn
// with probability p_i^alpha / sum_j p_j^alpha; importance weights
// (N P(i))^-beta are normalised by the largest weight over the whole buffer.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rlhedge/rng.hpp"

namespace rlhedge::nn {

/// Added to |TD error| when it is written back as a priority.
inline constexpr double kPriorityFloor = 1e-6;

struct Transition {
    std::array<double, 3> state{};  // normalised hedge state
    double action = 0.0;
    double cost = 0.0;
    std::array<double, 3> next_state{};
    bool terminal = false;
};

struct SampledBatch {
    std::vector<std::size_t> indices;
    std::vector<double> weights;
};

class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, double alpha);

    /// Inserts with the largest priority seen so far (1 for an empty buffer).
    void push(const Transition& t);
    void push(const Transition& t, double priority);

    /// Independent draws with replacement. Throws StateError when empty.
    SampledBatch sample(std::size_t batch_size, double beta, CounterRng& rng) const;

    /// Priorities must be > 0.
    void update_priorities(std::span<const std::size_t> indices, std::span<const double> priorities);

    std::size_t size() const noexcept { return size_; }
    std::size_t capacity() const noexcept { return capacity_; }
    double alpha() const noexcept { return alpha_; }
    const Transition& at(std::size_t i) const { return items_.at(i); }
    double priority(std::size_t i) const { return priorities_.at(i); }
    double max_priority() const noexcept { return max_priority_; }
    /// Current sampling probability of slot i.
    double probability(std::size_t i) const;

private:
    void set_leaf(std::size_t slot, double priority);
    std::size_t find_prefix(double mass) const;

    std::size_t capacity_;
    double alpha_;
    std::size_t leaves_ = 1;
    std::vector<Transition> items_;
    std::vector<double> priorities_;
    std::vector<double> sum_tree_;
    std::vector<double> min_tree_;
    std::size_t next_ = 0;
    std::size_t size_ = 0;
    double max_priority_ = 1.0;
};

}  // namespace rlhedge::nn
