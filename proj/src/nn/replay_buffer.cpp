#include "rlhedge/nn/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlhedge/errors.hpp"

namespace rlhedge::nn {

ReplayBuffer::ReplayBuffer(std::size_t capacity, double alpha) : capacity_(capacity), alpha_(alpha) {
    require(capacity >= 1, "replay capacity must be >= 1");
    require(std::isfinite(alpha) && alpha >= 0.0, "replay alpha must be >= 0");
    while (leaves_ < capacity) leaves_ <<= 1;
    items_.resize(capacity);
    priorities_.assign(capacity, 0.0);
    sum_tree_.assign(2 * leaves_, 0.0);
    min_tree_.assign(2 * leaves_, std::numeric_limits<double>::infinity());
}

void ReplayBuffer::set_leaf(std::size_t slot, double priority) {
    priorities_[slot] = priority;
    const double mass = std::pow(priority, alpha_);
    std::size_t node = leaves_ + slot;
    sum_tree_[node] = mass;
    min_tree_[node] = mass;
    for (node >>= 1; node >= 1; node >>= 1) {
        sum_tree_[node] = sum_tree_[2 * node] + sum_tree_[2 * node + 1];
        min_tree_[node] = std::min(min_tree_[2 * node], min_tree_[2 * node + 1]);
    }
}

void ReplayBuffer::push(const Transition& t) { push(t, max_priority_); }

void ReplayBuffer::push(const Transition& t, double priority) {
    require(std::isfinite(priority) && priority > 0.0, "replay priority must be > 0");
    items_[next_] = t;
    set_leaf(next_, priority);
    max_priority_ = std::max(max_priority_, priority);
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::find_prefix(double mass) const {
    std::size_t node = 1;
    while (node < leaves_) {
        const std::size_t left = 2 * node;
        if (mass < sum_tree_[left] || sum_tree_[left + 1] == 0.0) {
            node = left;
        } else {
            mass -= sum_tree_[left];
            node = left + 1;
        }
    }
    return std::min(node - leaves_, size_ - 1);
}

double ReplayBuffer::probability(std::size_t i) const {
    require(i < size_, "replay index out of range");
    return sum_tree_[leaves_ + i] / sum_tree_[1];
}

SampledBatch ReplayBuffer::sample(std::size_t batch_size, double beta, CounterRng& rng) const {
    if (size_ == 0) throw StateError("cannot sample from an empty replay buffer");
    const double total = sum_tree_[1];
    const double min_prob = min_tree_[1] / total;
    const double n = static_cast<double>(size_);
    const double max_weight = std::pow(n * min_prob, -beta);

    SampledBatch batch;
    batch.indices.resize(batch_size);
    batch.weights.resize(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        const std::size_t idx = find_prefix(rng.uniform() * total);
        const double prob = sum_tree_[leaves_ + idx] / total;
        batch.indices[b] = idx;
        batch.weights[b] = std::pow(n * prob, -beta) / max_weight;
    }
    return batch;
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices, std::span<const double> priorities) {
    require(indices.size() == priorities.size(), "replay update: length mismatch");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        require(indices[k] < size_, "replay update: index out of range");
        require(std::isfinite(priorities[k]) && priorities[k] > 0.0, "replay priority must be > 0");
        set_leaf(indices[k], priorities[k]);
        max_priority_ = std::max(max_priority_, priorities[k]);
    }
}

}  // namespace rlhedge::nn
