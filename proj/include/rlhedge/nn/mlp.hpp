#pragma once

// Fully connected feed-forward network with ReLU hidden layers and explicit
// reverse-mode gradients. Parameters live in one flat vector laid out layer by
// layer as W (fan_in x fan_out, row-major) followed by b (fan_out).

#include <cstddef>
#include <span>
#include <vector>

#include "rlhedge/rng.hpp"

namespace rlhedge::nn {

enum class OutputActivation { identity, logistic };

template <typename Real>
class Mlp {
public:
    /// Activations of one batched forward pass, kept for the backward pass.
    struct Workspace {
        std::size_t batch = 0;
        std::vector<Real> input;
        std::vector<std::vector<Real>> pre;   // per layer, batch x fan_out
        std::vector<std::vector<Real>> post;  // per layer, batch x fan_out
        std::vector<Real> delta, delta_prev;
    };

    Mlp() = default;
    Mlp(std::vector<std::size_t> layer_sizes, OutputActivation output);

    const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    OutputActivation output_activation() const noexcept { return output_; }
    std::size_t input_size() const noexcept { return sizes_.front(); }
    std::size_t output_size() const noexcept { return sizes_.back(); }
    std::size_t layer_count() const noexcept { return sizes_.size() - 1; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    std::span<Real> parameters() noexcept { return params_; }
    std::span<const Real> parameters() const noexcept { return params_; }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
    /// layer is drawn from Uniform(-final_scale, final_scale).
    void initialize(CounterRng& rng, double final_scale = 3e-3);

    /// Batched forward; `inputs` is batch x input_size row-major. Returns a
    /// view of the batch x output_size result stored in `ws`.
    std::span<const Real> forward_batch(std::span<const Real> inputs, std::size_t batch, Workspace& ws) const;

    /// Reverse pass through the activations in `ws` for upstream gradient
    /// dL/d(output) (batch x output_size). Writes the parameter gradient into
    /// `param_grad` (skipped if empty) and dL/d(input) into `input_grad`
    /// (skipped if empty).
    void backward_batch(Workspace& ws, std::span<const Real> upstream, std::span<Real> param_grad,
                        std::span<Real> input_grad) const;

    std::vector<Real> forward(std::span<const Real> input) const;
    /// Parameter gradient of <upstream, forward(input)>.
    std::vector<Real> backward(std::span<const Real> input, std::span<const Real> upstream) const;

private:
    std::size_t weight_offset(std::size_t layer) const noexcept { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const noexcept {
        return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
    }

    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
    OutputActivation output_ = OutputActivation::identity;
    std::vector<Real> params_;
};

/// target <- (1 - tau) target + tau source, elementwise; tau in (0, 1].
template <typename Real>
void soft_update(std::span<Real> target, std::span<const Real> source, double tau);

extern template class Mlp<float>;
extern template class Mlp<double>;

}  // namespace rlhedge::nn
