#include "rlhedge/nn/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "rlhedge/errors.hpp"
#include "rlhedge/simd/kernels.hpp"

namespace rlhedge::nn {

template <typename Real>
Mlp<Real>::Mlp(std::vector<std::size_t> layer_sizes, OutputActivation output)
    : sizes_(std::move(layer_sizes)), output_(output) {
    require(sizes_.size() >= 2, "mlp needs at least an input and an output layer");
    for (auto s : sizes_) require(s >= 1, "mlp layer widths must be >= 1");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(total);
        total += (sizes_[l] + 1) * sizes_[l + 1];
    }
    params_.assign(total, Real(0));
}

template <typename Real>
void Mlp<Real>::initialize(CounterRng& rng, double final_scale) {
    for (std::size_t l = 0; l < layer_count(); ++l) {
        const bool last = l + 1 == layer_count();
        const double bound = last ? final_scale : 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        const std::size_t begin = offsets_[l];
        const std::size_t end = begin + (sizes_[l] + 1) * sizes_[l + 1];
        for (std::size_t i = begin; i < end; ++i) params_[i] = static_cast<Real>(bound * (2.0 * rng.uniform() - 1.0));
    }
}

template <typename Real>
std::span<const Real> Mlp<Real>::forward_batch(std::span<const Real> inputs, std::size_t batch, Workspace& ws) const {
    require(batch >= 1, "batch must be >= 1");
    require(inputs.size() == batch * input_size(), "mlp input has the wrong dimension");
    const auto& k = simd::active_kernels<Real>();
    const std::size_t layers = layer_count();

    ws.batch = batch;
    ws.input.assign(inputs.begin(), inputs.end());
    ws.pre.resize(layers);
    ws.post.resize(layers);

    const Real* x = ws.input.data();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = sizes_[l], fan_out = sizes_[l + 1];
        const Real* w = params_.data() + weight_offset(l);
        const Real* b = params_.data() + bias_offset(l);
        auto& pre = ws.pre[l];
        auto& post = ws.post[l];
        pre.resize(batch * fan_out);
        post.resize(batch * fan_out);
        for (std::size_t r = 0; r < batch; ++r) std::copy(b, b + fan_out, pre.data() + r * fan_out);
        k.gemm_nn(batch, fan_out, fan_in, x, w, pre.data(), true);

        if (l + 1 < layers) {
            k.relu(pre.size(), pre.data(), post.data());
        } else if (output_ == OutputActivation::logistic) {
            for (std::size_t i = 0; i < pre.size(); ++i) post[i] = Real(1) / (Real(1) + std::exp(-pre[i]));
        } else {
            std::copy(pre.begin(), pre.end(), post.begin());
        }
        x = post.data();
    }
    return ws.post.back();
}

template <typename Real>
void Mlp<Real>::backward_batch(Workspace& ws, std::span<const Real> upstream, std::span<Real> param_grad,
                               std::span<Real> input_grad) const {
    const std::size_t batch = ws.batch;
    const std::size_t layers = layer_count();
    require(ws.post.size() == layers && batch >= 1, "backward requires a prior forward pass");
    require(upstream.size() == batch * output_size(), "upstream gradient has the wrong dimension");
    require(param_grad.empty() || param_grad.size() == parameter_count(), "param_grad has the wrong dimension");
    require(input_grad.empty() || input_grad.size() == batch * input_size(), "input_grad has the wrong dimension");
    const auto& k = simd::active_kernels<Real>();

    auto& delta = ws.delta;
    auto& delta_prev = ws.delta_prev;
    delta.assign(upstream.begin(), upstream.end());
    if (output_ == OutputActivation::logistic) {
        const auto& y = ws.post.back();
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= y[i] * (Real(1) - y[i]);
    }

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t fan_in = sizes_[l], fan_out = sizes_[l + 1];
        const Real* x_prev = l == 0 ? ws.input.data() : ws.post[l - 1].data();
        const Real* w = params_.data() + weight_offset(l);
        if (!param_grad.empty()) {
            k.gemm_tn(fan_in, fan_out, batch, x_prev, delta.data(), param_grad.data() + weight_offset(l), false);
            k.column_sums(batch, fan_out, delta.data(), param_grad.data() + bias_offset(l), false);
        }
        if (l == 0) {
            if (!input_grad.empty()) k.gemm_nt(batch, fan_in, fan_out, delta.data(), w, input_grad.data(), false);
            break;
        }
        delta_prev.resize(batch * fan_in);
        k.gemm_nt(batch, fan_in, fan_out, delta.data(), w, delta_prev.data(), false);
        k.relu_backward(delta_prev.size(), ws.pre[l - 1].data(), delta_prev.data());
        std::swap(delta, delta_prev);
    }
}

template <typename Real>
std::vector<Real> Mlp<Real>::forward(std::span<const Real> input) const {
    Workspace ws;
    const auto out = forward_batch(input, 1, ws);
    return {out.begin(), out.end()};
}

template <typename Real>
std::vector<Real> Mlp<Real>::backward(std::span<const Real> input, std::span<const Real> upstream) const {
    Workspace ws;
    forward_batch(input, 1, ws);
    std::vector<Real> grad(parameter_count());
    backward_batch(ws, upstream, grad, {});
    return grad;
}

template <typename Real>
void soft_update(std::span<Real> target, std::span<const Real> source, double tau) {
    require(tau > 0.0 && tau <= 1.0, "soft update tau must lie in (0, 1]");
    require(target.size() == source.size(), "soft update shapes differ");
    if (tau == 1.0) {
        std::copy(source.begin(), source.end(), target.begin());
        return;
    }
    simd::active_kernels<Real>().lerp(target.size(), static_cast<Real>(tau), source.data(), target.data());
}

template class Mlp<float>;
template class Mlp<double>;
template void soft_update<float>(std::span<float>, std::span<const float>, double);
template void soft_update<double>(std::span<double>, std::span<const double>, double);

}  // namespace rlhedge::nn
