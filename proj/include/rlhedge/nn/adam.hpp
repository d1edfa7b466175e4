#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rlhedge::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename Real>
struct AdamState {
    AdamConfig config;
    std::vector<Real> m;
    std::vector<Real> v;
    std::uint64_t step = 0;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, Real(0)), v(n, Real(0)) {}
};

/// One bias-corrected Adam update of `params` in place.
template <typename Real>
void adam_step(AdamState<Real>& state, std::span<Real> params, std::span<const Real> grads);

}  // namespace rlhedge::nn
