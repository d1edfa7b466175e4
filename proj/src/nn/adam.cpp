#include "rlhedge/nn/adam.hpp"

#include <cmath>

#include "rlhedge/errors.hpp"
#include "rlhedge/simd/kernels.hpp"

namespace rlhedge::nn {

template <typename Real>
void adam_step(AdamState<Real>& state, std::span<Real> params, std::span<const Real> grads) {
    require(params.size() == grads.size(), "adam: params and grads differ in length");
    require(state.m.size() == params.size() && state.v.size() == params.size(),
            "adam: moment vectors do not match the parameters");
    const auto& cfg = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 / (1.0 - std::pow(cfg.beta1, t));
    const double correction2 = 1.0 / (1.0 - std::pow(cfg.beta2, t));
    simd::active_kernels<Real>().adam(params.size(), params.data(), grads.data(), state.m.data(), state.v.data(),
                                      static_cast<Real>(cfg.learning_rate), static_cast<Real>(cfg.beta1),
                                      static_cast<Real>(cfg.beta2), static_cast<Real>(cfg.epsilon),
                                      static_cast<Real>(correction1), static_cast<Real>(correction2));
}

template void adam_step<float>(AdamState<float>&, std::span<float>, std::span<const float>);
template void adam_step<double>(AdamState<double>&, std::span<double>, std::span<const double>);

}  // namespace rlhedge::nn
