#include <cmath>

#include "rlhedge/simd/kernels.hpp"

namespace rlhedge::simd {
namespace {

template <typename Real>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        Real* crow = c + i * n;
        if (!accumulate)
            for (std::size_t j = 0; j < n; ++j) crow[j] = Real(0);
        for (std::size_t p = 0; p < k; ++p) {
            const Real aip = a[i * k + p];
            const Real* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

template <typename Real>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Real sum = 0;
            for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[j * k + p];
            c[i * n + j] = accumulate ? c[i * n + j] + sum : sum;
        }
    }
}

template <typename Real>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c, bool accumulate) {
    if (!accumulate)
        for (std::size_t i = 0; i < m * n; ++i) c[i] = Real(0);
    for (std::size_t p = 0; p < k; ++p) {
        const Real* arow = a + p * m;
        const Real* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const Real api = arow[i];
            Real* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += api * brow[j];
        }
    }
}

template <typename Real>
void column_sums(std::size_t m, std::size_t n, const Real* a, Real* out, bool accumulate) {
    if (!accumulate)
        for (std::size_t j = 0; j < n; ++j) out[j] = Real(0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += a[i * n + j];
}

template <typename Real>
void relu(std::size_t n, const Real* x, Real* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > Real(0) ? x[i] : Real(0);
}

template <typename Real>
void relu_backward(std::size_t n, const Real* pre, Real* grad) {
    for (std::size_t i = 0; i < n; ++i)
        if (!(pre[i] > Real(0))) grad[i] = Real(0);
}

template <typename Real>
void axpy(std::size_t n, Real alpha, const Real* x, Real* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename Real>
Real dot(std::size_t n, const Real* x, const Real* y) {
    Real sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

template <typename Real>
void lerp(std::size_t n, Real tau, const Real* source, Real* target) {
    for (std::size_t i = 0; i < n; ++i) target[i] += tau * (source[i] - target[i]);
}

template <typename Real>
void adam(std::size_t n, Real* params, const Real* grads, Real* m, Real* v, Real lr, Real beta1, Real beta2,
          Real eps, Real correction1, Real correction2) {
    for (std::size_t i = 0; i < n; ++i) {
        const Real g = grads[i];
        m[i] = beta1 * m[i] + (Real(1) - beta1) * g;
        v[i] = beta2 * v[i] + (Real(1) - beta2) * g * g;
        const Real mhat = m[i] * correction1;
        const Real vhat = v[i] * correction2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

template <typename Real>
constexpr KernelTable<Real> make_table() {
    return {Isa::scalar,   &gemm_nn<Real>, &gemm_nt<Real>, &gemm_tn<Real>, &column_sums<Real>, &relu<Real>,
            &relu_backward<Real>, &axpy<Real>, &dot<Real>,     &lerp<Real>,    &adam<Real>};
}

constexpr KernelTable<float> kScalarFloat = make_table<float>();
constexpr KernelTable<double> kScalarDouble = make_table<double>();

}  // namespace

template <>
const KernelTable<float>& scalar_kernels<float>() noexcept {
    return kScalarFloat;
}

template <>
const KernelTable<double>& scalar_kernels<double>() noexcept {
    return kScalarDouble;
}

}  // namespace rlhedge::simd
