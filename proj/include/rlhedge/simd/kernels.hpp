#pragma once

// Dense arithmetic kernels behind the neural-network layer. Every kernel has a
// portable scalar reference implementation; on x86-64 an AVX2+FMA variant is
// compiled into a separate translation unit and selected at runtime when the
// CPU supports it. The two are equivalence-tested (results agree to rounding,
// FMA contraction being the only source of difference).
//
// All matrices are dense row-major with no padding.

#include <cstddef>
#include <string_view>

namespace rlhedge::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

template <typename Real>
struct KernelTable {
    Isa isa;

    // c[m x n] = a[m x k] * b[k x n]        (c += ... when accumulate)
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c,
                    bool accumulate);
    // c[m x n] = a[m x k] * b[n x k]^T
    void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c,
                    bool accumulate);
    // c[m x n] = a[k x m]^T * b[k x n]
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c,
                    bool accumulate);
    // out[j] (+)= sum_i a[i][j] for a[m x n]
    void (*column_sums)(std::size_t m, std::size_t n, const Real* a, Real* out, bool accumulate);
    // y = max(x, 0)
    void (*relu)(std::size_t n, const Real* x, Real* y);
    // grad[i] = pre[i] > 0 ? grad[i] : 0
    void (*relu_backward)(std::size_t n, const Real* pre, Real* grad);
    // y += alpha * x
    void (*axpy)(std::size_t n, Real alpha, const Real* x, Real* y);
    Real (*dot)(std::size_t n, const Real* x, const Real* y);
    // target += tau * (source - target)
    void (*lerp)(std::size_t n, Real tau, const Real* source, Real* target);
    // Adam with bias correction; correction1 = 1/(1-beta1^t), correction2 = 1/(1-beta2^t).
    void (*adam)(std::size_t n, Real* params, const Real* grads, Real* m, Real* v, Real lr, Real beta1,
                 Real beta2, Real eps, Real correction1, Real correction2);
};

template <typename Real>
const KernelTable<Real>& scalar_kernels() noexcept;

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
template <typename Real>
const KernelTable<Real>* avx2_kernels() noexcept;

/// Best instruction set supported here, honouring the RLHEDGE_ISA environment
/// variable ("scalar" or "avx2") when set.
Isa detect_isa() noexcept;

/// Currently selected instruction set (initially detect_isa()).
Isa active_isa() noexcept;

/// Overrides the runtime selection. Returns false if `isa` is unavailable.
bool set_active_isa(Isa isa) noexcept;

template <typename Real>
const KernelTable<Real>& active_kernels() noexcept;

}  // namespace rlhedge::simd
