// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include <immintrin.h>

#include <cmath>
#include <vector>

#include "rlhedge/simd/kernels.hpp"

namespace rlhedge::simd {
namespace {

template <typename Real>
struct V;

template <>
struct V<float> {
    using type = __m256;
    static constexpr std::size_t width = 8;
    static type load(const float* p) { return _mm256_loadu_ps(p); }
    static void store(float* p, type x) { _mm256_storeu_ps(p, x); }
    static type set1(float x) { return _mm256_set1_ps(x); }
    static type zero() { return _mm256_setzero_ps(); }
    static type fmadd(type a, type b, type c) { return _mm256_fmadd_ps(a, b, c); }
    static type add(type a, type b) { return _mm256_add_ps(a, b); }
    static type sub(type a, type b) { return _mm256_sub_ps(a, b); }
    static type mul(type a, type b) { return _mm256_mul_ps(a, b); }
    static type div(type a, type b) { return _mm256_div_ps(a, b); }
    static type sqrt(type a) { return _mm256_sqrt_ps(a); }
    static type max(type a, type b) { return _mm256_max_ps(a, b); }
    static type positive_mask(type a) { return _mm256_cmp_ps(a, zero(), _CMP_GT_OQ); }
    static type and_(type a, type b) { return _mm256_and_ps(a, b); }
    static float hsum(type x) {
        const __m128 lo = _mm256_castps256_ps128(x);
        const __m128 hi = _mm256_extractf128_ps(x, 1);
        __m128 s = _mm_add_ps(lo, hi);
        s = _mm_add_ps(s, _mm_movehl_ps(s, s));
        s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
        return _mm_cvtss_f32(s);
    }
};

template <>
struct V<double> {
    using type = __m256d;
    static constexpr std::size_t width = 4;
    static type load(const double* p) { return _mm256_loadu_pd(p); }
    static void store(double* p, type x) { _mm256_storeu_pd(p, x); }
    static type set1(double x) { return _mm256_set1_pd(x); }
    static type zero() { return _mm256_setzero_pd(); }
    static type fmadd(type a, type b, type c) { return _mm256_fmadd_pd(a, b, c); }
    static type add(type a, type b) { return _mm256_add_pd(a, b); }
    static type sub(type a, type b) { return _mm256_sub_pd(a, b); }
    static type mul(type a, type b) { return _mm256_mul_pd(a, b); }
    static type div(type a, type b) { return _mm256_div_pd(a, b); }
    static type sqrt(type a) { return _mm256_sqrt_pd(a); }
    static type max(type a, type b) { return _mm256_max_pd(a, b); }
    static type positive_mask(type a) { return _mm256_cmp_pd(a, zero(), _CMP_GT_OQ); }
    static type and_(type a, type b) { return _mm256_and_pd(a, b); }
    static double hsum(type x) {
        const __m128d lo = _mm256_castpd256_pd128(x);
        const __m128d hi = _mm256_extractf128_pd(x, 1);
        const __m128d s = _mm_add_pd(lo, hi);
        return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
    }
};

template <typename Real>
Real dot(std::size_t n, const Real* x, const Real* y) {
    using Vec = V<Real>;
    constexpr std::size_t W = Vec::width;
    auto acc0 = Vec::zero();
    auto acc1 = Vec::zero();
    std::size_t i = 0;
    for (; i + 2 * W <= n; i += 2 * W) {
        acc0 = Vec::fmadd(Vec::load(x + i), Vec::load(y + i), acc0);
        acc1 = Vec::fmadd(Vec::load(x + i + W), Vec::load(y + i + W), acc1);
    }
    for (; i + W <= n; i += W) acc0 = Vec::fmadd(Vec::load(x + i), Vec::load(y + i), acc0);
    Real sum = Vec::hsum(Vec::add(acc0, acc1));
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

template <typename Real>
void axpy(std::size_t n, Real alpha, const Real* x, Real* y) {
    using Vec = V<Real>;
    constexpr std::size_t W = Vec::width;
    const auto va = Vec::set1(alpha);
    std::size_t i = 0;
    for (; i + W <= n; i += W) Vec::store(y + i, Vec::fmadd(va, Vec::load(x + i), Vec::load(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// Core of gemm_nn / gemm_tn: c[i][j] += sum_p A(i, p) * b[p][j], where A(i, p)
// is read as a[i * a_row + p * a_col]. Register block: 4 rows x 2 vectors.
template <typename Real>
void gemm_broadcast(std::size_t m, std::size_t n, std::size_t k, const Real* a, std::size_t a_row,
                    std::size_t a_col, const Real* b, Real* c, bool accumulate) {
    using Vec = V<Real>;
    using T = typename Vec::type;
    constexpr std::size_t W = Vec::width;

    if (!accumulate)
        for (std::size_t i = 0; i < m * n; ++i) c[i] = Real(0);

    std::size_t j = 0;
    for (; j + 2 * W <= n; j += 2 * W) {
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            T acc[4][2];
            for (std::size_t r = 0; r < 4; ++r) {
                acc[r][0] = Vec::load(c + (i + r) * n + j);
                acc[r][1] = Vec::load(c + (i + r) * n + j + W);
            }
            for (std::size_t p = 0; p < k; ++p) {
                const T b0 = Vec::load(b + p * n + j);
                const T b1 = Vec::load(b + p * n + j + W);
                for (std::size_t r = 0; r < 4; ++r) {
                    const T ar = Vec::set1(a[(i + r) * a_row + p * a_col]);
                    acc[r][0] = Vec::fmadd(ar, b0, acc[r][0]);
                    acc[r][1] = Vec::fmadd(ar, b1, acc[r][1]);
                }
            }
            for (std::size_t r = 0; r < 4; ++r) {
                Vec::store(c + (i + r) * n + j, acc[r][0]);
                Vec::store(c + (i + r) * n + j + W, acc[r][1]);
            }
        }
        for (; i < m; ++i) {
            T acc0 = Vec::load(c + i * n + j);
            T acc1 = Vec::load(c + i * n + j + W);
            for (std::size_t p = 0; p < k; ++p) {
                const T ar = Vec::set1(a[i * a_row + p * a_col]);
                acc0 = Vec::fmadd(ar, Vec::load(b + p * n + j), acc0);
                acc1 = Vec::fmadd(ar, Vec::load(b + p * n + j + W), acc1);
            }
            Vec::store(c + i * n + j, acc0);
            Vec::store(c + i * n + j + W, acc1);
        }
    }
    for (; j + W <= n; j += W) {
        for (std::size_t i = 0; i < m; ++i) {
            T acc = Vec::load(c + i * n + j);
            for (std::size_t p = 0; p < k; ++p)
                acc = Vec::fmadd(Vec::set1(a[i * a_row + p * a_col]), Vec::load(b + p * n + j), acc);
            Vec::store(c + i * n + j, acc);
        }
    }
    for (; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            Real sum = c[i * n + j];
            for (std::size_t p = 0; p < k; ++p) sum += a[i * a_row + p * a_col] * b[p * n + j];
            c[i * n + j] = sum;
        }
    }
}

template <typename Real>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c, bool accumulate) {
    if (n == 1) {
        // Matrix-vector product: one dot per row.
        for (std::size_t i = 0; i < m; ++i) {
            const Real d = dot(k, a + i * k, b);
            c[i] = accumulate ? c[i] + d : d;
        }
        return;
    }
    gemm_broadcast(m, n, k, a, k, 1, b, c, accumulate);
}

template <typename Real>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c, bool accumulate) {
    if (n == 1) {
        // c[i] = sum_p a[p][i] * b[p]: accumulate scaled rows of a.
        if (!accumulate)
            for (std::size_t i = 0; i < m; ++i) c[i] = Real(0);
        for (std::size_t p = 0; p < k; ++p) axpy(m, b[p], a + p * m, c);
        return;
    }
    gemm_broadcast(m, n, k, a, 1, m, b, c, accumulate);
}

template <typename Real>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b, Real* c, bool accumulate) {
    if (k == 1) {
        // Outer product.
        for (std::size_t i = 0; i < m; ++i) {
            Real* crow = c + i * n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) crow[j] = Real(0);
            axpy(n, a[i], b, crow);
        }
        return;
    }
    // Transpose b (n x k) into k x n scratch and reuse the broadcast kernel.
    thread_local std::vector<Real> scratch;
    scratch.resize(n * k);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) scratch[p * n + j] = b[j * k + p];
    gemm_broadcast(m, n, k, a, k, 1, scratch.data(), c, accumulate);
}

template <typename Real>
void column_sums(std::size_t m, std::size_t n, const Real* a, Real* out, bool accumulate) {
    if (!accumulate)
        for (std::size_t j = 0; j < n; ++j) out[j] = Real(0);
    for (std::size_t i = 0; i < m; ++i) axpy(n, Real(1), a + i * n, out);
}

template <typename Real>
void relu(std::size_t n, const Real* x, Real* y) {
    using Vec = V<Real>;
    constexpr std::size_t W = Vec::width;
    const auto z = Vec::zero();
    std::size_t i = 0;
    for (; i + W <= n; i += W) Vec::store(y + i, Vec::max(Vec::load(x + i), z));
    for (; i < n; ++i) y[i] = x[i] > Real(0) ? x[i] : Real(0);
}

template <typename Real>
void relu_backward(std::size_t n, const Real* pre, Real* grad) {
    using Vec = V<Real>;
    constexpr std::size_t W = Vec::width;
    std::size_t i = 0;
    for (; i + W <= n; i += W)
        Vec::store(grad + i, Vec::and_(Vec::positive_mask(Vec::load(pre + i)), Vec::load(grad + i)));
    for (; i < n; ++i)
        if (!(pre[i] > Real(0))) grad[i] = Real(0);
}

template <typename Real>
void lerp(std::size_t n, Real tau, const Real* source, Real* target) {
    using Vec = V<Real>;
    constexpr std::size_t W = Vec::width;
    const auto vt = Vec::set1(tau);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        const auto t = Vec::load(target + i);
        Vec::store(target + i, Vec::fmadd(vt, Vec::sub(Vec::load(source + i), t), t));
    }
    for (; i < n; ++i) target[i] += tau * (source[i] - target[i]);
}

template <typename Real>
void adam(std::size_t n, Real* params, const Real* grads, Real* m, Real* v, Real lr, Real beta1, Real beta2,
          Real eps, Real correction1, Real correction2) {
    using Vec = V<Real>;
    constexpr std::size_t W = Vec::width;
    const auto b1 = Vec::set1(beta1), b1c = Vec::set1(Real(1) - beta1);
    const auto b2 = Vec::set1(beta2), b2c = Vec::set1(Real(1) - beta2);
    const auto c1 = Vec::set1(correction1), c2 = Vec::set1(correction2);
    const auto vlr = Vec::set1(lr), veps = Vec::set1(eps);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        const auto g = Vec::load(grads + i);
        const auto mi = Vec::add(Vec::mul(b1, Vec::load(m + i)), Vec::mul(b1c, g));
        const auto vi = Vec::add(Vec::mul(b2, Vec::load(v + i)), Vec::mul(b2c, Vec::mul(g, g)));
        Vec::store(m + i, mi);
        Vec::store(v + i, vi);
        const auto step = Vec::div(Vec::mul(vlr, Vec::mul(mi, c1)), Vec::add(Vec::sqrt(Vec::mul(vi, c2)), veps));
        Vec::store(params + i, Vec::sub(Vec::load(params + i), step));
    }
    for (; i < n; ++i) {
        const Real g = grads[i];
        m[i] = beta1 * m[i] + (Real(1) - beta1) * g;
        v[i] = beta2 * v[i] + (Real(1) - beta2) * g * g;
        params[i] -= lr * (m[i] * correction1) / (std::sqrt(v[i] * correction2) + eps);
    }
}

template <typename Real>
constexpr KernelTable<Real> make_table() {
    return {Isa::avx2,         &gemm_nn<Real>, &gemm_nt<Real>, &gemm_tn<Real>, &column_sums<Real>, &relu<Real>,
            &relu_backward<Real>, &axpy<Real>, &dot<Real>,     &lerp<Real>,    &adam<Real>};
}

constexpr KernelTable<float> kAvx2Float = make_table<float>();
constexpr KernelTable<double> kAvx2Double = make_table<double>();

}  // namespace

namespace detail {
const KernelTable<float>& avx2_table_float() noexcept { return kAvx2Float; }
const KernelTable<double>& avx2_table_double() noexcept { return kAvx2Double; }
}  // namespace detail

}  // namespace rlhedge::simd
