#include <atomic>
#include <cstdlib>
#include <string_view>

#include "rlhedge/simd/kernels.hpp"

namespace rlhedge::simd {

#if defined(RLHEDGE_HAVE_AVX2)
namespace detail {
const KernelTable<float>& avx2_table_float() noexcept;
const KernelTable<double>& avx2_table_double() noexcept;
}  // namespace detail
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(RLHEDGE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<int>& active_slot() noexcept {
    static std::atomic<int> slot{static_cast<int>(detect_isa())};
    return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

template <>
const KernelTable<float>* avx2_kernels<float>() noexcept {
#if defined(RLHEDGE_HAVE_AVX2)
    if (cpu_has_avx2()) return &detail::avx2_table_float();
#endif
    return nullptr;
}

template <>
const KernelTable<double>* avx2_kernels<double>() noexcept {
#if defined(RLHEDGE_HAVE_AVX2)
    if (cpu_has_avx2()) return &detail::avx2_table_double();
#endif
    return nullptr;
}

Isa detect_isa() noexcept {
    if (const char* env = std::getenv("RLHEDGE_ISA")) {
        const std::string_view requested(env);
        if (requested == "scalar") return Isa::scalar;
        if (requested == "avx2" && cpu_has_avx2()) return Isa::avx2;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

Isa active_isa() noexcept { return static_cast<Isa>(active_slot().load(std::memory_order_relaxed)); }

bool set_active_isa(Isa isa) noexcept {
    if (isa == Isa::avx2 && !cpu_has_avx2()) return false;
    active_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
    return true;
}

template <typename Real>
const KernelTable<Real>& active_kernels() noexcept {
    if (active_isa() == Isa::avx2) {
        if (const auto* table = avx2_kernels<Real>()) return *table;
    }
    return scalar_kernels<Real>();
}

template const KernelTable<float>& active_kernels<float>() noexcept;
template const KernelTable<double>& active_kernels<double>() noexcept;

}  // namespace rlhedge::simd
