#include "pathspray/kernels.hpp"

#include <stdexcept>
#include <string>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace pathspray::kernels {

namespace detail {

void fill_scalar(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                 std::uint64_t j0, std::size_t count, std::uint32_t* out) {
    for (std::size_t i = 0; i < count; ++i)
        out[i] = selection_point(method, seed, ell, j0 + i);
}

#if defined(__x86_64__) || defined(__i386__)

namespace {

// Bit-reverses each 32-bit lane: nibble LUT swap within bytes, then a byte
// swap within the lane.
__attribute__((target("avx2"))) inline __m256i reverse_bits32(__m256i v) {
    const __m256i nibble = _mm256_set1_epi8(0x0f);
    const __m256i lut = _mm256_setr_epi8(
        0x0, 0x8, 0x4, 0xc, 0x2, 0xa, 0x6, 0xe, 0x1, 0x9, 0x5, 0xd, 0x3, 0xb, 0x7, 0xf,
        0x0, 0x8, 0x4, 0xc, 0x2, 0xa, 0x6, 0xe, 0x1, 0x9, 0x5, 0xd, 0x3, 0xb, 0x7, 0xf);
    const __m256i bswap = _mm256_setr_epi8(
        3, 2, 1, 0, 7, 6, 5, 4, 11, 10, 9, 8, 15, 14, 13, 12,
        3, 2, 1, 0, 7, 6, 5, 4, 11, 10, 9, 8, 15, 14, 13, 12);
    __m256i lo = _mm256_and_si256(v, nibble);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi32(v, 4), nibble);
    __m256i bytes = _mm256_or_si256(_mm256_slli_epi32(_mm256_shuffle_epi8(lut, lo), 4),
                                    _mm256_shuffle_epi8(lut, hi));
    return _mm256_shuffle_epi8(bytes, bswap);
}

}  // namespace

__attribute__((target("avx2"))) void fill_avx2(SprayMethod method, SpraySeed seed,
                                               std::uint32_t ell, std::uint64_t j0,
                                               std::size_t count, std::uint32_t* out) {
    const std::uint32_t mask32 =
        ell == 32 ? 0xffffffffu : ((std::uint32_t{1} << ell) - 1);
    const __m128i shift = _mm_cvtsi32_si128(static_cast<int>(32 - ell));
    const __m256i mask = _mm256_set1_epi32(static_cast<int>(mask32));
    const __m256i sa = _mm256_set1_epi32(static_cast<int>(seed.sa));
    const __m256i sb = _mm256_set1_epi32(static_cast<int>(seed.sb));
    const __m256i lanes = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    const __m256i step = _mm256_set1_epi32(8);

    // Only the low ell <= 32 bits of j matter, so wrapping 32-bit lane
    // arithmetic matches the 64-bit counter exactly.
    __m256i j = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(j0)), lanes);

    std::size_t i = 0;
    for (; i + 8 <= count; i += 8, j = _mm256_add_epi32(j, step)) {
        __m256i point;
        switch (method) {
            case SprayMethod::Plain:
                point = _mm256_srl_epi32(reverse_bits32(j), shift);
                break;
            case SprayMethod::Shuffle1: {
                __m256i x = _mm256_add_epi32(sa, _mm256_mullo_epi32(j, sb));
                point = _mm256_srl_epi32(reverse_bits32(x), shift);
                break;
            }
            case SprayMethod::Shuffle2: {
                __m256i t = _mm256_srl_epi32(reverse_bits32(j), shift);
                point = _mm256_and_si256(
                    _mm256_add_epi32(sa, _mm256_mullo_epi32(sb, t)), mask);
                break;
            }
        }
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), point);
    }
    if (i < count) fill_scalar(method, seed, ell, j0 + i, count - i, out + i);
}

#endif  // x86

}  // namespace detail

namespace {

Impl pick_best() {
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2")) return Impl::Avx2;
#endif
    return Impl::Scalar;
}

Impl& current() {
    static Impl impl = pick_best();
    return impl;
}

}  // namespace

const char* to_string(Impl impl) {
    switch (impl) {
        case Impl::Scalar: return "scalar";
        case Impl::Avx2: return "avx2";
    }
    return "?";
}

bool supported(Impl impl) {
    switch (impl) {
        case Impl::Scalar:
            return true;
        case Impl::Avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
    }
    return false;
}

Impl active() { return current(); }

void set_impl(Impl impl) {
    if (!supported(impl))
        throw std::runtime_error(std::string("kernel impl not supported here: ") +
                                 to_string(impl));
    current() = impl;
}

void fill_selection_points(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                           std::uint64_t j0, std::size_t count, std::uint32_t* out) {
    validate_seed(seed, ell);
    if (count == 0) return;
    switch (current()) {
#if defined(__x86_64__) || defined(__i386__)
        case Impl::Avx2:
            detail::fill_avx2(method, seed, ell, j0, count, out);
            return;
#endif
        default:
            detail::fill_scalar(method, seed, ell, j0, count, out);
            return;
    }
}

}  // namespace pathspray::kernels
