#pragma once

// Batch selection-point generation. The per-packet scalar path in spray.hpp
// is authoritative; these kernels exist for trace generation and deviation
// sweeps, where millions of consecutive counters are mapped at once. The
// AVX2 variant is selected at runtime when the CPU supports it and is
// equivalence-tested against the scalar reference bit for bit.

#include <cstddef>
#include <cstdint>

#include "pathspray/spray.hpp"

namespace pathspray::kernels {

enum class Impl { Scalar, Avx2 };

const char* to_string(Impl impl);

// True when the running CPU can execute the given implementation.
bool supported(Impl impl);

// Currently active implementation (best supported one unless overridden).
Impl active();

// Overrides dispatch, e.g. to pin the scalar reference in tests. Throws
// std::runtime_error if the implementation is not supported here.
void set_impl(Impl impl);

// Computes selection_point(method, seed, ell, j0 + i) for i in [0, count)
// into out. out must hold count values.
void fill_selection_points(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                           std::uint64_t j0, std::size_t count, std::uint32_t* out);

namespace detail {
void fill_scalar(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                 std::uint64_t j0, std::size_t count, std::uint32_t* out);
#if defined(__x86_64__) || defined(__i386__)
void fill_avx2(SprayMethod method, SpraySeed seed, std::uint32_t ell,
               std::uint64_t j0, std::size_t count, std::uint32_t* out);
#endif
}  // namespace detail

}  // namespace pathspray::kernels
