#pragma once

// Deterministic per-packet path selection.
//
// An unbounded counter j is mapped to a selection point in {0,...,m-1}
// (m = 2^ell) by reversing the ell low bits, optionally combined with a
// seeded affine map so that co-located sources walk different sequences:
//
//   Plain     point = theta(j, ell)
//   Shuffle1  point = theta((sa + j*sb) mod 2^ell, ell)
//   Shuffle2  point = (sa + sb * theta(j mod 2^ell, ell)) mod 2^ell
//
// with sa in [0, m) and sb odd (hence invertible mod m). Restricted to any
// m consecutive j, each map is a bijection onto {0,...,m-1}, which is what
// keeps per-path packet counts within a provable band of the profile
// fractions over every window.
//
// SprayState is single-writer: one state per source flow. Distinct states
// may be driven from distinct threads; nothing is shared across flows.

#include <cstdint>
#include <optional>
#include <vector>

#include "pathspray/profile.hpp"

namespace pathspray {

enum class SprayMethod { Plain, Shuffle1, Shuffle2 };

enum class SeedRotation { Never, EveryPeriod };

const char* to_string(SprayMethod method);
SprayMethod spray_method_from_string(const std::string& name);

// theta(j, ell): the ell low bits of j, reversed. Higher bits are ignored.
// Involution on {0,...,2^ell-1}. Requires 1 <= ell <= 32.
std::uint32_t bit_reverse(std::uint64_t j, std::uint32_t ell);

struct SpraySeed {
    std::uint32_t sa = 0;
    std::uint32_t sb = 1;
};

// Throws std::invalid_argument unless 0 <= sa < 2^ell and sb is odd with
// 0 < sb < 2^ell.
void validate_seed(SpraySeed seed, std::uint32_t ell);

std::uint32_t selection_point(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                              std::uint64_t j);

// Injected deterministic entropy for seed rotation. Tests and the CLI pass
// a fixed-seed generator so every trace is reproducible.
class SeedSource {
public:
    virtual ~SeedSource() = default;
    virtual std::uint64_t next() = 0;
};

// splitmix64; the usual 64-bit mixer.
class SplitMix64 : public SeedSource {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() override;

private:
    std::uint64_t state_;
};

SpraySeed draw_seed(SeedSource& entropy, std::uint32_t ell);

struct SeedChange {
    std::uint64_t at_counter;
    SpraySeed old_seed;
    SpraySeed new_seed;
};

class SprayState {
public:
    SprayState(std::uint32_t ell, SpraySeed seed, SprayMethod method);

    // Enables per-period rotation driven by the given entropy source (owned
    // by the caller; must outlive the state).
    void enable_rotation(SeedSource* entropy);

    struct Pick {
        size_t path;
        std::uint64_t path_seq;   // per-path sequence number for the header
        std::uint64_t flow_seq;   // the counter value j used for this packet
        std::uint32_t point;      // selection point in [0, m)
    };

    // Selects the path for the current counter value, assigns the per-path
    // sequence number, advances the counter, and applies the rotation policy
    // at period boundaries. Requires profile total = 2^ell.
    Pick next_path(const PathProfile& profile);

    std::uint64_t counter() const { return counter_; }
    std::uint32_t ell() const { return ell_; }
    SpraySeed seed() const { return seed_; }
    SprayMethod method() const { return method_; }
    SeedRotation rotation() const { return rotation_; }

    // Rotates immediately, recording the change in the audit log.
    SpraySeed rotate_seed(SeedSource& entropy);

    const std::vector<SeedChange>& seed_audit() const { return audit_; }

private:
    std::uint32_t ell_;
    SpraySeed seed_;
    SprayMethod method_;
    SeedRotation rotation_ = SeedRotation::Never;
    SeedSource* entropy_ = nullptr;
    std::uint64_t counter_ = 0;  // monotone; reduced mod 2^ell inside selection_point
    std::vector<std::uint64_t> path_seq_;
    std::vector<SeedChange> audit_;
};

}  // namespace pathspray
