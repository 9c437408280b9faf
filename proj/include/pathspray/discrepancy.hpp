#pragma once

// Exact measurement of how far the spray sequence drifts from proportional
// delivery on a set of consecutive balls A = {ia..ib}:
//
//   disc(A, j, j')  = hits in counter window [j, j'] - (|A|/m)(j'-j+1)
//   maxdisc(A, j)   = max over j' >= j of {0, disc(A, j, j')}
//   mindisc(A, j)   = min over j' >= j of {0, disc(A, j, j')}
//   deviation(A)    = max over j of (maxdisc(A, j) - mindisc(A, j))
//
// All values are exact rationals with denominator m; no floating point, so
// closed forms like 1 - 2^-e can be checked for equality.
//
// Two independent routes compute the deviation: an O(m^2) enumeration of
// every start and window length, and an O(m) route using the prefix drift
// extrema. disc over any full period is 0 (each seed is a bijection on a
// period), so the drift is m-periodic and both routes agree exactly; tests
// assert that.

#include <cstdint>
#include <optional>
#include <vector>

#include "pathspray/profile.hpp"
#include "pathspray/rational.hpp"
#include "pathspray/spray.hpp"

namespace pathspray {

// Consecutive balls {first..last}, inclusive. first <= last < 2^ell.
struct BallInterval {
    std::uint32_t first;
    std::uint32_t last;

    std::uint64_t size() const { return std::uint64_t{last} - first + 1; }
};

// Exact disc(A, j, j') for an arbitrary counter window.
Rational disc(SprayMethod method, SpraySeed seed, std::uint32_t ell, BallInterval a,
              std::uint64_t j, std::uint64_t j_prime);

struct StartDiscrepancy {
    Rational maxdisc;
    Rational mindisc;  // <= 0
    Rational span() const { return maxdisc - mindisc; }
};

// maxdisc/mindisc at a fixed start, taken over window lengths 1..m (longer
// windows repeat by periodicity).
StartDiscrepancy start_discrepancy(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                                   BallInterval a, std::uint64_t start);

// O(m^2) route: enumerates starts in [0, m) and lengths 1..m.
Rational deviation(SprayMethod method, SpraySeed seed, std::uint32_t ell, BallInterval a);

// O(m) route: max minus min of the prefix drift m*hits[0,t) - t*|A|.
Rational deviation_fast(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                        BallInterval a);

struct PathDeviation {
    Rational value;
    bool empty_path = false;  // b(i) = 0: no balls, deviation 0 by convention
};

// Deviation of the ball interval belonging to one path of the profile. With
// `start` present, the span at that fixed start; otherwise the max over all
// starts. Profile total must be 2^ell for some ell.
PathDeviation path_deviation(SprayMethod method, SpraySeed seed,
                             const PathProfile& profile, std::size_t path,
                             std::optional<std::uint64_t> start = std::nullopt);

// Dyadic interval at `level`: the `index`-th block of 2^(ell-level)
// consecutive balls. level 0 is the full range.
struct DyadicInterval {
    std::uint32_t level;
    std::uint32_t index;
};

// Minimum-cardinality partition of {ia..ib} into dyadic intervals, built
// greedily from the left by always taking the largest aligned block that
// fits. Minimal for dyadic covers.
std::vector<DyadicInterval> min_dyadic_cover(std::uint32_t ia, std::uint32_t ib,
                                             std::uint32_t ell);

// Proven deviation bound for the interval: 1 - 2^-e for a level-e dyadic
// interval, otherwise min(ell, ceil(log2(ib-ia)) + 2); doubled for the
// point-side shuffle (Shuffle2).
Rational bound_for(SprayMethod method, BallInterval a, std::uint32_t ell);

}  // namespace pathspray
