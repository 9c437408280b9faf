#pragma once

// In-place profile rebalancing. Four redistribution shapes, all preserving
// the total ball count m exactly:
//
//   redistribute_from_bin        one bin loses e, every bin gains e div n
//   redistribute_evenly          per-bin removals, total spread over all bins
//   redistribute_to_untouched    spread only over bins that lost nothing
//   redistribute_proportionally  scale every bin by (m-e)/m, exact residuals
//
// Residual balls (the part integer division leaves over) are handed out one
// at a time from a persistent cursor so that no bin is systematically
// favored across repeated updates. The cursor is shared by all four shapes
// and advances past every visited position, including bins that are skipped
// because they took part in the removal.
//
// Single writer per (profile, cursor) pair; callers serialize updates
// against selection.

#include <cstdint>
#include <vector>

#include "pathspray/profile.hpp"

namespace pathspray {

struct ResidualCursor {
    std::size_t index = 0;
};

// Removes `count` balls from `bin` and spreads them evenly over all n bins
// (the source bin included). Throws std::invalid_argument if bin is out of
// range or count > b(bin).
void redistribute_from_bin(PathProfile& profile, ResidualCursor& cursor,
                           std::size_t bin, std::uint64_t count);

// Removes removal[i] balls from each bin i and spreads the total evenly
// over all n bins. removal must have one entry per path with
// removal[i] <= b(i).
void redistribute_evenly(PathProfile& profile, ResidualCursor& cursor,
                         const std::vector<std::uint64_t>& removal);

// Removes removal[i] from each bin with removal[i] > 0 and spreads the
// total evenly over the untouched bins only. Requires at least one positive
// entry and at least one zero entry.
void redistribute_to_untouched(PathProfile& profile, ResidualCursor& cursor,
                               const std::vector<std::uint64_t>& removal);

// Removes removal[i] from each bin and rescales every bin by (m-e)/m in
// exact integer arithmetic; the rounding slack (an exact multiple of m-e)
// is spread evenly over the untouched bins. Requires at least one positive
// entry, at least one zero entry, and total removal < m.
void redistribute_proportionally(PathProfile& profile, ResidualCursor& cursor,
                                 const std::vector<std::uint64_t>& removal);

}  // namespace pathspray
