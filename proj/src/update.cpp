#include "pathspray/update.hpp"

#include <cassert>
#include <numeric>
#include <stdexcept>

namespace pathspray {

namespace {

void check_removal(const PathProfile& profile, const std::vector<std::uint64_t>& removal) {
    if (removal.size() != profile.path_count())
        throw std::invalid_argument("removal profile size must match path count");
    for (std::size_t i = 0; i < removal.size(); ++i)
        if (removal[i] > profile.balls(i))
            throw std::invalid_argument("cannot remove more balls than a bin holds");
}

// Hands out `residual` balls one at a time from the cursor, over all bins.
void walk_all(std::vector<std::uint64_t>& b, ResidualCursor& cursor, std::uint64_t residual) {
    const std::size_t n = b.size();
    for (std::uint64_t i = 0; i < residual; ++i) {
        b[cursor.index] += 1;
        cursor.index = (cursor.index + 1) % n;
    }
}

// Hands out `residual` balls over eligible bins only. The cursor still
// advances one position per loop iteration, so ineligible bins consume
// cursor slots without receiving balls.
void walk_eligible(std::vector<std::uint64_t>& b, ResidualCursor& cursor,
                   const std::vector<bool>& eligible, std::uint64_t residual) {
    const std::size_t n = b.size();
    while (residual > 0) {
        if (eligible[cursor.index]) {
            b[cursor.index] += 1;
            residual -= 1;
        }
        cursor.index = (cursor.index + 1) % n;
    }
}

}  // namespace

void redistribute_from_bin(PathProfile& profile, ResidualCursor& cursor,
                           std::size_t bin, std::uint64_t count) {
    if (bin >= profile.path_count())
        throw std::invalid_argument("bin index out of range");
    if (count > profile.balls(bin))
        throw std::invalid_argument("cannot remove more balls than the bin holds");
    if (count == 0) return;

    const std::size_t n = profile.path_count();
    const std::uint64_t x = count / n;
    const std::uint64_t y = count % n;

    std::vector<std::uint64_t> b = profile.counts();
    for (std::size_t i = 0; i < n; ++i) b[i] += x;
    b[bin] -= count;
    walk_all(b, cursor, y);
    profile.replace_counts(std::move(b));
}

void redistribute_evenly(PathProfile& profile, ResidualCursor& cursor,
                         const std::vector<std::uint64_t>& removal) {
    check_removal(profile, removal);
    const std::uint64_t total =
        std::accumulate(removal.begin(), removal.end(), std::uint64_t{0});
    if (total == 0) return;

    const std::size_t n = profile.path_count();
    const std::uint64_t x = total / n;
    const std::uint64_t y = total % n;

    std::vector<std::uint64_t> b = profile.counts();
    for (std::size_t i = 0; i < n; ++i) b[i] = b[i] - removal[i] + x;
    walk_all(b, cursor, y);
    profile.replace_counts(std::move(b));
}

void redistribute_to_untouched(PathProfile& profile, ResidualCursor& cursor,
                               const std::vector<std::uint64_t>& removal) {
    check_removal(profile, removal);
    const std::size_t n = profile.path_count();

    std::vector<bool> untouched(n, false);
    std::uint64_t total = 0;
    std::size_t untouched_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (removal[i] == 0) {
            untouched[i] = true;
            ++untouched_count;
        } else {
            total += removal[i];
        }
    }
    if (total == 0) throw std::invalid_argument("no bin removes any balls");
    if (untouched_count == 0)
        throw std::invalid_argument("no untouched bin to redistribute to");

    const std::uint64_t x = total / untouched_count;
    const std::uint64_t y = total % untouched_count;
    assert(y < untouched_count);  // walk termination

    std::vector<std::uint64_t> b = profile.counts();
    for (std::size_t i = 0; i < n; ++i) {
        if (untouched[i])
            b[i] += x;
        else
            b[i] -= removal[i];
    }
    walk_eligible(b, cursor, untouched, y);
    profile.replace_counts(std::move(b));
}

void redistribute_proportionally(PathProfile& profile, ResidualCursor& cursor,
                                 const std::vector<std::uint64_t>& removal) {
    check_removal(profile, removal);
    const std::size_t n = profile.path_count();
    const std::uint64_t m = profile.total_balls();

    std::vector<bool> untouched(n, false);
    std::uint64_t total = 0;
    std::size_t untouched_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (removal[i] == 0) {
            untouched[i] = true;
            ++untouched_count;
        } else {
            total += removal[i];
        }
    }
    if (total == 0) throw std::invalid_argument("no bin removes any balls");
    if (untouched_count == 0)
        throw std::invalid_argument("no untouched bin to redistribute to");
    if (total >= m) throw std::invalid_argument("cannot remove every ball");

    // Each bin is scaled to (b(i)-e(i)) * m / (m-e). The numerators sum to
    // (m-e)*m, so the floored quotients leave a slack that is an exact
    // multiple of m-e; that slack, in balls, goes to the untouched bins.
    const std::uint64_t denom = m - total;
    std::vector<std::uint64_t> b = profile.counts();
    unsigned __int128 slack = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned __int128 v =
            static_cast<unsigned __int128>(b[i] - removal[i]) * m;
        b[i] = static_cast<std::uint64_t>(v / denom);
        slack += v % denom;
    }
    // The numerators sum to (m-e)*m exactly, so this cannot fire; a real
    // check (not assert) because rounding here would silently lose balls.
    if (slack % denom != 0) throw std::logic_error("proportional slack not integral");
    const std::uint64_t leftover = static_cast<std::uint64_t>(slack / denom);

    const std::uint64_t x = leftover / untouched_count;
    const std::uint64_t y = leftover % untouched_count;
    for (std::size_t i = 0; i < n; ++i)
        if (untouched[i]) b[i] += x;
    walk_eligible(b, cursor, untouched, y);
    profile.replace_counts(std::move(b));
}

}  // namespace pathspray
