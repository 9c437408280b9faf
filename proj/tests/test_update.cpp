#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pathspray/profile.hpp"
#include "pathspray/spray.hpp"
#include "pathspray/update.hpp"

using namespace pathspray;

namespace {

const std::vector<std::uint64_t> kFiveCounts{127, 400, 200, 173, 124};

// Random profile with the exact total m; zero bins allowed.
std::vector<std::uint64_t> random_counts(SplitMix64& rng, std::uint64_t m, std::size_t n) {
    std::vector<std::uint64_t> cuts;
    for (std::size_t i = 0; i + 1 < n; ++i) cuts.push_back(rng.next() % (m + 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::uint64_t> counts;
    std::uint64_t prev = 0;
    for (std::uint64_t cut : cuts) {
        counts.push_back(cut - prev);
        prev = cut;
    }
    counts.push_back(m - prev);
    return counts;
}

std::uint64_t total(const PathProfile& p) {
    const auto& c = p.counts();
    return std::accumulate(c.begin(), c.end(), std::uint64_t{0});
}

}  // namespace

TEST_SUITE("update") {

TEST_CASE("single-bin removal spreads evenly with residual cursor") {
    PathProfile p(kFiveCounts);
    ResidualCursor r;

    SUBCASE("divisible removal leaves the cursor alone") {
        redistribute_from_bin(p, r, 1, 100);  // x=20, y=0
        CHECK(p.counts() == std::vector<std::uint64_t>{147, 320, 220, 193, 144});
        CHECK(r.index == 0);
    }
    SUBCASE("residuals walk from the cursor") {
        redistribute_from_bin(p, r, 1, 7);  // x=1, y=2 -> bins 0 and 1
        CHECK(p.counts() == std::vector<std::uint64_t>{129, 395, 201, 174, 125});
        CHECK(r.index == 2);
    }
    SUBCASE("zero removal is a no-op") {
        redistribute_from_bin(p, r, 1, 0);
        CHECK(p.counts() == kFiveCounts);
        CHECK(r.index == 0);
    }
    SUBCASE("infeasible removal throws") {
        CHECK_THROWS_AS(redistribute_from_bin(p, r, 1, 401), std::invalid_argument);
        CHECK_THROWS_AS(redistribute_from_bin(p, r, 9, 1), std::invalid_argument);
    }
}

TEST_CASE("multi-bin even spread") {
    SUBCASE("concentrating the removal on one bin equals the single-bin form") {
        PathProfile a(kFiveCounts), b(kFiveCounts);
        ResidualCursor ra, rb;
        redistribute_from_bin(a, ra, 1, 100);
        redistribute_evenly(b, rb, {0, 100, 0, 0, 0});
        CHECK(a.counts() == b.counts());
        CHECK(ra.index == rb.index);
    }
    SUBCASE("uniform removal redistributes to itself") {
        PathProfile p(kFiveCounts);
        ResidualCursor r;
        redistribute_evenly(p, r, {1, 1, 1, 1, 1});  // x=1, y=0
        CHECK(p.counts() == kFiveCounts);
        CHECK(r.index == 0);
    }
    SUBCASE("all-zero removal is a no-op") {
        PathProfile p(kFiveCounts);
        ResidualCursor r;
        redistribute_evenly(p, r, {0, 0, 0, 0, 0});
        CHECK(p.counts() == kFiveCounts);
    }
    SUBCASE("size mismatch throws") {
        PathProfile p(kFiveCounts);
        ResidualCursor r;
        CHECK_THROWS_AS(redistribute_evenly(p, r, {1, 1}), std::invalid_argument);
    }
}

TEST_CASE("untouched-bins spread") {
    SUBCASE("divisible case is a pure transfer") {
        PathProfile p(kFiveCounts);
        ResidualCursor r;
        redistribute_to_untouched(p, r, {4, 0, 0, 0, 0});  // x=1, y=0
        CHECK(p.counts() == std::vector<std::uint64_t>{123, 401, 201, 174, 125});
        CHECK(r.index == 0);
    }
    SUBCASE("the cursor advances past removing bins without feeding them") {
        PathProfile p(kFiveCounts);
        ResidualCursor r;
        redistribute_to_untouched(p, r, {6, 0, 0, 0, 0});  // x=1, y=2
        // Walk visits bin 0 (skipped, it removed), then bins 1 and 2.
        CHECK(p.counts() == std::vector<std::uint64_t>{121, 402, 202, 174, 125});
        CHECK(r.index == 3);
    }
    SUBCASE("no removing bin throws") {
        PathProfile p(kFiveCounts);
        ResidualCursor r;
        CHECK_THROWS_AS(redistribute_to_untouched(p, r, {0, 0, 0, 0, 0}),
                        std::invalid_argument);
    }
    SUBCASE("no untouched bin throws") {
        PathProfile p({8, 8});
        ResidualCursor r;
        CHECK_THROWS_AS(redistribute_to_untouched(p, r, {1, 1}), std::invalid_argument);
    }
}

TEST_CASE("proportional spread") {
    SUBCASE("worked example n=2 m=16") {
        PathProfile p({8, 8});
        ResidualCursor r;
        // (8-4)*16 = 64 -> 64 div 12 = 5 rem 4; 8*16 = 128 -> 10 rem 8;
        // slack (4+8)/12 = 1 ball to the untouched bin.
        redistribute_proportionally(p, r, {4, 0});
        CHECK(p.counts() == std::vector<std::uint64_t>{5, 11});
        CHECK(r.index == 0);
    }
    SUBCASE("all-zero removal is rejected, not a no-op") {
        PathProfile p({8, 8});
        ResidualCursor r;
        CHECK_THROWS_AS(redistribute_proportionally(p, r, {0, 0}), std::invalid_argument);
    }
    SUBCASE("no untouched bin is rejected") {
        PathProfile p({8, 8});
        ResidualCursor r;
        CHECK_THROWS_AS(redistribute_proportionally(p, r, {1, 1}), std::invalid_argument);
    }
}

TEST_CASE("mass conservation and non-negativity under random feasible updates") {
    SplitMix64 rng(31);
    for (int embodiment = 1; embodiment <= 4; ++embodiment) {
        for (int trial = 0; trial < 500; ++trial) {
            const std::uint64_t m = 16ull << (rng.next() % 7);  // 16..1024
            const std::size_t n = 2 + rng.next() % 6;
            PathProfile p(random_counts(rng, m, n));
            ResidualCursor r{static_cast<std::size_t>(rng.next() % n)};

            std::vector<std::uint64_t> removal(n, 0);
            // Embodiments 3 and 4 need at least one untouched bin; leave a
            // random one out of the removal set.
            const std::size_t spared = rng.next() % n;
            for (std::size_t i = 0; i < n; ++i) {
                if (embodiment >= 3 && i == spared) continue;
                if (p.balls(i) > 0) removal[i] = rng.next() % (p.balls(i) + 1);
            }

            const std::uint64_t removed =
                std::accumulate(removal.begin(), removal.end(), std::uint64_t{0});
            const bool any_removed = removed > 0;
            switch (embodiment) {
                case 1: {
                    const std::size_t bin = rng.next() % n;
                    redistribute_from_bin(p, r, bin, rng.next() % (p.balls(bin) + 1));
                    break;
                }
                case 2:
                    redistribute_evenly(p, r, removal);
                    break;
                case 3:
                    if (!any_removed) continue;
                    redistribute_to_untouched(p, r, removal);
                    break;
                case 4:
                    // Rescaling needs survivors: some ball must remain.
                    if (!any_removed || removed >= m) continue;
                    redistribute_proportionally(p, r, removal);
                    break;
            }
            REQUIRE(total(p) == m);
            REQUIRE(r.index < n);
        }
    }
}

TEST_CASE("residual fairness across repeated updates") {
    // Constant y=2 per update over n=5: cumulative residual receipts stay
    // within one ball of each other across bins.
    PathProfile p({100, 100, 100, 100, 112});
    ResidualCursor r;
    std::vector<std::int64_t> receipts(5, 0);
    for (int round = 0; round < 25; ++round) {
        const std::size_t bin = static_cast<std::size_t>(round % 5);
        const auto before = p.counts();
        redistribute_from_bin(p, r, bin, 7);  // x=1, y=2
        const auto after = p.counts();
        for (std::size_t i = 0; i < 5; ++i) {
            // Receipts beyond the even share x (and the -7+x on the source).
            const std::int64_t base =
                static_cast<std::int64_t>(before[i]) + 1 - (i == bin ? 7 : 0);
            receipts[i] += static_cast<std::int64_t>(after[i]) - base;
        }
        const auto [lo, hi] = std::minmax_element(receipts.begin(), receipts.end());
        CHECK(*hi - *lo <= 1);
    }
    // 25 rounds x 2 residuals over 5 bins: exactly 10 each.
    for (const std::int64_t got : receipts) CHECK(got == 10);
}

TEST_CASE("untouched-set fairness when the removal set is constant") {
    PathProfile p({200, 200, 200, 200, 224});
    ResidualCursor r;
    // Remove 6 from bin 4 each round: k=4 untouched bins, x=1, y=2.
    std::vector<std::int64_t> receipts(5, 0);
    for (int round = 0; round < 20; ++round) {
        const auto before = p.counts();
        redistribute_to_untouched(p, r, {0, 0, 0, 0, 6});
        const auto after = p.counts();
        for (std::size_t i = 0; i < 4; ++i)
            receipts[i] += static_cast<std::int64_t>(after[i]) -
                           static_cast<std::int64_t>(before[i]) - 1;
        CHECK(after[4] + 6 == before[4]);
        const auto [lo, hi] = std::minmax_element(receipts.begin(), receipts.begin() + 4);
        CHECK(*hi - *lo <= 1);
    }
    // 20 rounds x 2 residuals over 4 untouched bins: exactly 10 each.
    for (std::size_t i = 0; i < 4; ++i) CHECK(receipts[i] == 10);
}

TEST_CASE("proportional spread tracks exact proportions") {
    // After removing e from bin i, b'(i)/m should approximate
    // (b(i)-e(i))/(m-e) with error < 1 ball plus the untouched top-up.
    SplitMix64 rng(47);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t m = 1024;
        const std::size_t n = 4;
        PathProfile p(random_counts(rng, m, n));
        std::vector<std::uint64_t> removal(n, 0);
        bool any = false;
        for (std::size_t i = 1; i < n; ++i)
            if (p.balls(i) > 0) {
                removal[i] = rng.next() % (p.balls(i) + 1);
                any = any || removal[i] > 0;
            }
        if (!any) continue;
        const std::uint64_t e =
            std::accumulate(removal.begin(), removal.end(), std::uint64_t{0});
        if (e >= m) continue;
        const auto before = p.counts();
        ResidualCursor r;
        redistribute_proportionally(p, r, removal);
        for (std::size_t i = 0; i < n; ++i) {
            // Touched bins get no residuals: exactly the floored scaling.
            if (removal[i] > 0) {
                const unsigned __int128 v =
                    static_cast<unsigned __int128>(before[i] - removal[i]) * m;
                CHECK(p.balls(i) == static_cast<std::uint64_t>(v / (m - e)));
            }
        }
    }
}

}  // TEST_SUITE
