#include "pathspray/discrepancy.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "pathspray/kernels.hpp"

namespace pathspray {

namespace {

void check_interval(BallInterval a, std::uint32_t ell) {
    if (ell < 1 || ell > 24)
        throw std::invalid_argument("deviation oracle supports ell in [1, 24]");
    const std::uint64_t m = std::uint64_t{1} << ell;
    if (a.first > a.last || a.last >= m)
        throw std::invalid_argument("ball interval out of range");
}

// Selection points for one full period (counters 0..m-1). One period is
// enough: every seed maps a period bijectively, so hit patterns repeat.
std::vector<std::uint32_t> period_points(SprayMethod method, SpraySeed seed,
                                         std::uint32_t ell) {
    const std::uint64_t m = std::uint64_t{1} << ell;
    std::vector<std::uint32_t> points(m);
    kernels::fill_selection_points(method, seed, ell, 0, m, points.data());
    return points;
}

inline bool hit(const std::vector<std::uint32_t>& points, std::uint64_t m,
                BallInterval a, std::uint64_t j) {
    const std::uint32_t p = points[j % m];
    return a.first <= p && p <= a.last;
}

}  // namespace

Rational disc(SprayMethod method, SpraySeed seed, std::uint32_t ell, BallInterval a,
              std::uint64_t j, std::uint64_t j_prime) {
    check_interval(a, ell);
    if (j_prime < j) throw std::invalid_argument("window end precedes start");
    const std::uint64_t m = std::uint64_t{1} << ell;
    const std::uint64_t len = j_prime - j + 1;
    const auto points = period_points(method, seed, ell);

    // Whole periods hit exactly |A| balls each.
    std::uint64_t hits = (len / m) * a.size();
    for (std::uint64_t t = j + (len / m) * m; t <= j_prime; ++t)
        if (hit(points, m, a, t)) ++hits;

    // disc = hits - |A| * len / m
    return Rational(static_cast<std::int64_t>(hits)) -
           Rational(static_cast<std::int64_t>(a.size())) *
               Rational(static_cast<std::int64_t>(len)) /
               Rational(static_cast<std::int64_t>(m));
}

StartDiscrepancy start_discrepancy(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                                   BallInterval a, std::uint64_t start) {
    check_interval(a, ell);
    const std::uint64_t m = std::uint64_t{1} << ell;
    const auto points = period_points(method, seed, ell);
    const std::int64_t asize = static_cast<std::int64_t>(a.size());

    // Scaled by m: m*disc = m*hits - |A|*len stays integral.
    std::int64_t hits = 0;
    std::int64_t best_max = 0;
    std::int64_t best_min = 0;
    for (std::uint64_t len = 1; len <= m; ++len) {
        if (hit(points, m, a, start + len - 1)) ++hits;
        const std::int64_t scaled =
            hits * static_cast<std::int64_t>(m) - asize * static_cast<std::int64_t>(len);
        best_max = std::max(best_max, scaled);
        best_min = std::min(best_min, scaled);
    }
    return StartDiscrepancy{Rational(best_max, static_cast<std::int64_t>(m)),
                            Rational(best_min, static_cast<std::int64_t>(m))};
}

Rational deviation(SprayMethod method, SpraySeed seed, std::uint32_t ell, BallInterval a) {
    check_interval(a, ell);
    const std::uint64_t m = std::uint64_t{1} << ell;
    const auto points = period_points(method, seed, ell);
    const std::int64_t asize = static_cast<std::int64_t>(a.size());

    std::int64_t best_span = 0;
    for (std::uint64_t start = 0; start < m; ++start) {
        std::int64_t hits = 0;
        std::int64_t best_max = 0;
        std::int64_t best_min = 0;
        for (std::uint64_t len = 1; len <= m; ++len) {
            if (hit(points, m, a, start + len - 1)) ++hits;
            const std::int64_t scaled = hits * static_cast<std::int64_t>(m) -
                                        asize * static_cast<std::int64_t>(len);
            best_max = std::max(best_max, scaled);
            best_min = std::min(best_min, scaled);
        }
        best_span = std::max(best_span, best_max - best_min);
    }
    return Rational(best_span, static_cast<std::int64_t>(m));
}

Rational deviation_fast(SprayMethod method, SpraySeed seed, std::uint32_t ell,
                        BallInterval a) {
    check_interval(a, ell);
    const std::uint64_t m = std::uint64_t{1} << ell;
    const auto points = period_points(method, seed, ell);
    const std::int64_t asize = static_cast<std::int64_t>(a.size());

    // Prefix drift T(t) = m*hits[0,t) - t*|A|. T(0) = T(m) = 0 and T is
    // m-periodic, so for any start j the reachable disc values are exactly
    // {T(t) - T(j)}; the span max T - min T is start-independent and equals
    // the deviation.
    std::int64_t drift = 0;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    for (std::uint64_t t = 0; t < m; ++t) {
        drift += hit(points, m, a, t) ? static_cast<std::int64_t>(m) - asize : -asize;
        hi = std::max(hi, drift);
        lo = std::min(lo, drift);
    }
    return Rational(hi - lo, static_cast<std::int64_t>(m));
}

PathDeviation path_deviation(SprayMethod method, SpraySeed seed,
                             const PathProfile& profile, std::size_t path,
                             std::optional<std::uint64_t> start) {
    if (path >= profile.path_count()) throw std::invalid_argument("path out of range");
    if (!profile.total_is_power_of_two())
        throw std::invalid_argument("profile total must be a power of two");
    if (profile.balls(path) == 0) return PathDeviation{Rational(0), true};

    const std::uint32_t ell = profile.log2_total();
    const BallInterval a{
        static_cast<std::uint32_t>(profile.cumulative_before(path)),
        static_cast<std::uint32_t>(profile.cumulative_before(path + 1) - 1)};
    if (start.has_value())
        return PathDeviation{start_discrepancy(method, seed, ell, a, *start).span(), false};
    return PathDeviation{deviation_fast(method, seed, ell, a), false};
}

std::vector<DyadicInterval> min_dyadic_cover(std::uint32_t ia, std::uint32_t ib,
                                             std::uint32_t ell) {
    check_interval(BallInterval{ia, ib}, ell);
    std::vector<DyadicInterval> cover;
    std::uint64_t p = ia;
    while (p <= ib) {
        // Largest aligned block starting at p that stays inside the range.
        std::uint64_t size = 1;
        while (size < ib - p + 1 && p % (size * 2) == 0 && p + size * 2 - 1 <= ib)
            size *= 2;
        const std::uint32_t level = ell - static_cast<std::uint32_t>(std::countr_zero(size));
        cover.push_back(DyadicInterval{level, static_cast<std::uint32_t>(p / size)});
        p += size;
    }
    return cover;
}

Rational bound_for(SprayMethod method, BallInterval a, std::uint32_t ell) {
    check_interval(a, ell);
    const std::uint64_t size = a.size();

    Rational base(0);
    if (std::has_single_bit(size) && a.first % size == 0) {
        // Dyadic: 1 - 2^-e at level e.
        const std::uint32_t e = ell - static_cast<std::uint32_t>(std::countr_zero(size));
        const std::int64_t pow = std::int64_t{1} << e;
        base = Rational(pow - 1, pow);
    } else {
        const std::uint64_t d = a.last - a.first;
        const std::uint32_t cl2 = static_cast<std::uint32_t>(std::bit_width(d - 1));
        base = Rational(std::min<std::int64_t>(ell, cl2 + 2));
    }
    return method == SprayMethod::Shuffle2 ? base * Rational(2) : base;
}

}  // namespace pathspray
