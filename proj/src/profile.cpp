#include "pathspray/profile.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pathspray {

PathProfile::PathProfile(std::vector<std::uint64_t> counts) : balls_(std::move(counts)) {
    if (balls_.empty()) throw std::invalid_argument("profile: no paths");
    rebuild_cumulative();
    if (total_balls() == 0) throw std::invalid_argument("profile: zero total balls");
}

void PathProfile::rebuild_cumulative() {
    cumulative_.resize(balls_.size() + 1);
    cumulative_[0] = 0;
    for (size_t i = 0; i < balls_.size(); ++i) {
        std::uint64_t next = cumulative_[i] + balls_[i];
        if (next < cumulative_[i]) throw std::invalid_argument("profile: ball total overflows");
        cumulative_[i + 1] = next;
    }
}

size_t PathProfile::select_path(std::uint64_t k) const {
    if (k >= total_balls()) throw std::out_of_range("select_path: k >= m");
    // First cumulative entry strictly above k; its predecessor index is the bin.
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), k);
    return static_cast<size_t>(it - cumulative_.begin()) - 1;
}

std::vector<Rational> PathProfile::fractions() const {
    std::vector<Rational> out;
    out.reserve(balls_.size());
    for (std::uint64_t b : balls_)
        out.emplace_back(static_cast<std::int64_t>(b), static_cast<std::int64_t>(total_balls()));
    return out;
}

bool PathProfile::total_is_power_of_two() const {
    return std::has_single_bit(total_balls());
}

std::uint32_t PathProfile::log2_total() const {
    if (!total_is_power_of_two())
        throw std::invalid_argument("profile: total is not a power of two");
    return static_cast<std::uint32_t>(std::countr_zero(total_balls()));
}

void PathProfile::replace_counts(const std::vector<std::uint64_t>& counts) {
    if (counts.size() != balls_.size())
        throw std::invalid_argument("profile: update changes path count");
    std::uint64_t total = 0;
    for (std::uint64_t b : counts) total += b;
    if (total != total_balls())
        throw std::invalid_argument("profile: update changes ball total");
    balls_ = counts;
    rebuild_cumulative();
}

size_t select_path_linear(const PathProfile& profile, std::uint64_t k) {
    if (k >= profile.total_balls()) throw std::out_of_range("select_path: k >= m");
    for (size_t i = 0;; ++i) {
        if (k < profile.cumulative_before(i + 1)) return i;
    }
}

size_t select_path_interpolation(const PathProfile& profile, std::uint64_t k) {
    if (k >= profile.total_balls()) throw std::out_of_range("select_path: k >= m");
    size_t lo = 0, hi = profile.path_count();  // invariant: c(lo-1) <= k < c(hi)
    while (hi - lo > 1) {
        std::uint64_t clo = profile.cumulative_before(lo);
        std::uint64_t chi = profile.cumulative_before(hi);
        // Guess position proportionally within [clo, chi); fall back to the
        // midpoint when the estimate does not move.
        size_t guess = lo + static_cast<size_t>(static_cast<unsigned __int128>(k - clo) *
                                                (hi - lo) / (chi - clo));
        if (guess <= lo) guess = lo + 1;
        if (guess >= hi) guess = hi - 1;
        if (k < profile.cumulative_before(guess))
            hi = guess;
        else
            lo = guess;
    }
    return lo;
}

std::vector<std::uint64_t> parse_counts(const std::string& literal) {
    std::vector<std::uint64_t> counts;
    std::stringstream ss(literal);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = 0;
        unsigned long long v;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("profile literal: bad count '" + item + "'");
        }
        while (pos < item.size() && item[pos] == ' ') ++pos;
        if (pos != item.size())
            throw std::invalid_argument("profile literal: bad count '" + item + "'");
        counts.push_back(v);
    }
    return counts;
}

PathProfile parse_profile(const std::string& literal) {
    return PathProfile(parse_counts(literal));
}

}  // namespace pathspray
