#pragma once

// Discrete path profile: n bins (paths) holding m balls total.
//
// The profile stores both the per-bin counts b(i) and the cumulative array
// c with c[0]=0 and c[i+1]=b(0)+...+b(i), so that selection is a binary
// search and updates rebuild c in O(n). All arithmetic is exact integer;
// b(i)=0 bins are legal and simply never selected.

#include <cstdint>
#include <vector>

#include "pathspray/rational.hpp"

namespace pathspray {

class PathProfile {
public:
    // Throws std::invalid_argument on an empty vector, a zero total, or a
    // total that overflows uint64.
    explicit PathProfile(std::vector<std::uint64_t> counts);

    size_t path_count() const { return balls_.size(); }
    std::uint64_t total_balls() const { return cumulative_.back(); }

    std::uint64_t balls(size_t i) const { return balls_[i]; }
    const std::vector<std::uint64_t>& counts() const { return balls_; }

    // Number of balls held by bins 0..i-1; row i of the cumulative array.
    std::uint64_t cumulative_before(size_t i) const { return cumulative_[i]; }

    // The unique path i with c(i-1) <= k < c(i). Throws std::out_of_range
    // for k >= m. Binary search; see also the linear/interpolation variants
    // below, which exist to cross-check this one.
    size_t select_path(std::uint64_t k) const;

    // p(i) = b(i)/m, exact; sums to 1.
    std::vector<Rational> fractions() const;

    bool total_is_power_of_two() const;
    // Requires total_is_power_of_two().
    std::uint32_t log2_total() const;

    // In-place update used by the profile-update embodiments. Preserves n
    // and m; throws if either would change.
    void replace_counts(const std::vector<std::uint64_t>& counts);

private:
    void rebuild_cumulative();

    std::vector<std::uint64_t> balls_;
    std::vector<std::uint64_t> cumulative_;  // size n+1, cumulative_[0] == 0
};

// Reference implementations of the selection search. Same contract as
// PathProfile::select_path.
size_t select_path_linear(const PathProfile& profile, std::uint64_t k);
size_t select_path_interpolation(const PathProfile& profile, std::uint64_t k);

// Parses a comma-separated count list, e.g. "127,400,200,173,124".
std::vector<std::uint64_t> parse_counts(const std::string& literal);
PathProfile parse_profile(const std::string& literal);

}  // namespace pathspray
