#pragma once

// Feedback-driven profile adaptation. A degraded path has a fraction alpha
// of its allocation removed and spread over the other paths ("whack"); a
// severity-weighted rebalance moves allocation from the worst-weighted
// paths toward the rest. Paths recover implicitly: every redistribution
// hands balls back to healthy bins, so a path that stops misbehaving
// regains share without an explicit reverse operation.

#include <cstdint>
#include <string>
#include <vector>

#include "pathspray/profile.hpp"
#include "pathspray/rational.hpp"
#include "pathspray/update.hpp"

namespace pathspray {

// Removes floor(alpha * b(path)) balls from the path's bin and spreads
// them evenly over all bins. alpha must lie in [0, 1].
void whack(PathProfile& profile, ResidualCursor& cursor, std::size_t path,
           const Rational& alpha);

// Sum of w(i) * b(i), exact. w must have one weight per path, each >= 0.
Rational severity_objective(const PathProfile& profile, const std::vector<Rational>& w);

enum class RebalanceOutcome { Applied, NoImprovement };

// Moves up to `budget` balls from the maximal-weight bins (split among them
// in proportion to their ball counts) evenly onto all other bins. Returns
// NoImprovement when all weights are equal or the maximal-weight bins are
// empty. Never increases the severity objective.
RebalanceOutcome rebalance_step(PathProfile& profile, ResidualCursor& cursor,
                                const std::vector<Rational>& w, std::uint64_t budget);

// Per-path observations aggregated over one feedback window.
struct PathFeedback {
    std::uint64_t ecn_marks = 0;
    std::uint64_t packets_observed = 0;  // delivered packets in the window
    std::uint64_t losses = 0;            // gaps detected in the window
    std::vector<std::uint64_t> rtt_samples_us;
    std::uint64_t window_us = 0;
};

// Declarative threshold table mapping feedback signals to whack factors.
// Each rule fires when its signal reaches the threshold; the largest alpha
// among the rules that fire wins, and alpha = 0 when none fire. Signals:
//   ecn_rate    ecn_marks / packets_observed
//   loss_count  losses
//   rtt_excess  max(0, path mean RTT - across-path median of means), in us
struct AlphaPolicy {
    enum class Signal { EcnRate, LossCount, RttExcess };
    struct Rule {
        Signal signal;
        Rational threshold;
        Rational alpha;
    };
    std::vector<Rule> rules;

    // loss_count >= 1 -> 1/2; ecn_rate >= 1/2 -> 1/4.
    static AlphaPolicy default_policy();
};

const char* to_string(AlphaPolicy::Signal signal);
AlphaPolicy::Signal alpha_signal_from_string(const std::string& name);

// Evaluates the policy for every path. Monotone: raising any signal on a
// path never lowers that path's alpha.
std::vector<Rational> feedback_to_alpha(const std::vector<PathFeedback>& feedback,
                                        const AlphaPolicy& policy);

}  // namespace pathspray
