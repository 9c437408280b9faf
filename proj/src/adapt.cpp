#include "pathspray/adapt.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace pathspray {

void whack(PathProfile& profile, ResidualCursor& cursor, std::size_t path,
           const Rational& alpha) {
    if (path >= profile.path_count()) throw std::invalid_argument("path out of range");
    if (alpha < Rational(0) || alpha > Rational(1))
        throw std::invalid_argument("alpha must lie in [0, 1]");
    const std::uint64_t removed =
        static_cast<std::uint64_t>((alpha * Rational(profile.balls(path))).floor());
    redistribute_from_bin(profile, cursor, path, removed);
}

Rational severity_objective(const PathProfile& profile, const std::vector<Rational>& w) {
    if (w.size() != profile.path_count())
        throw std::invalid_argument("weight count must match path count");
    Rational sum(0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < Rational(0)) throw std::invalid_argument("weights must be >= 0");
        sum = sum + w[i] * Rational(profile.balls(i));
    }
    return sum;
}

RebalanceOutcome rebalance_step(PathProfile& profile, ResidualCursor& cursor,
                                const std::vector<Rational>& w, std::uint64_t budget) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (w.size() != profile.path_count())
        throw std::invalid_argument("weight count must match path count");

    const Rational wmax = *std::max_element(w.begin(), w.end());
    const Rational wmin = *std::min_element(w.begin(), w.end());
    if (wmax == wmin) return RebalanceOutcome::NoImprovement;

    const std::size_t n = profile.path_count();
    std::uint64_t heavy_balls = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (w[i] == wmax) heavy_balls += profile.balls(i);
    if (heavy_balls == 0) return RebalanceOutcome::NoImprovement;

    // Split the budget over the maximal-weight bins in proportion to their
    // ball counts; leftover from flooring tops up in index order.
    const std::uint64_t take = std::min(budget, heavy_balls);
    std::vector<std::uint64_t> removal(n, 0);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] != wmax) continue;
        removal[i] = static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(take) * profile.balls(i) / heavy_balls);
        assigned += removal[i];
    }
    for (std::size_t i = 0; i < n && assigned < take; ++i) {
        if (w[i] != wmax) continue;
        const std::uint64_t room = profile.balls(i) - removal[i];
        const std::uint64_t extra = std::min(room, take - assigned);
        removal[i] += extra;
        assigned += extra;
    }
    assert(assigned == take);

    const Rational before = severity_objective(profile, w);
    redistribute_to_untouched(profile, cursor, removal);
    const Rational after = severity_objective(profile, w);
    assert(!(before < after));
    (void)before;
    (void)after;
    return RebalanceOutcome::Applied;
}

AlphaPolicy AlphaPolicy::default_policy() {
    AlphaPolicy policy;
    policy.rules.push_back({Signal::LossCount, Rational(1), Rational(1, 2)});
    policy.rules.push_back({Signal::EcnRate, Rational(1, 2), Rational(1, 4)});
    return policy;
}

const char* to_string(AlphaPolicy::Signal signal) {
    switch (signal) {
        case AlphaPolicy::Signal::EcnRate: return "ecn_rate";
        case AlphaPolicy::Signal::LossCount: return "loss_count";
        case AlphaPolicy::Signal::RttExcess: return "rtt_excess";
    }
    return "?";
}

AlphaPolicy::Signal alpha_signal_from_string(const std::string& name) {
    if (name == "ecn_rate") return AlphaPolicy::Signal::EcnRate;
    if (name == "loss_count") return AlphaPolicy::Signal::LossCount;
    if (name == "rtt_excess") return AlphaPolicy::Signal::RttExcess;
    throw std::invalid_argument("unknown alpha signal: " + name);
}

namespace {

Rational mean_rtt(const PathFeedback& fb) {
    Rational sum(0);
    for (std::uint64_t s : fb.rtt_samples_us) sum = sum + Rational(static_cast<std::int64_t>(s));
    return sum / Rational(static_cast<std::int64_t>(fb.rtt_samples_us.size()));
}

}  // namespace

std::vector<Rational> feedback_to_alpha(const std::vector<PathFeedback>& feedback,
                                        const AlphaPolicy& policy) {
    const std::size_t n = feedback.size();

    // RTT excess is relative to the across-path median of window means, so
    // a uniform latency shift fires nothing.
    std::vector<Rational> means;
    for (const auto& fb : feedback)
        if (!fb.rtt_samples_us.empty()) means.push_back(mean_rtt(fb));
    Rational median(0);
    if (!means.empty()) {
        std::sort(means.begin(), means.end());
        const std::size_t mid = means.size() / 2;
        median = means.size() % 2 == 1 ? means[mid]
                                       : (means[mid - 1] + means[mid]) / Rational(2);
    }

    std::vector<Rational> alpha(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) {
        const PathFeedback& fb = feedback[i];
        Rational ecn_rate(0);
        if (fb.packets_observed > 0)
            ecn_rate = Rational(static_cast<std::int64_t>(fb.ecn_marks)) /
                       Rational(static_cast<std::int64_t>(fb.packets_observed));
        Rational rtt_excess(0);
        if (!fb.rtt_samples_us.empty()) {
            const Rational mean = mean_rtt(fb);
            if (median < mean) rtt_excess = mean - median;
        }
        const Rational losses(static_cast<std::int64_t>(fb.losses));

        for (const auto& rule : policy.rules) {
            Rational signal(0);
            switch (rule.signal) {
                case AlphaPolicy::Signal::EcnRate: signal = ecn_rate; break;
                case AlphaPolicy::Signal::LossCount: signal = losses; break;
                case AlphaPolicy::Signal::RttExcess: signal = rtt_excess; break;
            }
            if (!(signal < rule.threshold) && alpha[i] < rule.alpha)
                alpha[i] = rule.alpha;
        }
    }
    return alpha;
}

}  // namespace pathspray
