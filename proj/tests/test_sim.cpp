#include <doctest.h>

#include <cstdint>
#include <vector>

#include "pathspray/config_json.hpp"
#include "pathspray/discrepancy.hpp"
#include "pathspray/profile.hpp"
#include "pathspray/rational.hpp"
#include "pathspray/sim.hpp"
#include "pathspray/spray.hpp"

using namespace pathspray;
using namespace pathspray::sim;

namespace {

// Two paths: 100 ms at 100 Mbps and 10 ms at 50 Mbps; 10 Mbit message in
// 10 kbit packets (1000 packets).
SimConfig two_path_config(std::vector<std::uint64_t> counts) {
    SimConfig cfg;
    cfg.paths.resize(2);
    cfg.paths[0].latency_us = 100'000;
    cfg.paths[0].bandwidth_bps = 100'000'000;
    cfg.paths[1].latency_us = 10'000;
    cfg.paths[1].bandwidth_bps = 50'000'000;
    cfg.message.size_bits = 10'000'000;
    cfg.message.packet_payload_bits = 10'000;
    cfg.schedule.segments.push_back({0, std::move(counts)});
    cfg.spray.method = SprayMethod::Shuffle1;
    cfg.spray.seed = SpraySeed{333, 735};
    return cfg;
}

std::uint64_t total_sent(const CompletionReport& r) {
    std::uint64_t sum = 0;
    for (const auto& s : r.path_stats) sum += s.sent;
    return sum;
}

std::uint64_t total_delivered(const CompletionReport& r) {
    std::uint64_t sum = 0;
    for (const auto& s : r.path_stats) sum += s.delivered;
    return sum;
}

std::uint64_t total_dropped(const CompletionReport& r) {
    std::uint64_t sum = 0;
    for (const auto& s : r.path_stats) sum += s.dropped;
    return sum;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("completion times for the two-path message") {
    SUBCASE("all packets on the long fat path") {
        // Serialization finishes at 100 ms; the last packet lands 100 ms
        // later.
        const auto r = run_sim(two_path_config({1024, 0}));
        REQUIRE(r.status == SimStatus::Completed);
        CHECK(r.completion_time_us == 200'000);
        CHECK(r.path_stats[0].delivered == 1000);
        CHECK(r.path_stats[1].delivered == 0);
    }
    SUBCASE("all packets on the short thin path") {
        const auto r = run_sim(two_path_config({0, 1024}));
        REQUIRE(r.status == SimStatus::Completed);
        CHECK(r.completion_time_us == 210'000);
    }
    SUBCASE("a 2:1 split beats either single path") {
        const auto r = run_sim(two_path_config({683, 341}));
        REQUIRE(r.status == SimStatus::Completed);
        CHECK(r.completion_time_us == 166'767);
        CHECK(r.completion_time_us < 200'000);
    }
    SUBCASE("switching the tail to the short path beats the static split") {
        auto cfg = two_path_config({683, 341});
        cfg.schedule.segments.push_back({37'000, {0, 1024}});
        const auto r = run_sim(cfg);
        REQUIRE(r.status == SimStatus::Completed);
        CHECK(r.completion_time_us == 137'167);
        REQUIRE(r.profile_history.size() == 2);
        CHECK(r.profile_history[1].time_us == 37'000);
        CHECK(r.profile_history[1].reason == "schedule");
    }
}

TEST_CASE("packet accounting balances") {
    for (auto counts : {std::vector<std::uint64_t>{1024, 0},
                        std::vector<std::uint64_t>{683, 341}}) {
        const auto r = run_sim(two_path_config(counts));
        CHECK(total_sent(r) == r.packets_generated);
        CHECK(total_sent(r) == total_delivered(r) + total_dropped(r));
        CHECK(total_dropped(r) == 0);
    }
}

TEST_CASE("per-path send counts follow the profile within the deviation bound") {
    auto cfg = two_path_config({683, 341});
    cfg.message.size_bits = 120'000'000;  // 12000 packets > 10 periods
    const auto r = run_sim(cfg);
    REQUIRE(r.status == SimStatus::Completed);
    const std::uint64_t n = r.packets_generated;
    REQUIRE(n >= 10 * 1024);
    PathProfile profile({683, 341});
    for (std::size_t path = 0; path < 2; ++path) {
        const BallInterval a{
            static_cast<std::uint32_t>(profile.cumulative_before(path)),
            static_cast<std::uint32_t>(profile.cumulative_before(path + 1) - 1)};
        const Rational bound = bound_for(SprayMethod::Shuffle1, a, 10);
        const Rational gap =
            Rational(static_cast<std::int64_t>(r.path_stats[path].sent)) -
            Rational(static_cast<std::int64_t>(profile.balls(path)), 1024) *
                Rational(static_cast<std::int64_t>(n));
        CHECK(!(bound < gap.abs()));
    }
}

TEST_CASE("explicit drops surface as gaps in feedback") {
    auto cfg = two_path_config({0, 1024});
    cfg.paths[1].loss.drop_path_seq = {5};
    cfg.message.size_bits = 200'000;  // 20 packets
    const auto r = run_sim(cfg);
    REQUIRE(r.status == SimStatus::Timeout);  // packet 5 never arrives
    CHECK(r.path_stats[1].dropped == 1);
    CHECK(r.path_stats[1].delivered == 19);

    std::vector<std::uint64_t> gaps;
    for (const auto& fb : r.feedback)
        for (std::uint64_t g : fb.new_gaps) gaps.push_back(g);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0] == 5);

    // The gap is first reported by the arrival right after the hole.
    for (const auto& fb : r.feedback)
        if (!fb.new_gaps.empty()) CHECK(fb.path_seq == 6);
}

TEST_CASE("seeded random loss is deterministic and near the configured rate") {
    auto cfg = two_path_config({0, 1024});
    cfg.message.size_bits = 20'000'000;  // 2000 packets
    cfg.paths[1].loss.rate_num = 1;
    cfg.paths[1].loss.rate_den = 10;
    cfg.paths[1].loss.seed = 42;
    const auto a = run_sim(cfg);
    const auto b = run_sim(cfg);
    CHECK(a.path_stats[1].dropped == b.path_stats[1].dropped);
    CHECK(a.path_stats[1].dropped > 100);
    CHECK(a.path_stats[1].dropped < 300);
    CHECK(a.status == SimStatus::Timeout);  // lost packets are never resent

    cfg.paths[1].loss.seed = 43;
    const auto c = run_sim(cfg);
    CHECK(c.path_stats[1].dropped != a.path_stats[1].dropped);
}

TEST_CASE("ecn marks appear when the queue builds up") {
    auto cfg = two_path_config({0, 1024});
    cfg.send_rate.mode = SendRateConfig::Mode::Fixed;
    cfg.send_rate.fixed_bps = 100'000'000;  // 2x the path rate: queue grows
    cfg.paths[1].ecn_threshold = 4;
    cfg.message.size_bits = 1'000'000;  // 100 packets
    const auto r = run_sim(cfg);
    REQUIRE(r.status == SimStatus::Completed);
    CHECK(r.path_stats[1].ecn_marked > 0);
    std::uint64_t ecn_feedback = 0;
    for (const auto& fb : r.feedback) ecn_feedback += fb.ecn ? 1 : 0;
    CHECK(ecn_feedback == r.path_stats[1].ecn_marked);
}

TEST_CASE("queue overflow drops at enqueue") {
    auto cfg = two_path_config({0, 1024});
    cfg.send_rate.mode = SendRateConfig::Mode::Fixed;
    cfg.send_rate.fixed_bps = 200'000'000;
    cfg.paths[1].queue_capacity = 8;
    cfg.paths[1].ecn_threshold = 8;
    cfg.message.size_bits = 2'000'000;  // 200 packets into a tiny queue
    const auto r = run_sim(cfg);
    CHECK(r.path_stats[1].dropped > 0);
    CHECK(total_sent(r) == total_delivered(r) + total_dropped(r));
}

TEST_CASE("rtt equals serialization wait plus path and feedback latency") {
    auto cfg = two_path_config({0, 1024});
    cfg.message.size_bits = 1'000'000;  // 100 packets
    const auto r = run_sim(cfg);
    REQUIRE(r.status == SimStatus::Completed);
    REQUIRE(r.feedback.size() == 100);
    // Packet k emits at k*200 us, finishes serializing at (k+1)*200 us,
    // arrives +10 ms, feedback +10 ms. Completion lands at 30 ms, so only
    // feedback returning before then carries times; later records keep 0.
    for (std::uint64_t k = 0; k < 3; ++k) {
        CHECK(r.feedback[k].time_us == (k + 1) * 200 + 20'000);
        CHECK(r.feedback[k].rtt_us == 200 + 20'000);
        CHECK(r.feedback[k].path_seq == k);
        CHECK_FALSE(r.feedback[k].ecn);
    }
    CHECK(r.feedback.back().time_us == 0);  // still in flight at completion
}

TEST_CASE("feedback delay can differ from the forward latency") {
    auto cfg = two_path_config({0, 1024});
    cfg.message.size_bits = 20'000;  // 2 packets
    cfg.paths[1].feedback_delay_us = 0;
    const auto r = run_sim(cfg);
    REQUIRE(r.feedback.size() == 2);
    CHECK(r.feedback[0].rtt_us == 200 + 10'000);
}

TEST_CASE("fountain mode completes on any k distinct packets") {
    auto cfg = two_path_config({683, 341});
    cfg.message.mode = CompletionMode::Fountain;
    cfg.message.fountain_k = 800;
    cfg.message.packet_budget = 2000;
    const auto fountain = run_sim(cfg);
    REQUIRE(fountain.status == SimStatus::Completed);
    CHECK(total_delivered(fountain) == 800);

    const auto all = run_sim(two_path_config({683, 341}));
    CHECK(fountain.completion_time_us < all.completion_time_us);

    // More required packets never finish earlier.
    cfg.message.fountain_k = 900;
    const auto more = run_sim(cfg);
    REQUIRE(more.status == SimStatus::Completed);
    CHECK(fountain.completion_time_us <= more.completion_time_us);
}

TEST_CASE("fountain mode rides through losses that stall all-packets mode") {
    auto cfg = two_path_config({0, 1024});
    cfg.message.mode = CompletionMode::Fountain;
    cfg.message.fountain_k = 1000;
    cfg.message.packet_budget = 1200;
    cfg.paths[1].loss.drop_path_seq = {3, 700};
    const auto r = run_sim(cfg);
    REQUIRE(r.status == SimStatus::Completed);
    CHECK(total_delivered(r) == 1000);
    // Two extra packets cover the drops; pacing keeps a few more in flight.
    CHECK(r.packets_generated >= 1002);
    CHECK(r.packets_generated <= 1200);
}

TEST_CASE("adaptation whacks a lossy path and rebalances off it") {
    SimConfig cfg;
    cfg.paths.resize(2);
    cfg.paths[0].latency_us = 5'000;
    cfg.paths[0].bandwidth_bps = 50'000'000;
    cfg.paths[1].latency_us = 5'000;
    cfg.paths[1].bandwidth_bps = 50'000'000;
    cfg.paths[1].loss.rate_num = 1;
    cfg.paths[1].loss.rate_den = 5;
    cfg.paths[1].loss.seed = 7;
    cfg.message.size_bits = 40'000'000;  // 4000 packets
    cfg.message.packet_payload_bits = 10'000;
    cfg.schedule.segments.push_back({0, {512, 512}});
    cfg.spray.method = SprayMethod::Shuffle1;
    cfg.spray.seed = SpraySeed{333, 735};

    AdaptConfig adapt;
    adapt.policy = AlphaPolicy::default_policy();
    adapt.window_us = 20'000;
    adapt.weights = {Rational(0), Rational(1)};
    adapt.rebalance_budget = 32;
    cfg.adapt = adapt;

    const auto r = run_sim(cfg);
    REQUIRE(!r.final_counts.empty());
    CHECK(r.final_counts[1] < 512);
    CHECK(r.final_counts[0] + r.final_counts[1] == 1024);

    bool saw_whack = false;
    for (const auto& change : r.profile_history) saw_whack |= change.reason == "whack";
    CHECK(saw_whack);

    REQUIRE(!r.rebalances.empty());
    for (const auto& reb : r.rebalances) {
        CHECK(!(reb.objective_before < reb.objective_after));
        if (reb.applied) CHECK(reb.objective_after < reb.objective_before);
    }
}

TEST_CASE("timeout reports honestly when delivery cannot finish") {
    auto cfg = two_path_config({0, 1024});
    cfg.message.size_bits = 100'000;  // 10 packets
    cfg.paths[1].loss.drop_path_seq = {9};
    cfg.timeout_us = 500'000;
    const auto r = run_sim(cfg);
    CHECK(r.status == SimStatus::Timeout);
    CHECK(r.completion_time_us == 0);
    CHECK(total_delivered(r) == 9);
}

TEST_CASE("runs are reproducible byte for byte") {
    auto cfg = two_path_config({683, 341});
    cfg.paths[1].loss.rate_num = 1;
    cfg.paths[1].loss.rate_den = 50;
    cfg.paths[1].loss.seed = 99;
    cfg.message.mode = CompletionMode::Fountain;
    cfg.message.fountain_k = 900;
    cfg.message.packet_budget = 1100;
    const auto a = run_sim(cfg, true);
    const auto b = run_sim(cfg, true);
    CHECK(report_to_json(a).dump(2) == report_to_json(b).dump(2));
    CHECK(report_trace_csv(a) == report_trace_csv(b));
    CHECK(!a.trace.empty());
}

TEST_CASE("seed rotation changes the pick order across periods") {
    auto cfg = two_path_config({683, 341});
    cfg.message.size_bits = 30'720'000;  // 3072 packets = 3 periods
    auto rotating = cfg;
    rotating.spray.rotate_every_period = true;
    rotating.spray.rotation_seed = 5;
    const auto rotated = run_sim(rotating);
    const auto fixed = run_sim(cfg);
    REQUIRE(rotated.status == SimStatus::Completed);
    // Each period is a bijection, so totals still follow the profile
    // exactly over whole periods even though the order changed.
    CHECK(rotated.path_stats[0].sent == 3 * 683);
    CHECK(rotated.path_stats[1].sent == 3 * 341);
    CHECK(fixed.path_stats[0].sent == 3 * 683);
}

TEST_CASE("destination bookkeeping flags only real holes") {
    SUBCASE("in-order arrivals never report gaps") {
        Destination dst(2);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto fb = dst.on_arrival({0, s, s * 2, false});
            CHECK(fb.new_gaps.empty());
            CHECK(fb.path_id == 0);
            CHECK(fb.path_seq == s);
        }
    }
    SUBCASE("a skipped seq is reported once, on the next arrival") {
        Destination dst(1);
        CHECK(dst.on_arrival({0, 0, 0, false}).new_gaps.empty());
        const auto gap = dst.on_arrival({0, 2, 2, false});
        REQUIRE(gap.new_gaps.size() == 1);
        CHECK(gap.new_gaps[0] == 1);
        CHECK(dst.on_arrival({0, 3, 3, false}).new_gaps.empty());
    }
    SUBCASE("paths are tracked independently") {
        const auto records = destination_feedback(
            2, {{0, 0, 0, false}, {1, 0, 1, false}, {0, 2, 2, false}, {1, 1, 3, false}});
        REQUIRE(records.size() == 4);
        CHECK(records[2].new_gaps == std::vector<std::uint64_t>{1});
        CHECK(records[3].new_gaps.empty());
    }
    SUBCASE("a multi-packet hole lists every missing seq") {
        Destination dst(1);
        dst.on_arrival({0, 1, 1, false});
        // First arrival at seq 1 reports seq 0 missing.
        const auto fb = dst.on_arrival({0, 4, 4, false});
        CHECK(fb.new_gaps == std::vector<std::uint64_t>{2, 3});
    }
}

TEST_CASE("config validation rejects malformed setups") {
    SUBCASE("no paths") {
        SimConfig cfg;
        cfg.message.size_bits = 10'000;
        cfg.message.packet_payload_bits = 10'000;
        CHECK_THROWS(run_sim(cfg));
    }
    SUBCASE("schedule must start at zero") {
        auto cfg = two_path_config({683, 341});
        cfg.schedule.segments[0].start_us = 5;
        CHECK_THROWS(run_sim(cfg));
    }
    SUBCASE("segment path counts must match") {
        auto cfg = two_path_config({683, 341});
        cfg.schedule.segments.push_back({1000, {1024}});
        CHECK_THROWS(run_sim(cfg));
    }
    SUBCASE("zero payload") {
        auto cfg = two_path_config({683, 341});
        cfg.message.packet_payload_bits = 0;
        CHECK_THROWS(run_sim(cfg));
    }
    SUBCASE("fixed rate mode needs a rate") {
        auto cfg = two_path_config({683, 341});
        cfg.send_rate.mode = SendRateConfig::Mode::Fixed;
        cfg.send_rate.fixed_bps = 0;
        CHECK_THROWS(run_sim(cfg));
    }
}

TEST_CASE("aggregate send rate counts only selectable paths") {
    std::vector<PathSpec> paths(3);
    paths[0].bandwidth_bps = 100;
    paths[1].bandwidth_bps = 200;
    paths[2].bandwidth_bps = 400;
    CHECK(aggregate_send_rate_bps(paths, PathProfile({8, 8, 16})) == 700);
    CHECK(aggregate_send_rate_bps(paths, PathProfile({8, 0, 8})) == 500);
    CHECK(aggregate_send_rate_bps(paths, PathProfile({0, 0, 16})) == 400);
}

}  // TEST_SUITE
