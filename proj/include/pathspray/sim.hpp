#pragma once

// Deterministic discrete-event model of one source spraying a message over
// n paths. Time is integer microseconds; every rate conversion is exact
// integer arithmetic, so identical configs produce byte-identical reports
// on any platform.
//
// Model shape:
//   - The sender paces packets at an aggregate rate (sum of the bandwidths
//     of paths holding balls, or a fixed override) from an exact credit
//     counter; the sprayer apportions packets to paths.
//   - Each path is a FIFO: packets serialize at the path bandwidth
//     (ceil(bits * 10^6 / bps) microseconds), then arrive after the path
//     latency. Queue overflow drops at enqueue; ECN marks at enqueue when
//     the depth has reached the threshold; configured losses drop at the
//     end of serialization.
//   - The destination acknowledges every delivery after a feedback delay
//     (default: the same path's latency) and reports gaps in the per-path
//     sequence space.
//   - An optional adapter aggregates feedback into fixed windows and
//     shrinks the allocation of misbehaving paths (whack) and/or moves
//     allocation off high-severity paths (rebalance).
//
// Single-threaded: one event loop, ties broken by insertion order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathspray/adapt.hpp"
#include "pathspray/profile.hpp"
#include "pathspray/rational.hpp"
#include "pathspray/spray.hpp"
#include "pathspray/update.hpp"

namespace pathspray::sim {

// Packet drop rule, applied when serialization completes. Either an
// explicit per-path sequence list or a seeded pseudo-random rate p/q.
struct LossSpec {
    std::vector<std::uint64_t> drop_path_seq;
    std::uint64_t rate_num = 0;
    std::uint64_t rate_den = 1;
    std::uint64_t seed = 0;
};

struct PathSpec {
    std::uint64_t latency_us = 0;
    std::uint64_t bandwidth_bps = 0;
    std::uint64_t queue_capacity = 1u << 20;  // packets
    std::uint64_t ecn_threshold = 1u << 20;   // mark at enqueue when depth >= this
    LossSpec loss;
    std::optional<std::uint64_t> feedback_delay_us;  // default: latency_us
};

struct PacketHeader {
    std::size_t path_id;
    std::uint64_t path_seq;  // contiguous per path at the sender
    std::uint64_t flow_seq;  // global spray counter j
    bool ecn = false;
};

struct ScheduleSegment {
    std::uint64_t start_us;
    std::vector<std::uint64_t> counts;
};

// Profile over time: segment i is active from its start until the next
// segment's start. First segment must start at 0; all segments share the
// path count and ball total.
struct ProfileSchedule {
    std::vector<ScheduleSegment> segments;
};

enum class CompletionMode { AllPackets, Fountain };

struct MessageSpec {
    std::uint64_t size_bits = 0;
    std::uint64_t packet_payload_bits = 0;
    CompletionMode mode = CompletionMode::AllPackets;
    std::uint64_t fountain_k = 0;       // distinct deliveries required
    std::uint64_t packet_budget = 0;    // fountain emission cap; 0 = 2*k

    std::uint64_t packet_count() const {
        return (size_bits + packet_payload_bits - 1) / packet_payload_bits;
    }
};

struct SprayConfig {
    SprayMethod method = SprayMethod::Plain;
    SpraySeed seed;
    bool rotate_every_period = false;
    std::uint64_t rotation_seed = 0;
};

struct AdaptConfig {
    AlphaPolicy policy;
    std::uint64_t window_us = 0;
    std::vector<Rational> weights;       // empty: no rebalance step
    std::uint64_t rebalance_budget = 0;  // balls moved per window
};

struct SendRateConfig {
    enum class Mode { AggregateActive, Fixed };
    Mode mode = Mode::AggregateActive;
    std::uint64_t fixed_bps = 0;
};

struct SimConfig {
    std::vector<PathSpec> paths;
    MessageSpec message;
    ProfileSchedule schedule;
    SprayConfig spray;
    std::optional<AdaptConfig> adapt;
    SendRateConfig send_rate;
    std::uint64_t timeout_us = 60'000'000;
};

// Sum of bandwidths over paths the profile can select (b(i) > 0).
std::uint64_t aggregate_send_rate_bps(const std::vector<PathSpec>& paths,
                                      const PathProfile& profile);

struct PathStats {
    std::uint64_t sent = 0;       // packets handed to the path queue
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;    // queue overflow + configured loss
    std::uint64_t ecn_marked = 0;
};

struct FeedbackRecord {
    std::uint64_t time_us;  // arrival at the sender
    std::size_t path_id;
    std::uint64_t path_seq;
    bool ecn;
    std::uint64_t rtt_us;  // feedback arrival minus packet emission
    std::vector<std::uint64_t> new_gaps;  // path_seq values newly detected missing
};

struct ProfileChange {
    std::uint64_t time_us;
    std::vector<std::uint64_t> counts;
    std::string reason;  // "schedule" | "whack" | "rebalance"
};

struct RebalanceRecord {
    std::uint64_t time_us;
    Rational objective_before;
    Rational objective_after;
    bool applied;
};

struct TraceRow {
    std::uint64_t time_us;
    std::string event;  // "emit" | "deliver" | "drop" | "feedback"
    std::size_t path_id;
    std::uint64_t path_seq;
    std::uint64_t flow_seq;
    bool ecn;
};

enum class SimStatus { Completed, Timeout };

struct CompletionReport {
    SimStatus status = SimStatus::Timeout;
    std::uint64_t completion_time_us = 0;  // meaningful when Completed
    std::uint64_t packets_generated = 0;
    std::vector<PathStats> path_stats;
    std::vector<FeedbackRecord> feedback;
    std::vector<ProfileChange> profile_history;
    std::vector<RebalanceRecord> rebalances;
    std::vector<std::uint64_t> final_counts;
    std::uint64_t final_cursor = 0;
    std::vector<TraceRow> trace;  // filled only when requested
};

CompletionReport run_sim(const SimConfig& config, bool keep_trace = false);

// Incremental destination-side bookkeeping: per-path ECN/RTT records and
// gap detection (a gap is a path_seq below the highest seen that has not
// itself arrived).
class Destination {
public:
    explicit Destination(std::size_t path_count);

    // Registers a delivery and returns its feedback record (time fields are
    // filled by the caller).
    FeedbackRecord on_arrival(const PacketHeader& header);

private:
    // Per path: every seq below this has arrived or been reported missing.
    // Paths are FIFO with fixed latency, so a reported gap never fills.
    std::vector<std::uint64_t> next_expected_;
};

// Batch wrapper over Destination for offline analysis of an arrival list.
std::vector<FeedbackRecord> destination_feedback(std::size_t path_count,
                                                 const std::vector<PacketHeader>& arrivals);

}  // namespace pathspray::sim
