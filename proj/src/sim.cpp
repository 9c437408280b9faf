#include "pathspray/sim.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <queue>
#include <stdexcept>

namespace pathspray::sim {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

bool loss_hits(const LossSpec& loss, const std::vector<std::uint64_t>& sorted_drops,
               std::size_t path, std::uint64_t path_seq) {
    if (std::binary_search(sorted_drops.begin(), sorted_drops.end(), path_seq)) return true;
    if (loss.rate_num == 0) return false;
    const std::uint64_t h =
        mix64(loss.seed ^ mix64(0x70617468u + path) ^ mix64(path_seq + 1));
    return h % loss.rate_den < loss.rate_num;
}

std::uint64_t serialize_us(std::uint64_t bits, std::uint64_t bps) {
    const unsigned __int128 num = static_cast<unsigned __int128>(bits) * 1'000'000u;
    return static_cast<std::uint64_t>((num + bps - 1) / bps);
}

struct Event {
    std::uint64_t time;
    std::uint64_t order;  // insertion sequence, breaks time ties
    enum class Kind { Emit, SerializeDone, Arrival, Feedback, ProfileSwitch, AdaptTick };
    Kind kind;
    std::size_t path = 0;
    PacketHeader header{};
    std::uint64_t emit_time = 0;
    std::uint64_t generation = 0;  // Emit only: stale events are ignored
    std::size_t segment = 0;       // ProfileSwitch only

    bool operator>(const Event& other) const {
        if (time != other.time) return time > other.time;
        return order > other.order;
    }
};

struct QueuedPacket {
    PacketHeader header;
    std::uint64_t emit_time;
};

struct PathRuntime {
    std::deque<QueuedPacket> queue;  // head is in service when busy
    bool busy = false;
    std::vector<std::uint64_t> sorted_drops;
    std::uint64_t feedback_delay_us = 0;
};

struct WindowAccumulator {
    std::vector<PathFeedback> per_path;
};

void validate(const SimConfig& config) {
    if (config.paths.empty()) throw std::invalid_argument("sim: no paths");
    for (const auto& p : config.paths) {
        if (p.bandwidth_bps == 0) throw std::invalid_argument("sim: bandwidth must be > 0");
        if (p.ecn_threshold > p.queue_capacity)
            throw std::invalid_argument("sim: ecn threshold exceeds queue capacity");
        if (p.loss.rate_den == 0) throw std::invalid_argument("sim: loss rate denominator 0");
        if (p.loss.rate_num > p.loss.rate_den)
            throw std::invalid_argument("sim: loss rate above 1");
    }
    if (config.message.size_bits == 0 || config.message.packet_payload_bits == 0)
        throw std::invalid_argument("sim: message and packet sizes must be > 0");
    if (config.message.mode == CompletionMode::Fountain && config.message.fountain_k == 0)
        throw std::invalid_argument("sim: fountain mode needs k >= 1");
    if (config.schedule.segments.empty())
        throw std::invalid_argument("sim: schedule needs at least one segment");
    if (config.schedule.segments.front().start_us != 0)
        throw std::invalid_argument("sim: first schedule segment must start at 0");
    for (std::size_t i = 0; i < config.schedule.segments.size(); ++i) {
        const auto& seg = config.schedule.segments[i];
        if (seg.counts.size() != config.paths.size())
            throw std::invalid_argument("sim: schedule profile size must match path count");
        if (i > 0 && seg.start_us <= config.schedule.segments[i - 1].start_us)
            throw std::invalid_argument("sim: schedule starts must strictly increase");
    }
    if (config.send_rate.mode == SendRateConfig::Mode::Fixed &&
        config.send_rate.fixed_bps == 0)
        throw std::invalid_argument("sim: fixed send rate must be > 0");
    if (config.adapt.has_value()) {
        if (config.adapt->window_us == 0)
            throw std::invalid_argument("sim: adapt window must be > 0");
        if (!config.adapt->weights.empty() &&
            config.adapt->weights.size() != config.paths.size())
            throw std::invalid_argument("sim: weight count must match path count");
    }
}

}  // namespace

std::uint64_t aggregate_send_rate_bps(const std::vector<PathSpec>& paths,
                                      const PathProfile& profile) {
    if (paths.size() != profile.path_count())
        throw std::invalid_argument("path count mismatch");
    std::uint64_t rate = 0;
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (profile.balls(i) > 0) rate += paths[i].bandwidth_bps;
    return rate;
}

Destination::Destination(std::size_t path_count) : next_expected_(path_count, 0) {}

FeedbackRecord Destination::on_arrival(const PacketHeader& header) {
    FeedbackRecord record{};
    record.path_id = header.path_id;
    record.path_seq = header.path_seq;
    record.ecn = header.ecn;
    std::uint64_t& expected = next_expected_.at(header.path_id);
    if (header.path_seq >= expected) {
        for (std::uint64_t missing = expected; missing < header.path_seq; ++missing)
            record.new_gaps.push_back(missing);
        expected = header.path_seq + 1;
    }
    return record;
}

std::vector<FeedbackRecord> destination_feedback(std::size_t path_count,
                                                 const std::vector<PacketHeader>& arrivals) {
    Destination dest(path_count);
    std::vector<FeedbackRecord> records;
    records.reserve(arrivals.size());
    for (const auto& header : arrivals) records.push_back(dest.on_arrival(header));
    return records;
}

CompletionReport run_sim(const SimConfig& config, bool keep_trace) {
    validate(config);

    const std::size_t n = config.paths.size();
    PathProfile profile(config.schedule.segments.front().counts);
    const std::uint64_t m = profile.total_balls();
    if (!profile.total_is_power_of_two())
        throw std::invalid_argument("sim: profile total must be a power of two");
    const std::uint32_t ell = profile.log2_total();
    for (const auto& seg : config.schedule.segments)
        if (PathProfile(seg.counts).total_balls() != m)
            throw std::invalid_argument("sim: schedule segments must share the ball total");

    SprayState spray(ell, config.spray.seed, config.spray.method);
    SplitMix64 rotation_entropy(config.spray.rotation_seed);
    if (config.spray.rotate_every_period) spray.enable_rotation(&rotation_entropy);
    ResidualCursor cursor;

    const std::uint64_t emission_budget =
        config.message.mode == CompletionMode::AllPackets
            ? config.message.packet_count()
            : (config.message.packet_budget ? config.message.packet_budget
                                            : 2 * config.message.fountain_k);
    const std::uint64_t needed =
        config.message.mode == CompletionMode::AllPackets ? config.message.packet_count()
                                                          : config.message.fountain_k;
    // Credit needed per packet, in bit-microseconds-per-second units.
    const unsigned __int128 kNeed =
        static_cast<unsigned __int128>(config.message.packet_payload_bits) * 1'000'000u;

    std::vector<PathRuntime> runtime(n);
    for (std::size_t i = 0; i < n; ++i) {
        runtime[i].sorted_drops = config.paths[i].loss.drop_path_seq;
        std::sort(runtime[i].sorted_drops.begin(), runtime[i].sorted_drops.end());
        runtime[i].feedback_delay_us =
            config.paths[i].feedback_delay_us.value_or(config.paths[i].latency_us);
    }

    CompletionReport report;
    report.path_stats.resize(n);
    report.profile_history.push_back(
        ProfileChange{0, profile.counts(), "schedule"});

    Destination destination(n);

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    std::uint64_t order = 0;
    auto push = [&](Event ev) {
        ev.order = order++;
        events.push(ev);
    };

    auto current_rate = [&]() -> std::uint64_t {
        if (config.send_rate.mode == SendRateConfig::Mode::Fixed)
            return config.send_rate.fixed_bps;
        return aggregate_send_rate_bps(config.paths, profile);
    };

    // Sender pacer: credit accrues at rate_bps and one packet costs kNeed.
    // The bucket starts full (one packet) so transmission begins at t = 0.
    unsigned __int128 credit = kNeed;
    std::uint64_t credit_time = 0;
    std::uint64_t rate_bps = current_rate();
    std::uint64_t emit_generation = 0;
    std::uint64_t emitted = 0;

    auto accrue = [&](std::uint64_t now) {
        credit += static_cast<unsigned __int128>(now - credit_time) * rate_bps;
        credit_time = now;
    };
    auto schedule_emit = [&](std::uint64_t now) {
        if (emitted >= emission_budget || rate_bps == 0) return;
        std::uint64_t at = now;
        if (credit < kNeed) {
            const unsigned __int128 deficit = kNeed - credit;
            at = now + static_cast<std::uint64_t>((deficit + rate_bps - 1) / rate_bps);
        }
        Event ev{};
        ev.time = at;
        ev.kind = Event::Kind::Emit;
        ev.generation = emit_generation;
        push(ev);
    };
    // Rate depends on which bins are non-empty; any profile change may
    // invalidate the pending emit time.
    auto on_profile_changed = [&](std::uint64_t now) {
        accrue(now);
        const std::uint64_t fresh = current_rate();
        if (fresh != rate_bps) {
            rate_bps = fresh;
            ++emit_generation;
            schedule_emit(now);
        }
    };

    auto start_serialize = [&](std::size_t path, std::uint64_t now) {
        PathRuntime& rt = runtime[path];
        assert(!rt.busy && !rt.queue.empty());
        rt.busy = true;
        Event ev{};
        ev.time = now + serialize_us(config.message.packet_payload_bits,
                                     config.paths[path].bandwidth_bps);
        ev.kind = Event::Kind::SerializeDone;
        ev.path = path;
        push(ev);
    };

    auto trace = [&](std::uint64_t now, const char* what, const PacketHeader& h) {
        if (keep_trace)
            report.trace.push_back(TraceRow{now, what, h.path_id, h.path_seq, h.flow_seq, h.ecn});
    };

    for (std::size_t i = 1; i < config.schedule.segments.size(); ++i) {
        Event ev{};
        ev.time = config.schedule.segments[i].start_us;
        ev.kind = Event::Kind::ProfileSwitch;
        ev.segment = i;
        push(ev);
    }

    WindowAccumulator window;
    window.per_path.resize(n);
    if (config.adapt.has_value()) {
        for (auto& fb : window.per_path) fb.window_us = config.adapt->window_us;
        Event ev{};
        ev.time = config.adapt->window_us;
        ev.kind = Event::Kind::AdaptTick;
        push(ev);
    }

    schedule_emit(0);

    std::uint64_t delivered_total = 0;
    bool completed = false;

    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        if (ev.time > config.timeout_us) break;
        const std::uint64_t now = ev.time;

        switch (ev.kind) {
            case Event::Kind::Emit: {
                if (ev.generation != emit_generation) break;
                if (emitted >= emission_budget) break;
                accrue(now);
                assert(credit >= kNeed);
                credit -= kNeed;

                const SprayState::Pick pick = spray.next_path(profile);
                PacketHeader header{pick.path, pick.path_seq, pick.flow_seq, false};
                ++emitted;
                report.packets_generated = emitted;
                PathStats& stats = report.path_stats[pick.path];
                ++stats.sent;
                trace(now, "emit", header);

                PathRuntime& rt = runtime[pick.path];
                const std::uint64_t depth = rt.queue.size();
                if (depth >= config.paths[pick.path].queue_capacity) {
                    ++stats.dropped;
                    trace(now, "drop", header);
                } else {
                    if (depth >= config.paths[pick.path].ecn_threshold) {
                        header.ecn = true;
                        ++stats.ecn_marked;
                    }
                    rt.queue.push_back(QueuedPacket{header, now});
                    if (!rt.busy) start_serialize(pick.path, now);
                }
                schedule_emit(now);
                break;
            }
            case Event::Kind::SerializeDone: {
                PathRuntime& rt = runtime[ev.path];
                assert(rt.busy && !rt.queue.empty());
                const QueuedPacket packet = rt.queue.front();
                rt.queue.pop_front();
                rt.busy = false;

                if (loss_hits(config.paths[ev.path].loss, rt.sorted_drops, ev.path,
                              packet.header.path_seq)) {
                    ++report.path_stats[ev.path].dropped;
                    trace(now, "drop", packet.header);
                } else {
                    Event arrival{};
                    arrival.time = now + config.paths[ev.path].latency_us;
                    arrival.kind = Event::Kind::Arrival;
                    arrival.path = ev.path;
                    arrival.header = packet.header;
                    arrival.emit_time = packet.emit_time;
                    push(arrival);
                }
                if (!rt.queue.empty()) start_serialize(ev.path, now);
                break;
            }
            case Event::Kind::Arrival: {
                ++report.path_stats[ev.path].delivered;
                ++delivered_total;
                trace(now, "deliver", ev.header);

                FeedbackRecord record = destination.on_arrival(ev.header);
                Event fb{};
                fb.time = now + runtime[ev.path].feedback_delay_us;
                fb.kind = Event::Kind::Feedback;
                fb.path = ev.path;
                fb.header = ev.header;
                fb.emit_time = ev.emit_time;
                // The record is appended now (gaps are known at arrival);
                // its time/rtt fields are filled when the feedback reaches
                // the sender. generation doubles as the record index.
                fb.generation = report.feedback.size();
                report.feedback.push_back(record);
                push(fb);

                if (delivered_total >= needed) {
                    report.status = SimStatus::Completed;
                    report.completion_time_us = now;
                    completed = true;
                }
                break;
            }
            case Event::Kind::Feedback: {
                FeedbackRecord& record = report.feedback[ev.generation];
                record.time_us = now;
                record.rtt_us = now - ev.emit_time;
                trace(now, "feedback", ev.header);

                if (config.adapt.has_value()) {
                    PathFeedback& fb = window.per_path[ev.path];
                    ++fb.packets_observed;
                    if (record.ecn) ++fb.ecn_marks;
                    fb.losses += record.new_gaps.size();
                    fb.rtt_samples_us.push_back(record.rtt_us);
                }
                break;
            }
            case Event::Kind::ProfileSwitch: {
                profile.replace_counts(config.schedule.segments[ev.segment].counts);
                report.profile_history.push_back(
                    ProfileChange{now, profile.counts(), "schedule"});
                on_profile_changed(now);
                break;
            }
            case Event::Kind::AdaptTick: {
                const AdaptConfig& adapt = *config.adapt;
                const std::vector<Rational> alpha =
                    feedback_to_alpha(window.per_path, adapt.policy);
                for (auto& fb : window.per_path) {
                    fb = PathFeedback{};
                    fb.window_us = adapt.window_us;
                }
                bool changed = false;
                for (std::size_t i = 0; i < n; ++i) {
                    if (alpha[i] == Rational(0)) continue;
                    const std::vector<std::uint64_t> before = profile.counts();
                    whack(profile, cursor, i, alpha[i]);
                    if (profile.counts() != before) {
                        report.profile_history.push_back(
                            ProfileChange{now, profile.counts(), "whack"});
                        changed = true;
                    }
                }
                if (!adapt.weights.empty() && adapt.rebalance_budget > 0) {
                    const Rational before = severity_objective(profile, adapt.weights);
                    const RebalanceOutcome outcome = rebalance_step(
                        profile, cursor, adapt.weights, adapt.rebalance_budget);
                    const Rational after = severity_objective(profile, adapt.weights);
                    report.rebalances.push_back(RebalanceRecord{
                        now, before, after, outcome == RebalanceOutcome::Applied});
                    if (outcome == RebalanceOutcome::Applied) {
                        report.profile_history.push_back(
                            ProfileChange{now, profile.counts(), "rebalance"});
                        changed = true;
                    }
                }
                if (changed) on_profile_changed(now);
                if (emitted < emission_budget) {
                    Event next{};
                    next.time = now + adapt.window_us;
                    next.kind = Event::Kind::AdaptTick;
                    push(next);
                }
                break;
            }
        }
        if (completed) break;
    }

    report.final_counts = profile.counts();
    report.final_cursor = cursor.index;
    return report;
}

}  // namespace pathspray::sim
