#include "pathspray/config_json.hpp"

#include <sstream>
#include <stdexcept>

namespace pathspray {

using nlohmann::json;
using nlohmann::ordered_json;

Rational rational_from_json(const json& value) {
    if (value.is_string()) return Rational::parse(value.get<std::string>());
    if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
    if (value.is_number_float()) return Rational::from_double(value.get<double>());
    throw std::invalid_argument("expected a number or \"p/q\" string");
}

AlphaPolicy parse_alpha_policy(const json& rules) {
    if (!rules.is_array()) throw std::invalid_argument("alpha policy must be an array");
    AlphaPolicy policy;
    for (const auto& rule : rules) {
        AlphaPolicy::Rule parsed;
        parsed.signal = alpha_signal_from_string(rule.at("signal").get<std::string>());
        parsed.threshold = rational_from_json(rule.at("threshold"));
        parsed.alpha = rational_from_json(rule.at("alpha"));
        policy.rules.push_back(parsed);
    }
    return policy;
}

ordered_json alpha_policy_to_json(const AlphaPolicy& policy) {
    ordered_json rules = ordered_json::array();
    for (const auto& rule : policy.rules) {
        ordered_json entry;
        entry["signal"] = to_string(rule.signal);
        entry["threshold"] = rule.threshold.str();
        entry["alpha"] = rule.alpha.str();
        rules.push_back(entry);
    }
    return rules;
}

namespace {

sim::PathSpec parse_path(const json& doc) {
    sim::PathSpec path;
    path.latency_us = doc.at("latency_us").get<std::uint64_t>();
    path.bandwidth_bps = doc.at("bandwidth_bps").get<std::uint64_t>();
    path.queue_capacity = doc.value("queue_capacity", path.queue_capacity);
    path.ecn_threshold = doc.value("ecn_threshold", path.queue_capacity);
    if (doc.contains("feedback_delay_us"))
        path.feedback_delay_us = doc.at("feedback_delay_us").get<std::uint64_t>();
    if (doc.contains("loss")) {
        const json& loss = doc.at("loss");
        if (loss.contains("drop_path_seq"))
            path.loss.drop_path_seq =
                loss.at("drop_path_seq").get<std::vector<std::uint64_t>>();
        if (loss.contains("rate")) {
            const Rational rate = rational_from_json(loss.at("rate"));
            if (rate < Rational(0) || rate > Rational(1))
                throw std::invalid_argument("loss rate must lie in [0, 1]");
            path.loss.rate_num = static_cast<std::uint64_t>(rate.num());
            path.loss.rate_den = static_cast<std::uint64_t>(rate.den());
        }
        path.loss.seed = loss.value("seed", std::uint64_t{0});
    }
    return path;
}

sim::MessageSpec parse_message(const json& doc) {
    sim::MessageSpec message;
    message.size_bits = doc.at("size_bits").get<std::uint64_t>();
    message.packet_payload_bits = doc.at("packet_payload_bits").get<std::uint64_t>();
    const std::string mode = doc.value("mode", std::string("all_packets"));
    if (mode == "all_packets") {
        message.mode = sim::CompletionMode::AllPackets;
    } else if (mode == "fountain") {
        message.mode = sim::CompletionMode::Fountain;
        message.fountain_k = doc.at("fountain_k").get<std::uint64_t>();
        message.packet_budget = doc.value("packet_budget", std::uint64_t{0});
    } else {
        throw std::invalid_argument("message mode must be all_packets or fountain");
    }
    return message;
}

}  // namespace

sim::SimConfig parse_sim_config(const json& doc) {
    sim::SimConfig config;
    for (const auto& path : doc.at("paths")) config.paths.push_back(parse_path(path));
    config.message = parse_message(doc.at("message"));
    for (const auto& segment : doc.at("schedule")) {
        sim::ScheduleSegment seg;
        seg.start_us = segment.at("start_us").get<std::uint64_t>();
        seg.counts = segment.at("profile").get<std::vector<std::uint64_t>>();
        config.schedule.segments.push_back(seg);
    }

    const json& spray = doc.at("spray");
    config.spray.method = spray_method_from_string(spray.at("method").get<std::string>());
    config.spray.seed.sa = spray.value("sa", std::uint32_t{0});
    config.spray.seed.sb = spray.value("sb", std::uint32_t{1});
    config.spray.rotate_every_period = spray.value("rotate_every_period", false);
    config.spray.rotation_seed = spray.value("rotation_seed", std::uint64_t{0});

    if (doc.contains("adapt")) {
        const json& adapt = doc.at("adapt");
        sim::AdaptConfig parsed;
        parsed.window_us = adapt.at("window_us").get<std::uint64_t>();
        parsed.policy = adapt.contains("policy") ? parse_alpha_policy(adapt.at("policy"))
                                                 : AlphaPolicy::default_policy();
        if (adapt.contains("weights"))
            for (const auto& w : adapt.at("weights"))
                parsed.weights.push_back(rational_from_json(w));
        parsed.rebalance_budget = adapt.value("rebalance_budget", std::uint64_t{0});
        config.adapt = parsed;
    }

    if (doc.contains("send_rate")) {
        const json& rate = doc.at("send_rate");
        const std::string mode = rate.value("mode", std::string("aggregate_active"));
        if (mode == "aggregate_active") {
            config.send_rate.mode = sim::SendRateConfig::Mode::AggregateActive;
        } else if (mode == "fixed") {
            config.send_rate.mode = sim::SendRateConfig::Mode::Fixed;
            config.send_rate.fixed_bps = rate.at("fixed_bps").get<std::uint64_t>();
        } else {
            throw std::invalid_argument("send_rate mode must be aggregate_active or fixed");
        }
    }

    config.timeout_us = doc.value("timeout_us", config.timeout_us);
    return config;
}

ordered_json report_to_json(const sim::CompletionReport& report) {
    ordered_json doc;
    doc["status"] = report.status == sim::SimStatus::Completed ? "completed" : "timeout";
    if (report.status == sim::SimStatus::Completed)
        doc["completion_time_us"] = report.completion_time_us;
    doc["packets_generated"] = report.packets_generated;

    ordered_json paths = ordered_json::array();
    for (const auto& stats : report.path_stats) {
        ordered_json entry;
        entry["sent"] = stats.sent;
        entry["delivered"] = stats.delivered;
        entry["dropped"] = stats.dropped;
        entry["ecn_marked"] = stats.ecn_marked;
        paths.push_back(entry);
    }
    doc["paths"] = paths;

    doc["final_profile"] = report.final_counts;
    doc["final_cursor"] = report.final_cursor;

    ordered_json history = ordered_json::array();
    for (const auto& change : report.profile_history) {
        ordered_json entry;
        entry["time_us"] = change.time_us;
        entry["counts"] = change.counts;
        entry["reason"] = change.reason;
        history.push_back(entry);
    }
    doc["profile_history"] = history;

    ordered_json rebalances = ordered_json::array();
    for (const auto& record : report.rebalances) {
        ordered_json entry;
        entry["time_us"] = record.time_us;
        entry["objective_before"] = record.objective_before.str();
        entry["objective_after"] = record.objective_after.str();
        entry["applied"] = record.applied;
        rebalances.push_back(entry);
    }
    doc["rebalances"] = rebalances;

    ordered_json feedback = ordered_json::array();
    for (const auto& record : report.feedback) {
        ordered_json entry;
        entry["time_us"] = record.time_us;
        entry["path"] = record.path_id;
        entry["path_seq"] = record.path_seq;
        entry["ecn"] = record.ecn;
        entry["rtt_us"] = record.rtt_us;
        entry["new_gaps"] = record.new_gaps;
        feedback.push_back(entry);
    }
    doc["feedback"] = feedback;
    return doc;
}

std::string report_trace_csv(const sim::CompletionReport& report) {
    std::ostringstream out;
    out << "time,event,path,path_seq,flow_seq,ecn\n";
    for (const auto& row : report.trace)
        out << row.time_us << ',' << row.event << ',' << row.path_id << ','
            << row.path_seq << ',' << row.flow_seq << ',' << (row.ecn ? 1 : 0) << '\n';
    return out.str();
}

}  // namespace pathspray
