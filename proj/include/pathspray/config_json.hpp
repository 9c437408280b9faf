#pragma once

// JSON bindings for the simulator config and report, and the alpha-policy
// rule table. Reports serialize through ordered_json so repeated runs emit
// byte-identical documents.

#include <string>

#include <json.hpp>

#include "pathspray/adapt.hpp"
#include "pathspray/rational.hpp"
#include "pathspray/sim.hpp"

namespace pathspray {

// Accepts a JSON number (converted exactly; doubles are dyadic) or a
// "p/q" string.
Rational rational_from_json(const nlohmann::json& value);

// Rule list: [{"signal": "ecn_rate"|"loss_count"|"rtt_excess",
//              "threshold": number|"p/q", "alpha": "p/q"}, ...]
AlphaPolicy parse_alpha_policy(const nlohmann::json& rules);
nlohmann::ordered_json alpha_policy_to_json(const AlphaPolicy& policy);

sim::SimConfig parse_sim_config(const nlohmann::json& doc);

nlohmann::ordered_json report_to_json(const sim::CompletionReport& report);

// Per-packet trace: header line then time,event,path,path_seq,flow_seq,ecn.
std::string report_trace_csv(const sim::CompletionReport& report);

}  // namespace pathspray
