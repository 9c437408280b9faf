// Command-line front end: trace generation, deviation analysis, profile
// updates, simulation runs, and the bound-soundness sweep. All output is
// deterministic given the flags (JSON by default, --pretty to indent).
// Exit codes: 0 success, 1 invalid input, 2 bound violation (verify-bounds).

#include <bit>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathspray/adapt.hpp"
#include "pathspray/config_json.hpp"
#include "pathspray/discrepancy.hpp"
#include "pathspray/profile.hpp"
#include "pathspray/rational.hpp"
#include "pathspray/sim.hpp"
#include "pathspray/spray.hpp"
#include "pathspray/update.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pathspray;

struct OutputOptions {
    std::string out_path;  // empty: stdout
    bool pretty = false;
};

void add_output_flags(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--out", opts.out_path, "Write output to a file instead of stdout");
    cmd->add_flag("--pretty", opts.pretty, "Indent JSON output");
}

void write_output(const OutputOptions& opts, const std::string& text) {
    if (opts.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + opts.out_path);
    out << text;
}

void write_json(const OutputOptions& opts, const ordered_json& doc) {
    write_output(opts, doc.dump(opts.pretty ? 2 : -1) + "\n");
}

SpraySeed parse_seed(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--seed", "expected sa,sb");
    SpraySeed seed;
    seed.sa = static_cast<std::uint32_t>(std::stoul(text.substr(0, comma)));
    seed.sb = static_cast<std::uint32_t>(std::stoul(text.substr(comma + 1)));
    return seed;
}

std::uint32_t ell_of(const PathProfile& profile) {
    if (!profile.total_is_power_of_two())
        throw std::invalid_argument("profile total must be a power of two");
    return profile.log2_total();
}

// --- trace ---------------------------------------------------------------

struct TraceArgs {
    std::string profile;
    std::string method = "plain";
    std::string seed = "0,1";
    std::uint64_t start = 0;
    std::uint64_t count = 0;  // 0: one full period
    OutputOptions out;
};

int run_trace(const TraceArgs& args) {
    const PathProfile profile(parse_profile(args.profile));
    const std::uint32_t ell = ell_of(profile);
    const SprayMethod method = spray_method_from_string(args.method);
    const SpraySeed seed = parse_seed(args.seed);
    validate_seed(seed, ell);
    const std::uint64_t count = args.count ? args.count : profile.total_balls();

    std::ostringstream csv;
    csv << "j,selection_point,path,sa,sb,method\n";
    for (std::uint64_t j = args.start; j < args.start + count; ++j) {
        const std::uint32_t point = selection_point(method, seed, ell, j);
        csv << j << ',' << point << ',' << profile.select_path(point) << ',' << seed.sa
            << ',' << seed.sb << ',' << to_string(method) << '\n';
    }
    write_output(args.out, csv.str());
    return 0;
}

// --- deviation -----------------------------------------------------------

struct DeviationArgs {
    std::string profile;
    std::string method = "shuffle1";
    std::string seed = "0,1";
    std::uint64_t m = 0;  // optional cross-check against the profile total
    std::optional<std::uint64_t> start;
    OutputOptions out;
};

int run_deviation(const DeviationArgs& args) {
    const PathProfile profile(parse_profile(args.profile));
    const std::uint32_t ell = ell_of(profile);
    if (args.m != 0 && args.m != profile.total_balls())
        throw std::invalid_argument("--m disagrees with the profile total");
    const SprayMethod method = spray_method_from_string(args.method);
    const SpraySeed seed = parse_seed(args.seed);
    validate_seed(seed, ell);

    ordered_json doc;
    doc["m"] = profile.total_balls();
    doc["method"] = to_string(method);
    doc["seed"] = {seed.sa, seed.sb};
    if (args.start.has_value()) doc["start"] = *args.start;

    bool sound = true;
    ordered_json per_path = ordered_json::array();
    ordered_json bounds = ordered_json::array();
    for (std::size_t i = 0; i < profile.path_count(); ++i) {
        const PathDeviation dev = path_deviation(method, seed, profile, i, args.start);
        ordered_json entry;
        entry["path"] = i;
        entry["deviation"] = dev.value.str();
        entry["deviation_decimal"] = dev.value.to_double();
        entry["empty"] = dev.empty_path;
        per_path.push_back(entry);

        if (dev.empty_path) {
            bounds.push_back("0");
            continue;
        }
        const BallInterval interval{
            static_cast<std::uint32_t>(profile.cumulative_before(i)),
            static_cast<std::uint32_t>(profile.cumulative_before(i + 1) - 1)};
        const Rational bound = bound_for(method, interval, ell);
        bounds.push_back(bound.str());
        if (bound < dev.value) sound = false;
    }
    doc["per_path"] = per_path;
    doc["bounds"] = bounds;
    doc["sound"] = sound;
    write_json(args.out, doc);
    return 0;
}

// --- update --------------------------------------------------------------

struct UpdateArgs {
    int embodiment = 0;
    std::string profile;
    std::string remove;
    std::uint64_t cursor = 0;
    OutputOptions out;
};

int run_update(const UpdateArgs& args) {
    PathProfile profile(parse_profile(args.profile));
    ResidualCursor cursor{static_cast<std::size_t>(args.cursor)};
    if (cursor.index >= profile.path_count())
        throw std::invalid_argument("--cursor out of range");

    // --remove is either "j:ej" (one bin) or a comma-separated count list.
    std::size_t single_bin = 0;
    std::uint64_t single_count = 0;
    std::vector<std::uint64_t> removal;
    const auto colon = args.remove.find(':');
    if (colon != std::string::npos) {
        single_bin = std::stoull(args.remove.substr(0, colon));
        single_count = std::stoull(args.remove.substr(colon + 1));
        removal.assign(profile.path_count(), 0);
        if (single_bin >= profile.path_count())
            throw std::invalid_argument("--remove bin out of range");
        removal[single_bin] = single_count;
    } else {
        removal = parse_counts(args.remove);
        std::size_t positive = 0;
        for (std::size_t i = 0; i < removal.size(); ++i)
            if (removal[i] > 0) {
                single_bin = i;
                single_count = removal[i];
                ++positive;
            }
        if (args.embodiment == 1 && positive != 1)
            throw std::invalid_argument(
                "embodiment 1 removes from exactly one bin (use j:ej)");
    }

    switch (args.embodiment) {
        case 1: redistribute_from_bin(profile, cursor, single_bin, single_count); break;
        case 2: redistribute_evenly(profile, cursor, removal); break;
        case 3: redistribute_to_untouched(profile, cursor, removal); break;
        case 4: redistribute_proportionally(profile, cursor, removal); break;
        default: throw std::invalid_argument("--embodiment must be 1, 2, 3, or 4");
    }

    ordered_json doc;
    doc["profile"] = profile.counts();
    doc["cursor"] = cursor.index;
    write_json(args.out, doc);
    return 0;
}

// --- sim -----------------------------------------------------------------

struct SimArgs {
    std::string config_path;
    std::string trace_csv_path;
    OutputOptions out;
};

int run_sim_cmd(const SimArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + args.config_path);
    nlohmann::json doc = nlohmann::json::parse(in);
    const sim::SimConfig config = parse_sim_config(doc);
    const sim::CompletionReport report = sim::run_sim(config, !args.trace_csv_path.empty());
    if (!args.trace_csv_path.empty()) {
        std::ofstream trace(args.trace_csv_path, std::ios::binary);
        if (!trace)
            throw std::runtime_error("cannot open trace file: " + args.trace_csv_path);
        trace << report_trace_csv(report);
    }
    write_json(args.out, report_to_json(report));
    return 0;
}

// --- verify-bounds -------------------------------------------------------

struct VerifyArgs {
    std::vector<std::uint64_t> m_values{16, 64, 256, 1024};
    std::vector<std::string> methods{"shuffle1", "shuffle2"};
    std::uint64_t seeds = 100;
    std::uint64_t profiles = 10;
    std::uint64_t paths = 5;
    std::uint64_t rng_seed = 1;
    OutputOptions out;
};

std::vector<std::uint64_t> random_profile(SplitMix64& rng, std::uint64_t m,
                                          std::uint64_t n) {
    // n-1 sorted cut points in [0, m] turn into n counts (zeros allowed).
    std::vector<std::uint64_t> cuts;
    for (std::uint64_t i = 0; i + 1 < n; ++i) cuts.push_back(rng.next() % (m + 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::uint64_t> counts;
    std::uint64_t prev = 0;
    for (std::uint64_t cut : cuts) {
        counts.push_back(cut - prev);
        prev = cut;
    }
    counts.push_back(m - prev);
    return counts;
}

int run_verify_bounds(const VerifyArgs& args) {
    bool violation = false;
    ordered_json sweeps = ordered_json::array();

    for (std::uint64_t m : args.m_values) {
        if (!std::has_single_bit(m)) throw std::invalid_argument("m must be a power of two");
        const std::uint32_t ell = static_cast<std::uint32_t>(std::countr_zero(m));
        for (const std::string& method_name : args.methods) {
            const SprayMethod method = spray_method_from_string(method_name);
            const Rational global_bound =
                method == SprayMethod::Shuffle2 ? Rational(2 * ell) : Rational(ell);

            SplitMix64 rng(args.rng_seed ^ (m * 0x51ed2701u) ^
                           static_cast<std::uint64_t>(method));
            Rational max_dev(0);
            std::uint64_t checked = 0;
            bool within_interval_bounds = true;

            for (std::uint64_t p = 0; p < args.profiles; ++p) {
                const PathProfile profile(random_profile(rng, m, args.paths));
                for (std::uint64_t s = 0; s < args.seeds; ++s) {
                    const SpraySeed seed = draw_seed(rng, ell);
                    for (std::size_t path = 0; path < profile.path_count(); ++path) {
                        const PathDeviation dev =
                            path_deviation(method, seed, profile, path);
                        if (dev.empty_path) continue;
                        ++checked;
                        if (max_dev < dev.value) max_dev = dev.value;
                        const BallInterval interval{
                            static_cast<std::uint32_t>(profile.cumulative_before(path)),
                            static_cast<std::uint32_t>(
                                profile.cumulative_before(path + 1) - 1)};
                        if (bound_for(method, interval, ell) < dev.value)
                            within_interval_bounds = false;
                    }
                }
            }

            if (global_bound < max_dev || !within_interval_bounds) violation = true;
            ordered_json entry;
            entry["m"] = m;
            entry["ell"] = ell;
            entry["method"] = method_name;
            entry["paths_checked"] = checked;
            entry["max_deviation"] = max_dev.str();
            entry["max_deviation_decimal"] = max_dev.to_double();
            entry["global_bound"] = global_bound.str();
            entry["within_interval_bounds"] = within_interval_bounds;
            sweeps.push_back(entry);
        }
    }

    ordered_json doc;
    doc["sweeps"] = sweeps;
    doc["violation"] = violation;
    write_json(args.out, doc);
    return violation ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic packet-spraying toolkit"};
    app.require_subcommand(1);

    TraceArgs trace_args;
    CLI::App* trace = app.add_subcommand("trace", "Emit a selection-point trace as CSV");
    trace->add_option("--profile", trace_args.profile, "Comma-separated ball counts")
        ->required();
    trace->add_option("--method", trace_args.method, "plain | shuffle1 | shuffle2");
    trace->add_option("--seed", trace_args.seed, "Spray seed sa,sb");
    trace->add_option("--start", trace_args.start, "First counter value");
    trace->add_option("--count", trace_args.count, "Rows to emit (default: one period)");
    add_output_flags(trace, trace_args.out);

    DeviationArgs deviation_args;
    CLI::App* deviation =
        app.add_subcommand("deviation", "Per-path deviation report with proven bounds");
    deviation->add_option("--profile", deviation_args.profile, "Comma-separated ball counts")
        ->required();
    deviation->add_option("--method", deviation_args.method, "plain | shuffle1 | shuffle2");
    deviation->add_option("--seed", deviation_args.seed, "Spray seed sa,sb");
    deviation->add_option("--m", deviation_args.m, "Expected ball total (cross-check)");
    std::uint64_t start_value = 0;
    CLI::Option* start_opt =
        deviation->add_option("--start", start_value, "Fixed start counter (else max over starts)");
    add_output_flags(deviation, deviation_args.out);

    UpdateArgs update_args;
    CLI::App* update = app.add_subcommand("update", "Apply one profile redistribution");
    update->add_option("--embodiment", update_args.embodiment, "1 | 2 | 3 | 4")->required();
    update->add_option("--profile", update_args.profile, "Comma-separated ball counts")
        ->required();
    update->add_option("--remove", update_args.remove, "j:ej or comma-separated counts")
        ->required();
    update->add_option("--cursor", update_args.cursor, "Residual cursor position");
    add_output_flags(update, update_args.out);

    SimArgs sim_args;
    CLI::App* simulate = app.add_subcommand("sim", "Run the multipath simulator");
    simulate->add_option("--config", sim_args.config_path, "JSON config file")->required();
    simulate->add_option("--trace-csv", sim_args.trace_csv_path,
                         "Also write a per-packet CSV trace");
    add_output_flags(simulate, sim_args.out);

    VerifyArgs verify_args;
    CLI::App* verify =
        app.add_subcommand("verify-bounds", "Sweep random seeds/profiles against bounds");
    verify->add_option("--m", verify_args.m_values, "Ball totals (powers of two)")
        ->delimiter(',');
    verify->add_option("--methods", verify_args.methods, "Methods to sweep")
        ->delimiter(',');
    verify->add_option("--seeds", verify_args.seeds, "Seeds per profile");
    verify->add_option("--profiles", verify_args.profiles, "Profiles per m");
    verify->add_option("--paths", verify_args.paths, "Paths per profile");
    verify->add_option("--rng-seed", verify_args.rng_seed, "Sweep RNG seed");
    add_output_flags(verify, verify_args.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (trace->parsed()) return run_trace(trace_args);
        if (deviation->parsed()) {
            if (start_opt->count() > 0) deviation_args.start = start_value;
            return run_deviation(deviation_args);
        }
        if (update->parsed()) return run_update(update_args);
        if (simulate->parsed()) return run_sim_cmd(sim_args);
        if (verify->parsed()) return run_verify_bounds(verify_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
