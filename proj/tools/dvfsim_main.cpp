// dvfsim: trace-driven simulator for per-timeslice frequency scaling
// policies. Subcommands: generate, run, compare, calibrate.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvfsim/calibration.hpp"
#include "dvfsim/model.hpp"
#include "dvfsim/policy.hpp"
#include "dvfsim/sim.hpp"
#include "dvfsim/trace.hpp"

namespace {

using namespace dvfsim;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path + " for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error("failed while writing " + path);
}

TraceFormat format_of(const std::string& path, const std::string& override) {
    if (override == "csv") return TraceFormat::csv;
    if (override == "json") return TraceFormat::json;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return TraceFormat::json;
    return TraceFormat::csv;
}

Processor processor_from(const std::string& path) {
    if (path.empty()) return default_processor();
    auto in = open_input(path);
    return load_processor(in);
}

PolicyTable table_from(const std::string& path, const Processor& proc) {
    if (path.empty()) return default_policy_table(proc);
    auto in = open_input(path);
    return load_policy_table(in, proc);
}

std::vector<PhaseSpec> phases_from_file(const std::string& path,
                                        GeneratorConfig& config) {
    auto in = open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("phase spec: " + std::string(e.what()));
    }
    std::vector<PhaseSpec> phases;
    try {
        if (doc.contains("timeslice_nominal"))
            config.timeslice_nominal_s = doc["timeslice_nominal"].get<double>();
        if (doc.contains("stall_knots")) {
            StallProfile profile;
            for (const auto& knot : doc["stall_knots"])
                profile.knots.emplace_back(knot.at(0).get<double>(),
                                           knot.at(1).get<double>());
            profile.check();
            config.stall = profile;
        }
        for (const auto& entry : doc.at("phases")) {
            PhaseSpec ph;
            ph.slice_count = entry.at("slices").get<std::size_t>();
            ph.mapi_mean = entry.at("mapi_mean").get<double>();
            ph.mapi_jitter = entry.value("mapi_jitter", 0.0);
            ph.instructions_per_slice =
                entry.value("instructions", std::uint64_t{100'000'000});
            phases.push_back(ph);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("phase spec: " + std::string(e.what()));
    }
    return phases;
}

const PState& resolve_frequency(const Processor& proc,
                                const std::string& text) {
    std::string lower;
    for (char c : text)
        lower.push_back(static_cast<char>(std::tolower(
            static_cast<unsigned char>(c))));
    if (lower == "fmax") return proc.fastest();
    std::int64_t hz = 0;
    if (lower.size() > 3 && lower.substr(lower.size() - 3) == "ghz") {
        hz = std::llround(std::stod(lower.substr(0, lower.size() - 3)) * 1e9);
    } else {
        hz = std::stoll(lower);
    }
    const PState* p = proc.find(hz);
    if (!p)
        throw std::runtime_error("policy: " + text +
                                 " does not match any processor P-state");
    return *p;
}

struct PolicyChoice {
    std::string name;
    Schedule schedule;
};

PolicyChoice make_schedule(const std::string& policy, const Trace& trace,
                           const Processor& proc, const PolicyTable& table,
                           const GovernorOptions& options) {
    if (policy == "governor")
        return {"governor", governor(trace, table, proc, options)};
    if (policy.rfind("static:", 0) == 0) {
        const PState& p = resolve_frequency(proc, policy.substr(7));
        return {policy, static_policy(trace, proc, p)};
    }
    if (policy == "oracle")
        return {"oracle", oracle_policy(trace, proc)};
    if (policy.rfind("oracle:", 0) == 0) {
        double max_slowdown = std::stod(policy.substr(7));
        return {policy, oracle_policy(trace, proc, max_slowdown)};
    }
    throw std::runtime_error(
        "policy: expected governor, static:<freq> or oracle[:maxloss], got '" +
        policy + "'");
}

std::string percent(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", ratio * 100.0);
    return buf;
}

struct SuiteRow {
    std::string preset_name;
    RunReport report;
    Comparison comparison;
};

SuiteRow run_suite_entry(const std::string& name, std::uint64_t seed,
                         const Processor& proc, const PolicyTable& table,
                         const GovernorOptions& options) {
    Trace trace = generate_synthetic(preset(name), seed);
    RunReport ref = run(trace, static_policy(trace, proc, proc.fastest()),
                        proc, "static:fmax");
    RunReport rep = run(trace, governor(trace, table, proc, options), proc,
                        "governor");
    return {name, rep, compare(rep, ref)};
}

int cmd_generate(const std::string& preset_name, const std::string& phases_path,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& format) {
    GeneratorConfig config;
    std::vector<PhaseSpec> phases;
    if (!preset_name.empty() && !phases_path.empty())
        throw std::runtime_error("generate: pass --preset or --phases, not both");
    if (!preset_name.empty())
        phases = preset(preset_name);
    else if (!phases_path.empty())
        phases = phases_from_file(phases_path, config);
    else
        throw std::runtime_error("generate: pass --preset or --phases");

    Trace trace = generate_synthetic(phases, seed, config);
    auto out = open_output(out_path);
    emit_trace(trace, out, format_of(out_path, format));
    finish_output(out, out_path);
    std::cout << "wrote " << out_path << " (" << trace.slices.size()
              << " slices)\n";
    return 0;
}

int cmd_run(const std::string& trace_path, const std::string& policy,
            const std::string& processor_path, const std::string& table_path,
            const GovernorOptions& options, const std::string& out_path,
            const std::string& format) {
    Processor proc = processor_from(processor_path);
    PolicyTable table = table_from(table_path, proc);
    auto trace_in = open_input(trace_path);
    Trace trace = load_trace(trace_in, format_of(trace_path, format));

    PolicyChoice choice = make_schedule(policy, trace, proc, table, options);
    RunReport report = run(trace, choice.schedule, proc, choice.name);
    auto out = open_output(out_path);
    save_report(report, out);
    finish_output(out, out_path);

    std::cout << choice.name << ": " << trace.slices.size() << " slices, "
              << report.total_time_s << " s, " << report.total_energy_j
              << " J, " << report.transitions << " transitions\n";
    return 0;
}

int cmd_compare(const std::string& report_path, const std::string& ref_path,
                const std::string& csv_path) {
    auto rep_in = open_input(report_path);
    RunReport rep = load_report(rep_in);
    auto ref_in = open_input(ref_path);
    RunReport ref = load_report(ref_in);
    Comparison c = compare(rep, ref);
    std::cout << rep.policy_name << " vs " << ref.policy_name
              << ": perf_loss " << percent(c.perf_loss) << ", energy_savings "
              << percent(c.energy_savings) << "\n";
    if (!csv_path.empty()) {
        auto out = open_output(csv_path);
        out << summary_csv_header() << '\n'
            << summary_csv_row(rep, c) << '\n';
        finish_output(out, csv_path);
    }
    return 0;
}

int cmd_compare_suite(std::uint64_t seed, unsigned jobs,
                      const std::string& processor_path,
                      const std::string& table_path,
                      const GovernorOptions& options,
                      const std::string& csv_path) {
    Processor proc = processor_from(processor_path);
    PolicyTable table = table_from(table_path, proc);
    const std::vector<std::string> names = {"cg", "ft", "mg", "sp"};
    std::vector<SuiteRow> rows(names.size());
    jobs = std::clamp<unsigned>(jobs, 1, names.size());

    std::exception_ptr failure;
    auto worker = [&](unsigned offset) {
        for (std::size_t i = offset; i < names.size(); i += jobs) {
            try {
                rows[i] = run_suite_entry(names[i], seed, proc, table, options);
            } catch (...) {
                failure = std::current_exception();
                return;
            }
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (const SuiteRow& row : rows)
        std::cout << row.preset_name << ": perf_loss "
                  << percent(row.comparison.perf_loss) << ", energy_savings "
                  << percent(row.comparison.energy_savings) << "\n";
    if (!csv_path.empty()) {
        auto out = open_output(csv_path);
        out << summary_csv_header() << '\n';
        for (const SuiteRow& row : rows)
            out << summary_csv_row(row.report, row.comparison) << '\n';
        finish_output(out, csv_path);
    }
    return 0;
}

int cmd_calibrate(const std::string& profile_path, bool simulate,
                  std::uint64_t seed, double max_loss,
                  const std::string& processor_path,
                  const std::string& out_path) {
    if (simulate == !profile_path.empty())
        throw std::runtime_error(
            "calibrate: pass exactly one of --profile or --simulate");
    Processor proc = processor_from(processor_path);
    std::vector<ProfilePoint> points;
    if (simulate) {
        points = sweep(calibration_traces(seed), proc);
    } else {
        auto in = open_input(profile_path);
        points = load_profile_points(in);
    }
    TableDerivation derivation = derive_table(points, proc, max_loss);
    for (const std::string& warning : derivation.warnings)
        std::cerr << "warning: " << warning << "\n";

    auto out = open_output(out_path);
    save_policy_table(derivation.table, out);
    finish_output(out, out_path);

    const PolicyTable& table = derivation.table;
    for (std::size_t i = 0; i < table.upper_bounds.size(); ++i) {
        std::ostringstream bound;
        if (!std::isinf(table.upper_bounds[i]))
            bound << "up to " << table.upper_bounds[i];
        else if (i > 0)
            bound << "above " << table.upper_bounds[i - 1];
        else
            bound << "any";
        std::cout << "mapi " << bound.str() << " -> "
                  << table.targets[i].frequency_hz / 1e9 << " GHz\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven simulator for per-timeslice frequency scaling"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Synthesize a workload trace");
    std::string gen_preset, gen_phases, gen_out, gen_format;
    std::uint64_t gen_seed = 0;
    gen->add_option("--preset", gen_preset, "Built-in workload: cg, ft, mg, sp");
    gen->add_option("--phases", gen_phases, "Phase spec JSON file");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--format", gen_format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json", ""}));
    gen->add_option("--out", gen_out, "Output trace path")->required();

    // run
    auto* runc = app.add_subcommand("run", "Apply a policy to a trace");
    std::string run_trace, run_policy, run_proc, run_table, run_out,
        run_format;
    GovernorOptions run_options;
    runc->add_option("--trace", run_trace, "Input trace path")->required();
    runc->add_option("--policy", run_policy,
                     "governor, static:<freq> or oracle[:maxloss]")
        ->required();
    runc->add_option("--processor", run_proc, "Processor config JSON");
    runc->add_option("--table", run_table, "Policy table JSON");
    runc->add_option("--window", run_options.window_length,
                     "Predictor history length");
    runc->add_option("--decision-interval", run_options.decision_interval,
                     "Slices between fresh frequency decisions");
    runc->add_option("--noise-amplitude", run_options.noise_amplitude,
                     "Uniform measurement noise amplitude");
    runc->add_option("--noise-seed", run_options.noise_seed,
                     "Measurement noise seed");
    runc->add_option("--format", run_format, "Trace format: csv or json")
        ->check(CLI::IsMember({"csv", "json", ""}));
    runc->add_option("--out", run_out, "Output report path")->required();

    // compare
    auto* cmp = app.add_subcommand("compare",
                                   "Relate a policy report to a reference");
    std::string cmp_report, cmp_ref, cmp_csv, cmp_proc, cmp_table;
    bool cmp_suite = false;
    std::uint64_t cmp_seed = 0;
    unsigned cmp_jobs = 1;
    GovernorOptions cmp_options;
    cmp->add_option("--report", cmp_report, "Policy report JSON");
    cmp->add_option("--reference", cmp_ref, "Reference report JSON");
    cmp->add_flag("--suite", cmp_suite,
                  "Run governor vs static:fmax on all built-in presets");
    cmp->add_option("--seed", cmp_seed, "Suite generator seed");
    cmp->add_option("--jobs", cmp_jobs, "Parallel workers in suite mode");
    cmp->add_option("--processor", cmp_proc, "Processor config JSON");
    cmp->add_option("--table", cmp_table, "Policy table JSON");
    cmp->add_option("--window", cmp_options.window_length,
                    "Predictor history length");
    cmp->add_option("--csv", cmp_csv, "Summary CSV output path");

    // calibrate
    auto* cal = app.add_subcommand("calibrate",
                                   "Derive a policy table from profiling data");
    std::string cal_profile, cal_proc, cal_out;
    bool cal_simulate = false;
    std::uint64_t cal_seed = 0;
    double cal_max_loss = 0.03;
    cal->add_option("--profile", cal_profile, "Profile points CSV");
    cal->add_flag("--simulate", cal_simulate,
                  "Sweep generated workloads instead of reading a profile");
    cal->add_option("--seed", cal_seed, "Sweep generator seed");
    cal->add_option("--max-loss", cal_max_loss,
                    "Largest tolerated slowdown, as a fraction");
    cal->add_option("--processor", cal_proc, "Processor config JSON");
    cal->add_option("--out", cal_out, "Output table path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(gen_preset, gen_phases, gen_seed, gen_out,
                                gen_format);
        if (runc->parsed())
            return cmd_run(run_trace, run_policy, run_proc, run_table,
                           run_options, run_out, run_format);
        if (cmp->parsed()) {
            if (cmp_suite)
                return cmd_compare_suite(cmp_seed, cmp_jobs, cmp_proc,
                                         cmp_table, cmp_options, cmp_csv);
            if (cmp_report.empty() || cmp_ref.empty())
                throw std::runtime_error(
                    "compare: pass --report and --reference, or --suite");
            return cmd_compare(cmp_report, cmp_ref, cmp_csv);
        }
        if (cal->parsed())
            return cmd_calibrate(cal_profile, cal_simulate, cal_seed,
                                 cal_max_loss, cal_proc, cal_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
