#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dvfsim/model.hpp"
#include "dvfsim/policy.hpp"
#include "dvfsim/trace.hpp"

namespace dvfsim {

struct SliceResult {
    double duration_s = 0.0;
    double energy_j = 0.0;
    PState pstate;
};

/*
 * Outcome of one simulated run. Totals are compensated sums of the
 * per-slice values plus, when the processor models switching overhead,
 * one latency charge per frequency change (time at the destination
 * P-state's power); the per-slice entries themselves never include
 * switching overhead. The fingerprint identifies the trace the run was
 * driven by, so mismatched comparisons fail loudly.
 */
struct RunReport {
    std::string policy_name;
    std::uint64_t trace_fingerprint = 0;
    double total_time_s = 0.0;
    double total_energy_j = 0.0;
    std::uint64_t transitions = 0;
    std::vector<SliceResult> per_slice;
};

// Relative metrics of a policy run against a reference run of the same
// trace: how much longer it took and how much energy it kept.
struct Comparison {
    double perf_loss = 0.0;
    double energy_savings = 0.0;
};

// Stable across processes and platforms: FNV-1a over the canonical CSV
// serialization.
std::uint64_t trace_fingerprint(const Trace& t);

RunReport run(const Trace& trace, const Schedule& schedule,
              const Processor& proc, std::string policy_name = "");

// Throws when the reports carry different trace fingerprints.
Comparison compare(const RunReport& policy_report,
                   const RunReport& ref_report);

// JSON round-trip for reports.
void save_report(const RunReport& r, std::ostream& out);
RunReport load_report(std::istream& in);

// Flat one-line summary for spreadsheet-style aggregation.
std::string summary_csv_header();
std::string summary_csv_row(const RunReport& policy_report,
                            const Comparison& c);

}  // namespace dvfsim
