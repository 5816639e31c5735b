#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dvfsim/model.hpp"
#include "dvfsim/policy.hpp"
#include "dvfsim/trace.hpp"

namespace dvfsim {

// One profiled observation: how much a slice with the given memory
// intensity slowed down when run at the given frequency, relative to the
// fastest P-state.
struct ProfilePoint {
    double mapi = 0.0;
    std::int64_t frequency_hz = 0;
    double slowdown = 1.0;
};

// Simulated frequency sweep: one point per (trace slice, P-state), in
// trace order then P-state order.
std::vector<ProfilePoint> sweep(const std::vector<Trace>& traces,
                                const Processor& proc);

// CSV round-trip, header "mapi,frequency_hz,slowdown".
std::vector<ProfilePoint> load_profile_points(std::istream& in);
void emit_profile_points(const std::vector<ProfilePoint>& points,
                         std::ostream& out);

// Candidate thresholds 0.001..0.1 in 0.001 steps plus the open top band.
std::vector<double> default_threshold_grid();

struct TableDerivation {
    PolicyTable table;
    std::vector<std::string> warnings;
};

/*
 * Rebuild a policy table from profiling data. Within each grid band the
 * slowest P-state whose worst observed slowdown stays within
 * 1 + max_loss becomes the band's target; bands without data inherit
 * the previous band's choice (the fastest P-state when there is no
 * previous band); adjacent bands with equal targets merge. If the raw
 * targets are not monotone the table is repaired with a running minimum
 * frequency and a warning explains where.
 */
TableDerivation derive_table(const std::vector<ProfilePoint>& points,
                             const Processor& proc, double max_loss = 0.03,
                             std::vector<double> grid =
                                 default_threshold_grid());

// Workloads for a self-contained sweep: the four bundled presets plus a
// staircase trace stepping across the whole grid so every band gets
// sampled.
std::vector<Trace> calibration_traces(std::uint64_t seed);

}  // namespace dvfsim
