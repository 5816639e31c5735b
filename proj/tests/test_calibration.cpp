#include "dvfsim/calibration.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "support.hpp"

using namespace dvfsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Trace tiny_trace() {
    Trace t;
    SliceSample s;
    s.instructions = 100'000'000;
    s.memory_accesses = 500'000;
    s.timing = {0.06, 0.04};
    t.slices.push_back(s);
    s.memory_accesses = 2'000'000;
    s.timing = {0.01, 0.09};
    t.slices.push_back(s);
    return t;
}

void sweep_layout() {
    Processor proc = default_processor();
    std::vector<ProfilePoint> points = sweep({tiny_trace()}, proc);
    CHECK_EQ(points.size(), 8u);

    // order: slice by slice, P-states fastest first
    CHECK_EQ(points[0].mapi, 0.005);
    CHECK_EQ(points[0].frequency_hz, 2'400'000'000);
    CHECK_EQ(points[0].slowdown, 1.0);
    CHECK_EQ(points[3].frequency_hz, 1'200'000'000);
    CHECK_EQ(points[4].mapi, 0.02);

    // slowdown grows as frequency drops, worse for the compute-heavy slice
    CHECK(points[1].slowdown < points[3].slowdown);
    CHECK(points[3].slowdown > points[7].slowdown);

    // slowdown follows the timing model exactly
    const PState& slow = *proc.find(1'200'000'000);
    double base = slice_duration(tiny_trace().slices[0].timing,
                                 proc.fastest(), proc.fastest());
    CHECK_NEAR(points[3].slowdown,
               slice_duration(tiny_trace().slices[0].timing, slow,
                              proc.fastest()) / base,
               1e-15);

    CHECK_THROWS(sweep({}, proc));
}

void profile_round_trip() {
    Processor proc = default_processor();
    std::vector<ProfilePoint> points = sweep({tiny_trace()}, proc);
    std::stringstream buf;
    emit_profile_points(points, buf);
    std::vector<ProfilePoint> again = load_profile_points(buf);
    CHECK_EQ(again.size(), points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK_EQ(again[i].mapi, points[i].mapi);
        CHECK_EQ(again[i].frequency_hz, points[i].frequency_hz);
        CHECK_EQ(again[i].slowdown, points[i].slowdown);
    }

    std::istringstream empty("");
    CHECK_THROWS(load_profile_points(empty));
    std::istringstream bad_header("a,b,c\n1,2,3\n");
    CHECK_THROWS(load_profile_points(bad_header));
    std::istringstream short_row("mapi,frequency_hz,slowdown\n0.01,5\n");
    CHECK_THROWS(load_profile_points(short_row));
    std::istringstream speedup("mapi,frequency_hz,slowdown\n0.01,5,0.5\n");
    CHECK_THROWS(load_profile_points(speedup));
}

void grid_shape() {
    std::vector<double> grid = default_threshold_grid();
    CHECK_EQ(grid.size(), 101u);
    CHECK_EQ(grid.front(), 0.001);
    CHECK_NEAR(grid[39], 0.04, 1e-15);
    CHECK(std::isinf(grid.back()));
}

void derivation_basics() {
    Processor proc = default_processor();

    CHECK_THROWS(derive_table({}, proc));
    CHECK_THROWS(derive_table({{0.01, 2'400'000'000, 1.0}}, proc, -0.5));
    CHECK_THROWS(derive_table({{0.01, 2'400'000'000, 1.0}}, proc, 0.03,
                              {0.01, 0.01}));
    CHECK_THROWS(derive_table({{0.01, 1'800'000'000, 1.0}}, proc));

    // single fully stalled observation: every P-state is free, so the
    // whole range collapses to one slowest-frequency band
    std::vector<ProfilePoint> free;
    for (const PState& p : proc.pstates())
        free.push_back({0.0005, p.frequency_hz, 1.0});
    TableDerivation d = derive_table(free, proc, 0.0);
    CHECK_EQ(d.table.upper_bounds.size(), 1u);
    CHECK(std::isinf(d.table.upper_bounds[0]));
    CHECK(d.table.targets[0] == proc.slowest());
    CHECK(d.warnings.empty());

    // unsampled slow states are never picked on faith
    std::vector<ProfilePoint> sparse = {{0.0005, 2'400'000'000, 1.0}};
    TableDerivation s = derive_table(sparse, proc);
    CHECK(s.table.targets[0] == proc.fastest());

    // non-monotone evidence is repaired and reported
    std::vector<ProfilePoint> twisted;
    for (const PState& p : proc.pstates())
        twisted.push_back({0.0005, p.frequency_hz, 1.0});
    twisted.push_back({0.0015, 2'400'000'000, 1.0});
    TableDerivation w = derive_table(twisted, proc);
    CHECK_EQ(w.warnings.size(), 1u);
    CHECK_EQ(w.table.upper_bounds.size(), 1u);
    CHECK(w.table.targets[0] == proc.slowest());
}

void recovers_default_table() {
    Processor proc = default_processor();
    PolicyTable expected = default_policy_table(proc);
    std::vector<ProfilePoint> points =
        sweep(calibration_traces(0), proc);
    TableDerivation d = derive_table(points, proc, 0.03);
    CHECK(d.warnings.empty());
    CHECK_EQ(d.table.upper_bounds.size(), 4u);
    for (std::size_t i = 0; i + 1 < d.table.upper_bounds.size(); ++i)
        CHECK_NEAR(d.table.upper_bounds[i], expected.upper_bounds[i],
                   1e-3 + 1e-12);
    CHECK(d.table.targets == expected.targets);

    // the derived table never tolerates worse slowdown than asked
    for (const ProfilePoint& p : points) {
        const PState& chosen = classify(d.table, p.mapi);
        if (chosen.frequency_hz == p.frequency_hz)
            CHECK(p.slowdown <= 1.03 + 1e-12);
    }
}

}  // namespace

int main() {
    sweep_layout();
    profile_round_trip();
    grid_shape();
    derivation_basics();
    recovers_default_table();
    return testsupport::summary("calibration");
}
