#include "dvfsim/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dvfsim {

namespace {

constexpr double kSlowdownNoiseTolerance = 1e-6;

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void check_point(const ProfilePoint& p, std::size_t index) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("profile point " + std::to_string(index) +
                                    ": " + what);
    };
    if (!(p.mapi >= 0.0) || !std::isfinite(p.mapi)) fail("mapi must be >= 0");
    if (p.frequency_hz <= 0) fail("frequency must be positive");
    if (!(p.slowdown >= 1.0 - kSlowdownNoiseTolerance) ||
        !std::isfinite(p.slowdown))
        fail("slowdown below 1 exceeds the measurement-noise tolerance");
}

}  // namespace

std::vector<ProfilePoint> sweep(const std::vector<Trace>& traces,
                                const Processor& proc) {
    if (traces.empty())
        throw std::invalid_argument("sweep: needs at least one trace");
    std::vector<ProfilePoint> points;
    for (const Trace& t : traces) {
        validate(t);
        for (const SliceSample& slice : t.slices) {
            double m = mapi(slice);
            double base = slice_duration(slice.timing, proc.fastest(),
                                         proc.fastest());
            for (const PState& p : proc.pstates()) {
                double d = slice_duration(slice.timing, p, proc.fastest());
                points.push_back({m, p.frequency_hz, d / base});
            }
        }
    }
    return points;
}

std::vector<ProfilePoint> load_profile_points(std::istream& in) {
    std::vector<ProfilePoint> points;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    auto fail = [&](std::size_t column, const std::string& what) {
        throw std::invalid_argument(
            "profile csv: line " + std::to_string(line_no) + ", column " +
            std::to_string(column) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "mapi,frequency_hz,slowdown")
                fail(1, "expected header 'mapi,frequency_hz,slowdown'");
            saw_header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 3)
            fail(1, "expected 3 fields, got " + std::to_string(fields.size()));
        ProfilePoint p;
        auto parse = [&](const std::string& field, std::size_t column,
                         auto& value) {
            auto res = std::from_chars(field.data(),
                                       field.data() + field.size(), value);
            if (res.ec != std::errc{} ||
                res.ptr != field.data() + field.size())
                fail(column, "could not parse '" + field + "'");
        };
        parse(fields[0], 1, p.mapi);
        parse(fields[1], 2, p.frequency_hz);
        parse(fields[2], 3, p.slowdown);
        check_point(p, points.size());
        points.push_back(p);
    }
    if (!saw_header)
        throw std::invalid_argument("profile csv: missing header row");
    return points;
}

void emit_profile_points(const std::vector<ProfilePoint>& points,
                         std::ostream& out) {
    out << "mapi,frequency_hz,slowdown\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        check_point(points[i], i);
        out << format_double(points[i].mapi) << ',' << points[i].frequency_hz
            << ',' << format_double(points[i].slowdown) << '\n';
    }
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i)
        grid.push_back(static_cast<double>(i) / 1000.0);
    grid.push_back(std::numeric_limits<double>::infinity());
    return grid;
}

TableDerivation derive_table(const std::vector<ProfilePoint>& points,
                             const Processor& proc, double max_loss,
                             std::vector<double> grid) {
    if (!(max_loss >= 0.0) || !std::isfinite(max_loss))
        throw std::invalid_argument("derive_table: max_loss must be >= 0");
    if (grid.empty())
        throw std::invalid_argument("derive_table: grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isnan(grid[i]) || grid[i] <= 0.0)
            throw std::invalid_argument(
                "derive_table: grid entries must be positive");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw std::invalid_argument(
                "derive_table: grid must be strictly ascending");
    }
    if (grid.back() != std::numeric_limits<double>::infinity())
        grid.push_back(std::numeric_limits<double>::infinity());

    for (std::size_t i = 0; i < points.size(); ++i) {
        check_point(points[i], i);
        if (!proc.find(points[i].frequency_hz))
            throw std::invalid_argument(
                "derive_table: point " + std::to_string(i) + " references " +
                std::to_string(points[i].frequency_hz) +
                " Hz, which the processor does not offer");
    }

    const std::size_t n_bands = grid.size();
    const std::size_t n_states = proc.pstates().size();
    const double nothing = -1.0;
    // worst[band][pstate] = largest slowdown seen, or `nothing`.
    std::vector<std::vector<double>> worst(
        n_bands, std::vector<double>(n_states, nothing));
    auto band_of = [&](double m) {
        return static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), m) - grid.begin());
    };
    auto state_of = [&](std::int64_t f) {
        for (std::size_t s = 0; s < n_states; ++s)
            if (proc.pstates()[s].frequency_hz == f) return s;
        throw std::logic_error("derive_table: unmapped frequency");
    };
    for (const ProfilePoint& p : points) {
        double& cell = worst[band_of(p.mapi)][state_of(p.frequency_hz)];
        cell = std::max(cell, p.slowdown);
    }

    TableDerivation result;
    std::vector<std::size_t> choice(n_bands);
    std::vector<bool> has_data(n_bands, false);
    bool any_data = false;
    for (std::size_t b = 0; b < n_bands; ++b) {
        has_data[b] = std::any_of(worst[b].begin(), worst[b].end(),
                                  [&](double w) { return w != nothing; });
        if (!has_data[b]) {
            // No evidence for this band: carry the previous answer, or
            // stay at full speed when nothing precedes it.
            choice[b] = b > 0 ? choice[b - 1] : 0;
            continue;
        }
        any_data = true;
        // P-states are ordered fastest first; scan from the slow end and
        // take the first one whose observed worst case is acceptable.
        // The fastest P-state never slows anything down, so it is the
        // fallback even if it was not sampled in this band.
        std::size_t picked = 0;
        for (std::size_t s = n_states; s-- > 0;) {
            if (worst[b][s] == nothing) continue;
            if (worst[b][s] <= 1.0 + max_loss) {
                picked = s;
                break;
            }
        }
        choice[b] = picked;
    }
    if (!any_data)
        throw std::invalid_argument("derive_table: no profile points at all");

    // Monotonicity repair: a band must never run faster than a less
    // memory-bound band below it. Only bands with their own evidence get
    // a warning; data-free bands just follow whatever their predecessor
    // resolved to.
    for (std::size_t b = 1; b < n_bands; ++b) {
        if (choice[b] < choice[b - 1]) {
            if (has_data[b])
                result.warnings.push_back(
                    "band ending at " + format_double(grid[b]) +
                    " preferred a higher frequency than its predecessor; "
                    "clamped to keep targets monotone");
            choice[b] = choice[b - 1];
        }
    }

    PolicyTable table;
    for (std::size_t b = 0; b < n_bands; ++b) {
        if (!table.targets.empty() &&
            table.targets.back() == proc.pstates()[choice[b]]) {
            table.upper_bounds.back() = grid[b];
            continue;
        }
        table.upper_bounds.push_back(grid[b]);
        table.targets.push_back(proc.pstates()[choice[b]]);
    }
    validate(table);
    result.table = std::move(table);
    return result;
}

std::vector<Trace> calibration_traces(std::uint64_t seed) {
    std::vector<Trace> traces;
    for (const char* name : {"cg", "ft", "mg", "sp"})
        traces.push_back(generate_synthetic(preset(name), seed));
    // Staircase: one slice well inside every grid band, so the sweep has
    // evidence for the whole table including intensities the presets
    // never reach.
    std::vector<PhaseSpec> stair;
    for (int i = 0; i < 101; ++i) {
        PhaseSpec ph;
        ph.slice_count = 1;
        ph.mapi_mean = 0.0005 + 0.001 * static_cast<double>(i);
        ph.mapi_jitter = 0.0;
        stair.push_back(ph);
    }
    traces.push_back(generate_synthetic(stair, seed));
    return traces;
}

}  // namespace dvfsim
