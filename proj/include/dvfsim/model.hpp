#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dvfsim {

/*
 * One processor operating point. Frequencies are kept as integer Hz so
 * that comparisons and table lookups are exact; voltages are plain
 * doubles.
 */
struct PState {
    std::int64_t frequency_hz = 0;
    double voltage_v = 0.0;

    friend bool operator==(const PState&, const PState&) = default;
};

/*
 * Processor model: an ordered set of P-states plus the parameters of the
 * package power model
 *
 *     power(p) = static_power_w + dynamic_coefficient * V^2 * f
 *
 * The constructor enforces the structural rules the rest of the code
 * relies on: P-states sorted by strictly descending frequency with no
 * duplicates, voltages non-increasing down the list, and (whenever the
 * dynamic coefficient is nonzero) modeled power strictly increasing with
 * frequency. transition_latency_s is the time cost of switching between
 * P-states; zero disables switching overhead entirely.
 */
class Processor {
  public:
    Processor(std::vector<PState> pstates, double static_power_w,
              double dynamic_coefficient, double transition_latency_s = 0.0);

    const std::vector<PState>& pstates() const { return pstates_; }
    const PState& fastest() const { return pstates_.front(); }
    const PState& slowest() const { return pstates_.back(); }
    double static_power_w() const { return static_power_w_; }
    double dynamic_coefficient() const { return dynamic_coefficient_; }
    double transition_latency_s() const { return transition_latency_s_; }

    bool has(const PState& p) const;
    // Looks up a P-state by exact frequency; nullptr when absent.
    const PState* find(std::int64_t frequency_hz) const;

  private:
    std::vector<PState> pstates_;
    double static_power_w_ = 0.0;
    double dynamic_coefficient_ = 0.0;
    double transition_latency_s_ = 0.0;
};

/*
 * Split of one timeslice into cycle-bound and memory-stall portions,
 * both measured at the fastest P-state. t_on_s scales with the clock;
 * t_off_s is spent waiting on memory and does not.
 */
struct SliceTiming {
    double t_on_s = 0.0;
    double t_off_s = 0.0;

    friend bool operator==(const SliceTiming&, const SliceTiming&) = default;
};

// Execution time of a slice at P-state f:
//   t_on * (f_max / f) + t_off
// f must not be faster than f_max. Collapses to t_on + t_off at f_max.
double slice_duration(const SliceTiming& timing, const PState& f,
                      const PState& f_max);

// Package power at P-state p, which must be one of proc's P-states.
double power(const Processor& proc, const PState& p);

// Energy of one slice: power at f times slice_duration at f.
double slice_energy(const Processor& proc, const SliceTiming& timing,
                    const PState& f, const PState& f_max);

/*
 * Default four-point processor: 2.4/2.2/1.6/1.2 GHz at 1.30/1.25/1.10/
 * 1.00 V. The power split (65 W static, 95 W total at the top P-state)
 * is a modeling default chosen so that the bundled workload presets land
 * in a realistic savings range; it is not a measured description of any
 * physical part. See README for the tuning rationale.
 */
Processor default_processor();

// JSON config round-trip for Processor. Schema:
//   { "static_power_w": .., "dynamic_coefficient": ..,
//     "transition_latency_s": ..,
//     "pstates": [ { "frequency_hz": .., "voltage_v": .. }, .. ] }
Processor load_processor(std::istream& in);
void save_processor(const Processor& proc, std::ostream& out);

}  // namespace dvfsim
