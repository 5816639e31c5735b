#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dvfsim/model.hpp"
#include "dvfsim/trace.hpp"

namespace dvfsim {

/*
 * Lookup table from memory intensity to target P-state. Band i covers
 * (upper_bounds[i-1], upper_bounds[i]]; the first band starts at 0
 * inclusive and the final bound is +infinity, so every non-negative MAPI
 * falls into exactly one band. Target frequencies must not increase as
 * the bands get more memory-bound.
 */
struct PolicyTable {
    std::vector<double> upper_bounds;
    std::vector<PState> targets;
};

void validate(const PolicyTable& table);

/*
 * Bundled default bands: [0, 0.004] -> 2.4 GHz, (0.004, 0.01] -> 2.2 GHz,
 * (0.01, 0.04] -> 1.6 GHz, (0.04, inf) -> 1.2 GHz, resolved against the
 * given processor's P-states (all four frequencies must exist on it).
 */
PolicyTable default_policy_table(const Processor& proc);

// JSON config round-trip. Schema: {"bands": [{"upper_bound_mapi": 0.004,
// "frequency_hz": 2400000000}, .., {"upper_bound_mapi": "inf",
// "frequency_hz": ..}]}. Frequencies are resolved against proc.
PolicyTable load_policy_table(std::istream& in, const Processor& proc);
void save_policy_table(const PolicyTable& table, std::ostream& out);

// Band lookup; total for every mapi >= 0, rejects negatives.
const PState& classify(const PolicyTable& table, double mapi);

// FIFO window of recent MAPI observations, oldest first.
struct PredictorState {
    std::size_t capacity = 1;
    std::vector<double> window;
};

// Returns the state with one more observation, evicting the oldest once
// the window is full.
PredictorState observe(PredictorState state, double mapi);

/*
 * Arithmetic mean of the window. Computed as min + mean(value - min) and
 * clamped to [min, max], which keeps the result inside the observed
 * range and makes a window of n equal values predict exactly that value
 * (a plain sum/n can be off by one bit there). Throws on an empty
 * window: "insufficient history".
 */
double predict(const PredictorState& state);

using Schedule = std::vector<PState>;

struct GovernorOptions {
    // History length n of the moving-average predictor.
    std::size_t window_length = 3;
    // Re-decide the frequency every this many slices; 1 re-decides at
    // every slice boundary, larger values hold the previous choice in
    // between. Observations accumulate every slice regardless.
    std::size_t decision_interval = 1;
    // Additive measurement noise on observed MAPI, uniform in
    // [-amplitude, +amplitude], clamped at 0. Zero means perfect
    // measurement.
    double noise_amplitude = 0.0;
    std::uint64_t noise_seed = 0;
};

/*
 * The per-timeslice policy loop: slice 0 runs at the fastest P-state
 * (nothing observed yet); each later slice runs at the table's class of
 * the predicted MAPI, where the prediction averages up to
 * options.window_length previous observations.
 */
Schedule governor(const Trace& trace, const PolicyTable& table,
                  const Processor& proc, const GovernorOptions& options);
Schedule governor(const Trace& trace, const PolicyTable& table, std::size_t n,
                  const Processor& proc);

// Every slice at p; p must be one of proc's P-states.
Schedule static_policy(const Trace& trace, const Processor& proc,
                       const PState& p);

/*
 * Per-slice exhaustive minimum-energy baseline. For each slice,
 * evaluates every P-state and keeps the cheapest whose duration stays
 * within (1 + max_slowdown) of the duration at the fastest P-state; no
 * constraint when max_slowdown is empty. Ties go to the higher
 * frequency. The fastest P-state is always feasible, so a choice always
 * exists.
 */
Schedule oracle_policy(const Trace& trace, const Processor& proc,
                       std::optional<double> max_slowdown = std::nullopt);

}  // namespace dvfsim
