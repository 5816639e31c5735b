#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dvfsim/model.hpp"

namespace dvfsim {

// Counter record for one timeslice. The timing split is measured at the
// fastest P-state. instructions must be nonzero whenever memory_accesses
// is nonzero, so the memory-accesses-per-instruction ratio stays defined.
struct SliceSample {
    std::uint64_t instructions = 0;
    std::uint64_t memory_accesses = 0;
    SliceTiming timing;

    friend bool operator==(const SliceSample&, const SliceSample&) = default;
};

struct Trace {
    std::vector<SliceSample> slices;
    // Configured slice length at the fastest P-state, seconds.
    double timeslice_nominal_s = 0.1;

    friend bool operator==(const Trace&, const Trace&) = default;
};

// Throws when a structural rule is broken; messages name the offending
// slice index.
void validate(const Trace& t);

// Memory accesses per instruction. Rejects samples with zero instructions.
double mapi(const SliceSample& sample);

enum class TraceFormat { csv, json };

/*
 * CSV trace layout (UTF-8, header mandatory, fixed column order):
 *
 *   # timeslice_nominal=0.1
 *   slice_index,instructions,memory_accesses,t_on_seconds,t_off_seconds
 *   0,100000000,200000,0.0933,0.0067
 *
 * The leading comment line carries the nominal slice length; when absent
 * the default of 0.1 s applies. Floats are written with shortest
 * round-trip precision, so load(emit(t)) reproduces t exactly.
 *
 * JSON layout: {"timeslice_nominal": .., "slices": [{"slice_index": ..,
 * "instructions": .., "memory_accesses": .., "t_on_seconds": ..,
 * "t_off_seconds": ..}, ..]}
 */
Trace load_trace(std::istream& in, TraceFormat format);
Trace load_trace(const std::string& text, TraceFormat format);
void emit_trace(const Trace& t, std::ostream& out, TraceFormat format);
std::string emit_trace(const Trace& t, TraceFormat format);

/*
 * Monotone map from MAPI to the fraction of slice time stalled on
 * memory. Piecewise linear between knots, constant after the last knot.
 * Knot x values must start at 0 and strictly ascend; fractions must be
 * non-decreasing and inside [0, 1]. Output is quantized to 1e-12 so that
 * equal-looking inputs cannot produce fractions that differ only in the
 * last bit.
 */
struct StallProfile {
    std::vector<std::pair<double, double>> knots;

    // min(1, beta * mapi) expressed as a two-knot profile.
    static StallProfile linear(double beta);

    void check() const;
    double fraction(double mapi) const;
};

// Concave default. Near the memory intensities where the bundled policy
// table switches P-states (0.004, 0.01, 0.04) the stall share reaches
// 0.67 / 0.94 / 0.97, which keeps the slowdown of the table's choices
// near 3% and lets the calibration procedure find those switch points
// from swept data. Fully memory-bound from MAPI 0.08 on.
StallProfile default_stall_profile();

// One homogeneous stretch of a synthetic workload. Per-slice MAPI is
// drawn uniformly from [mean - jitter, mean + jitter] (clamped at 0) and
// realized through integer counters, so values land on the
// 1/instructions grid; pick means representable at that granularity when
// exact bounds matter.
struct PhaseSpec {
    std::size_t slice_count = 0;
    double mapi_mean = 0.0;
    double mapi_jitter = 0.0;
    std::uint64_t instructions_per_slice = 100'000'000;
};

struct GeneratorConfig {
    double timeslice_nominal_s = 0.1;
    StallProfile stall = default_stall_profile();
};

// Deterministic for a given (phases, seed, config). The stall fraction of
// each generated slice is a monotone function of its realized MAPI.
Trace generate_synthetic(const std::vector<PhaseSpec>& phases,
                         std::uint64_t seed,
                         const GeneratorConfig& config = {});

/*
 * Built-in workload shapes named after the NAS kernels they imitate:
 *   cg  memory-bound throughout, MAPI never below 0.01
 *   ft  compute-leaning with two memory-heavier stretches
 *   mg  mixed, includes a short strongly memory-bound burst
 *   sp  mostly compute with moderate memory pressure
 */
std::vector<PhaseSpec> preset(const std::string& name);

}  // namespace dvfsim
