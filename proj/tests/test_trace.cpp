#include "dvfsim/trace.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "support.hpp"

using namespace dvfsim;

namespace {

SliceSample sample(std::uint64_t instructions, std::uint64_t accesses,
                   double t_on, double t_off) {
    SliceSample s;
    s.instructions = instructions;
    s.memory_accesses = accesses;
    s.timing = {t_on, t_off};
    return s;
}

Trace random_trace(std::mt19937_64& rng) {
    Trace t;
    t.timeslice_nominal_s = 0.05 + static_cast<double>(rng() % 20) * 0.01;
    std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t instructions = 1 + rng() % 200'000'000;
        std::uint64_t accesses = rng() % (instructions / 10 + 1);
        double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        t.slices.push_back(sample(instructions, accesses, 1e-6 + u1 * 0.2,
                                  u2 * 0.2));
    }
    return t;
}

void mapi_basics() {
    CHECK_EQ(mapi(sample(1'000'000, 2'000, 0.1, 0.0)), 0.002);
    CHECK_EQ(mapi(sample(1'000'000, 0, 0.1, 0.0)), 0.0);
    CHECK_EQ(mapi(sample(1'000'000, 50'000, 0.1, 0.0)), 0.05);
    CHECK_THROWS(mapi(sample(0, 0, 0.1, 0.0)));
    // scale invariance
    CHECK_EQ(mapi(sample(3'000'000, 6'000, 0.1, 0.0)),
             mapi(sample(1'000'000, 2'000, 0.1, 0.0)));
}

void validation_rules() {
    Trace t;
    CHECK_THROWS(validate(t));
    t.slices.push_back(sample(100, 10, 0.09, 0.01));
    validate(t);
    CHECK(true);

    Trace bad = t;
    bad.slices.push_back(sample(0, 10, 0.09, 0.01));
    CHECK_THROWS(validate(bad));
    bad = t;
    bad.slices.push_back(sample(100, 10, -0.1, 0.01));
    CHECK_THROWS(validate(bad));
    bad = t;
    bad.slices.push_back(sample(100, 10, 0.0, 0.0));
    CHECK_THROWS(validate(bad));
    bad = t;
    bad.timeslice_nominal_s = 0.0;
    CHECK_THROWS(validate(bad));
}

void csv_round_trip() {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 200; ++i) {
        Trace t = random_trace(rng);
        Trace again = load_trace(emit_trace(t, TraceFormat::csv),
                                 TraceFormat::csv);
        CHECK(again == t);
        // canonical form is a fixed point
        CHECK_EQ(emit_trace(again, TraceFormat::csv),
                 emit_trace(t, TraceFormat::csv));
    }

    // nominal length survives even when it is not the default
    Trace t;
    t.timeslice_nominal_s = 0.025;
    t.slices.push_back(sample(100, 2, 0.09, 0.01));
    std::string text = emit_trace(t, TraceFormat::csv);
    CHECK(text.find("# timeslice_nominal=0.025") == 0);
    CHECK_EQ(load_trace(text, TraceFormat::csv).timeslice_nominal_s, 0.025);

    // a file without the comment line gets the default
    std::string bare =
        "slice_index,instructions,memory_accesses,t_on_seconds,t_off_seconds\n"
        "0,100,2,0.09,0.01\n";
    CHECK_EQ(load_trace(bare, TraceFormat::csv).timeslice_nominal_s, 0.1);
}

void csv_errors() {
    CHECK_THROWS(load_trace(std::string(""), TraceFormat::csv));
    CHECK_THROWS(load_trace(std::string("bogus,header\n"), TraceFormat::csv));
    std::string header =
        "slice_index,instructions,memory_accesses,t_on_seconds,t_off_seconds\n";
    CHECK_THROWS(load_trace(header + "1,100,2,0.09,0.01\n", TraceFormat::csv));
    CHECK_THROWS(load_trace(header + "0,100,2,0.09\n", TraceFormat::csv));
    CHECK_THROWS(load_trace(header + "0,-100,2,0.09,0.01\n", TraceFormat::csv));
    CHECK_THROWS(load_trace(header + "0,100,2,oops,0.01\n", TraceFormat::csv));
    CHECK_THROWS(load_trace(header + "0,100,2,-0.09,0.01\n", TraceFormat::csv));
    // error messages carry the line number
    try {
        load_trace(header + "0,100,2,0.09,0.01\n2,100,2,0.09,0.01\n",
                   TraceFormat::csv);
        CHECK(false);
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

void json_round_trip() {
    std::mt19937_64 rng(405);
    for (int i = 0; i < 200; ++i) {
        Trace t = random_trace(rng);
        Trace again = load_trace(emit_trace(t, TraceFormat::json),
                                 TraceFormat::json);
        CHECK(again == t);
    }
    CHECK_THROWS(load_trace(std::string("{"), TraceFormat::json));
    CHECK_THROWS(load_trace(std::string("{\"slices\": []}"),
                            TraceFormat::json));
    // negative counters must not wrap around to huge values
    std::string negative = R"({"timeslice_nominal": 0.1, "slices": [
        {"slice_index": 0, "instructions": -5, "memory_accesses": 0,
         "t_on_seconds": 0.09, "t_off_seconds": 0.01}]})";
    CHECK_THROWS(load_trace(negative, TraceFormat::json));
}

void stall_profile_shape() {
    StallProfile lin = StallProfile::linear(12.5);
    CHECK_EQ(lin.fraction(0.0), 0.0);
    CHECK_EQ(lin.fraction(0.08), 1.0);
    CHECK_EQ(lin.fraction(0.5), 1.0);
    CHECK_NEAR(lin.fraction(0.04), 0.5, 1e-12);
    CHECK_THROWS(StallProfile::linear(0.0));

    StallProfile def = default_stall_profile();
    def.check();
    CHECK_EQ(def.fraction(0.0), 0.0);
    CHECK_EQ(def.fraction(0.004), 0.67);
    CHECK_EQ(def.fraction(0.010), 0.94);
    CHECK_EQ(def.fraction(0.040), 0.97);
    CHECK_EQ(def.fraction(0.080), 1.0);
    CHECK_EQ(def.fraction(3.0), 1.0);
    CHECK_THROWS(def.fraction(-0.1));

    // monotone and quantized across a fine sweep
    double prev = 0.0;
    for (int i = 0; i <= 10'000; ++i) {
        double f = def.fraction(static_cast<double>(i) * 1e-5);
        CHECK(f >= prev);
        CHECK_EQ(std::round(f * 1e12) / 1e12, f);
        prev = f;
    }

    CHECK_THROWS(StallProfile{{{0.1, 0.0}}}.check());
    CHECK_THROWS((StallProfile{{{0.0, 0.0}, {0.0, 0.5}}}.check()));
    CHECK_THROWS((StallProfile{{{0.0, 0.5}, {0.1, 0.2}}}.check()));
    CHECK_THROWS((StallProfile{{{0.0, 0.0}, {0.1, 1.5}}}.check()));
}

void generator_behavior() {
    std::vector<PhaseSpec> one_phase = {{10, 0.02, 0.0, 100'000'000}};
    Trace t = generate_synthetic(one_phase, 1);
    CHECK_EQ(t.slices.size(), 10u);
    for (const SliceSample& s : t.slices) CHECK_EQ(mapi(s), 0.02);

    // determinism and seed sensitivity
    std::vector<PhaseSpec> jittery = {{200, 0.01, 0.005, 100'000'000}};
    CHECK(generate_synthetic(jittery, 42) == generate_synthetic(jittery, 42));
    CHECK(!(generate_synthetic(jittery, 42) ==
            generate_synthetic(jittery, 43)));

    // realized MAPI stays inside the jitter band
    Trace j = generate_synthetic(jittery, 42);
    for (const SliceSample& s : j.slices) {
        double m = mapi(s);
        CHECK(m >= 0.005 && m <= 0.015);
    }

    // stall fraction is monotone in MAPI within one trace
    std::vector<PhaseSpec> wide = {{300, 0.02, 0.02, 100'000'000}};
    Trace w = generate_synthetic(wide, 9);
    for (const SliceSample& a : w.slices)
        for (const SliceSample& b : w.slices)
            if (mapi(a) > mapi(b))
                CHECK(a.timing.t_off_s >= b.timing.t_off_s);

    // slices fill the nominal length
    for (const SliceSample& s : w.slices)
        CHECK_NEAR(s.timing.t_on_s + s.timing.t_off_s, 0.1, 1e-15);

    CHECK_THROWS(generate_synthetic({}, 0));
    CHECK_THROWS(generate_synthetic({{0, 0.01, 0.0, 100}}, 0));
    CHECK_THROWS(generate_synthetic({{5, -0.01, 0.0, 100}}, 0));
    CHECK_THROWS(generate_synthetic({{5, 0.01, -0.1, 100}}, 0));
    CHECK_THROWS(generate_synthetic({{5, 0.01, 0.0, 0}}, 0));
}

void preset_shapes() {
    for (const char* name : {"cg", "ft", "mg", "sp"})
        CHECK(!preset(name).empty());
    CHECK_THROWS(preset("ep"));

    // the memory-bound preset never dips below 0.01
    Trace cg = generate_synthetic(preset("cg"), 0);
    for (const SliceSample& s : cg.slices) CHECK(mapi(s) >= 0.01);
    CHECK_EQ(cg.slices.size(), 150u);
}

}  // namespace

int main() {
    mapi_basics();
    validation_rules();
    csv_round_trip();
    csv_errors();
    json_round_trip();
    stall_profile_shape();
    generator_behavior();
    preset_shapes();
    return testsupport::summary("trace");
}
