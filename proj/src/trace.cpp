#include "dvfsim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dvfsim {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const char kCsvHeader[] =
    "slice_index,instructions,memory_accesses,t_on_seconds,t_off_seconds";
const char kNominalKey[] = "# timeslice_nominal=";

[[noreturn]] void parse_fail(std::size_t line, std::size_t column,
                             const std::string& what) {
    throw std::invalid_argument("trace csv: line " + std::to_string(line) +
                                ", column " + std::to_string(column) + ": " +
                                what);
}

std::uint64_t parse_u64(const std::string& field, std::size_t line,
                        std::size_t column) {
    std::uint64_t value = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        parse_fail(line, column, "expected a non-negative integer, got '" +
                                     field + "'");
    return value;
}

double parse_f64(const std::string& field, std::size_t line,
                 std::size_t column) {
    double value = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        parse_fail(line, column, "expected a number, got '" + field + "'");
    return value;
}

void check_slice(const SliceSample& s, std::size_t index) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("trace: slice " + std::to_string(index) +
                                    ": " + what);
    };
    if (s.memory_accesses > 0 && s.instructions == 0)
        fail("memory accesses without instructions");
    if (!(s.timing.t_on_s >= 0.0) || !std::isfinite(s.timing.t_on_s))
        fail("t_on_seconds must be >= 0");
    if (!(s.timing.t_off_s >= 0.0) || !std::isfinite(s.timing.t_off_s))
        fail("t_off_seconds must be >= 0");
    if (!(s.timing.t_on_s + s.timing.t_off_s > 0.0))
        fail("slice must have positive length");
}

Trace load_trace_csv(std::istream& in) {
    Trace t;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (saw_header)
                parse_fail(line_no, 1, "comment lines only allowed before the header");
            if (line.rfind(kNominalKey, 0) == 0)
                t.timeslice_nominal_s =
                    parse_f64(line.substr(sizeof kNominalKey - 1), line_no, 1);
            continue;
        }
        if (!saw_header) {
            if (line != kCsvHeader)
                parse_fail(line_no, 1,
                           std::string("expected header '") + kCsvHeader + "'");
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
        if (fields.size() != 5)
            parse_fail(line_no, fields.size(),
                       "expected 5 fields, got " + std::to_string(fields.size()));
        std::uint64_t index = parse_u64(fields[0], line_no, 1);
        if (index != t.slices.size())
            parse_fail(line_no, 1,
                       "slice_index " + std::to_string(index) +
                           " out of order, expected " +
                           std::to_string(t.slices.size()));
        SliceSample s;
        s.instructions = parse_u64(fields[1], line_no, 2);
        s.memory_accesses = parse_u64(fields[2], line_no, 3);
        s.timing.t_on_s = parse_f64(fields[3], line_no, 4);
        s.timing.t_off_s = parse_f64(fields[4], line_no, 5);
        t.slices.push_back(s);
    }
    if (!saw_header)
        throw std::invalid_argument("trace csv: missing header row");
    validate(t);
    return t;
}

// nlohmann converts negative integers to unsigned without complaint, so
// counts get an explicit sign check here.
std::uint64_t json_count(const nlohmann::json& v, const char* key,
                         std::size_t slice) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("trace json: slice " +
                                    std::to_string(slice) + ": " + key + " " +
                                    what);
    };
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        std::int64_t x = v.get<std::int64_t>();
        if (x < 0) fail("must be >= 0");
        return static_cast<std::uint64_t>(x);
    }
    fail("must be an integer");
    return 0;
}

Trace load_trace_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("trace json: ") + e.what());
    }
    Trace t;
    try {
        t.timeslice_nominal_s = doc.at("timeslice_nominal").get<double>();
        const auto& slices = doc.at("slices");
        for (std::size_t i = 0; i < slices.size(); ++i) {
            const auto& entry = slices[i];
            std::uint64_t index = json_count(entry.at("slice_index"),
                                             "slice_index", i);
            if (index != i)
                throw std::invalid_argument(
                    "trace json: slice " + std::to_string(i) +
                    ": slice_index " + std::to_string(index) + " out of order");
            SliceSample s;
            s.instructions = json_count(entry.at("instructions"),
                                        "instructions", i);
            s.memory_accesses = json_count(entry.at("memory_accesses"),
                                           "memory_accesses", i);
            s.timing.t_on_s = entry.at("t_on_seconds").get<double>();
            s.timing.t_off_s = entry.at("t_off_seconds").get<double>();
            t.slices.push_back(s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("trace json: ") + e.what());
    }
    validate(t);
    return t;
}

void emit_trace_csv(const Trace& t, std::ostream& out) {
    out << kNominalKey << format_double(t.timeslice_nominal_s) << '\n';
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < t.slices.size(); ++i) {
        const SliceSample& s = t.slices[i];
        out << i << ',' << s.instructions << ',' << s.memory_accesses << ','
            << format_double(s.timing.t_on_s) << ','
            << format_double(s.timing.t_off_s) << '\n';
    }
}

void emit_trace_json(const Trace& t, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["timeslice_nominal"] = t.timeslice_nominal_s;
    doc["slices"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < t.slices.size(); ++i) {
        const SliceSample& s = t.slices[i];
        nlohmann::ordered_json entry;
        entry["slice_index"] = i;
        entry["instructions"] = s.instructions;
        entry["memory_accesses"] = s.memory_accesses;
        entry["t_on_seconds"] = s.timing.t_on_s;
        entry["t_off_seconds"] = s.timing.t_off_s;
        doc["slices"].push_back(entry);
    }
    out << doc.dump(2) << '\n';
}

// 53 random bits mapped to [0, 1).
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void validate(const Trace& t) {
    if (t.slices.empty())
        throw std::invalid_argument("trace: must contain at least one slice");
    if (!(t.timeslice_nominal_s > 0.0) || !std::isfinite(t.timeslice_nominal_s))
        throw std::invalid_argument("trace: timeslice_nominal must be positive");
    for (std::size_t i = 0; i < t.slices.size(); ++i) check_slice(t.slices[i], i);
}

double mapi(const SliceSample& sample) {
    if (sample.instructions == 0)
        throw std::invalid_argument("mapi: sample has zero instructions");
    return static_cast<double>(sample.memory_accesses) /
           static_cast<double>(sample.instructions);
}

Trace load_trace(std::istream& in, TraceFormat format) {
    return format == TraceFormat::csv ? load_trace_csv(in)
                                      : load_trace_json(in);
}

Trace load_trace(const std::string& text, TraceFormat format) {
    std::istringstream in(text);
    return load_trace(in, format);
}

void emit_trace(const Trace& t, std::ostream& out, TraceFormat format) {
    validate(t);
    if (format == TraceFormat::csv)
        emit_trace_csv(t, out);
    else
        emit_trace_json(t, out);
}

std::string emit_trace(const Trace& t, TraceFormat format) {
    std::ostringstream out;
    emit_trace(t, out, format);
    return out.str();
}

StallProfile StallProfile::linear(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("stall profile: beta must be positive");
    return StallProfile{{{0.0, 0.0}, {1.0 / beta, 1.0}}};
}

void StallProfile::check() const {
    if (knots.empty())
        throw std::invalid_argument("stall profile: needs at least one knot");
    if (knots.front().first != 0.0)
        throw std::invalid_argument("stall profile: first knot must sit at 0");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        auto [x, y] = knots[i];
        if (!std::isfinite(x) || !std::isfinite(y) || y < 0.0 || y > 1.0)
            throw std::invalid_argument("stall profile: knot " +
                                        std::to_string(i) + " out of range");
        if (i > 0 && (x <= knots[i - 1].first || y < knots[i - 1].second))
            throw std::invalid_argument(
                "stall profile: knots must ascend in mapi with non-decreasing "
                "fraction");
    }
}

double StallProfile::fraction(double m) const {
    if (!(m >= 0.0))
        throw std::invalid_argument("stall profile: mapi must be >= 0");
    double raw;
    if (m >= knots.back().first) {
        raw = knots.back().second;
    } else {
        std::size_t i = 1;
        while (knots[i].first < m) ++i;
        if (m == knots[i].first) {
            raw = knots[i].second;
        } else {
            auto [x0, y0] = knots[i - 1];
            auto [x1, y1] = knots[i];
            double span = (m - x0) / (x1 - x0);
            // Clamp so rounding can never push an interior point past the
            // segment's endpoint values; monotonicity must be exact.
            raw = std::clamp(y0 + (y1 - y0) * span, y0, y1);
        }
    }
    return std::round(raw * 1e12) / 1e12;
}

StallProfile default_stall_profile() {
    return StallProfile{{
        {0.000, 0.00},
        {0.004, 0.67},
        {0.010, 0.94},
        {0.040, 0.97},
        {0.080, 1.00},
    }};
}

Trace generate_synthetic(const std::vector<PhaseSpec>& phases,
                         std::uint64_t seed, const GeneratorConfig& config) {
    if (phases.empty())
        throw std::invalid_argument("generate: phase list is empty");
    if (!(config.timeslice_nominal_s > 0.0) ||
        !std::isfinite(config.timeslice_nominal_s))
        throw std::invalid_argument("generate: timeslice_nominal must be positive");
    config.stall.check();
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const PhaseSpec& ph = phases[i];
        auto fail = [&](const std::string& what) {
            throw std::invalid_argument("generate: phase " + std::to_string(i) +
                                        ": " + what);
        };
        if (ph.slice_count == 0) fail("slice_count must be >= 1");
        if (!(ph.mapi_mean >= 0.0) || !std::isfinite(ph.mapi_mean))
            fail("mapi_mean must be >= 0");
        if (!(ph.mapi_jitter >= 0.0) || !std::isfinite(ph.mapi_jitter))
            fail("mapi_jitter must be >= 0");
        if (ph.instructions_per_slice == 0) fail("instructions_per_slice must be >= 1");
    }

    std::mt19937_64 rng(seed);
    Trace t;
    t.timeslice_nominal_s = config.timeslice_nominal_s;
    for (const PhaseSpec& ph : phases) {
        double lo = std::max(0.0, ph.mapi_mean - ph.mapi_jitter);
        double hi = ph.mapi_mean + ph.mapi_jitter;
        double scale = static_cast<double>(ph.instructions_per_slice);
        double lo_count = std::ceil(lo * scale);
        double hi_count = std::floor(hi * scale);
        for (std::size_t k = 0; k < ph.slice_count; ++k) {
            double target = ph.mapi_jitter == 0.0
                                ? ph.mapi_mean
                                : lo + uniform01(rng) * (hi - lo);
            double count = std::round(target * scale);
            // Integer counters can round the realized ratio out of the
            // jitter band; snap back in whenever the band holds a count.
            if (lo_count <= hi_count)
                count = std::clamp(count, lo_count, hi_count);
            SliceSample s;
            s.instructions = ph.instructions_per_slice;
            s.memory_accesses = static_cast<std::uint64_t>(count);
            double realized = count / scale;
            double frac = config.stall.fraction(realized);
            s.timing.t_off_s = frac * config.timeslice_nominal_s;
            s.timing.t_on_s = (1.0 - frac) * config.timeslice_nominal_s;
            t.slices.push_back(s);
        }
    }
    validate(t);
    return t;
}

std::vector<PhaseSpec> preset(const std::string& name) {
    if (name == "cg")
        return {
            {40, 0.010, 0.000, 100'000'000},
            {60, 0.020, 0.004, 100'000'000},
            {50, 0.012, 0.002, 100'000'000},
        };
    if (name == "ft")
        return {
            {60, 0.002, 0.001, 100'000'000},
            {30, 0.007, 0.002, 100'000'000},
            {30, 0.020, 0.005, 100'000'000},
        };
    if (name == "mg")
        return {
            {50, 0.002, 0.0015, 100'000'000},
            {25, 0.015, 0.004, 100'000'000},
            {15, 0.055, 0.004, 100'000'000},
            {30, 0.005, 0.002, 100'000'000},
        };
    if (name == "sp")
        return {
            {70, 0.0015, 0.001, 100'000'000},
            {25, 0.008, 0.0015, 100'000'000},
            {25, 0.025, 0.005, 100'000'000},
        };
    throw std::invalid_argument("preset: unknown name '" + name +
                                "' (expected cg, ft, mg or sp)");
}

}  // namespace dvfsim
