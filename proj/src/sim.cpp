#include "dvfsim/sim.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dvfsim {

namespace {

// Neumaier's variant of compensated summation; keeps long runs accurate
// to well below 1e-12 relative.
class CompensatedSum {
  public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            carry_ += (sum_ - t) + v;
        else
            carry_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[19] = "0x";
    for (int i = 0; i < 16; ++i)
        buf[2 + i] = "0123456789abcdef"[(fp >> (60 - 4 * i)) & 0xf];
    return std::string(buf, 18);
}

std::uint64_t parse_fingerprint(const std::string& hex) {
    if (hex.size() != 18 || hex[0] != '0' || hex[1] != 'x')
        throw std::invalid_argument("report: malformed trace_fingerprint");
    std::uint64_t fp = 0;
    auto res = std::from_chars(hex.data() + 2, hex.data() + 18, fp, 16);
    if (res.ec != std::errc{} || res.ptr != hex.data() + 18)
        throw std::invalid_argument("report: malformed trace_fingerprint");
    return fp;
}

}  // namespace

std::uint64_t trace_fingerprint(const Trace& t) {
    std::string bytes = emit_trace(t, TraceFormat::csv);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

RunReport run(const Trace& trace, const Schedule& schedule,
              const Processor& proc, std::string policy_name) {
    validate(trace);
    if (schedule.size() != trace.slices.size())
        throw std::invalid_argument(
            "run: schedule covers " + std::to_string(schedule.size()) +
            " slices but the trace has " +
            std::to_string(trace.slices.size()));

    RunReport report;
    report.policy_name = std::move(policy_name);
    report.trace_fingerprint = trace_fingerprint(trace);
    report.per_slice.reserve(schedule.size());

    CompensatedSum time, energy;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const PState& p = schedule[i];
        if (!proc.has(p))
            throw std::invalid_argument(
                "run: slice " + std::to_string(i) +
                " assigned a P-state the processor does not offer");
        SliceResult r;
        r.pstate = p;
        r.duration_s = slice_duration(trace.slices[i].timing, p,
                                      proc.fastest());
        r.energy_j = slice_energy(proc, trace.slices[i].timing, p,
                                  proc.fastest());
        time.add(r.duration_s);
        energy.add(r.energy_j);
        if (i > 0 && !(schedule[i] == schedule[i - 1])) {
            ++report.transitions;
            if (proc.transition_latency_s() > 0.0) {
                time.add(proc.transition_latency_s());
                energy.add(proc.transition_latency_s() * power(proc, p));
            }
        }
        report.per_slice.push_back(r);
    }
    report.total_time_s = time.value();
    report.total_energy_j = energy.value();
    return report;
}

Comparison compare(const RunReport& policy_report,
                   const RunReport& ref_report) {
    if (policy_report.trace_fingerprint != ref_report.trace_fingerprint)
        throw std::invalid_argument(
            "compare: trace fingerprint mismatch; the reports were not "
            "produced from the same trace");
    Comparison c;
    c.perf_loss = (policy_report.total_time_s - ref_report.total_time_s) /
                  ref_report.total_time_s;
    c.energy_savings =
        (ref_report.total_energy_j - policy_report.total_energy_j) /
        ref_report.total_energy_j;
    return c;
}

void save_report(const RunReport& r, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["policy"] = r.policy_name;
    doc["trace_fingerprint"] = fingerprint_hex(r.trace_fingerprint);
    doc["total_time_s"] = r.total_time_s;
    doc["total_energy_j"] = r.total_energy_j;
    doc["transitions"] = r.transitions;
    doc["per_slice"] = nlohmann::ordered_json::array();
    for (const SliceResult& s : r.per_slice) {
        nlohmann::ordered_json entry;
        entry["duration_s"] = s.duration_s;
        entry["energy_j"] = s.energy_j;
        entry["frequency_hz"] = s.pstate.frequency_hz;
        entry["voltage_v"] = s.pstate.voltage_v;
        doc["per_slice"].push_back(entry);
    }
    out << doc.dump(2) << '\n';
}

RunReport load_report(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("report: ") + e.what());
    }
    RunReport r;
    try {
        r.policy_name = doc.at("policy").get<std::string>();
        r.trace_fingerprint =
            parse_fingerprint(doc.at("trace_fingerprint").get<std::string>());
        r.total_time_s = doc.at("total_time_s").get<double>();
        r.total_energy_j = doc.at("total_energy_j").get<double>();
        r.transitions = doc.at("transitions").get<std::uint64_t>();
        for (const auto& entry : doc.at("per_slice")) {
            SliceResult s;
            s.duration_s = entry.at("duration_s").get<double>();
            s.energy_j = entry.at("energy_j").get<double>();
            s.pstate.frequency_hz =
                entry.at("frequency_hz").get<std::int64_t>();
            s.pstate.voltage_v = entry.at("voltage_v").get<double>();
            r.per_slice.push_back(s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("report: ") + e.what());
    }
    return r;
}

std::string summary_csv_header() {
    return "trace_id,policy,total_time_s,total_energy_j,perf_loss,"
           "energy_savings,transitions";
}

std::string summary_csv_row(const RunReport& policy_report,
                            const Comparison& c) {
    std::ostringstream row;
    row << fingerprint_hex(policy_report.trace_fingerprint) << ','
        << policy_report.policy_name << ','
        << format_double(policy_report.total_time_s) << ','
        << format_double(policy_report.total_energy_j) << ','
        << format_double(c.perf_loss) << ','
        << format_double(c.energy_savings) << ','
        << policy_report.transitions;
    return row.str();
}

}  // namespace dvfsim
