#include "dvfsim/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dvfsim {

namespace {

double pstate_power(double static_power_w, double dynamic_coefficient,
                    const PState& p) {
    return static_power_w +
           dynamic_coefficient * p.voltage_v * p.voltage_v *
               static_cast<double>(p.frequency_hz);
}

}  // namespace

Processor::Processor(std::vector<PState> pstates, double static_power_w,
                     double dynamic_coefficient, double transition_latency_s)
    : pstates_(std::move(pstates)),
      static_power_w_(static_power_w),
      dynamic_coefficient_(dynamic_coefficient),
      transition_latency_s_(transition_latency_s) {
    if (pstates_.empty())
        throw std::invalid_argument("processor: needs at least one P-state");
    if (!(static_power_w_ >= 0.0) || !std::isfinite(static_power_w_))
        throw std::invalid_argument("processor: static_power_w must be >= 0");
    if (!(dynamic_coefficient_ >= 0.0) || !std::isfinite(dynamic_coefficient_))
        throw std::invalid_argument(
            "processor: dynamic_coefficient must be >= 0");
    if (!(transition_latency_s_ >= 0.0) ||
        !std::isfinite(transition_latency_s_))
        throw std::invalid_argument(
            "processor: transition_latency_s must be >= 0");

    for (std::size_t i = 0; i < pstates_.size(); ++i) {
        const PState& p = pstates_[i];
        if (p.frequency_hz <= 0)
            throw std::invalid_argument("processor: P-state " +
                                        std::to_string(i) +
                                        ": frequency must be positive");
        if (!(p.voltage_v > 0.0) || !std::isfinite(p.voltage_v))
            throw std::invalid_argument("processor: P-state " +
                                        std::to_string(i) +
                                        ": voltage must be positive");
    }
    for (std::size_t i = 1; i < pstates_.size(); ++i) {
        if (pstates_[i].frequency_hz >= pstates_[i - 1].frequency_hz)
            throw std::invalid_argument(
                "processor: frequencies must be strictly descending");
        if (pstates_[i].voltage_v > pstates_[i - 1].voltage_v)
            throw std::invalid_argument(
                "processor: voltages must be non-increasing with frequency");
        // With a nonzero dynamic term the power ordering must follow the
        // frequency ordering, otherwise downscaling could raise power and
        // every energy comparison downstream loses its meaning.
        if (dynamic_coefficient_ > 0.0) {
            double hi = pstate_power(static_power_w_, dynamic_coefficient_,
                                     pstates_[i - 1]);
            double lo = pstate_power(static_power_w_, dynamic_coefficient_,
                                     pstates_[i]);
            if (!(lo < hi))
                throw std::invalid_argument(
                    "processor: modeled power must strictly increase with "
                    "frequency (P-states " +
                    std::to_string(i - 1) + " and " + std::to_string(i) + ")");
        }
    }
}

bool Processor::has(const PState& p) const {
    for (const PState& q : pstates_)
        if (q == p) return true;
    return false;
}

const PState* Processor::find(std::int64_t frequency_hz) const {
    for (const PState& q : pstates_)
        if (q.frequency_hz == frequency_hz) return &q;
    return nullptr;
}

double slice_duration(const SliceTiming& timing, const PState& f,
                      const PState& f_max) {
    if (!(timing.t_on_s >= 0.0) || !std::isfinite(timing.t_on_s))
        throw std::invalid_argument("slice_duration: t_on_s must be >= 0");
    if (!(timing.t_off_s >= 0.0) || !std::isfinite(timing.t_off_s))
        throw std::invalid_argument("slice_duration: t_off_s must be >= 0");
    if (!(timing.t_on_s + timing.t_off_s > 0.0))
        throw std::invalid_argument(
            "slice_duration: slice must have positive length");
    if (f.frequency_hz <= 0)
        throw std::invalid_argument("slice_duration: zero or negative frequency");
    if (f.frequency_hz > f_max.frequency_hz)
        throw std::invalid_argument(
            "slice_duration: frequency exceeds the reference maximum");
    double ratio = static_cast<double>(f_max.frequency_hz) /
                   static_cast<double>(f.frequency_hz);
    return timing.t_on_s * ratio + timing.t_off_s;
}

double power(const Processor& proc, const PState& p) {
    if (!proc.has(p))
        throw std::invalid_argument(
            "power: P-state is not part of this processor");
    return pstate_power(proc.static_power_w(), proc.dynamic_coefficient(), p);
}

double slice_energy(const Processor& proc, const SliceTiming& timing,
                    const PState& f, const PState& f_max) {
    return power(proc, f) * slice_duration(timing, f, f_max);
}

Processor default_processor() {
    std::vector<PState> pstates = {
        {2'400'000'000, 1.300},
        {2'200'000'000, 1.250},
        {1'600'000'000, 1.100},
        {1'200'000'000, 1.000},
    };
    // 30 W of dynamic power at the top P-state on top of 65 W static,
    // i.e. 95 W package power at full speed.
    double coefficient = 30.0 / (1.300 * 1.300 * 2.4e9);
    return Processor(std::move(pstates), 65.0, coefficient);
}

Processor load_processor(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("processor config: ") +
                                    e.what());
    }
    try {
        std::vector<PState> pstates;
        for (const auto& entry : doc.at("pstates")) {
            PState p;
            p.frequency_hz = entry.at("frequency_hz").get<std::int64_t>();
            p.voltage_v = entry.at("voltage_v").get<double>();
            pstates.push_back(p);
        }
        double latency = doc.value("transition_latency_s", 0.0);
        return Processor(std::move(pstates),
                         doc.at("static_power_w").get<double>(),
                         doc.at("dynamic_coefficient").get<double>(), latency);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("processor config: ") +
                                    e.what());
    }
}

void save_processor(const Processor& proc, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["static_power_w"] = proc.static_power_w();
    doc["dynamic_coefficient"] = proc.dynamic_coefficient();
    doc["transition_latency_s"] = proc.transition_latency_s();
    doc["pstates"] = nlohmann::ordered_json::array();
    for (const PState& p : proc.pstates()) {
        nlohmann::ordered_json entry;
        entry["frequency_hz"] = p.frequency_hz;
        entry["voltage_v"] = p.voltage_v;
        doc["pstates"].push_back(entry);
    }
    out << doc.dump(2) << '\n';
}

}  // namespace dvfsim
