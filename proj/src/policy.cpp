#include "dvfsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dvfsim {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void validate(const PolicyTable& table) {
    if (table.upper_bounds.empty())
        throw std::invalid_argument("policy table: no bands");
    if (table.upper_bounds.size() != table.targets.size())
        throw std::invalid_argument(
            "policy table: one target per band required");
    if (table.upper_bounds.back() !=
        std::numeric_limits<double>::infinity())
        throw std::invalid_argument(
            "policy table: last band must extend to infinity");
    for (std::size_t i = 0; i < table.upper_bounds.size(); ++i) {
        double b = table.upper_bounds[i];
        if (std::isnan(b) || b <= 0.0)
            throw std::invalid_argument("policy table: band " +
                                        std::to_string(i) +
                                        ": bound must be positive");
        if (i > 0 && b <= table.upper_bounds[i - 1])
            throw std::invalid_argument(
                "policy table: bounds must be strictly ascending");
        if (i > 0 &&
            table.targets[i].frequency_hz > table.targets[i - 1].frequency_hz)
            throw std::invalid_argument(
                "policy table: target frequency must not increase with "
                "memory intensity");
    }
}

PolicyTable default_policy_table(const Processor& proc) {
    const double inf = std::numeric_limits<double>::infinity();
    const std::int64_t ghz = 1'000'000'000;
    PolicyTable table;
    table.upper_bounds = {0.004, 0.01, 0.04, inf};
    for (std::int64_t f : {24 * ghz / 10, 22 * ghz / 10, 16 * ghz / 10,
                           12 * ghz / 10}) {
        const PState* p = proc.find(f);
        if (!p)
            throw std::invalid_argument(
                "policy table: processor lacks the " + std::to_string(f) +
                " Hz P-state the default table expects");
        table.targets.push_back(*p);
    }
    validate(table);
    return table;
}

PolicyTable load_policy_table(std::istream& in, const Processor& proc) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("policy table config: ") +
                                    e.what());
    }
    PolicyTable table;
    try {
        for (const auto& band : doc.at("bands")) {
            const auto& bound = band.at("upper_bound_mapi");
            if (bound.is_string()) {
                if (bound.get<std::string>() != "inf")
                    throw std::invalid_argument(
                        "policy table config: only 'inf' is a valid string "
                        "bound");
                table.upper_bounds.push_back(
                    std::numeric_limits<double>::infinity());
            } else {
                table.upper_bounds.push_back(bound.get<double>());
            }
            std::int64_t f = band.at("frequency_hz").get<std::int64_t>();
            const PState* p = proc.find(f);
            if (!p)
                throw std::invalid_argument(
                    "policy table config: frequency " + std::to_string(f) +
                    " Hz is not one of the processor's P-states");
            table.targets.push_back(*p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("policy table config: ") +
                                    e.what());
    }
    validate(table);
    return table;
}

void save_policy_table(const PolicyTable& table, std::ostream& out) {
    validate(table);
    nlohmann::ordered_json doc;
    doc["bands"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < table.upper_bounds.size(); ++i) {
        nlohmann::ordered_json band;
        if (std::isinf(table.upper_bounds[i]))
            band["upper_bound_mapi"] = "inf";
        else
            band["upper_bound_mapi"] = table.upper_bounds[i];
        band["frequency_hz"] = table.targets[i].frequency_hz;
        doc["bands"].push_back(band);
    }
    out << doc.dump(2) << '\n';
}

const PState& classify(const PolicyTable& table, double mapi) {
    if (!(mapi >= 0.0))
        throw std::invalid_argument("classify: mapi must be >= 0");
    for (std::size_t i = 0; i < table.upper_bounds.size(); ++i)
        if (mapi <= table.upper_bounds[i]) return table.targets[i];
    // Unreachable for a valid table; the last bound is +infinity.
    throw std::logic_error("classify: no band matched");
}

PredictorState observe(PredictorState state, double mapi) {
    if (state.capacity == 0)
        throw std::invalid_argument("observe: window capacity must be >= 1");
    if (!(mapi >= 0.0))
        throw std::invalid_argument("observe: mapi must be >= 0");
    state.window.push_back(mapi);
    if (state.window.size() > state.capacity)
        state.window.erase(state.window.begin());
    return state;
}

double predict(const PredictorState& state) {
    if (state.window.empty())
        throw std::runtime_error("predict: insufficient history");
    auto [lo_it, hi_it] =
        std::minmax_element(state.window.begin(), state.window.end());
    double lo = *lo_it, hi = *hi_it;
    double acc = 0.0;
    for (double v : state.window) acc += v - lo;
    double mean = lo + acc / static_cast<double>(state.window.size());
    return std::clamp(mean, lo, hi);
}

Schedule governor(const Trace& trace, const PolicyTable& table,
                  const Processor& proc, const GovernorOptions& options) {
    validate(trace);
    validate(table);
    if (options.window_length == 0)
        throw std::invalid_argument("governor: window_length must be >= 1");
    if (options.decision_interval == 0)
        throw std::invalid_argument(
            "governor: decision_interval must be >= 1");
    if (!(options.noise_amplitude >= 0.0) ||
        !std::isfinite(options.noise_amplitude))
        throw std::invalid_argument(
            "governor: noise_amplitude must be >= 0");
    for (const PState& target : table.targets)
        if (!proc.has(target))
            throw std::invalid_argument(
                "governor: table target " +
                std::to_string(target.frequency_hz) +
                " Hz is not one of the processor's P-states");

    std::mt19937_64 noise_rng(options.noise_seed);
    PredictorState history{options.window_length, {}};
    Schedule schedule;
    schedule.reserve(trace.slices.size());
    PState current = proc.fastest();
    for (std::size_t i = 0; i < trace.slices.size(); ++i) {
        if (i > 0 && (i - 1) % options.decision_interval == 0)
            current = classify(table, predict(history));
        schedule.push_back(current);

        double observed = mapi(trace.slices[i]);
        if (options.noise_amplitude > 0.0) {
            double noise =
                (2.0 * uniform01(noise_rng) - 1.0) * options.noise_amplitude;
            observed = std::max(0.0, observed + noise);
        }
        history = observe(std::move(history), observed);
    }
    return schedule;
}

Schedule governor(const Trace& trace, const PolicyTable& table, std::size_t n,
                  const Processor& proc) {
    GovernorOptions options;
    options.window_length = n;
    return governor(trace, table, proc, options);
}

Schedule static_policy(const Trace& trace, const Processor& proc,
                       const PState& p) {
    validate(trace);
    if (!proc.has(p))
        throw std::invalid_argument(
            "static policy: P-state is not part of this processor");
    return Schedule(trace.slices.size(), p);
}

Schedule oracle_policy(const Trace& trace, const Processor& proc,
                       std::optional<double> max_slowdown) {
    validate(trace);
    if (max_slowdown && (!(*max_slowdown >= 0.0) ||
                         !std::isfinite(*max_slowdown)))
        throw std::invalid_argument(
            "oracle policy: max_slowdown must be >= 0");

    Schedule schedule;
    schedule.reserve(trace.slices.size());
    for (const SliceSample& slice : trace.slices) {
        double base = slice_duration(slice.timing, proc.fastest(),
                                     proc.fastest());
        double bound = max_slowdown
                           ? (1.0 + *max_slowdown) * base
                           : std::numeric_limits<double>::infinity();
        const PState* best = nullptr;
        double best_energy = 0.0;
        // P-states are ordered fastest first, so with strict comparison
        // an energy tie keeps the higher frequency.
        for (const PState& p : proc.pstates()) {
            if (slice_duration(slice.timing, p, proc.fastest()) > bound)
                continue;
            double e = slice_energy(proc, slice.timing, p, proc.fastest());
            if (!best || e < best_energy) {
                best = &p;
                best_energy = e;
            }
        }
        schedule.push_back(*best);
    }
    return schedule;
}

}  // namespace dvfsim
