#pragma once

// Hand models used as oracles. They share no code with the simulator: the
// fire model below replays the trace on plain vectors.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "iotforge/ast.hpp"
#include "iotforge/runtime.hpp"

namespace iotforge::testing {

struct ExpectedActuation {
    std::int64_t t = 0;
    std::string device;
    bool operator==(const ExpectedActuation&) const = default;
};

// Fire detection as the corpus specifies it: each room averages the last 4
// temperature samples (taken every 60 s from the latest reading), declares fire
// when that average exceeds 50 and the last smoke report is true, and a latch
// sounds every alarm of the room once per rising edge. Every hop costs
// `latency`: sample to average, average to detector, detector to controller,
// controller to alarm.
inline std::vector<ExpectedActuation> fire_oracle(const DeploymentSpec& d, const SensorTrace& trace,
                                                  std::int64_t horizon, std::int64_t latency) {
    const std::int64_t period = 60000;
    const std::size_t window = 4;
    const double limit = 50.0;
    std::map<std::int64_t, std::vector<const DeviceDecl*>> temps, smokes, alarms;
    for (const auto& dev : d.devices) {
        auto room = dev.coord("Room");
        if (!room) continue;
        if (dev.hosts("TemperatureSensor")) temps[*room].push_back(&dev);
        if (dev.hosts("SmokeDetector")) smokes[*room].push_back(&dev);
        if (dev.hosts("Alarm")) alarms[*room].push_back(&dev);
    }
    auto readings_of = [&](const std::string& device) {
        std::vector<std::pair<std::int64_t, Value>> out;
        for (const auto& e : trace.entries) {
            if (e.device != device || e.t > horizon) continue;
            if (e.value.is_number_float() || e.value.is_number_integer()) out.emplace_back(e.t, Value(e.value.get<double>()));
            else if (e.value.is_boolean()) out.emplace_back(e.t, Value(e.value.get<bool>()));
        }
        return out;
    };

    std::vector<ExpectedActuation> out;
    for (const auto& [room, room_temps] : temps) {
        // (arrival time at the detector, insertion order, is_avg, value)
        std::vector<std::tuple<std::int64_t, std::size_t, bool, double, bool>> arrivals;
        std::vector<double> samples;
        for (std::int64_t k = 0; k * period <= horizon; ++k) {
            for (const DeviceDecl* t : room_temps) {
                std::optional<double> latest;
                for (const auto& [rt, v] : readings_of(t->name)) {
                    if (rt <= k * period) latest = v.as_number();
                }
                if (!latest) continue;
                samples.push_back(*latest);
                if (samples.size() < window) continue;
                double sum = 0;
                for (std::size_t i = samples.size() - window; i < samples.size(); ++i) sum += samples[i];
                arrivals.emplace_back(k * period + 2 * latency, arrivals.size(), true, sum / window, false);
            }
        }
        for (const DeviceDecl* s : smokes[room]) {
            for (const auto& [rt, v] : readings_of(s->name)) {
                arrivals.emplace_back(rt + latency, arrivals.size(), false, 0.0, v.as_bool());
            }
        }
        std::sort(arrivals.begin(), arrivals.end());
        std::optional<double> avg;
        std::optional<bool> smoke;
        bool latched = false;
        for (const auto& [t, seq, is_avg, a, s] : arrivals) {
            if (is_avg) avg = a; else smoke = s;
            if (!avg || !smoke) continue;
            bool fire = *avg > limit && *smoke;
            if (fire && !latched) {
                for (const DeviceDecl* al : alarms[room]) out.push_back(ExpectedActuation{t + 2 * latency, al->name});
            }
            latched = fire;
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return std::tie(a.t, a.device) < std::tie(b.t, b.device); });
    return out;
}

inline std::vector<ExpectedActuation> observed(const ActuationLog& log) {
    std::vector<ExpectedActuation> out;
    for (const auto& e : log) out.push_back(ExpectedActuation{e.t, e.device});
    return out;
}

}  // namespace iotforge::testing
