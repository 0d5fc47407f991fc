/// @file mapper.hpp
/// @brief Assigns every service instance to a hosting device by seeded
/// random choice among the devices inside the instance's scope.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iotforge/diagnostic.hpp"
#include "iotforge/resolver.hpp"

namespace iotforge {

/// SplitMix64. Fixed so mappings are reproducible across implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Index in [0, n): one draw reduced modulo n.
    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(next() % n); }

private:
    std::uint64_t state_;
};

struct Assignment {
    ServiceInstance instance;
    std::string device;
};

struct Mapping {
    std::uint64_t seed = 0;
    std::vector<Assignment> assignments;  // canonical instance order

    const std::string* device_for(const ServiceInstance& inst) const;
};

struct Violation {
    std::string message;
};

/// Devices binding the instance's scope region to its value, in deployment
/// order. GLOBAL instances may run anywhere.
std::vector<std::string> eligible_devices(const ServiceInstance& inst, const ResolvedApp& r);

/// One uniform draw per instance in canonical order. Errors when some
/// instance has no eligible device.
Outcome<Mapping> map_random(const ResolvedApp& r, std::uint64_t seed);

/// Empty iff every instance has exactly one assignment and each assigned
/// device is eligible for its instance.
std::vector<Violation> validate_mapping(const Mapping& m, const ResolvedApp& r);

/// `{seed, assignments:[{service, scope, device}]}` sorted by (service, scope).
std::string mapping_to_json(const Mapping& m);
Outcome<Mapping> mapping_from_json(std::string_view text, const ResolvedApp& r);

}  // namespace iotforge
