#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rck {

/// Seeds for independent random streams derived from one master seed.
/// Stream names carry a version suffix (e.g. "reservoir.weights.v1"); bumping
/// it is the only sanctioned way to change what a stream produces.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name);

/// mt19937_64 with a portable uniform mapping (53 random mantissa bits), so a
/// (master seed, name) pair yields the same numbers on every standard library.
class RandomStream {
public:
    RandomStream(std::uint64_t master, std::string_view stream_name);

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next_u64() { return engine_(); }
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

namespace streams {
inline constexpr std::string_view reservoir_weights = "reservoir.weights.v1";
inline constexpr std::string_view reservoir_initial = "reservoir.initial_state.v1";
inline constexpr std::string_view reservoir_noise = "reservoir.noise.v1";
inline constexpr std::string_view method2_init = "method2.w1_init.v1";
inline constexpr std::string_view rbf_centers = "edmd.rbf_centers.v1";
}  // namespace streams

}  // namespace rck
