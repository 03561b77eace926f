#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace entsac {

// Deterministic random source. Wraps mt19937_64 but draws uniforms and
// normals through fixed formulas instead of std::*_distribution, whose
// output is implementation-defined. Streams derived from the same seed
// with different tags are independent for practical purposes.
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent stream (seed, tag) -> generator; tag hashed with FNV-1a,
    // combined through splitmix64.
    static Rng split(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; stateless (two uniforms per draw).
    double normal();

    // Uniform integer in [0, n); rejection sampling, no modulo bias.
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace entsac
