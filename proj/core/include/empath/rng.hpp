#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace empath {

// All randomness in the toolkit flows through this wrapper. mt19937_64 is
// fully specified by the standard; the distribution helpers are hand-rolled
// because std::uniform_int_distribution / std::normal_distribution are
// implementation-defined and would break cross-stdlib determinism.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, bound) by rejection sampling.
    std::uint64_t below(std::uint64_t bound);

    // Uniform in [0, 1).
    double uniform();

    // Standard normal via Box-Muller (one value per call; spare cached).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic per-module seed derivation: the global run seed is combined
// with an FNV-1a hash of the module tag and diffused through splitmix64.
// Documented in the README so any single stage can be reproduced in isolation.
std::uint64_t fork_seed(std::uint64_t global_seed, std::string_view tag);

}  // namespace empath
