#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rift {

/// Named purposes for derived RNG streams. Folding a tag into the derivation
/// keeps independent pipeline stages (sampling, shuffling, init) decoupled even
/// when they share a master seed.
enum class RngTag : std::uint64_t {
    init = 1,
    sample = 2,
    shuffle = 3,
    buffer = 4,
    eval = 5,
    train = 6,
    problems = 7,
};

/// Deterministic random stream. Only fully specified generators and hand-rolled
/// distributions are used, so sequences are reproducible across platforms and
/// standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Child stream keyed by (a, b); derivation is collision-mixed so streams
    /// for different keys are effectively independent.
    Rng derive(std::uint64_t a, std::uint64_t b = 0) const;
    Rng derive(RngTag tag, std::uint64_t a = 0) const;

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_double01();

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t next_below(std::uint64_t n);

    /// Standard normal via Box-Muller (cached spare).
    double next_gaussian();

    /// Index draw proportional to non-negative weights.
    std::size_t next_categorical(std::span<const double> weights);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rift
