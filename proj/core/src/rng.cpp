#include "rift/rng.hpp"

#include <cmath>

#include "rift/errors.hpp"

namespace rift {
namespace {

// splitmix64; also used to mix derivation keys.
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(mix(seed ^ 0x8f2d3a6be71c4955ULL)) {}

Rng Rng::derive(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t child = state_;
    child = mix(child ^ mix(a));
    child = mix(child ^ mix(b ^ 0xd6e8feb86659fd93ULL));
    return Rng(child);
}

Rng Rng::derive(RngTag tag, std::uint64_t a) const {
    return derive(static_cast<std::uint64_t>(tag) ^ 0xa24baed4963ee407ULL, a);
}

std::uint64_t Rng::next_u64() {
    state_ = mix(state_);
    return state_;
}

double Rng::next_double01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) {
        throw InputError("next_below requires n > 0");
    }
    // Rejection over the smallest covering power of two.
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t r = next_u64() & mask;
    while (r >= n) {
        r = next_u64() & mask;
    }
    return r;
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 1.0 - next_double01();  // avoid log(0)
    double v = next_double01();
    double radius = std::sqrt(-2.0 * std::log(u));
    double angle = 2.0 * 3.14159265358979323846 * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::size_t Rng::next_categorical(std::span<const double> weights) {
    if (weights.empty()) {
        throw InputError("next_categorical requires non-empty weights");
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) {
        throw InputError("next_categorical requires positive total weight");
    }
    double r = next_double01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (r < cum) return i;
    }
    return weights.size() - 1;
}

}  // namespace rift
