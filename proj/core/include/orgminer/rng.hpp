#pragma once
// Deterministic draws on top of mt19937_64. The standard distribution
// templates are implementation-defined, so portable streams are rolled
// by hand here.

#include <cstdint>
#include <random>
#include <vector>

namespace orgminer::rng {

// Uniform double in [0, 1) with 53 random bits.
inline double nextUnit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n) via power-of-two rejection; n >= 1.
inline std::size_t nextIndex(std::mt19937_64& gen, std::size_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        const std::uint64_t r = gen() & mask;
        if (r < n) return static_cast<std::size_t>(r);
    }
}

// Uniform integer in [lo, hi] inclusive.
inline long nextInt(std::mt19937_64& gen, long lo, long hi) {
    return lo + static_cast<long>(nextIndex(gen, static_cast<std::size_t>(hi - lo + 1)));
}

// Index drawn proportionally to the given non-negative weights.
inline std::size_t nextWeighted(std::mt19937_64& gen, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return nextIndex(gen, weights.size());
    const double u = nextUnit(gen) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

// Fisher-Yates shuffle with the portable index stream.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& gen) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = nextIndex(gen, i);
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace orgminer::rng
