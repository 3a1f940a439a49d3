#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <stdexcept>

namespace uol {

// Seeded randomness. All stochastic components draw from SplitMix64 streams
// derived from one master seed, so runs are bit-reproducible and independent
// replicas never share a stream.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// 64-bit mix of a single value (stateless).
inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64_next(s);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Substream derivation: (master seed, component label, index) -> stream seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                                 std::uint64_t index = 0) {
    std::uint64_t h = fnv1a(component);
    std::uint64_t s = master ^ mix64(h);
    s = mix64(s + 0x632be59bd9b4e019ULL * (index + 1));
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int bernoulli_bit() { return static_cast<int>(next_u64() >> 63); }

    /// Index into `weights` proportional to weight. Weights need not be normalized.
    std::size_t discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("Rng::discrete: negative weight");
            total += w;
        }
        if (total <= 0.0) throw std::invalid_argument("Rng::discrete: weights sum to zero");
        double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::uint64_t state_;
};

/// Fixed fair coin attached to (stream, label). Order-independent: the value
/// does not depend on when it is first consulted.
inline int coin_bit(std::uint64_t stream_seed, std::uint64_t label) {
    return static_cast<int>(mix64(stream_seed ^ mix64(label + 0x51ed2701ab0517e5ULL)) & 1ULL);
}

} // namespace uol
