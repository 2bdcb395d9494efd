#ifndef FEATSIG_RNG_HPP
#define FEATSIG_RNG_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace featsig {

// All randomness in the toolkit flows through this small deterministic
// generator so that results are bit-reproducible across platforms, worker
// counts, and evaluation order.  Streams are derived by mixing a base seed
// with stable keys (node name hash, feature set hash, replicate index).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (0x9E3779B97F4A7C15ULL + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0xA0761D6478BD642FULL)) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; used where log(u) must stay finite.
    double uniform01_open_low() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t bounded(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Box-Muller; deterministic, no stdlib distribution.
    double normal() {
        double u1 = uniform01_open_low();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // In-place Fisher-Yates; stable across standard libraries, unlike
    // std::shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        if (values.size() < 2) return;
        for (std::size_t i = values.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i + 1));
            std::swap(values[i], values[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Identity permutation [0, n).
inline std::vector<std::size_t> identity_permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    return p;
}

// Order-insensitive is wrong here: the key must distinguish {0,1} from {1,0}
// inputs only by content, so hash the sorted sequence the caller provides.
inline std::uint64_t hash_index_sequence(std::span<const std::size_t> sorted_indices) {
    std::uint64_t h = 0x8AFE0CF9D9DE66D5ULL;
    for (std::size_t v : sorted_indices) {
        h = mix_seed(h, static_cast<std::uint64_t>(v));
    }
    return h;
}

inline std::uint64_t hash_bytes(std::uint64_t seed, const char* data, std::size_t size) {
    std::uint64_t h = splitmix64(seed ^ 0x2545F4914F6CDD1DULL);
    std::size_t i = 0;
    for (; i + 8 <= size; i += 8) {
        std::uint64_t chunk;
        __builtin_memcpy(&chunk, data + i, 8);
        h = (h ^ chunk) * 0xFF51AFD7ED558CCDULL;
        h ^= h >> 33;
    }
    if (i < size) {
        std::uint64_t chunk = 0;
        __builtin_memcpy(&chunk, data + i, size - i);
        h = (h ^ chunk) * 0xC4CEB9FE1A85EC53ULL;
        h ^= h >> 33;
    }
    return splitmix64(h);
}

}  // namespace featsig

#endif  // FEATSIG_RNG_HPP
