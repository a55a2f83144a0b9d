#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace spreaders {

/// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over a byte string; used for stable content hashes and salts.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/**
 * xoshiro256** generator seeded through splitmix64. Models
 * UniformRandomBitGenerator; the helper draws below are implemented here
 * rather than through <random> distributions so that streams are identical
 * across standard library implementations.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed) noexcept {
        for (auto &word : s_) {
            seed += 0x9e3779b97f4a7c15ULL;
            word = mix64(seed);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

    /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) noexcept {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

/**
 * All randomness derives from one master seed. A simulation replicate's
 * stream depends only on (master_seed, seed node, replicate index), so
 * results do not depend on thread count or scheduling. Other consumers
 * (sampling, bootstrap, train/test draws) use named purposes.
 */
struct RngPolicy {
    std::uint64_t master_seed = 42;

    RngStream replicate_stream(std::uint64_t node, std::uint64_t replicate) const noexcept {
        return RngStream(hash_combine(hash_combine(master_seed, node), replicate));
    }

    RngStream purpose_stream(std::string_view purpose, std::uint64_t index = 0) const noexcept {
        return RngStream(hash_combine(hash_combine(mix64(master_seed), fnv1a(purpose)), index));
    }

    /// A policy whose master seed is derived from this one and a purpose tag.
    RngPolicy derive(std::string_view purpose, std::uint64_t index = 0) const noexcept {
        return {hash_combine(hash_combine(master_seed ^ 0xa5a5a5a5a5a5a5a5ULL, fnv1a(purpose)),
                             index)};
    }
};

} // namespace spreaders
