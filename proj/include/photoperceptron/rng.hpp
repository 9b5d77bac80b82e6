#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
//
// Every random draw in this library is addressed by (seed, stream id, block
// counter).  A Stream is a cheap value object; independent streams for
// trials/trajectories are derived from a parent Key with child(), so ensemble
// results do not depend on scheduling or worker count.

#include <array>
#include <cmath>
#include <cstdint>

namespace photoperceptron::rng {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

// SplitMix64 finalizer, used only to mix stream ids.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// One 128-bit Philox4x32-10 block: counter = (block,block>>32,stream,stream>>32), key = seed.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream,
                                               std::uint64_t block) {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        detail::philox_round(ctr, k0, k1);
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return ctr;
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = philox4x32(seed_, stream_, block_++);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform on (0,1]: 53-bit mantissa, never exactly 0 (safe under log).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() <= p; }

    /// Standard normal via Box-Muller; pairs are cached per stream.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derive a child stream id; collisions across distinct paths are ~2^-64.
inline std::uint64_t derive(std::uint64_t parent, std::uint64_t child) {
    return detail::mix64(parent ^ detail::mix64(child + 0x6A09E667F3BCC909ull));
}

/// Addressable point in the stream hierarchy: (master seed, stream id).
struct Key {
    std::uint64_t seed = 0;
    std::uint64_t id = 0;

    Key child(std::uint64_t index) const { return Key{seed, derive(id, index)}; }
    Stream stream() const { return Stream(seed, id); }
};

/// Root key for a named experiment domain (FNV-1a over the tag).
inline Key root_key(std::uint64_t seed, const char* tag) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char* p = tag; *p; ++p) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
        h *= 1099511628211ull;
    }
    return Key{seed, h};
}

}  // namespace photoperceptron::rng
