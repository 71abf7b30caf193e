#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every consumer owns a named stream derived from the run seed, so modules
// stay reproducible in isolation and per-particle substreams can be addressed
// as (stream, particle id, step) without any shared mutable state.

#include <array>
#include <cmath>
#include <cstdint>

#include "plume/vec3.hpp"

namespace plume {

enum class StreamId : std::uint32_t {
    release = 1,      // positions of newly released particles
    species = 2,      // species assignment at release
    turbulence = 3,   // per-particle fluctuation noise
    degradation = 4,  // per-particle survival draws
    meander = 5,      // shared crosswind meander noise
    dataset = 6,      // observation-window sampling
    receivers = 7,    // receiver placement
    shuffle = 8,      // training-epoch permutations
    init = 9,         // network weight initialization
    split = 10,       // train/test partitioning
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Philox4x32 with 10 rounds: maps a 128-bit counter and 64-bit key to four
/// 32-bit words. Stateless; the same (key, counter) always yields the same block.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> ctr) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return ctr;
}

/// Key for a named stream of a given run seed.
inline std::uint64_t stream_key(std::uint64_t seed, StreamId id) {
    return detail::splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(id)));
}

inline double unit_double(std::uint32_t hi, std::uint32_t lo) {
    // 53 random bits -> [0, 1)
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

/// Sequential random stream: a Philox key plus an incrementing block counter.
/// Cheap to copy; copies continue independently from the current position.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamId id) : key_(stream_key(seed, id)) {}

    explicit RandomStream(std::uint64_t raw_key) : key_(raw_key) {}

    /// Uniform double in [0, 1); consumes two 32-bit words.
    double uniform() {
        const std::uint32_t hi = next_word();
        const std::uint32_t lo = next_word();
        return unit_double(hi, lo);
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Standard normal via Box-Muller; consumes two uniforms.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint32_t next_word() {
        if (pos_ == 4) {
            buf_ = philox4x32(key_, {static_cast<std::uint32_t>(block_),
                                     static_cast<std::uint32_t>(block_ >> 32), 0, 0});
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Unbiased uniform integer in [0, n); rejection-sampled.
    std::uint32_t uniform_below(std::uint32_t n) {
        const std::uint32_t lim = n == 0 ? 0 : (0xFFFFFFFFu - 0xFFFFFFFFu % n);
        std::uint32_t w;
        do {
            w = next_word();
        } while (w >= lim);
        return w % n;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    std::uint64_t key_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// Substream addressed by (stream, entity, step). Draws consume slots of the
/// 128-bit counter space {entity_lo, entity_hi, step, slot}, so concurrent
/// consumers of different entities can never collide.
class EntityStream {
public:
    EntityStream(std::uint64_t key, std::uint64_t entity, std::uint32_t step)
        : key_(key), entity_(entity), step_(step) {}

    double uniform() {
        const std::uint32_t hi = next_word();
        const std::uint32_t lo = next_word();
        return unit_double(hi, lo);
    }

    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static constexpr double kPi = 3.14159265358979323846;

    std::uint32_t next_word() {
        if (pos_ == 4) {
            buf_ = philox4x32(key_, {static_cast<std::uint32_t>(entity_),
                                     static_cast<std::uint32_t>(entity_ >> 32), step_, slot_});
            ++slot_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t key_;
    std::uint64_t entity_;
    std::uint32_t step_;
    std::uint32_t slot_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// Uniform point in the closed ball of the given radius, by rejection from the
/// bounding cube. Expected 1.91 attempts per sample.
template <typename Rng>
Vec3 sample_uniform_in_sphere(const Vec3& center, double radius, Rng& rng) {
    for (;;) {
        const double x = rng.uniform() * 2.0 - 1.0;
        const double y = rng.uniform() * 2.0 - 1.0;
        const double z = rng.uniform() * 2.0 - 1.0;
        if (x * x + y * y + z * z <= 1.0) {
            return {center.x + radius * x, center.y + radius * y, center.z + radius * z};
        }
    }
}

}  // namespace plume
