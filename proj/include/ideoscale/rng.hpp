#pragma once

#include <cmath>
#include <cstdint>

// Self-contained PRNG so results are bit-stable across platforms and
// standard-library versions. xoshiro256** seeded through splitmix64;
// substream(seed, id) yields independent streams for parallel work.
namespace ideoscale::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        has_cached_normal_ = false;
    }

    std::uint64_t next_u64() {
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

    // uniform in (0,1); never returns 0, so it is safe inside log()
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller with the usual cached partner value
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(theta);
        has_cached_normal_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // integer in [0, bound) without modulo bias
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_;
};

// Independent stream derived from (seed, stream_id); replicate r of a
// bootstrap uses substream(seed, r) so parallel scheduling cannot change
// the numbers drawn.
inline Rng substream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = seed ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t a = splitmix64(sm);
    sm ^= stream_id * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
    std::uint64_t b = splitmix64(sm);
    return Rng(a ^ (b + 0x452821e638d01377ULL + (a << 6) + (a >> 2)));
}

// Stable 64-bit content hash (FNV-1a), used for substream keys and
// manifest digests.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace ideoscale::rng
