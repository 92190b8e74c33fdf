#pragma once
// Counter-based random streams (Philox4x32-10) so that every trajectory owns an
// independently seekable stream: noise for step k is a pure function of
// (master seed, stream id, salt, k). This is what makes checkpoint/resume and
// noise-negation tests bit-exact, and lets two different integrators consume
// the identical Wiener increments.
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace kerrlat {

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<uint32_t, 4>& c, uint32_t k0, uint32_t k1) {
    const uint64_t p0 = uint64_t(kPhiloxM0) * c[0];
    const uint64_t p1 = uint64_t(kPhiloxM1) * c[2];
    const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr, uint32_t k0,
                                             uint32_t k1) {
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return ctr;
}

// splitmix64: cheap avalanche used only to derive per-stream keys.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

// One stream = one (key, salt) pair; the 128-bit counter is (block, salt-lane).
// Each block yields 4x u32 = 2x u64 = two doubles (uniform) or two normals.
class NoiseStream {
  public:
    NoiseStream() = default;
    NoiseStream(uint64_t master_seed, uint64_t stream_id, uint64_t salt) {
        const uint64_t k =
            detail::splitmix64(master_seed ^ detail::splitmix64(stream_id ^ detail::splitmix64(salt)));
        key0_ = uint32_t(k);
        key1_ = uint32_t(k >> 32);
        salt_lo_ = uint32_t(salt);
        salt_hi_ = uint32_t(salt >> 32);
    }

    // Raw 128-bit block for block index `n`.
    std::array<uint32_t, 4> block(uint64_t n) const {
        return detail::philox4x32_10({uint32_t(n), uint32_t(n >> 32), salt_lo_, salt_hi_},
                                     key0_, key1_);
    }

    // Two uniforms from block n: first in (0,1], second in [0,1).
    std::array<double, 2> uniforms(uint64_t n) const {
        const auto b = block(n);
        const uint64_t x = (uint64_t(b[1]) << 32) | b[0];
        const uint64_t y = (uint64_t(b[3]) << 32) | b[2];
        constexpr double s = 0x1p-53;
        return {double((x >> 11) + 1) * s, double(y >> 11) * s};
    }

    // Two standard normals from block n (Box-Muller).
    std::array<double, 2> normals(uint64_t n) const {
        const auto u = uniforms(n);
        const double r = std::sqrt(-2.0 * std::log(u[0]));
        const double phi = 2.0 * std::numbers::pi * u[1];
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    // Fill `out[0..count)` with normals for logical step `step`; scaled by
    // `scale` and optionally negated (Z2-reflected noise). Blocks are indexed
    // (step, pair) so the mapping is independent of how callers batch calls.
    void fill_normals(uint64_t step, double* out, int count, double scale,
                      bool negate = false) const {
        const double s = negate ? -scale : scale;
        const uint64_t base = step * kBlocksPerStep;
        for (int i = 0; i < count; i += 2) {
            const auto z = normals(base + uint64_t(i / 2));
            out[i] = s * z[0];
            if (i + 1 < count) out[i + 1] = s * z[1];
        }
    }

    // Uniform in [0,1) for (step, slot) — used by the Metropolis sweeps where
    // each attempt consumes one block (site pick + acceptance draw).
    std::array<double, 2> uniforms_at(uint64_t step, uint64_t slot) const {
        return uniforms(step * kBlocksPerStep + slot);
    }

  private:
    // Up to 2^20 blocks (~2M normals) per logical step before streams overlap;
    // far above any lattice size used here.
    static constexpr uint64_t kBlocksPerStep = 1ull << 20;
    uint32_t key0_ = 0, key1_ = 0, salt_lo_ = 0, salt_hi_ = 0;
};

// Stable stage-name -> salt mapping (FNV-1a 64).
inline uint64_t salt_from_tag(const char* tag) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const char* p = tag; *p; ++p) {
        h ^= uint64_t(uint8_t(*p));
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace kerrlat
