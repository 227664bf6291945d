#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fkmc {

/// Counter-based random numbers (Philox4x32-10).
///
/// Every draw is a pure function of (seed, path, step, slot), so batches can
/// be evaluated in any order, on any number of threads, with bit-identical
/// results, and coupled simulations reuse one another's increments by simply
/// sharing (seed, path).
namespace rng {

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace detail

/// One 128-bit Philox4x32-10 block.
inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint64_t path,
                                                 std::uint32_t step, std::uint32_t index) {
    std::array<std::uint32_t, 4> c = {index, step, static_cast<std::uint32_t>(path),
                                      static_cast<std::uint32_t>(path >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        detail::round_once(c, k0, k1);
        k0 += detail::kWeyl0;
        k1 += detail::kWeyl1;
    }
    return c;
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
    // strictly inside (0,1) so logarithms stay finite
    return static_cast<double>(v >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

/// Uniform blocks live in a disjoint index range from the normal blocks, so
/// optional draws (e.g. bridge crossing tests) never perturb the increments.
inline constexpr std::uint32_t kUniformIndexBase = 0x80000000u;

/// Noise stream of one simulated path: iid N(0,1) increments indexed by
/// (step, slot) plus auxiliary U(0,1) draws indexed by (step, slot).
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

    /// Fills out[0..count) with standard normals for the given step.
    void normals(std::uint32_t step, double* out, std::size_t count) const {
        for (std::size_t pair = 0; 2 * pair < count; ++pair) {
            const auto b = philox_block(seed_, path_, step, static_cast<std::uint32_t>(pair));
            const double u1 = to_unit(b[0], b[1]);
            const double u2 = to_unit(b[2], b[3]);
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double a = 2.0 * std::numbers::pi * u2;
            out[2 * pair] = r * std::cos(a);
            if (2 * pair + 1 < count) out[2 * pair + 1] = r * std::sin(a);
        }
    }

    double uniform(std::uint32_t step, std::uint32_t slot) const {
        const auto b = philox_block(seed_, path_, step, kUniformIndexBase + slot);
        return to_unit(b[0], b[1]);
    }

private:
    std::uint64_t seed_;
    std::uint64_t path_;
};

}  // namespace rng
}  // namespace fkmc
