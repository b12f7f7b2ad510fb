#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spdelab::rng {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw, SC'11).
// A 128-bit counter and 64-bit key map to 128 bits of output through ten
// multiply-xor rounds; distinct counters give statistically independent
// blocks, so streams can be indexed rather than advanced.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key     = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0  = 0xD2511F53u;
    static constexpr std::uint32_t kMul1  = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter block(Counter x, Key k) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += kWeyl0;
                k[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t(kMul0) * x[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * x[2];
            x = {std::uint32_t(p1 >> 32) ^ x[1] ^ k[0], std::uint32_t(p1),
                 std::uint32_t(p0 >> 32) ^ x[3] ^ k[1], std::uint32_t(p0)};
        }
        return x;
    }
};

// Uniform in (0,1): 53 random bits centered in the unit interval, never 0 or 1.
inline double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
    return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct NormalPair {
    double z0;
    double z1;
};

// Two independent N(0,1) deviates from one Philox block (Box-Muller).
inline NormalPair normal_pair(std::uint64_t seed, std::uint64_t sample,
                              std::uint32_t step, std::uint32_t block) {
    const Philox4x32::Key key = {std::uint32_t(seed), std::uint32_t(seed >> 32)};
    const Philox4x32::Counter ctr = {std::uint32_t(sample), std::uint32_t(sample >> 32),
                                     step, block};
    const auto out = Philox4x32::block(ctr, key);
    const double u1 = uniform_from_bits(out[0], out[1]);
    const double u2 = uniform_from_bits(out[2], out[3]);
    const double r  = std::sqrt(-2.0 * std::log(u1));
    const double a  = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// One logical stream per (seed, sample index); increments are addressed by
// (step, mode) so that any parallel schedule reproduces the same numbers.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t sample_index)
        : seed_(seed), sample_(sample_index) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t sample_index() const { return sample_; }

    // mode is 0-based here; modes 2b and 2b+1 share Philox block b.
    double normal(std::uint32_t step, std::uint32_t mode) const {
        const NormalPair p = normal_pair(seed_, sample_, step, mode / 2);
        return (mode % 2 == 0) ? p.z0 : p.z1;
    }

    // Fills `out[0..count)` with N(0,1) draws for one step, two per block.
    void fill_normals(std::uint32_t step, double* out, std::size_t count) const {
        std::size_t i = 0;
        for (std::uint32_t b = 0; i < count; ++b) {
            const NormalPair p = normal_pair(seed_, sample_, step, b);
            out[i++] = p.z0;
            if (i < count) out[i++] = p.z1;
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t sample_;
};

}  // namespace spdelab::rng
