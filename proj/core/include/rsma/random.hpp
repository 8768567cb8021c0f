#pragma once

#include <array>
#include <cstdint>

#include "rsma/types.hpp"

namespace rsma {

/**
 * Philox4x32-10 counter-based generator.
 *
 * The 64-bit seed is the key and the 64-bit stream id occupies the upper half
 * of the counter, so (seed, stream) pairs give independent, reproducible
 * sequences without shared state.
 */
class Philox4x32
{
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }

    result_type operator()();

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    double normal();
    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    cplx complex_normal(double variance = 1.0);

    static Block encrypt(Block ctr, Key key);

private:
    Key key_;
    Block ctr_;
    Block buf_{};
    int idx_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Mixes a master seed with up to two counters (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

// Uniformly distributed unit-norm direction in C^m.
CVec random_unit_vector(Philox4x32& rng, int m);

}  // namespace rsma
