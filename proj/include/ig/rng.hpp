#pragma once

#include <array>
#include <cstdint>

namespace ig {

// Philox4x32-10 counter-based generator.  Each (key, counter) pair maps to an
// independent 128-bit block, so replica streams are derived by putting the
// replica index into the counter's stream word instead of reseeding.  Output
// is reproducible bit-for-bit regardless of evaluation order or thread count.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block round10(Block ctr, std::array<std::uint32_t, 2> key);
};

// Seeded stream of uniforms/gaussians.  `stream` selects an independent
// substream of the same seed; use one stream per Monte Carlo replica.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static Rng for_replica(std::uint64_t seed, std::uint64_t replica_index) {
        return Rng(seed, replica_index);
    }

    std::uint64_t next_u64();
    // uniform on [0,1)
    double uniform();
    // uniform on (0,1]
    double uniform_pos();
    // standard normal (Box-Muller, one value cached)
    double gaussian();
    // exponential with mean 1
    double exponential();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double cached_gauss_ = 0.0;
    bool have_gauss_ = false;

    std::uint32_t next_u32();
};

} // namespace ig
