#pragma once

#include <cstdint>
#include <random>

namespace axrx {

/// Seeded pseudo-random stream. Streams are addressed by (seed, stream id)
/// so that per-example randomness does not depend on processing order.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double normal(double mean, double stddev);
    std::size_t index(std::size_t n);      // uniform in [0, n)
    bool bernoulli(double p);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Domain separators for streams drawn from the same user seed.
enum class StreamDomain : std::uint64_t {
    kAttack = 0xA77AC4,
    kDeflection = 0xDEF1EC7,
    kData = 0xDA7A,
    kSplit = 0x5B117,
    kInit = 0x1417,
    kShuffle = 0x5F0F,
};

inline std::uint64_t domain_seed(std::uint64_t seed, StreamDomain domain) {
    return mix_seed(seed, static_cast<std::uint64_t>(domain));
}

}  // namespace axrx
