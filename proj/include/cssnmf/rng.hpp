#pragma once

#include <array>
#include <cstdint>

namespace cssnmf {

/**
 * xoshiro256** generator seeded through splitmix64.
 *
 * The draw sequence depends only on the seed. Uniform doubles use the top
 * 53 bits; normals use Box-Muller with the second variate cached; Gamma
 * variates use Marsaglia-Tsang. substream(k) derives an independent stream
 * from (seed, k) so that trial k is reproducible regardless of how many
 * other trials are drawn.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);
    double normal();
    double gamma(double shape);              // shape > 0, unit scale
    std::uint64_t below(std::uint64_t bound); // uniform integer in [0, bound)

    RngStream substream(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// splitmix64 finalizer; also used to derive per-trial seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

} // namespace cssnmf
