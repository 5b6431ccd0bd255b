#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pegsim {

// splitmix64 finalizer, used to derive independent stream seeds.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled variate mappings. The standard distribution
// objects are implementation-defined, which would tie the byte-for-byte
// reproducibility of datasets and models to a particular libstdc++ version.
class Rng {
  public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double unit() { return (gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // index in [0, n)
    uint64_t index(uint64_t n) { return gen_() % n; }

    // Box-Muller, one fresh pair of draws per variate (no cached spare, so
    // the stream position is a pure function of the call count).
    double normal(double mu = 0.0, double sigma = 1.0) {
        const double u1 = ((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = (gen_() >> 11) * 0x1.0p-53;
        return mu + sigma * std::sqrt(-2.0 * std::log(u1)) *
                        std::cos(2.0 * M_PI * u2);
    }

    // Derived from the construction seed, not the stream position, so fork
    // order never depends on how many variates were drawn in between.
    Rng fork(uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

  private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace pegsim
