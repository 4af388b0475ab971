#pragma once

#include <cstdint>
#include <random>

namespace ampsc {

// Splittable seeded generator: every consumer derives an independent child
// stream from (seed, tag) so that adding a consumer never perturbs the others.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

    Rng child(std::uint64_t tag) const { return Rng(mix(state_ ^ mix(tag + 0x9e3779b97f4a7c15ull))); }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * std::generate_canonical<double, 53>(engine());
    }

    std::uint64_t next_u64() { return engine()(); }

    std::mt19937_64& engine() {
        if (!engine_ready_) {
            engine_.seed(state_);
            engine_ready_ = true;
        }
        return engine_;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    std::mt19937_64 engine_;
    bool engine_ready_ = false;
};

} // namespace ampsc
