#pragma once

#include <cstdint>
#include <random>

namespace ltdet {

/// Seeded random stream. Distributions are implemented here rather than taken
/// from <random> so that outputs are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    /// Independent stream derived from (seed, stream_id).
    static Rng substream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n);
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ltdet
