#pragma once

#include <array>
#include <cstdint>

namespace ripe {

/// Immutable descriptor of one reproducible random stream. Two engines built
/// from equal descriptors produce identical draws.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Child stream i, e.g. one per coverage replicate or grid point.
    RngStream substream(std::uint64_t i) const;
};

/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based generator. Key is the seed; the counter holds the block
/// index and the stream id, so there is no shared state between streams.
class RngEngine {
public:
    explicit RngEngine(RngStream stream);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (0, 1).
    double uniform_open();

    double normal();

    /// Gamma with the given shape and rate (mean shape/rate).
    double gamma(double shape, double rate);

    double chi_square(double dof) { return gamma(0.5 * dof, 0.5); }

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t block_ = 0;
    std::uint64_t stream_id_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

double rng_uniform(RngEngine& engine);
double rng_normal(RngEngine& engine);
double rng_gamma(RngEngine& engine, double shape, double rate);

}  // namespace ripe
