#pragma once

#include <cstdint>
#include <limits>

namespace sdecv {

/// Counter-free pseudo-random stream identified by (seed, stream id).
///
/// The engine is xoshiro256++ whose 256-bit state is filled by SplitMix64
/// from a mix of the seed and the stream id. Gaussian variates use the
/// Box-Muller transform on two 53-bit uniforms:
///
///     u1 = ((x1 >> 11) + 1) * 2^-53      in (0, 1]
///     u2 =  (x2 >> 11)      * 2^-53      in [0, 1)
///     z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
///
/// z0 is returned first, z1 is cached for the next call. This mapping is
/// part of the reproducibility contract and must not change.
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double gaussian();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Fresh stream at (seed, stream + offset), independent of this one's state.
    RngStream substream(std::uint64_t offset) const { return RngStream(seed_, stream_ + offset); }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Streams below this id are reserved for training paths, the rest for testing.
inline constexpr std::uint64_t kTestingStreamBase = std::uint64_t{1} << 32;

inline RngStream training_streams(std::uint64_t seed) { return RngStream(seed, 0); }
inline RngStream testing_streams(std::uint64_t seed) { return RngStream(seed, kTestingStreamBase); }

/// Derives an independent master seed for repetition `index` of a study.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace sdecv
