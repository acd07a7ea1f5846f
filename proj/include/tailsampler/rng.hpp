#pragma once

#include <array>
#include <cstdint>

namespace tailsampler {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by (seed, stream_id); the i-th block of output is a
/// pure function of (seed, stream_id, i). Two streams with the same identity
/// produce bit-identical sequences, and replication k of any estimator draws
/// from stream_id = k, so results never depend on thread scheduling.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1) with 53 random bits.
  double uniform01();
  /// Standard exponential, computed as -log(U).
  double exponential();
  /// Standard normal by inversion of uniform01().
  double std_normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the U^{1/a} boost.
  double gamma(double shape);

private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

/// One Philox4x32-10 block; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

} // namespace tailsampler
