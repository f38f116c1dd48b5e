#ifndef COJUMP_RNG_HPP
#define COJUMP_RNG_HPP

#include <array>
#include <cstdint>

namespace cojump {

/// Identifies a reproducible random stream. Identical (seed, stream) pairs
/// reproduce identical draw sequences bit-for-bit on a given build; distinct
/// stream ids index statistically independent streams of the same seed, so
/// replicate r can simply use stream base+r.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Counter-based generator (Philox4x32-10). The key carries the seed and the
/// high counter lanes carry the stream id, so streams never overlap by
/// construction. State is one 64-bit block counter; copying an Rng forks the
/// whole sequence position.
class Rng {
 public:
  explicit Rng(RngStream s) : key_{static_cast<std::uint32_t>(s.seed),
                                   static_cast<std::uint32_t>(s.seed >> 32)},
                              stream_lo_(static_cast<std::uint32_t>(s.stream)),
                              stream_hi_(static_cast<std::uint32_t>(s.stream >> 32)) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos();

  double exponential(double rate);
  double normal();
  /// Gamma(shape, scale) via Marsaglia-Tsang, with the usual shape<1 boost.
  double gamma(double shape, double scale);
  std::int64_t binomial(std::int64_t n, double p);

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                 std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;  // unread 32-bit words in buffer_

  std::uint32_t next_u32();
};

}  // namespace cojump

#endif  // COJUMP_RNG_HPP
