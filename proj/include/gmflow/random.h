#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gmflow {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// Stream domains keep unrelated consumers of one master seed apart.
enum class StreamDomain : std::uint32_t { EntryPath = 1, Circulant = 2, Dyson = 3, Auxiliary = 4 };

/// Deterministic stream of standard normals keyed by (seed, domain, a, b, c).
/// Draw k of a stream depends only on the key and k, never on call order.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, StreamDomain domain, std::uint32_t a, std::uint32_t b, std::uint32_t c)
      : key_{static_cast<std::uint32_t>(seed) ^ (static_cast<std::uint32_t>(domain) * 0x85EBCA6Bu),
             static_cast<std::uint32_t>(seed >> 32)},
        a_(a), b_(b), c_(c) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto r = philox4x32({block_++, a_, b_, c_}, key_);
    // 53-bit uniforms in (0,1)
    const double u1 = (static_cast<double>((static_cast<std::uint64_t>(r[0]) << 21) ^ (r[1] >> 11)) + 0.5) * 0x1p-53;
    const double u2 = (static_cast<double>((static_cast<std::uint64_t>(r[2]) << 21) ^ (r[3] >> 11)) + 0.5) * 0x1p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t a_, b_, c_;
  std::uint32_t block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gmflow
