#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based normal generator: Philox4x32-10 keyed by the experiment
// seed, with the counter split (path index, block index).  Any normal in
// the ensemble is addressable directly, so paths need not be stored and
// parallel evaluation cannot perturb the stream.

namespace sbm {

struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      std::array<std::uint32_t, 4> next;
      next[0] = std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0];
      next[1] = std::uint32_t(p1);
      next[2] = std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1];
      next[3] = std::uint32_t(p0);
      ctr = next;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

// Uniform in (0, 1) from two 32-bit words, 53-bit resolution, never 0 or 1.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  std::uint64_t v = (std::uint64_t(hi) << 32) | lo;
  return (double(v >> 11) + 0.5) * 0x1.0p-53;
}

// Two independent standard normals per counter block.
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path,
                                         std::uint64_t block_index) {
  std::array<std::uint32_t, 4> ctr = {std::uint32_t(path), std::uint32_t(path >> 32),
                                      std::uint32_t(block_index), std::uint32_t(block_index >> 32)};
  std::array<std::uint32_t, 2> key = {std::uint32_t(seed), std::uint32_t(seed >> 32)};
  auto words = Philox4x32::block(ctr, key);
  double u1 = uniform_open(words[0], words[1]);
  double u2 = uniform_open(words[2], words[3]);
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

// k-th standard normal of a path's stream.
inline double normal_at(std::uint64_t seed, std::uint64_t path, std::uint64_t k) {
  return normal_pair(seed, path, k / 2)[k % 2];
}

}  // namespace sbm
