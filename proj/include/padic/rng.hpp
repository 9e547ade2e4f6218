#pragma once

#include <array>
#include <cstdint>

namespace padic {

/// Philox4x32-10 block function: a counter-based generator, so streams are
/// splittable, platform-independent, and replayable from (key, counter)
/// alone. Constants are the reference ones.
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 2> key,
                                       std::array<uint32_t, 4> ctr) {
    for (int round = 0; round < 10; ++round) {
      uint64_t p0 = uint64_t(kMul0) * ctr[0];
      uint64_t p1 = uint64_t(kMul1) * ctr[2];
      std::array<uint32_t, 4> next{uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
                                   uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
      ctr = next;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// A deterministic stream over the Philox block function. Streams are
/// derived by the documented splitting rule key = seed XOR stream_index; the
/// counter advances once per block.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream_index = 0) {
    uint64_t k = seed ^ stream_index;
    key_ = {uint32_t(k), uint32_t(k >> 32)};
  }

  uint32_t next_u32() {
    if (buffer_pos_ == 4) refill();
    return buffer_[buffer_pos_++];
  }

  uint64_t next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bounded rejection keeps it exact and
  /// platform-independent.
  uint64_t uniform_int(uint64_t bound) {
    uint64_t limit = ~uint64_t(0) - (~uint64_t(0) % bound);
    for (;;) {
      uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

 private:
  void refill() {
    buffer_ = Philox4x32::block(key_, {uint32_t(counter_), uint32_t(counter_ >> 32), 0, 0});
    ++counter_;
    buffer_pos_ = 0;
  }

  std::array<uint32_t, 2> key_;
  uint64_t counter_ = 0;
  std::array<uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;
};

}  // namespace padic
