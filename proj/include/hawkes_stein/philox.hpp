#pragma once

// Counter-based random numbers. Every stream is a pure function of
// (key, stream_a, stream_b), so any cell of the driving measure or any step of
// a discrete path can be regenerated on demand from any thread.

#include <array>
#include <cstdint>

namespace hawkes_stein {

// Philox4x32 with 10 rounds (Salmon, Moraes, Dror, Shaw, SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Per-replication seed: mix64(mix64(base ^ mix64(horizon_index + 1)) ^ (replication_index + 1)).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t horizon_index,
                          std::uint64_t replication_index);

// Domain tags keep streams used for different purposes disjoint.
enum class StreamDomain : std::uint32_t {
  MeasureCell = 1,
  DiscreteStep = 2,
  Bootstrap = 3,
  ShiftTimes = 4,
  Generic = 5,
};

class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamDomain domain, std::uint64_t stream_a,
                std::uint32_t stream_b = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace hawkes_stein
