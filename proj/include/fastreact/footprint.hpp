#pragma once

// Register memory needed by a FastReact switch, in bits, for a given table
// geometry. The formulas cover the conjunctive and disjunctive logic tables,
// the per-sensor time series store, and the per-port / per-sensor counters.
// The one-bit value-source column of the disjunctive tables is not counted.

#include <cstdint>

namespace fastreact {

inline constexpr std::uint64_t kFilterCounterBits = 16;

struct FootprintParams {
  std::uint64_t sensors = 5000;    // S_count
  std::uint64_t conj_cols = 5;     // C_cols
  std::uint64_t disj_rows = 25000; // D_rows
  std::uint64_t disj_cols = 5;     // D_cols
  std::uint64_t value_bits = 16;   // Sz_sen
  std::uint64_t ts_bits = 48;      // Sz_ts
  std::uint64_t history = 100;     // H_count
  std::uint64_t ports = 24;        // P
};

// ceil(log2(n)) for n >= 1; 0 for n == 1.
std::uint64_t ceil_log2(std::uint64_t n);

// All of these throw Error(kInvalidArgument) for zero-valued parameters and
// Error(kOverflow) if the result does not fit 64 bits.
std::uint64_t conjunctive_bits(const FootprintParams &p);
std::uint64_t disjunctive_bits(const FootprintParams &p);
std::uint64_t timeseries_bits(const FootprintParams &p);
std::uint64_t misc_bits(const FootprintParams &p);

struct Footprint {
  std::uint64_t conjunctive = 0;
  std::uint64_t disjunctive = 0;
  std::uint64_t timeseries = 0;
  std::uint64_t misc = 0;
};

Footprint footprint(const FootprintParams &p);

}  // namespace fastreact
