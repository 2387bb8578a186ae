#include "fastreact/footprint.hpp"

#include <bit>
#include <string>

#include "fastreact/error.hpp"

namespace fastreact {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(Errc::kOverflow, "footprint exceeds 64 bits");
  }
  return out;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(Errc::kOverflow, "footprint exceeds 64 bits");
  }
  return out;
}

void require_positive(std::uint64_t v, const char *name) {
  if (v == 0) {
    throw Error(Errc::kInvalidArgument, std::string(name) + " must be >= 1");
  }
}

}  // namespace

std::uint64_t ceil_log2(std::uint64_t n) {
  require_positive(n, "ceil_log2 argument");
  return static_cast<std::uint64_t>(std::bit_width(n - 1));
}

std::uint64_t conjunctive_bits(const FootprintParams &p) {
  require_positive(p.sensors, "sensors");
  require_positive(p.conj_cols, "conj_cols");
  require_positive(p.disj_rows, "disj_rows");
  return mul(mul(p.sensors, p.conj_cols), ceil_log2(p.disj_rows));
}

std::uint64_t disjunctive_bits(const FootprintParams &p) {
  require_positive(p.disj_rows, "disj_rows");
  require_positive(p.disj_cols, "disj_cols");
  require_positive(p.value_bits, "value_bits");
  require_positive(p.sensors, "sensors");
  const std::uint64_t entry = add(add(3, p.value_bits), ceil_log2(p.sensors));
  return mul(mul(p.disj_rows, p.disj_cols), entry);
}

std::uint64_t timeseries_bits(const FootprintParams &p) {
  require_positive(p.history, "history");
  require_positive(p.ts_bits, "ts_bits");
  require_positive(p.value_bits, "value_bits");
  require_positive(p.sensors, "sensors");
  // History slots plus one moving-average slot per sensor, then the round
  // robin index per sensor.
  const std::uint64_t slots =
      mul(mul(add(p.history, 1), add(p.ts_bits, p.value_bits)), p.sensors);
  return add(slots, mul(ceil_log2(p.history), p.sensors));
}

std::uint64_t misc_bits(const FootprintParams &p) {
  require_positive(p.ports, "ports");
  require_positive(p.ts_bits, "ts_bits");
  require_positive(p.sensors, "sensors");
  return add(mul(p.ports, p.ts_bits), mul(p.sensors, kFilterCounterBits));
}

Footprint footprint(const FootprintParams &p) {
  return Footprint{conjunctive_bits(p), disjunctive_bits(p),
                   timeseries_bits(p), misc_bits(p)};
}

}  // namespace fastreact
