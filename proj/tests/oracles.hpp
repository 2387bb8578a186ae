#pragma once

// Reference models used by the tests. None of these call into the library's
// own evaluation or arithmetic; they only read its data structures.

#include <array>
#include <cstdint>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "fastreact/footprint.hpp"
#include "fastreact/logic.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;

struct WideFootprint {
  cpp_int conjunctive;
  cpp_int disjunctive;
  cpp_int timeseries;
  cpp_int misc;
};

// Smallest k with 2^k >= n, by doubling.
cpp_int ceil_log2(const cpp_int &n);
WideFootprint footprint(const fastreact::FootprintParams &p);

// Sensor values indexed by id; index 0 unused. The moving-average view of a
// sensor is `ma[id]`.
struct Assignment {
  std::array<std::uint32_t, 8> latest{};
  std::array<std::uint32_t, 8> ma{};
};

bool eval(const fastreact::BoolExpr &e, const Assignment &a);

// Random tree of at most `depth` levels of operators over sensors
// 1..sensors with constants in 0..max_value. Both value sources appear.
fastreact::BoolExpr random_expr(std::mt19937_64 &rng, int depth, int sensors,
                                std::uint32_t max_value);

// Square wave: v0 for the first period, then v1, alternating.
std::uint32_t alternate(std::uint64_t t_us, std::uint32_t v0, std::uint32_t v1,
                        std::uint64_t period_us);

// start + slope * t rounded down, slope in units per second.
std::uint32_t ramp(std::uint64_t t_us, std::uint32_t start, double slope);

}  // namespace oracle
