#pragma once

// Boolean control logic: expression trees over sensor comparisons, their
// conjunctive normal form, and the register-table encoding a switch evaluates
// per packet.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastreact/model.hpp"

namespace fastreact {

// Three-bit operator codes as stored in the disjunctive operator table.
enum class Operator : std::uint8_t {
  kUnused = 0,
  kLt = 1,
  kGt = 2,
  kEq = 3,
  kLe = 4,
  kGe = 5,
  kNe = 6,
};

enum class ValueSource : std::uint8_t { kLatest = 0, kMovingAverage = 1 };

std::string_view to_string(Operator op);

bool compare(SensorValue v, Operator op, SensorValue constant);

// Logical negation expressed as another operator: !(v < k) == (v >= k).
Operator complement(Operator op);

struct Comparison {
  SensorId sensor;
  Operator op = Operator::kUnused;
  SensorValue constant = 0;
  ValueSource source = ValueSource::kLatest;

  auto operator<=>(const Comparison &) const = default;
};

// Resolves a sensor reference to its current value. An empty result means the
// value is unknown and the comparison evaluates to false.
using ValueLookup =
    std::function<std::optional<SensorValue>(SensorId, ValueSource)>;

bool evaluate(const Comparison &c, const ValueLookup &lookup);

// Immutable expression tree. Copies share structure.
class BoolExpr {
 public:
  enum class Kind { kLeaf, kNot, kAnd, kOr };

  static BoolExpr leaf(Comparison c);
  static BoolExpr negate(BoolExpr e);
  static BoolExpr conj(BoolExpr lhs, BoolExpr rhs);
  static BoolExpr disj(BoolExpr lhs, BoolExpr rhs);

  Kind kind() const { return kind_; }
  const Comparison &comparison() const { return cmp_; }
  const BoolExpr &lhs() const { return *lhs_; }
  const BoolExpr &rhs() const { return *rhs_; }

  std::size_t leaf_count() const;
  std::size_t depth() const;
  // Largest sensor id referenced by any leaf.
  SensorId max_sensor() const;

 private:
  BoolExpr() = default;

  Kind kind_ = Kind::kLeaf;
  Comparison cmp_;
  std::shared_ptr<const BoolExpr> lhs_;
  std::shared_ptr<const BoolExpr> rhs_;
};

// Direct recursive evaluation, independent of any table encoding. A
// comparison on an unknown value is false even under a negation.
bool evaluate(const BoolExpr &e, const ValueLookup &lookup);

using Clause = std::vector<Comparison>;

struct Cnf {
  std::vector<Clause> conjuncts;

  bool operator==(const Cnf &) const = default;
};

bool evaluate(const Cnf &cnf, const ValueLookup &lookup);

struct CnfLimits {
  std::size_t max_conjuncts;  // C_cols
  std::size_t max_disjuncts;  // D_cols
};

// Pushes negations into the leaves, then distributes OR over AND. Exact
// duplicate literals within a clause and exact duplicate clauses are merged.
// Throws Error(kCapacityExceeded) when the result does not fit `limits`.
Cnf to_cnf(const BoolExpr &e, const CnfLimits &limits);

struct TableDims {
  std::uint32_t sensors = 64;     // S_count; valid triggers are 1..sensors
  std::uint32_t conj_cols = 5;    // C_cols
  std::uint32_t disj_rows = 256;  // D_rows, row 0 reserved
  std::uint32_t disj_cols = 5;    // D_cols
};

// Conjunctive table plus the parallel disjunctive tables (sensor, operator,
// value, value source). Row 0 of the disjunctive tables is never allocated,
// so a zero index in the conjunctive table means "no condition".
class LogicTables {
 public:
  explicit LogicTables(TableDims dims);

  const TableDims &dims() const { return dims_; }
  std::uint32_t next_free_row() const { return next_free_row_; }
  std::uint32_t free_rows() const { return dims_.disj_rows - next_free_row_; }

  // Writes `cnf` for `trigger`, one disjunctive row per conjunct. Throws
  // kAlreadyConfigured if the trigger has logic, kCapacityExceeded if the CNF
  // or the remaining rows do not fit, kUnknownSensor for an out-of-range id.
  // Nothing is written when it throws.
  void encode(SensorId trigger, const Cnf &cnf);

  // Clears the trigger's conjunctive row. Its disjunctive rows stay allocated.
  void clear(SensorId trigger);

  // clear() followed by encode(), but leaves the old logic in place if the new
  // CNF does not fit.
  void replace(SensorId trigger, const Cnf &cnf);

  bool configured(SensorId trigger) const;

  // AND over the non-zero conjunctive indices of the OR over each row's used
  // columns. True when nothing is configured for the trigger.
  bool evaluate(SensorId trigger, const ValueLookup &lookup) const;

  // Reconstructs the CNF stored for `trigger`.
  Cnf decode(SensorId trigger) const;

  std::uint32_t row_index(SensorId trigger, std::uint32_t col) const;
  SensorId sensor_at(std::uint32_t row, std::uint32_t col) const;
  Operator op_at(std::uint32_t row, std::uint32_t col) const;
  SensorValue value_at(std::uint32_t row, std::uint32_t col) const;
  ValueSource source_at(std::uint32_t row, std::uint32_t col) const;

 private:
  void check_trigger(SensorId trigger) const;
  void check_fits(const Cnf &cnf) const;
  std::size_t cell(std::uint32_t row, std::uint32_t col) const;

  TableDims dims_;
  std::uint32_t next_free_row_ = 1;
  std::vector<std::uint32_t> conjunctive_;  // (sensors + 1) x conj_cols
  std::vector<SensorId> disj_sensor_;
  std::vector<Operator> disj_op_;
  std::vector<SensorValue> disj_value_;
  std::vector<ValueSource> disj_source_;
};

// Textual expression grammar used by scenario files:
//   expr := comp | "!" expr | expr "&&" expr | expr "||" expr | "(" expr ")"
//   comp := "s" INT ["~"] OP INT        OP in < > == <= >= !=
// "~" selects the moving average instead of the latest value. "!" binds
// tightest, then "&&", then "||". Throws Error(kParseError) with the column of
// the offending token.
BoolExpr parse_expr(std::string_view text);

std::string to_string(const Comparison &c);
std::string to_string(const BoolExpr &e);
std::string to_string(const Cnf &cnf);

}  // namespace fastreact
