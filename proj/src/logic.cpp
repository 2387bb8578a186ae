#include "fastreact/logic.hpp"

#include <algorithm>
#include <sstream>

#include "fastreact/error.hpp"

namespace fastreact {

std::string_view to_string(Operator op) {
  switch (op) {
    case Operator::kUnused: return "unused";
    case Operator::kLt: return "<";
    case Operator::kGt: return ">";
    case Operator::kEq: return "==";
    case Operator::kLe: return "<=";
    case Operator::kGe: return ">=";
    case Operator::kNe: return "!=";
  }
  return "?";
}

bool compare(SensorValue v, Operator op, SensorValue constant) {
  switch (op) {
    case Operator::kLt: return v < constant;
    case Operator::kGt: return v > constant;
    case Operator::kEq: return v == constant;
    case Operator::kLe: return v <= constant;
    case Operator::kGe: return v >= constant;
    case Operator::kNe: return v != constant;
    case Operator::kUnused: return false;
  }
  return false;
}

Operator complement(Operator op) {
  switch (op) {
    case Operator::kLt: return Operator::kGe;
    case Operator::kGe: return Operator::kLt;
    case Operator::kGt: return Operator::kLe;
    case Operator::kLe: return Operator::kGt;
    case Operator::kEq: return Operator::kNe;
    case Operator::kNe: return Operator::kEq;
    case Operator::kUnused: break;
  }
  throw Error(Errc::kInvalidArgument, "cannot complement an unused operator");
}

bool evaluate(const Comparison &c, const ValueLookup &lookup) {
  const std::optional<SensorValue> v = lookup(c.sensor, c.source);
  return v.has_value() && compare(*v, c.op, c.constant);
}

// ---------------------------------------------------------------------------
// BoolExpr

BoolExpr BoolExpr::leaf(Comparison c) {
  if (!c.sensor.valid()) {
    throw Error(Errc::kInvalidArgument, "comparison must reference a sensor");
  }
  if (c.op == Operator::kUnused) {
    throw Error(Errc::kInvalidArgument, "comparison needs an operator");
  }
  BoolExpr e;
  e.kind_ = Kind::kLeaf;
  e.cmp_ = c;
  return e;
}

BoolExpr BoolExpr::negate(BoolExpr inner) {
  BoolExpr e;
  e.kind_ = Kind::kNot;
  e.lhs_ = std::make_shared<const BoolExpr>(std::move(inner));
  return e;
}

BoolExpr BoolExpr::conj(BoolExpr lhs, BoolExpr rhs) {
  BoolExpr e;
  e.kind_ = Kind::kAnd;
  e.lhs_ = std::make_shared<const BoolExpr>(std::move(lhs));
  e.rhs_ = std::make_shared<const BoolExpr>(std::move(rhs));
  return e;
}

BoolExpr BoolExpr::disj(BoolExpr lhs, BoolExpr rhs) {
  BoolExpr e;
  e.kind_ = Kind::kOr;
  e.lhs_ = std::make_shared<const BoolExpr>(std::move(lhs));
  e.rhs_ = std::make_shared<const BoolExpr>(std::move(rhs));
  return e;
}

std::size_t BoolExpr::leaf_count() const {
  switch (kind_) {
    case Kind::kLeaf: return 1;
    case Kind::kNot: return lhs_->leaf_count();
    default: return lhs_->leaf_count() + rhs_->leaf_count();
  }
}

std::size_t BoolExpr::depth() const {
  switch (kind_) {
    case Kind::kLeaf: return 0;
    case Kind::kNot: return 1 + lhs_->depth();
    default: return 1 + std::max(lhs_->depth(), rhs_->depth());
  }
}

SensorId BoolExpr::max_sensor() const {
  switch (kind_) {
    case Kind::kLeaf: return cmp_.sensor;
    case Kind::kNot: return lhs_->max_sensor();
    default: return std::max(lhs_->max_sensor(), rhs_->max_sensor());
  }
}

namespace {

// Negation is carried down to the leaves and applied as an operator
// complement, so a comparison on an unknown value is false under either
// polarity, exactly as in the CNF tables.
bool evaluate_signed(const BoolExpr &e, const ValueLookup &lookup,
                     bool negated) {
  switch (e.kind()) {
    case BoolExpr::Kind::kLeaf: {
      Comparison c = e.comparison();
      if (negated) c.op = complement(c.op);
      return evaluate(c, lookup);
    }
    case BoolExpr::Kind::kNot:
      return evaluate_signed(e.lhs(), lookup, !negated);
    case BoolExpr::Kind::kAnd:
    case BoolExpr::Kind::kOr: {
      const bool conj = (e.kind() == BoolExpr::Kind::kAnd) != negated;
      const bool l = evaluate_signed(e.lhs(), lookup, negated);
      if (conj ? !l : l) return l;
      return evaluate_signed(e.rhs(), lookup, negated);
    }
  }
  return false;
}

}  // namespace

bool evaluate(const BoolExpr &e, const ValueLookup &lookup) {
  return evaluate_signed(e, lookup, false);
}

bool evaluate(const Cnf &cnf, const ValueLookup &lookup) {
  for (const auto &clause : cnf.conjuncts) {
    const bool any = std::any_of(
        clause.begin(), clause.end(),
        [&](const Comparison &c) { return evaluate(c, lookup); });
    if (!any) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// CNF conversion

namespace {

// Upper bound on intermediate literal count while distributing; the final
// result is checked against the caller's table limits.
constexpr std::size_t kMaxIntermediateLiterals = std::size_t{1} << 16;

void append_unique(Clause &clause, const Comparison &c) {
  if (std::find(clause.begin(), clause.end(), c) == clause.end()) {
    clause.push_back(c);
  }
}

void push_unique(std::vector<Clause> &clauses, Clause clause) {
  if (std::find(clauses.begin(), clauses.end(), clause) == clauses.end()) {
    clauses.push_back(std::move(clause));
  }
}

std::vector<Clause> cnf_of(const BoolExpr &e, bool negated) {
  using Kind = BoolExpr::Kind;
  switch (e.kind()) {
    case Kind::kLeaf: {
      Comparison c = e.comparison();
      if (negated) c.op = complement(c.op);
      return {Clause{c}};
    }
    case Kind::kNot:
      return cnf_of(e.lhs(), !negated);
    case Kind::kAnd:
    case Kind::kOr:
      break;
  }
  // De Morgan: a negated AND is an OR of negations and vice versa.
  const bool is_and = (e.kind() == Kind::kAnd) != negated;
  std::vector<Clause> lhs = cnf_of(e.lhs(), negated);
  std::vector<Clause> rhs = cnf_of(e.rhs(), negated);
  std::vector<Clause> out;
  if (is_and) {
    out = std::move(lhs);
    for (auto &clause : rhs) push_unique(out, std::move(clause));
    return out;
  }
  std::size_t literals = 0;
  for (const auto &a : lhs) {
    for (const auto &b : rhs) {
      Clause merged = a;
      for (const auto &c : b) append_unique(merged, c);
      literals += merged.size();
      if (literals > kMaxIntermediateLiterals) {
        throw Error(Errc::kCapacityExceeded,
                    "CNF expansion exceeds " +
                        std::to_string(kMaxIntermediateLiterals) +
                        " literals");
      }
      push_unique(out, std::move(merged));
    }
  }
  return out;
}

}  // namespace

Cnf to_cnf(const BoolExpr &e, const CnfLimits &limits) {
  Cnf cnf{cnf_of(e, false)};
  if (cnf.conjuncts.size() > limits.max_conjuncts) {
    throw Error(Errc::kCapacityExceeded,
                "CNF has " + std::to_string(cnf.conjuncts.size()) +
                    " conjuncts, table allows " +
                    std::to_string(limits.max_conjuncts));
  }
  for (const auto &clause : cnf.conjuncts) {
    if (clause.size() > limits.max_disjuncts) {
      throw Error(Errc::kCapacityExceeded,
                  "CNF clause has " + std::to_string(clause.size()) +
                      " disjuncts, table allows " +
                      std::to_string(limits.max_disjuncts));
    }
  }
  return cnf;
}

// ---------------------------------------------------------------------------
// LogicTables

LogicTables::LogicTables(TableDims dims) : dims_(dims) {
  if (dims_.sensors == 0 || dims_.conj_cols == 0 || dims_.disj_cols == 0) {
    throw Error(Errc::kInvalidArgument, "logic table dimensions must be >= 1");
  }
  if (dims_.disj_rows < 2) {
    throw Error(Errc::kInvalidArgument,
                "disjunctive table needs at least 2 rows (row 0 is reserved)");
  }
  conjunctive_.assign(std::size_t{dims_.sensors + 1} * dims_.conj_cols, 0);
  const std::size_t cells = std::size_t{dims_.disj_rows} * dims_.disj_cols;
  disj_sensor_.assign(cells, SensorId{});
  disj_op_.assign(cells, Operator::kUnused);
  disj_value_.assign(cells, 0);
  disj_source_.assign(cells, ValueSource::kLatest);
}

std::size_t LogicTables::cell(std::uint32_t row, std::uint32_t col) const {
  return std::size_t{row} * dims_.disj_cols + col;
}

void LogicTables::check_trigger(SensorId trigger) const {
  if (!trigger.valid() || trigger.value > dims_.sensors) {
    throw Error(Errc::kUnknownSensor,
                "trigger sensor " + std::to_string(trigger.value) +
                    " outside 1.." + std::to_string(dims_.sensors));
  }
}

void LogicTables::check_fits(const Cnf &cnf) const {
  if (cnf.conjuncts.size() > dims_.conj_cols) {
    throw Error(Errc::kCapacityExceeded,
                std::to_string(cnf.conjuncts.size()) +
                    " conjuncts exceed C_cols=" +
                    std::to_string(dims_.conj_cols));
  }
  for (const auto &clause : cnf.conjuncts) {
    if (clause.size() > dims_.disj_cols) {
      throw Error(Errc::kCapacityExceeded,
                  std::to_string(clause.size()) +
                      " disjuncts exceed D_cols=" +
                      std::to_string(dims_.disj_cols));
    }
    for (const auto &c : clause) {
      if (!c.sensor.valid() || c.sensor.value > dims_.sensors) {
        throw Error(Errc::kUnknownSensor,
                    "condition references sensor " +
                        std::to_string(c.sensor.value));
      }
      if (c.op == Operator::kUnused) {
        throw Error(Errc::kInvalidArgument, "condition has no operator");
      }
    }
  }
  if (cnf.conjuncts.size() > free_rows()) {
    throw Error(Errc::kCapacityExceeded,
                "need " + std::to_string(cnf.conjuncts.size()) +
                    " disjunctive rows, " + std::to_string(free_rows()) +
                    " left");
  }
}

bool LogicTables::configured(SensorId trigger) const {
  check_trigger(trigger);
  const std::size_t base = std::size_t{trigger.value} * dims_.conj_cols;
  for (std::uint32_t c = 0; c < dims_.conj_cols; ++c) {
    if (conjunctive_[base + c] != 0) return true;
  }
  return false;
}

void LogicTables::encode(SensorId trigger, const Cnf &cnf) {
  check_trigger(trigger);
  if (configured(trigger)) {
    throw Error(Errc::kAlreadyConfigured,
                "sensor " + std::to_string(trigger.value) +
                    " already has logic; clear it first");
  }
  check_fits(cnf);
  const std::size_t base = std::size_t{trigger.value} * dims_.conj_cols;
  for (std::size_t k = 0; k < cnf.conjuncts.size(); ++k) {
    const std::uint32_t row = next_free_row_++;
    const Clause &clause = cnf.conjuncts[k];
    for (std::uint32_t col = 0; col < clause.size(); ++col) {
      const std::size_t i = cell(row, col);
      disj_sensor_[i] = clause[col].sensor;
      disj_op_[i] = clause[col].op;
      disj_value_[i] = clause[col].constant;
      disj_source_[i] = clause[col].source;
    }
    conjunctive_[base + k] = row;
  }
}

void LogicTables::clear(SensorId trigger) {
  check_trigger(trigger);
  const std::size_t base = std::size_t{trigger.value} * dims_.conj_cols;
  std::fill_n(conjunctive_.begin() + static_cast<std::ptrdiff_t>(base),
              dims_.conj_cols, 0u);
}

void LogicTables::replace(SensorId trigger, const Cnf &cnf) {
  check_trigger(trigger);
  check_fits(cnf);
  clear(trigger);
  encode(trigger, cnf);
}

bool LogicTables::evaluate(SensorId trigger, const ValueLookup &lookup) const {
  check_trigger(trigger);
  const std::size_t base = std::size_t{trigger.value} * dims_.conj_cols;
  for (std::uint32_t c = 0; c < dims_.conj_cols; ++c) {
    const std::uint32_t row = conjunctive_[base + c];
    if (row == 0) continue;
    bool disj = false;
    for (std::uint32_t col = 0; col < dims_.disj_cols && !disj; ++col) {
      const std::size_t i = cell(row, col);
      if (disj_op_[i] == Operator::kUnused) continue;
      disj = fastreact::evaluate(
          Comparison{disj_sensor_[i], disj_op_[i], disj_value_[i],
                     disj_source_[i]},
          lookup);
    }
    if (!disj) return false;
  }
  return true;
}

Cnf LogicTables::decode(SensorId trigger) const {
  check_trigger(trigger);
  Cnf cnf;
  const std::size_t base = std::size_t{trigger.value} * dims_.conj_cols;
  for (std::uint32_t c = 0; c < dims_.conj_cols; ++c) {
    const std::uint32_t row = conjunctive_[base + c];
    if (row == 0) continue;
    Clause clause;
    for (std::uint32_t col = 0; col < dims_.disj_cols; ++col) {
      const std::size_t i = cell(row, col);
      if (disj_op_[i] == Operator::kUnused) continue;
      clause.push_back(Comparison{disj_sensor_[i], disj_op_[i],
                                  disj_value_[i], disj_source_[i]});
    }
    cnf.conjuncts.push_back(std::move(clause));
  }
  return cnf;
}

std::uint32_t LogicTables::row_index(SensorId trigger,
                                     std::uint32_t col) const {
  check_trigger(trigger);
  return conjunctive_.at(std::size_t{trigger.value} * dims_.conj_cols + col);
}

SensorId LogicTables::sensor_at(std::uint32_t row, std::uint32_t col) const {
  return disj_sensor_.at(cell(row, col));
}
Operator LogicTables::op_at(std::uint32_t row, std::uint32_t col) const {
  return disj_op_.at(cell(row, col));
}
SensorValue LogicTables::value_at(std::uint32_t row, std::uint32_t col) const {
  return disj_value_.at(cell(row, col));
}
ValueSource LogicTables::source_at(std::uint32_t row,
                                   std::uint32_t col) const {
  return disj_source_.at(cell(row, col));
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Comparison &c) {
  std::string out = "s" + std::to_string(c.sensor.value);
  if (c.source == ValueSource::kMovingAverage) out += '~';
  out += to_string(c.op);
  out += std::to_string(c.constant);
  return out;
}

std::string to_string(const BoolExpr &e) {
  switch (e.kind()) {
    case BoolExpr::Kind::kLeaf: return to_string(e.comparison());
    case BoolExpr::Kind::kNot: return "!(" + to_string(e.lhs()) + ")";
    case BoolExpr::Kind::kAnd:
      return "(" + to_string(e.lhs()) + " && " + to_string(e.rhs()) + ")";
    case BoolExpr::Kind::kOr:
      return "(" + to_string(e.lhs()) + " || " + to_string(e.rhs()) + ")";
  }
  return {};
}

std::string to_string(const Cnf &cnf) {
  if (cnf.conjuncts.empty()) return "true";
  std::ostringstream os;
  for (std::size_t k = 0; k < cnf.conjuncts.size(); ++k) {
    if (k) os << " && ";
    os << '(';
    const Clause &clause = cnf.conjuncts[k];
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (i) os << " || ";
      os << to_string(clause[i]);
    }
    os << ')';
  }
  return os.str();
}

}  // namespace fastreact
