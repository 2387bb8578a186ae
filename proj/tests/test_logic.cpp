#include <map>
#include <random>

#include <doctest.h>

#include "fastreact/error.hpp"
#include "fastreact/logic.hpp"
#include "oracles.hpp"

using namespace fastreact;

namespace {

ValueLookup values(std::map<std::uint32_t, SensorValue> latest,
                   std::map<std::uint32_t, SensorValue> ma = {}) {
  return [latest, ma](SensorId s, ValueSource src)
             -> std::optional<SensorValue> {
    const auto &m = src == ValueSource::kLatest ? latest : ma;
    auto it = m.find(s.value);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
}

Comparison cmp(std::uint32_t s, Operator op, SensorValue k,
               ValueSource src = ValueSource::kLatest) {
  return Comparison{SensorId(s), op, k, src};
}

const CnfLimits kWide{16, 16};

}  // namespace

TEST_CASE("operators and complements") {
  CHECK(compare(4, Operator::kLt, 5));
  CHECK_FALSE(compare(5, Operator::kLt, 5));
  CHECK(compare(5, Operator::kLe, 5));
  CHECK(compare(6, Operator::kGt, 5));
  CHECK(compare(5, Operator::kGe, 5));
  CHECK(compare(5, Operator::kEq, 5));
  CHECK(compare(4, Operator::kNe, 5));
  CHECK_FALSE(compare(5, Operator::kUnused, 5));
  for (auto op : {Operator::kLt, Operator::kGt, Operator::kEq, Operator::kLe,
                  Operator::kGe, Operator::kNe}) {
    CHECK(complement(complement(op)) == op);
    for (SensorValue v = 0; v < 4; ++v) {
      CHECK(compare(v, complement(op), 2) == !compare(v, op, 2));
    }
  }
}

TEST_CASE("parser") {
  const BoolExpr e = parse_expr("(s1<50 || s2>25) && (s3==10)");
  CHECK(to_string(e) == "((s1<50 || s2>25) && s3==10)");
  CHECK(to_string(parse_expr("s1~>=50 && s2>=50")) == "(s1~>=50 && s2>=50)");
  CHECK(to_string(parse_expr("!s1<1 || s2==2 && s3!=3")) ==
        "(!(s1<1) || (s2==2 && s3!=3))");
  CHECK_THROWS_AS(parse_expr(""), Error);
  CHECK_THROWS_AS(parse_expr("s1 <"), Error);
  CHECK_THROWS_AS(parse_expr("(s1<1"), Error);
  CHECK_THROWS_AS(parse_expr("s1<1 s2<2"), Error);
  CHECK_THROWS_AS(parse_expr("x1<1"), Error);
  CHECK_THROWS_AS(parse_expr("s0<1"), Error);
  try {
    parse_expr("s1<1 && s2 =< 3");
    FAIL("expected a parse error");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::kParseError);
  }
}

TEST_CASE("already conjunctive expression is kept") {
  const Cnf cnf = to_cnf(parse_expr("(s1<50 || s2>25) && (s3==10)"), kWide);
  REQUIRE(cnf.conjuncts.size() == 2);
  CHECK(cnf.conjuncts[0] ==
        Clause{cmp(1, Operator::kLt, 50), cmp(2, Operator::kGt, 25)});
  CHECK(cnf.conjuncts[1] == Clause{cmp(3, Operator::kEq, 10)});
}

TEST_CASE("single comparison") {
  const Cnf cnf = to_cnf(parse_expr("s1<50"), kWide);
  REQUIRE(cnf.conjuncts.size() == 1);
  CHECK(cnf.conjuncts[0].size() == 1);
}

TEST_CASE("or distributes over and") {
  const BoolExpr e = parse_expr("(s1==1 && s2==1) || s3==1");
  const Cnf cnf = to_cnf(e, kWide);
  CHECK(to_string(cnf) == "(s1==1 || s3==1) && (s2==1 || s3==1)");
  for (int bits = 0; bits < 8; ++bits) {
    const auto look = values(
        {{1, bits & 1}, {2, (bits >> 1) & 1}, {3, (bits >> 2) & 1}});
    CHECK(evaluate(cnf, look) == evaluate(e, look));
  }
}

TEST_CASE("negation becomes operator complement") {
  const Cnf cnf = to_cnf(parse_expr("!(s1<50 && s2==3)"), kWide);
  CHECK(to_string(cnf) == "(s1>=50 || s2!=3)");
  const Cnf twice = to_cnf(parse_expr("!!s1>7"), kWide);
  CHECK(to_string(twice) == "(s1>7)");
}

TEST_CASE("capacity limits") {
  const BoolExpr e = parse_expr("s1<1 && s2<2 && s3<3");
  CHECK_NOTHROW(to_cnf(e, {3, 1}));
  CHECK_THROWS_AS(to_cnf(e, {2, 1}), Error);
  const BoolExpr wide = parse_expr("s1<1 || s2<2 || s3<3");
  CHECK_THROWS_AS(to_cnf(wide, {5, 2}), Error);
}

TEST_CASE("table encoding layout") {
  LogicTables t(TableDims{8, 5, 16, 5});
  t.encode(SensorId(1), to_cnf(parse_expr("(s1<50 || s2>25) && (s3==10)"),
                               {5, 5}));
  CHECK(t.row_index(SensorId(1), 0) == 1);
  CHECK(t.row_index(SensorId(1), 1) == 2);
  for (std::uint32_t c = 2; c < 5; ++c) CHECK(t.row_index(SensorId(1), c) == 0);
  CHECK(t.sensor_at(1, 0) == SensorId(1));
  CHECK(t.op_at(1, 0) == Operator::kLt);
  CHECK(t.value_at(1, 0) == 50);
  CHECK(t.sensor_at(1, 1) == SensorId(2));
  CHECK(t.op_at(1, 1) == Operator::kGt);
  CHECK(t.value_at(1, 1) == 25);
  CHECK(t.op_at(1, 2) == Operator::kUnused);
  CHECK(t.sensor_at(2, 0) == SensorId(3));
  CHECK(t.op_at(2, 0) == Operator::kEq);
  CHECK(t.value_at(2, 0) == 10);
  CHECK(t.next_free_row() == 3);

  CHECK(t.evaluate(SensorId(1), values({{1, 40}, {2, 10}, {3, 10}})));
  CHECK_FALSE(t.evaluate(SensorId(1), values({{1, 60}, {2, 10}, {3, 10}})));
  // Unknown values make their comparisons false.
  CHECK_FALSE(t.evaluate(SensorId(1), values({{1, 40}})));
}

TEST_CASE("empty logic is always true") {
  LogicTables t(TableDims{4, 5, 16, 5});
  CHECK(t.evaluate(SensorId(2), values({})));
  t.encode(SensorId(2), Cnf{});
  CHECK(t.next_free_row() == 1);
  CHECK(t.evaluate(SensorId(2), values({})));
}

TEST_CASE("binary dependency") {
  LogicTables t(TableDims{4, 5, 16, 5});
  const Cnf cnf = to_cnf(parse_expr("s1==1 && s2==1"), {5, 5});
  t.encode(SensorId(1), cnf);
  t.encode(SensorId(2), cnf);
  CHECK_FALSE(t.evaluate(SensorId(1), values({{1, 1}, {2, 0}})));
  CHECK(t.evaluate(SensorId(2), values({{1, 1}, {2, 1}})));
}

TEST_CASE("moving-average source") {
  LogicTables t(TableDims{4, 5, 16, 5});
  t.encode(SensorId(1), to_cnf(parse_expr("s1~>=50"), {5, 5}));
  CHECK(t.source_at(1, 0) == ValueSource::kMovingAverage);
  CHECK_FALSE(t.evaluate(SensorId(1), values({{1, 55}}, {{1, 49}})));
  CHECK(t.evaluate(SensorId(1), values({{1, 0}}, {{1, 50}})));
}

TEST_CASE("encode errors leave the tables untouched") {
  LogicTables t(TableDims{4, 2, 3, 2});
  t.encode(SensorId(1), to_cnf(parse_expr("s1<1 && s2<2"), {2, 2}));
  CHECK(t.free_rows() == 0);
  CHECK_THROWS_AS(t.encode(SensorId(1), Cnf{}), Error);
  try {
    t.encode(SensorId(2), to_cnf(parse_expr("s1<1"), {2, 2}));
    FAIL("expected capacity error");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kCapacityExceeded);
  }
  CHECK_FALSE(t.configured(SensorId(2)));
  CHECK_THROWS_AS(t.encode(SensorId(5), Cnf{}), Error);
  // replace keeps the old logic when the new one does not fit
  CHECK_THROWS_AS(t.replace(SensorId(1), to_cnf(parse_expr("s3<3"), {2, 2})),
                  Error);
  CHECK(to_string(t.decode(SensorId(1))) == "(s1<1) && (s2<2)");
}

TEST_CASE("clear then re-encode uses fresh rows") {
  LogicTables t(TableDims{4, 5, 16, 5});
  t.encode(SensorId(1), to_cnf(parse_expr("s1<1"), {5, 5}));
  t.clear(SensorId(1));
  CHECK_FALSE(t.configured(SensorId(1)));
  t.encode(SensorId(1), to_cnf(parse_expr("s1>1"), {5, 5}));
  CHECK(t.row_index(SensorId(1), 0) == 2);
}

TEST_CASE("decode inverts encode") {
  std::mt19937_64 rng(7);
  LogicTables t(TableDims{8, 32, 4096, 16});
  for (std::uint32_t s = 1; s <= 8; ++s) {
    const Cnf cnf = to_cnf(oracle::random_expr(rng, 2, 4, 9), {32, 16});
    t.encode(SensorId(s), cnf);
    CHECK(t.decode(SensorId(s)) == cnf);
  }
}

TEST_CASE("successive triggers use disjoint rows and match the oracle") {
  std::mt19937_64 rng(11);
  LogicTables t(TableDims{4, 32, 1024, 16});
  std::vector<BoolExpr> exprs;
  for (std::uint32_t s = 1; s <= 4; ++s) {
    exprs.push_back(oracle::random_expr(rng, 3, 4, 3));
    t.encode(SensorId(s), to_cnf(exprs.back(), {32, 16}));
  }
  oracle::Assignment a;
  const ValueLookup look = [&](SensorId s, ValueSource src)
      -> std::optional<SensorValue> {
    return src == ValueSource::kLatest ? a.latest[s.value] : a.ma[s.value];
  };
  for (int code = 0; code < 256; ++code) {
    for (int s = 1; s <= 4; ++s) {
      a.latest[s] = (code >> (2 * (s - 1))) & 3;
      a.ma[s] = 3 - a.latest[s];
    }
    for (std::uint32_t s = 1; s <= 4; ++s) {
      CHECK(t.evaluate(SensorId(s), look) == oracle::eval(exprs[s - 1], a));
      CHECK(evaluate(exprs[s - 1], look) == oracle::eval(exprs[s - 1], a));
    }
  }
}

TEST_CASE("adding a conjunct never turns false into true") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const BoolExpr base = oracle::random_expr(rng, 2, 3, 3);
    const BoolExpr more = BoolExpr::conj(base, oracle::random_expr(rng, 1, 3, 3));
    oracle::Assignment a;
    for (int code = 0; code < 64; ++code) {
      for (int s = 1; s <= 3; ++s) {
        a.latest[s] = (code >> (2 * (s - 1))) & 3;
        a.ma[s] = a.latest[s];
      }
      if (oracle::eval(more, a)) CHECK(oracle::eval(base, a));
    }
  }
}
