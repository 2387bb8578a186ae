#include <cctype>
#include <charconv>
#include <limits>

#include "fastreact/error.hpp"
#include "fastreact/logic.hpp"

namespace fastreact {

namespace {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  BoolExpr parse() {
    BoolExpr e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  BoolExpr parse_or() {
    BoolExpr lhs = parse_and();
    while (accept("||")) lhs = BoolExpr::disj(std::move(lhs), parse_and());
    return lhs;
  }

  BoolExpr parse_and() {
    BoolExpr lhs = parse_unary();
    while (accept("&&")) lhs = BoolExpr::conj(std::move(lhs), parse_unary());
    return lhs;
  }

  BoolExpr parse_unary() {
    skip_ws();
    if (accept("!")) return BoolExpr::negate(parse_unary());
    if (accept("(")) {
      BoolExpr inner = parse_or();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    return BoolExpr::leaf(parse_comparison());
  }

  Comparison parse_comparison() {
    skip_ws();
    if (pos_ >= text_.size() || (text_[pos_] != 's' && text_[pos_] != 'S')) {
      fail("expected sensor reference like 's1'");
    }
    ++pos_;
    Comparison c;
    const std::uint32_t id = parse_uint();
    if (id == 0) fail("sensor ids start at 1");
    c.sensor = SensorId(id);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '~') {
      c.source = ValueSource::kMovingAverage;
      ++pos_;
    }
    c.op = parse_operator();
    c.constant = parse_uint();
    return c;
  }

  Operator parse_operator() {
    skip_ws();
    // Two-character operators first so "<=" is not read as "<".
    if (accept_raw("<=")) return Operator::kLe;
    if (accept_raw(">=")) return Operator::kGe;
    if (accept_raw("==")) return Operator::kEq;
    if (accept_raw("!=")) return Operator::kNe;
    if (accept_raw("<")) return Operator::kLt;
    if (accept_raw(">")) return Operator::kGt;
    fail("expected comparison operator");
  }

  std::uint32_t parse_uint() {
    skip_ws();
    const char *begin = text_.data() + pos_;
    const char *end = text_.data() + text_.size();
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec == std::errc::result_out_of_range) fail("integer out of range");
    if (ec != std::errc{} || ptr == begin) fail("expected integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(std::string_view token) {
    skip_ws();
    return accept_raw(token);
  }

  bool accept_raw(std::string_view token) {
    if (text_.substr(pos_, token.size()) != token) return false;
    // A lone "!" must not swallow the start of "!=".
    if (token == "!" && text_.substr(pos_, 2) == "!=") return false;
    pos_ += token.size();
    return true;
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw Error(Errc::kParseError, what + " at column " +
                                       std::to_string(pos_ + 1) + " in '" +
                                       std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

BoolExpr parse_expr(std::string_view text) { return ExprParser(text).parse(); }

}  // namespace fastreact
