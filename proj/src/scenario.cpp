#include "fastreact/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fastreact/control.hpp"
#include "fastreact/error.hpp"
#include "fastreact/logic.hpp"

namespace fastreact {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Splits on `sep` outside parentheses.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      out.emplace_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.emplace_back(trim(s.substr(start)));
  return out;
}

template <class T>
bool parse_int(std::string_view s, T &out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

std::uint64_t to_uint(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  if (!parse_int(s, v)) {
    throw Error(Errc::kParseError, "expected unsigned integer for " +
                                       std::string(what) + ", got '" +
                                       std::string(s) + "'");
  }
  return v;
}

// Fixed-point decimal: "12.5" with scale 1000 -> 12500. Rejects precision
// beyond the scale.
std::int64_t parse_fixed(std::string_view s, std::int64_t scale,
                         std::string_view what) {
  s = trim(s);
  const auto bad = [&] {
    return Error(Errc::kParseError, "invalid " + std::string(what) + " '" +
                                        std::string(s) + "'");
  };
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const std::size_t dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  std::int64_t w = 0;
  if (!parse_int(whole, w) || w < 0) throw bad();
  if (dot != std::string_view::npos && frac.empty()) throw bad();
  std::int64_t f = 0;
  std::int64_t unit = scale;
  for (char c : frac) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw bad();
    unit /= 10;
    if (unit == 0) {
      if (c != '0') {
        throw Error(Errc::kParseError, std::string(what) + " '" +
                                           std::string(s) +
                                           "' is finer than supported");
      }
      continue;
    }
    f += (c - '0') * unit;
  }
  if (w > (INT64_MAX - f) / scale) throw bad();
  const std::int64_t v = w * scale + f;
  return negative ? -v : v;
}

std::string_view strip_suffix(std::string_view s, std::string_view suffix,
                              bool &matched) {
  matched = s.size() > suffix.size() &&
            s.substr(s.size() - suffix.size()) == suffix;
  return matched ? s.substr(0, s.size() - suffix.size()) : s;
}

}  // namespace

DurationUs parse_duration(std::string_view text) {
  const std::string_view s = trim(text);
  if (s == "0") return 0;
  static constexpr std::pair<std::string_view, std::int64_t> kUnits[] = {
      {"us", 1}, {"ms", 1000}, {"s", 1'000'000}};
  for (const auto &[suffix, scale] : kUnits) {
    bool matched = false;
    const std::string_view number = strip_suffix(s, suffix, matched);
    // "ms" also ends in "s"; a leftover letter means a different unit.
    if (!matched || std::isalpha(static_cast<unsigned char>(number.back()))) {
      continue;
    }
    const std::int64_t v = parse_fixed(number, scale, "duration");
    if (v < 0) {
      throw Error(Errc::kParseError,
                  "negative duration '" + std::string(s) + "'");
    }
    return static_cast<DurationUs>(v);
  }
  throw Error(Errc::kParseError, "duration '" + std::string(s) +
                                     "' needs a unit (us, ms, s)");
}

std::uint64_t parse_bandwidth(std::string_view text) {
  const std::string_view s = trim(text);
  static constexpr std::pair<std::string_view, std::int64_t> kUnits[] = {
      {"Gbps", 1'000'000'000}, {"Mbps", 1'000'000}, {"kbps", 1000},
      {"bps", 1}};
  for (const auto &[suffix, scale] : kUnits) {
    bool matched = false;
    const std::string_view number = strip_suffix(s, suffix, matched);
    if (!matched || std::isalpha(static_cast<unsigned char>(number.back()))) {
      continue;
    }
    const std::int64_t v = parse_fixed(number, scale, "bandwidth");
    if (v <= 0) {
      throw Error(Errc::kParseError,
                  "bandwidth '" + std::string(s) + "' must be positive");
    }
    return static_cast<std::uint64_t>(v);
  }
  throw Error(Errc::kParseError, "bandwidth '" + std::string(s) +
                                     "' needs a unit (bps, kbps, Mbps, Gbps)");
}

Waveform parse_waveform(std::string_view text) {
  const std::string_view s = trim(text);
  SensorValue constant = 0;
  if (parse_int(s, constant)) {
    return [constant](DurationUs) { return constant; };
  }
  const std::size_t open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') {
    throw Error(Errc::kParseError, "invalid waveform '" + std::string(s) + "'");
  }
  const std::string fn(trim(s.substr(0, open)));
  const auto args = split_top(s.substr(open + 1, s.size() - open - 2), ',');
  const auto arity = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      throw Error(Errc::kParseError, fn + "() takes " + std::to_string(lo) +
                                         (lo == hi ? "" : "-" +
                                                              std::to_string(hi)) +
                                         " arguments");
    }
  };
  const auto value = [](const std::string &a) {
    const std::uint64_t v = to_uint(a, "sensor value");
    if (v > UINT32_MAX) {
      throw Error(Errc::kParseError, "sensor value '" + a + "' out of range");
    }
    return static_cast<SensorValue>(v);
  };

  if (fn == "constant") {
    arity(1, 1);
    const SensorValue v = value(args[0]);
    return [v](DurationUs) { return v; };
  }
  if (fn == "alternate") {
    arity(3, 4);
    const SensorValue v0 = value(args[0]);
    const SensorValue v1 = value(args[1]);
    const DurationUs period = parse_duration(args[2]);
    const DurationUs phase = args.size() == 4 ? parse_duration(args[3]) : 0;
    if (period == 0) throw Error(Errc::kParseError, "alternate period is 0");
    return [=](DurationUs t) { return ((t + phase) / period) % 2 ? v1 : v0; };
  }
  if (fn == "ramp") {
    arity(2, 2);
    const std::int64_t start = static_cast<std::int64_t>(value(args[0]));
    const std::int64_t milli_per_s = parse_fixed(args[1], 1000, "slope");
    return [=](DurationUs t) {
      // start + floor(slope * t), with t split into whole seconds and a
      // remainder so the products stay within 64 bits.
      const auto floor_div = [](std::int64_t a, std::int64_t b) {
        return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
      };
      const auto whole_s = static_cast<std::int64_t>(t / 1'000'000);
      const auto rem_us = static_cast<std::int64_t>(t % 1'000'000);
      const std::int64_t milli =
          milli_per_s * whole_s + floor_div(milli_per_s * rem_us, 1'000'000);
      const std::int64_t v = start + floor_div(milli, 1000);
      if (v < 0) return SensorValue{0};
      if (v > static_cast<std::int64_t>(UINT32_MAX)) {
        return SensorValue{UINT32_MAX};
      }
      return static_cast<SensorValue>(v);
    };
  }
  if (fn == "spikes") {
    arity(4, 5);
    const Waveform base = parse_waveform(args[0]);
    const SensorValue peak = value(args[1]);
    const DurationUs width = parse_duration(args[2]);
    const DurationUs every = parse_duration(args[3]);
    const DurationUs first = args.size() == 5 ? parse_duration(args[4]) : every;
    if (every == 0) throw Error(Errc::kParseError, "spike interval is 0");
    return [=](DurationUs t) {
      if (t >= first && (t - first) % every < width) return peak;
      return base(t);
    };
  }
  throw Error(Errc::kParseError, "unknown waveform '" + fn + "'");
}

// ---------------------------------------------------------------------------
// Scenario

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

[[noreturn]] void fail_at(const std::string &origin, std::size_t line,
                          Errc code, const std::string &msg) {
  throw Error(code, origin + ":" + std::to_string(line) + ": " + msg);
}

// key=value options with leftover detection.
class Options {
 public:
  Options(const std::vector<std::string> &tokens, std::size_t first) {
    for (std::size_t i = first; i < tokens.size(); ++i) {
      const std::size_t eq = tokens[i].find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(Errc::kParseError,
                    "expected key=value, got '" + tokens[i] + "'");
      }
      const std::string key = tokens[i].substr(0, eq);
      if (!values_.emplace(key, tokens[i].substr(eq + 1)).second) {
        throw Error(Errc::kParseError, "duplicate option '" + key + "'");
      }
    }
  }

  std::optional<std::string> take(const std::string &key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  void finish() const {
    if (!values_.empty()) {
      throw Error(Errc::kValidationError,
                  "unknown option '" + values_.begin()->first + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

SensorId parse_sensor_ref(std::string_view s) {
  s = trim(s);
  std::uint32_t id = 0;
  if (s.size() < 2 || (s[0] != 's' && s[0] != 'S') ||
      !parse_int(s.substr(1), id) || id == 0) {
    throw Error(Errc::kParseError,
                "expected sensor reference like 's1', got '" +
                    std::string(s) + "'");
  }
  return SensorId(id);
}

std::optional<NodeKind> parse_node_kind(std::string_view s) {
  if (s == "sensor") return NodeKind::kSensor;
  if (s == "actuator") return NodeKind::kActuator;
  if (s == "controller") return NodeKind::kController;
  if (s == "fastreact") return NodeKind::kFastReactSwitch;
  if (s == "plain") return NodeKind::kPlainSwitch;
  return std::nullopt;
}

// Everything before the first ':' as tokens, the rest as one string.
std::pair<std::vector<std::string>, std::optional<std::string>> head_body(
    std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) return {split_ws(text), std::nullopt};
  return {split_ws(text.substr(0, colon)),
          std::string(trim(text.substr(colon + 1)))};
}

}  // namespace

struct Scenario::Spec {
  struct TimedIntent {
    TimeUs at;
    std::size_t line;
    Intent intent;
  };
  struct Flap {
    std::size_t link;
    TimeUs down;
    TimeUs up;
  };

  std::string name;
  TimeUs duration = 0;
  SimConfig sim;
  Topology topo;
  std::map<NodeId, SwitchConfig> switch_cfgs;
  std::map<NodeId, StoreConfig> controller_cfgs;
  std::vector<TimedIntent> intents;
  std::vector<std::pair<NodeId, ControllerRule>> rules;
  std::vector<std::pair<NodeId, SensorBehavior>> sensors;
  std::vector<std::pair<NodeId, ActuatorBehavior>> actuators;
  std::vector<GetSchedule> gets;
  std::vector<Flap> flaps;
  SummaryOptions summary;

  // Builds a simulator with every intent scheduled at its time. With
  // `install_all_now`, intents are installed immediately instead, which
  // validates them without running.
  std::unique_ptr<Simulator> make(const std::string &origin,
                                  bool install_all_now) const;
};

namespace {

class Parser {
 public:
  Parser(std::string origin, std::map<std::string, std::string> &params)
      : origin_(std::move(origin)), params_(params) {}

  void parse(const std::string &text, Scenario::Spec &spec,
             bool declare_params);

 private:
  using Section = std::vector<Line>;

  template <class F>
  void each(const Section &lines, F &&f) {
    for (const Line &l : lines) {
      try {
        f(l);
      } catch (const Error &e) {
        fail_at(origin_, l.number, e.code(), e.detail());
      }
    }
  }

  std::string substitute(const Line &l) const;
  NodeId node(const std::string &name) const;
  NodeId node_of(const std::string &name, NodeKind kind) const;
  NodeId fastreact(const std::string &name) const;
  PortId port_toward(NodeId sw, const std::string &neighbor) const;
  std::vector<RouteAction> route_actions(NodeId sw, const std::string &body);
  std::vector<FailoverAction> failover_actions(NodeId sw,
                                               const std::string &body);

  void run_line(const Line &l, Scenario::Spec &spec, LinkConfig &defaults);
  void topology_line(const Line &l, Scenario::Spec &spec);
  void link_line(const Line &l, Scenario::Spec &spec,
                 const LinkConfig &defaults);
  void intent_line(const Line &l, Scenario::Spec &spec);
  void controller_line(const Line &l, Scenario::Spec &spec);
  void generator_line(const Line &l, Scenario::Spec &spec);
  void get_line(const Line &l, Scenario::Spec &spec);
  void flap_line(const Line &l, Scenario::Spec &spec);

  std::string origin_;
  std::map<std::string, std::string> &params_;
  const Topology *topo_ = nullptr;
};

std::string Parser::substitute(const Line &l) const {
  std::string out;
  const std::string &s = l.text;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 2, "${") == 0) {
      const std::size_t close = s.find('}', i);
      if (close == std::string::npos) {
        fail_at(origin_, l.number, Errc::kParseError, "unterminated '${'");
      }
      const std::string key = s.substr(i + 2, close - i - 2);
      auto it = params_.find(key);
      if (it == params_.end()) {
        fail_at(origin_, l.number, Errc::kValidationError,
                "undeclared parameter '" + key + "'");
      }
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

NodeId Parser::node(const std::string &name) const {
  const NodeId id = topo_->find(name);
  if (!id.valid()) throw Error(Errc::kUnknownNode, "unknown node '" + name + "'");
  return id;
}

NodeId Parser::node_of(const std::string &name, NodeKind kind) const {
  const NodeId id = node(name);
  if (topo_->kind(id) != kind) {
    throw Error(Errc::kValidationError, "'" + name + "' is not a " +
                                            std::string(to_string(kind)) +
                                            " node");
  }
  return id;
}

NodeId Parser::fastreact(const std::string &name) const {
  const NodeId id = node(name);
  if (topo_->kind(id) != NodeKind::kFastReactSwitch) {
    throw Error(Errc::kUnknownSwitch,
                "'" + name + "' is not a FastReact switch");
  }
  return id;
}

PortId Parser::port_toward(NodeId sw, const std::string &neighbor) const {
  const auto port = topo_->port_toward(sw, node(neighbor));
  if (!port) {
    throw Error(Errc::kValidationError, "'" + topo_->name(sw) +
                                            "' has no link to '" + neighbor +
                                            "'");
  }
  return *port;
}

namespace {

// name(arg, ...) -> (name, args)
std::pair<std::string, std::vector<std::string>> call(std::string_view s) {
  s = trim(s);
  const std::size_t open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') {
    throw Error(Errc::kParseError, "expected action like 'forward(B1)', got '" +
                                       std::string(s) + "'");
  }
  return {std::string(trim(s.substr(0, open))),
          split_top(s.substr(open + 1, s.size() - open - 2), ',')};
}

}  // namespace

std::vector<RouteAction> Parser::route_actions(NodeId sw,
                                               const std::string &body) {
  std::vector<RouteAction> out;
  for (const std::string &item : split_top(body, ',')) {
    const auto [fn, args] = call(item);
    if (fn == "forward" && args.size() == 1) {
      out.push_back(Forward{port_toward(sw, args[0])});
    } else if (fn == "forward_mod" && (args.size() == 1 || args.size() == 2)) {
      out.push_back(ForwardMod{port_toward(sw, args[0]),
                               node_of(args.back(), NodeKind::kActuator)});
    } else {
      throw Error(Errc::kParseError, "invalid route action '" + item + "'");
    }
  }
  return out;
}

std::vector<FailoverAction> Parser::failover_actions(
    NodeId sw, const std::string &body) {
  std::vector<FailoverAction> out;
  for (const std::string &item : split_top(body, ',')) {
    const auto [fn, args] = call(item);
    if (fn == "send_up" && args.size() == 1) {
      out.push_back(SendUp{port_toward(sw, args[0])});
    } else if (fn == "forward_mod" && (args.size() == 1 || args.size() == 2)) {
      out.push_back(ForwardMod{port_toward(sw, args[0]),
                               node_of(args.back(), NodeKind::kActuator)});
    } else {
      throw Error(Errc::kParseError, "invalid failover action '" + item + "'");
    }
  }
  return out;
}

void Parser::run_line(const Line &l, Scenario::Spec &spec,
                      LinkConfig &defaults) {
  const std::size_t eq = l.text.find('=');
  if (eq == std::string::npos) {
    throw Error(Errc::kParseError, "expected 'key = value'");
  }
  const std::string key(trim(std::string_view(l.text).substr(0, eq)));
  const std::string value(trim(std::string_view(l.text).substr(eq + 1)));
  if (key == "name") {
    spec.name = value;
  } else if (key == "duration") {
    spec.duration = parse_duration(value);
  } else if (key == "proc_delay") {
    spec.sim.switch_proc_delay = parse_duration(value);
  } else if (key == "controller_delay") {
    spec.sim.controller_delay = parse_duration(value);
  } else if (key == "packet_bytes") {
    spec.sim.packet_bytes =
        static_cast<std::uint32_t>(to_uint(value, "packet_bytes"));
  } else if (key == "latency") {
    defaults.latency = parse_duration(value);
  } else if (key == "bandwidth") {
    defaults.bandwidth_bps = parse_bandwidth(value);
  } else if (key == "queue") {
    defaults.queue_capacity =
        static_cast<std::uint32_t>(to_uint(value, "queue"));
  } else if (key == "recovery") {
    const std::size_t arrow = value.find("->");
    if (arrow == std::string::npos) {
      throw Error(Errc::kParseError, "expected 'recovery = Primary -> Backup'");
    }
    spec.summary.recovery = std::make_pair(
        std::string(trim(std::string_view(value).substr(0, arrow))),
        std::string(trim(std::string_view(value).substr(arrow + 2))));
  } else {
    throw Error(Errc::kValidationError, "unknown [run] key '" + key + "'");
  }
}

void Parser::topology_line(const Line &l, Scenario::Spec &spec) {
  const auto tokens = split_ws(l.text);
  if (tokens.size() < 2) throw Error(Errc::kParseError, "expected '<kind> <name>'");
  const auto kind = parse_node_kind(tokens[0]);
  if (!kind) {
    throw Error(Errc::kParseError, "unknown node kind '" + tokens[0] + "'");
  }
  const NodeId id = spec.topo.add_node(tokens[1], *kind);
  spec.summary.roles[tokens[1]] = *kind;
  Options opts(tokens, 2);
  const auto u32 = [&](const char *key, std::uint32_t def) {
    const auto v = opts.take(key);
    return v ? static_cast<std::uint32_t>(to_uint(*v, key)) : def;
  };
  if (*kind == NodeKind::kFastReactSwitch) {
    SwitchConfig cfg;
    cfg.store.sensors = u32("sensors", cfg.store.sensors);
    cfg.store.history = u32("history", cfg.store.history);
    cfg.store.value_bits = u32("value_bits", cfg.store.value_bits);
    cfg.store.ts_bits = u32("ts_bits", cfg.store.ts_bits);
    cfg.store.ewma_shift = u32("ewma_shift", cfg.store.ewma_shift);
    cfg.logic.conj_cols = u32("conj_cols", cfg.logic.conj_cols);
    cfg.logic.disj_rows = u32("disj_rows", cfg.logic.disj_rows);
    cfg.logic.disj_cols = u32("disj_cols", cfg.logic.disj_cols);
    if (const auto c = opts.take("cache")) {
      cfg.cache_tolerance = parse_duration(*c);
    }
    spec.switch_cfgs[id] = cfg;
  } else if (*kind == NodeKind::kController) {
    StoreConfig store;
    store.sensors = u32("sensors", store.sensors);
    store.history = u32("history", store.history);
    spec.controller_cfgs[id] = store;
  }
  opts.finish();
}

void Parser::link_line(const Line &l, Scenario::Spec &spec,
                       const LinkConfig &defaults) {
  const auto tokens = split_ws(l.text);
  if (tokens.size() < 3 || tokens[1] != "--") {
    throw Error(Errc::kParseError, "expected '<node> -- <node>'");
  }
  LinkConfig cfg = defaults;
  Options opts(tokens, 3);
  if (const auto v = opts.take("latency")) cfg.latency = parse_duration(*v);
  if (const auto v = opts.take("bandwidth")) {
    cfg.bandwidth_bps = parse_bandwidth(*v);
  }
  if (const auto v = opts.take("queue")) {
    cfg.queue_capacity = static_cast<std::uint32_t>(to_uint(*v, "queue"));
  }
  opts.finish();
  spec.topo.add_link(node(tokens[0]), node(tokens[2]), cfg);
}

void Parser::intent_line(const Line &l, Scenario::Spec &spec) {
  auto [head, body] = head_body(l.text);
  if (head.size() < 2) {
    throw Error(Errc::kParseError, "expected '<intent> <switch> ...'");
  }
  const std::string verb = head[0];
  const NodeId sw = fastreact(head[1]);
  // Trailing key=value tokens are options; the rest are positional.
  std::size_t positional = 2;
  while (positional < head.size() &&
         head[positional].find('=') == std::string::npos) {
    ++positional;
  }
  Options opts(head, positional);
  TimeUs at = 0;
  if (const auto v = opts.take("at")) at = parse_duration(*v);
  const auto args = [&](std::size_t n) {
    if (positional - 2 != n) {
      throw Error(Errc::kParseError, "'" + verb + "' takes " +
                                         std::to_string(n) +
                                         " positional arguments");
    }
  };
  const auto need_body = [&] {
    if (!body || body->empty()) {
      throw Error(Errc::kParseError, "'" + verb + "' needs ': <...>'");
    }
    return *body;
  };
  const auto no_body = [&] {
    if (body) throw Error(Errc::kParseError, "'" + verb + "' takes no ':'");
  };

  std::optional<Intent> intent;
  if (verb == "logic") {
    args(1);
    intent = SetLogic{sw, parse_sensor_ref(head[2]), parse_expr(need_body())};
  } else if (verb == "clear") {
    args(1);
    no_body();
    intent = ClearLogic{sw, parse_sensor_ref(head[2])};
  } else if (verb == "route") {
    args(1);
    SetRoute r{sw, parse_sensor_ref(head[2]), std::nullopt, RouteTag::kNormal,
               {}};
    if (const auto v = opts.take("ingress"); v && *v != "*") {
      r.ingress = port_toward(sw, *v);
    }
    if (const auto v = opts.take("tag")) {
      if (!parse_route_tag(*v, r.tag)) {
        throw Error(Errc::kParseError, "unknown tag '" + *v + "'");
      }
    }
    r.actions = route_actions(sw, need_body());
    intent = std::move(r);
  } else if (verb == "failover") {
    args(1);
    intent = SetFailover{sw, parse_sensor_ref(head[2]),
                         failover_actions(sw, need_body())};
  } else if (verb == "filter") {
    args(2);
    no_body();
    intent = SetFilter{sw, parse_sensor_ref(head[2]),
                       static_cast<std::uint32_t>(to_uint(head[3], "rate"))};
  } else if (verb == "timeout") {
    args(2);
    no_body();
    SetTimeout t{sw, port_toward(sw, head[2]), std::nullopt};
    if (head[3] != "off") t.timeout = parse_duration(head[3]);
    intent = t;
  } else if (verb == "cache") {
    args(1);
    no_body();
    intent = SetCacheTolerance{sw, parse_duration(head[2])};
  } else {
    throw Error(Errc::kParseError, "unknown intent '" + verb + "'");
  }
  opts.finish();
  spec.intents.push_back({at, l.number, std::move(*intent)});
}

void Parser::controller_line(const Line &l, Scenario::Spec &spec) {
  auto [head, body] = head_body(l.text);
  if (head.size() != 5 || head[0] != "rule" || head[3] != "->" || !body) {
    throw Error(Errc::kParseError,
                "expected 'rule <controller> <sensor> -> <actuator> : <expr>'");
  }
  const NodeId ctrl = node_of(head[1], NodeKind::kController);
  spec.rules.emplace_back(
      ctrl, ControllerRule{parse_sensor_ref(head[2]), parse_expr(*body),
                           node_of(head[4], NodeKind::kActuator)});
}

void Parser::generator_line(const Line &l, Scenario::Spec &spec) {
  auto [head, body] = head_body(l.text);
  if (head.size() < 2) throw Error(Errc::kParseError, "expected '<kind> <node>'");
  Options opts(head, 2);
  const auto duration = [&](const char *key, DurationUs def) {
    const auto v = opts.take(key);
    return v ? parse_duration(*v) : def;
  };
  if (head[0] == "sensor") {
    const NodeId n = node_of(head[1], NodeKind::kSensor);
    for (const auto &[existing, b] : spec.sensors) {
      if (existing == n) {
        throw Error(Errc::kValidationError,
                    "sensor '" + head[1] + "' already has a generator");
      }
    }
    SensorBehavior b;
    const auto id = opts.take("id");
    if (!id) throw Error(Errc::kValidationError, "sensor generator needs id=");
    std::uint32_t raw = 0;
    b.id = parse_int(*id, raw) && raw != 0 ? SensorId(raw)
                                           : parse_sensor_ref(*id);
    b.interval = duration("interval", 0);
    b.start = duration("start", 0);
    if (const auto v = opts.take("stop")) b.stop = parse_duration(*v);
    if (const auto v = opts.take("to")) b.report_to = node(*v);
    if (!body) throw Error(Errc::kParseError, "sensor needs ': <waveform>'");
    b.waveform = parse_waveform(*body);
    spec.sensors.emplace_back(n, std::move(b));
  } else if (head[0] == "actuator") {
    if (body) throw Error(Errc::kParseError, "actuator takes no ':'");
    const NodeId n = node_of(head[1], NodeKind::kActuator);
    ActuatorBehavior b;
    b.liveness_interval = duration("liveness", 0);
    b.start = duration("start", 0);
    if (const auto v = opts.take("stop")) b.stop = parse_duration(*v);
    spec.actuators.emplace_back(n, b);
  } else {
    throw Error(Errc::kParseError, "unknown generator '" + head[0] + "'");
  }
  opts.finish();
}

void Parser::get_line(const Line &l, Scenario::Spec &spec) {
  const auto tokens = split_ws(l.text);
  if (tokens.size() < 3 || tokens[0] != "get") {
    throw Error(Errc::kParseError, "expected 'get <controller> <sensor> ...'");
  }
  GetSchedule g;
  g.controller = node_of(tokens[1], NodeKind::kController);
  g.sensor = parse_sensor_ref(tokens[2]);
  Options opts(tokens, 3);
  if (const auto v = opts.take("opcode")) {
    if (!parse_opcode(*v, g.opcode)) {
      throw Error(Errc::kParseError, "unknown opcode '" + *v + "'");
    }
  }
  if (const auto v = opts.take("start")) g.start = parse_duration(*v);
  if (const auto v = opts.take("interval")) g.interval = parse_duration(*v);
  if (const auto v = opts.take("count")) {
    g.count = static_cast<std::uint32_t>(to_uint(*v, "count"));
  }
  opts.finish();
  spec.gets.push_back(g);
}

void Parser::flap_line(const Line &l, Scenario::Spec &spec) {
  const auto tokens = split_ws(l.text);
  if (tokens.size() < 3 || tokens[1] != "--") {
    throw Error(Errc::kParseError, "expected '<node> -- <node> down=.. up=..'");
  }
  const auto link = spec.topo.link_between(node(tokens[0]), node(tokens[2]));
  if (!link) {
    throw Error(Errc::kValidationError,
                "no link " + tokens[0] + " -- " + tokens[2]);
  }
  Options opts(tokens, 3);
  const auto down = opts.take("down");
  const auto up = opts.take("up");
  if (!down || !up) {
    throw Error(Errc::kValidationError, "flap needs down= and up=");
  }
  opts.finish();
  Scenario::Spec::Flap f{*link, parse_duration(*down), parse_duration(*up)};
  if (f.down >= f.up) {
    throw Error(Errc::kValidationError, "flap must go down before up");
  }
  spec.flaps.push_back(f);
}

void Parser::parse(const std::string &text, Scenario::Spec &spec,
                   bool declare_params) {
  static const std::vector<std::string> kOrder = {
      "params", "run",        "topology", "links",
      "intents", "controller", "generators", "gets", "flaps"};
  std::map<std::string, Section> sections;
  {
    std::istringstream is(text);
    std::string raw;
    std::size_t number = 0;
    Section *current = nullptr;
    while (std::getline(is, raw)) {
      ++number;
      std::string_view line = raw;
      if (const std::size_t hash = line.find('#');
          hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          fail_at(origin_, number, Errc::kParseError, "malformed section");
        }
        const std::string name(trim(line.substr(1, line.size() - 2)));
        if (std::find(kOrder.begin(), kOrder.end(), name) == kOrder.end()) {
          fail_at(origin_, number, Errc::kParseError,
                  "unknown section [" + name + "]");
        }
        if (sections.count(name)) {
          fail_at(origin_, number, Errc::kParseError,
                  "duplicate section [" + name + "]");
        }
        current = &sections[name];
        continue;
      }
      if (current == nullptr) {
        fail_at(origin_, number, Errc::kParseError,
                "content before the first section");
      }
      current->push_back(Line{number, std::string(line)});
    }
  }

  if (declare_params) {
    each(sections["params"], [&](const Line &l) {
      const std::size_t eq = l.text.find('=');
      if (eq == std::string::npos) {
        throw Error(Errc::kParseError, "expected 'name = value'");
      }
      const std::string key(trim(std::string_view(l.text).substr(0, eq)));
      if (key.empty() || key.find_first_of(" ${}") != std::string::npos) {
        throw Error(Errc::kParseError, "invalid parameter name '" + key + "'");
      }
      if (params_.count(key)) {
        throw Error(Errc::kParseError, "duplicate parameter '" + key + "'");
      }
      params_[key] = std::string(trim(std::string_view(l.text).substr(eq + 1)));
    });
  }
  for (auto &[name, lines] : sections) {
    if (name == "params") continue;
    for (Line &l : lines) l.text = substitute(l);
  }

  LinkConfig defaults;
  topo_ = &spec.topo;
  each(sections["run"], [&](const Line &l) { run_line(l, spec, defaults); });
  each(sections["topology"], [&](const Line &l) { topology_line(l, spec); });
  each(sections["links"],
       [&](const Line &l) { link_line(l, spec, defaults); });
  try {
    spec.topo.validate();
  } catch (const Error &e) {
    throw Error(e.code(), origin_ + ": " + e.detail());
  }
  each(sections["intents"], [&](const Line &l) { intent_line(l, spec); });
  each(sections["controller"],
       [&](const Line &l) { controller_line(l, spec); });
  each(sections["generators"],
       [&](const Line &l) { generator_line(l, spec); });
  each(sections["gets"], [&](const Line &l) { get_line(l, spec); });
  each(sections["flaps"], [&](const Line &l) { flap_line(l, spec); });

  if (spec.duration == 0) {
    throw Error(Errc::kValidationError,
                origin_ + ": [run] duration must be set and > 0");
  }
  if (spec.summary.recovery) {
    for (const std::string *n :
         {&spec.summary.recovery->first, &spec.summary.recovery->second}) {
      const NodeId id = spec.topo.find(*n);
      if (!id.valid() || spec.topo.kind(id) != NodeKind::kActuator) {
        throw Error(Errc::kValidationError,
                    origin_ + ": recovery names '" + *n +
                        "', which is not an actuator");
      }
    }
  }
}

}  // namespace

std::unique_ptr<Simulator> Scenario::Spec::make(const std::string &origin,
                                                bool install_all_now) const {
  auto sim = std::make_unique<Simulator>(topo, this->sim);
  for (const auto &[id, cfg] : switch_cfgs) sim->configure_switch(id, cfg);
  for (const auto &[id, cfg] : controller_cfgs) {
    sim->configure_controller(id, cfg);
  }
  for (const auto &[ctrl, rule] : rules) sim->controller(ctrl).add_rule(rule);
  for (const auto &[n, b] : sensors) sim->add_sensor(n, b);
  for (const auto &[n, b] : actuators) sim->add_actuator(n, b);
  for (const GetSchedule &g : gets) sim->add_get_schedule(g);
  for (const Flap &f : flaps) sim->schedule_link_flap(f.link, f.down, f.up);
  for (const TimedIntent &t : intents) {
    try {
      sim->schedule_intent(install_all_now ? 0 : t.at, t.intent);
    } catch (const Error &e) {
      fail_at(origin, t.line, e.code(), e.detail());
    }
  }
  return sim;
}

Scenario::Scenario(std::string text, std::string origin)
    : text_(std::move(text)), origin_(std::move(origin)) {
  rebuild();
}

Scenario::Scenario(Scenario &&) noexcept = default;
Scenario &Scenario::operator=(Scenario &&) noexcept = default;
Scenario::~Scenario() = default;

Scenario Scenario::from_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s(buf.str(), path.string());
  if (s.spec_->name.empty()) s.spec_->name = path.stem().string();
  return s;
}

Scenario Scenario::from_string(std::string text, std::string origin) {
  Scenario s(std::move(text), std::move(origin));
  if (s.spec_->name.empty()) s.spec_->name = "scenario";
  return s;
}

void Scenario::rebuild() {
  auto spec = std::make_unique<Spec>();
  const bool declare = params_.empty();
  auto params = params_;
  Parser parser(origin_, params);
  parser.parse(text_, *spec, declare);
  if (proc_delay_override_) spec->sim.switch_proc_delay = *proc_delay_override_;
  spec->make(origin_, /*install_all_now=*/true);
  if (spec->name.empty() && spec_) spec->name = spec_->name;
  params_ = std::move(params);
  spec_ = std::move(spec);
}

const std::string &Scenario::name() const { return spec_->name; }
const std::string &Scenario::origin() const { return origin_; }
const std::map<std::string, std::string> &Scenario::params() const {
  return params_;
}

void Scenario::set_param(const std::string &key, const std::string &value) {
  auto it = params_.find(key);
  if (it == params_.end()) {
    throw Error(Errc::kValidationError,
                origin_ + ": no parameter '" + key + "' declared in [params]");
  }
  const std::string previous = it->second;
  it->second = value;
  try {
    rebuild();
  } catch (...) {
    params_[key] = previous;
    throw;
  }
}

void Scenario::set_proc_delay(DurationUs delay) {
  proc_delay_override_ = delay;
  spec_->sim.switch_proc_delay = delay;
}

DurationUs Scenario::proc_delay() const {
  return spec_->sim.switch_proc_delay;
}

TimeUs Scenario::duration() const { return spec_->duration; }

ScenarioRun Scenario::run() const {
  auto sim = spec_->make(origin_, /*install_all_now=*/false);
  ScenarioRun out;
  out.name = spec_->name;
  out.trace = sim->run(spec_->duration);
  out.stats = sim->stats();
  out.options = spec_->summary;
  out.summary = summarize(out.trace, out.options);
  return out;
}

std::string trace_csv(const Trace &trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

std::string summary_csv(const Summary &summary) {
  std::ostringstream os;
  write_summary_csv(os, summary);
  return os.str();
}

void write_run(const ScenarioRun &run, const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(Errc::kIo, "cannot create '" + dir.string() + "': " +
                               ec.message());
  }
  const auto write = [](const std::filesystem::path &p,
                        const std::string &content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(Errc::kIo, "cannot write '" + p.string() + "'");
  };
  write(dir / "trace.csv", trace_csv(run.trace));
  write(dir / "summary.csv", summary_csv(run.summary));
}

}  // namespace fastreact
