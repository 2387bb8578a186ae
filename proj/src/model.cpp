#include "fastreact/model.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "fastreact/error.hpp"

namespace fastreact {

namespace {

constexpr std::array<std::string_view, 5> kKindNames = {
    "sensor_report", "actuator_command", "get_request", "get_response",
    "liveness"};
constexpr std::array<std::string_view, 2> kTagNames = {"normal", "backup"};
constexpr std::array<std::string_view, 2> kOpNames = {"latest",
                                                      "moving_average"};
constexpr std::array<std::string_view, 8> kEventNames = {
    "tx",         "rx",       "drop",      "cache_hit",
    "cache_miss", "failover", "link_down", "link_up"};

template <class E, std::size_t N>
bool lookup_name(const std::array<std::string_view, N> &names,
                 std::string_view text, E &out) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) {
      out = static_cast<E>(i);
      return true;
    }
  }
  return false;
}

template <class T>
T parse_uint_field(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(Errc::kParseError, "bad " + std::string(what) + " field '" +
                                       std::string(text) + "'");
  }
  return value;
}

}  // namespace

bool packet_is_well_formed(const Packet &p) {
  switch (p.kind) {
    case PacketKind::kSensorReport:
    case PacketKind::kGetResponse:
      return p.sensor.valid();
    case PacketKind::kGetRequest:
      return p.sensor.valid() && p.requester.valid() &&
             (p.opcode == OpCode::kLatest ||
              p.opcode == OpCode::kMovingAverage);
    case PacketKind::kActuatorCommand:
    case PacketKind::kLiveness:
      return true;
  }
  return false;
}

std::string_view to_string(PacketKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}
std::string_view to_string(RouteTag tag) {
  return kTagNames[static_cast<std::size_t>(tag)];
}
std::string_view to_string(OpCode op) {
  return kOpNames[static_cast<std::size_t>(op)];
}
std::string_view to_string(TraceEvent event) {
  return kEventNames[static_cast<std::size_t>(event)];
}

bool parse_packet_kind(std::string_view text, PacketKind &out) {
  return lookup_name(kKindNames, text, out);
}
bool parse_route_tag(std::string_view text, RouteTag &out) {
  return lookup_name(kTagNames, text, out);
}
bool parse_opcode(std::string_view text, OpCode &out) {
  return lookup_name(kOpNames, text, out);
}
bool parse_trace_event(std::string_view text, TraceEvent &out) {
  return lookup_name(kEventNames, text, out);
}

std::string_view trace_csv_header() {
  return "time_us,node,event,kind,tag,sensor,value,seq,sent_at_us,opcode,"
         "requester,dst";
}

std::string format_trace_line(const TraceRecord &r) {
  const Packet &p = r.packet;
  std::string out;
  out.reserve(96);
  auto field = [&out](std::string_view s) {
    out.append(s);
    out.push_back(',');
  };
  field(std::to_string(r.time));
  field(r.node);
  field(to_string(r.event));
  field(to_string(p.kind));
  field(to_string(p.tag));
  field(std::to_string(p.sensor.value));
  field(std::to_string(p.value));
  field(std::to_string(p.seq));
  field(std::to_string(p.sent_at));
  field(to_string(p.opcode));
  field(std::to_string(p.requester.value));
  out.append(std::to_string(p.dst.value));
  return out;
}

TraceRecord parse_trace_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::array<std::string_view, 12> cols;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (n == cols.size()) {
      throw Error(Errc::kParseError, "too many trace columns");
    }
    cols[n++] = line.substr(start, comma == std::string_view::npos
                                       ? std::string_view::npos
                                       : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != cols.size()) {
    throw Error(Errc::kParseError,
                "expected 12 trace columns, got " + std::to_string(n));
  }

  TraceRecord r;
  r.time = parse_uint_field<TimeUs>(cols[0], "time");
  r.node = std::string(cols[1]);
  if (r.node.empty()) throw Error(Errc::kParseError, "empty node name");
  if (!parse_trace_event(cols[2], r.event)) {
    throw Error(Errc::kParseError, "unknown event '" + std::string(cols[2]) +
                                       "'");
  }
  Packet &p = r.packet;
  if (!parse_packet_kind(cols[3], p.kind)) {
    throw Error(Errc::kParseError, "unknown kind '" + std::string(cols[3]) +
                                       "'");
  }
  if (!parse_route_tag(cols[4], p.tag)) {
    throw Error(Errc::kParseError, "unknown tag '" + std::string(cols[4]) +
                                       "'");
  }
  p.sensor = SensorId(parse_uint_field<std::uint32_t>(cols[5], "sensor"));
  p.value = parse_uint_field<SensorValue>(cols[6], "value");
  p.seq = parse_uint_field<std::uint64_t>(cols[7], "seq");
  p.sent_at = parse_uint_field<TimeUs>(cols[8], "sent_at");
  if (!parse_opcode(cols[9], p.opcode)) {
    throw Error(Errc::kParseError, "unknown opcode '" + std::string(cols[9]) +
                                       "'");
  }
  p.requester = NodeId(parse_uint_field<std::uint32_t>(cols[10], "requester"));
  p.dst = NodeId(parse_uint_field<std::uint32_t>(cols[11], "dst"));
  return r;
}

void write_trace_csv(std::ostream &os, const Trace &trace) {
  os << trace_csv_header() << '\n';
  for (const auto &r : trace) os << format_trace_line(r) << '\n';
}

Trace read_trace_csv(std::istream &is) {
  Trace trace;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (header) {
      header = false;
      if (line.rfind("time_us,", 0) == 0) continue;
    }
    if (line.empty()) continue;
    trace.push_back(parse_trace_line(line));
  }
  return trace;
}

}  // namespace fastreact
