#pragma once

// Core value types shared by the switch pipeline, the controller and the
// simulator.

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fastreact {

inline constexpr unsigned kDefaultValueBits = 16;
inline constexpr unsigned kDefaultTimestampBits = 48;

// Small strongly typed integer identifier. Zero is the "none" sentinel for
// every id kind.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr bool valid() const { return value != 0; }
  constexpr auto operator<=>(const Id &) const = default;
};

using SensorId = Id<struct SensorIdTag>;
using NodeId = Id<struct NodeIdTag>;

// Ports are zero-based, so PortId is a plain index rather than an Id<>.
struct PortId {
  std::uint32_t value = 0;

  constexpr PortId() = default;
  constexpr explicit PortId(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const PortId &) const = default;
};

using SensorValue = std::uint32_t;
// Virtual time in integer microseconds since simulation start.
using TimeUs = std::uint64_t;
using DurationUs = std::uint64_t;

constexpr std::uint64_t low_bits_mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

constexpr SensorValue mask_value(std::uint64_t v, unsigned bits) {
  return static_cast<SensorValue>(v & low_bits_mask(bits));
}

enum class PacketKind : std::uint8_t {
  kSensorReport,
  kActuatorCommand,
  kGetRequest,
  kGetResponse,
  kLiveness,
};

enum class RouteTag : std::uint8_t { kNormal, kBackup };

enum class OpCode : std::uint8_t { kLatest = 0, kMovingAverage = 1 };

struct Packet {
  PacketKind kind = PacketKind::kLiveness;
  RouteTag tag = RouteTag::kNormal;
  SensorId sensor;
  SensorValue value = 0;
  OpCode opcode = OpCode::kLatest;
  NodeId requester;
  // Network-layer destination used by static forwarding. Rewritten by
  // forward_mod when a report becomes an actuator command.
  NodeId dst;
  std::uint64_t seq = 0;
  TimeUs sent_at = 0;

  bool operator==(const Packet &) const = default;
};

// Any received packet counts as proof of life for the ingress port.
constexpr bool packet_is_liveness_bearing(const Packet &) { return true; }

// Checks the per-kind field invariants (reports name a sensor, get requests
// name a requester).
bool packet_is_well_formed(const Packet &p);

std::string_view to_string(PacketKind kind);
std::string_view to_string(RouteTag tag);
std::string_view to_string(OpCode op);
bool parse_packet_kind(std::string_view text, PacketKind &out);
bool parse_route_tag(std::string_view text, RouteTag &out);
bool parse_opcode(std::string_view text, OpCode &out);

// ---------------------------------------------------------------------------
// Trace

enum class TraceEvent : std::uint8_t {
  kTx,
  kRx,
  kDrop,
  kCacheHit,
  kCacheMiss,
  kFailover,
  // Link state changes, logged at both endpoints; dst names the far end.
  kLinkDown,
  kLinkUp,
};

std::string_view to_string(TraceEvent event);
bool parse_trace_event(std::string_view text, TraceEvent &out);

struct TraceRecord {
  TimeUs time = 0;
  std::string node;
  TraceEvent event = TraceEvent::kTx;
  Packet packet;

  bool operator==(const TraceRecord &) const = default;
};

using Trace = std::vector<TraceRecord>;

// Column header of trace.csv.
std::string_view trace_csv_header();

// One CSV line (no trailing newline). Node names must not contain commas.
std::string format_trace_line(const TraceRecord &record);

// Throws Error(kParseError) on malformed input.
TraceRecord parse_trace_line(std::string_view line);

void write_trace_csv(std::ostream &os, const Trace &trace);
Trace read_trace_csv(std::istream &is);

}  // namespace fastreact

template <class Tag>
struct std::hash<fastreact::Id<Tag>> {
  std::size_t operator()(const fastreact::Id<Tag> &id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
