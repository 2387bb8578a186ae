#pragma once

// The FastReact switch: a deterministic state machine that maps (state,
// ingress packet, ingress port, now) to a new state plus egress packets.
//
// Sensor report pipeline, in order:
//   1. refresh liveness of the ingress port
//   2. record the value in the time series store
//   3. answer pending get requests for the sensor
//   4. evaluate the sensor's CNF logic, drop if false
//   5. per-sensor sampling filter, drop unless the counter hits the rate
//   6. route lookup on (sensor, ingress, tag)
//   7. per action: if the egress port timed out, use the failover chain

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "fastreact/logic.hpp"
#include "fastreact/model.hpp"

namespace fastreact {

inline constexpr unsigned kDefaultEwmaShift = 3;
inline constexpr DurationUs kDefaultCacheToleranceUs = 5'000'000;

// One EWMA step on a fixed-point accumulator that holds the average scaled by
// 2^shift:  acc' = acc - (acc >> shift) + v.  The average itself is
// acc >> shift. Keeping the fractional bits avoids the dead band a plain
// avg - (avg >> k) + (v >> k) register has, where the average stops moving
// once avg >> k == v >> k. The first sample seeds acc = v << shift.
std::uint64_t update_avg(std::uint64_t acc, SensorValue v, bool first,
                         unsigned shift = kDefaultEwmaShift);

constexpr SensorValue average_of(std::uint64_t acc,
                                 unsigned shift = kDefaultEwmaShift) {
  return static_cast<SensorValue>(acc >> shift);
}

struct Sample {
  SensorValue value = 0;
  TimeUs ts = 0;

  bool operator==(const Sample &) const = default;
};

struct StoreConfig {
  std::uint32_t sensors = 64;  // S_count
  std::uint32_t history = 100; // H_count
  unsigned value_bits = kDefaultValueBits;
  unsigned ts_bits = kDefaultTimestampBits;
  unsigned ewma_shift = kDefaultEwmaShift;
};

// Fixed-size per-sensor ring buffer of (value, timestamp) plus one moving
// average slot and a round-robin write index.
class SensorStore {
 public:
  explicit SensorStore(StoreConfig cfg);

  const StoreConfig &config() const { return cfg_; }
  bool covers(SensorId s) const {
    return s.valid() && s.value <= cfg_.sensors;
  }

  // Values are masked to value_bits and timestamps to ts_bits.
  void record(SensorId s, SensorValue v, TimeUs now);

  std::optional<Sample> latest(SensorId s) const;
  std::optional<SensorValue> moving_average(SensorId s) const;
  std::optional<SensorValue> value(SensorId s, ValueSource source) const;

  std::uint32_t count(SensorId s) const;
  // Slot the next record() overwrites.
  std::uint32_t rr_index(SensorId s) const;
  // Valid entries, oldest first.
  std::vector<Sample> history(SensorId s) const;

 private:
  struct Slot {
    std::vector<Sample> ring;
    std::uint32_t rr_index = 0;
    std::uint32_t count = 0;
    std::uint64_t avg_acc = 0;
  };

  const Slot &slot(SensorId s) const;
  Slot &slot(SensorId s);

  StoreConfig cfg_;
  std::vector<Slot> slots_;  // index 0 unused
};

// ---------------------------------------------------------------------------
// Match-action tables

struct Forward {
  PortId port;
  bool operator==(const Forward &) const = default;
};

// Rewrites the report into an actuator command addressed to `actuator`.
struct ForwardMod {
  PortId port;
  NodeId actuator;
  bool operator==(const ForwardMod &) const = default;
};

// Re-tags the packet as backup-routed and hands it to an upstream switch.
struct SendUp {
  PortId port;
  bool operator==(const SendUp &) const = default;
};

using RouteAction = std::variant<Forward, ForwardMod>;
using FailoverAction = std::variant<ForwardMod, SendUp>;

PortId egress_port(const RouteAction &a);
PortId egress_port(const FailoverAction &a);

class RouteTable {
 public:
  // `ingress` empty means wildcard.
  void set(SensorId sensor, std::optional<PortId> ingress, RouteTag tag,
           std::vector<RouteAction> actions);
  void erase(SensorId sensor, std::optional<PortId> ingress, RouteTag tag);

  // Exact ingress match wins over the wildcard entry.
  const std::vector<RouteAction> *lookup(SensorId sensor, PortId ingress,
                                         RouteTag tag) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Key {
    SensorId sensor;
    std::optional<PortId> ingress;
    RouteTag tag;
    auto operator<=>(const Key &) const = default;
  };
  std::map<Key, std::vector<RouteAction>> entries_;
};

class FailoverTable {
 public:
  void set(SensorId sensor, std::vector<FailoverAction> actions);
  const std::vector<FailoverAction> *lookup(SensorId sensor) const;

 private:
  std::map<SensorId, std::vector<FailoverAction>> entries_;
};

// Last-received timestamp and timeout per port. A port whose timeout is unset
// never goes down.
class LivenessState {
 public:
  LivenessState(std::uint32_t ports, TimeUs start);

  void refresh(PortId port, TimeUs now);
  void set_timeout(PortId port, std::optional<DurationUs> timeout);
  // Strict comparison: a port is down once now - last_rx > timeout.
  bool is_down(PortId port, TimeUs now) const;
  TimeUs last_rx(PortId port) const;
  std::optional<DurationUs> timeout(PortId port) const;
  std::uint32_t ports() const {
    return static_cast<std::uint32_t>(last_rx_.size());
  }

 private:
  std::vector<TimeUs> last_rx_;
  std::vector<std::optional<DurationUs>> timeout_;
};

// Per-sensor "forward every n-th packet" sampler with 16-bit counters.
class FilterState {
 public:
  explicit FilterState(std::uint32_t sensors);

  void set_rate(SensorId s, std::uint32_t rate);
  std::uint32_t rate(SensorId s) const { return rate_.at(s.value); }
  std::uint16_t counter(SensorId s) const { return counter_.at(s.value); }
  // Increments the counter and reports whether this packet passes.
  bool admit(SensorId s);

 private:
  std::vector<std::uint16_t> counter_;
  std::vector<std::uint32_t> rate_;
};

struct PendingGet {
  NodeId requester;
  OpCode opcode = OpCode::kLatest;
  PortId ingress;
  std::uint64_t seq = 0;
  TimeUs sent_at = 0;
};

// ---------------------------------------------------------------------------
// Switch

struct SwitchConfig {
  std::uint32_t ports = 4;
  StoreConfig store;
  TableDims logic;
  DurationUs cache_tolerance = kDefaultCacheToleranceUs;
};

enum class DropReason : std::uint8_t {
  kLogicFalse,
  kFiltered,
  kNoRoute,
  kAllBackupsDown,
  kUnknownSensor,
  kPortDown,
};

struct Egress {
  PortId port;
  Packet packet;
};

// Trace-worthy outcome inside the switch (drop, cache hit/miss, failover).
struct SwitchNote {
  TraceEvent event;
  Packet packet;
  std::optional<DropReason> reason;
};

struct StepResult {
  std::vector<Egress> egress;
  std::vector<SwitchNote> notes;
};

class SwitchState {
 public:
  SwitchState(NodeId self, SwitchConfig cfg, TimeUs start = 0);

  NodeId self() const { return self_; }
  const SwitchConfig &config() const { return cfg_; }

  // Dispatches on packet kind.
  StepResult process(const Packet &p, PortId ingress, TimeUs now);

  StepResult process_sensor_report(const Packet &p, PortId ingress,
                                   TimeUs now);
  StepResult process_get(const Packet &p, PortId ingress, TimeUs now);
  StepResult process_get_response(const Packet &p, PortId ingress,
                                  TimeUs now);
  // Picks the first live forward_mod, else the first send_up. Appends to
  // `out`.
  void apply_failover(const Packet &p, TimeUs now, StepResult &out) const;
  void refresh_liveness(PortId ingress, TimeUs now);

  // Static destination-based forwarding for traffic the sensor pipeline does
  // not consume.
  void set_forwarding(NodeId dst, PortId port);
  std::optional<PortId> forwarding(NodeId dst) const;

  SensorStore &store() { return store_; }
  const SensorStore &store() const { return store_; }
  LogicTables &logic() { return logic_; }
  const LogicTables &logic() const { return logic_; }
  RouteTable &routes() { return routes_; }
  const RouteTable &routes() const { return routes_; }
  FailoverTable &failover() { return failover_; }
  const FailoverTable &failover() const { return failover_; }
  LivenessState &liveness() { return liveness_; }
  const LivenessState &liveness() const { return liveness_; }
  FilterState &filter() { return filter_; }
  const FilterState &filter() const { return filter_; }
  void set_cache_tolerance(DurationUs tolerance);
  DurationUs cache_tolerance() const { return cfg_.cache_tolerance; }
  const std::map<SensorId, std::vector<PendingGet>> &pending_gets() const {
    return pending_gets_;
  }

 private:
  void answer_pending(SensorId s, TimeUs now, StepResult &out,
                      std::vector<NodeId> *answered);
  void emit(PortId port, Packet p, TimeUs now, StepResult &out) const;
  void forward_normally(const Packet &p, TimeUs now, StepResult &out) const;
  static void drop(const Packet &p, DropReason why, StepResult &out);

  NodeId self_;
  SwitchConfig cfg_;
  SensorStore store_;
  LogicTables logic_;
  RouteTable routes_;
  FailoverTable failover_;
  LivenessState liveness_;
  FilterState filter_;
  std::map<SensorId, std::vector<PendingGet>> pending_gets_;
  std::map<NodeId, PortId> forwarding_;
};

}  // namespace fastreact
