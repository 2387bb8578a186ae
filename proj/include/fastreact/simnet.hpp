#pragma once

// Deterministic discrete-event network simulator. Integer-microsecond clock,
// point-to-point links with latency, bandwidth and a FIFO queue per direction,
// scheduled link state changes, and a per-event trace.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fastreact/control.hpp"
#include "fastreact/dataplane.hpp"
#include "fastreact/model.hpp"

namespace fastreact {

enum class NodeKind : std::uint8_t {
  kSensor,
  kActuator,
  kController,
  kFastReactSwitch,
  kPlainSwitch,
};

std::string_view to_string(NodeKind kind);
bool is_switch(NodeKind kind);

struct LinkConfig {
  DurationUs latency = 1000;
  std::uint64_t bandwidth_bps = 1'000'000'000;
  std::uint32_t queue_capacity = 1000;
};

struct LinkEnd {
  NodeId node;
  PortId port;
};

struct LinkInfo {
  LinkEnd a;
  LinkEnd b;
  LinkConfig cfg;
};

class Topology {
 public:
  NodeId add_node(std::string name, NodeKind kind);
  // Allocates the next free port on each endpoint. Returns the link index.
  std::size_t add_link(NodeId a, NodeId b, LinkConfig cfg = {});

  std::size_t node_count() const { return nodes_.size(); }
  // Node ids are 1..node_count().
  NodeId find(std::string_view name) const;
  const std::string &name(NodeId id) const;
  NodeKind kind(NodeId id) const;
  std::uint32_t port_count(NodeId id) const;

  const std::vector<LinkInfo> &links() const { return links_; }
  std::optional<std::size_t> link_between(NodeId a, NodeId b) const;
  // Link index and side (0 = a, 1 = b) attached to a node's port.
  std::pair<std::size_t, int> attachment(NodeId node, PortId port) const;
  std::optional<PortId> port_toward(NodeId node, NodeId neighbor) const;
  NodeId neighbor(NodeId node, PortId port) const;

  // Rejects duplicate links, disconnected graphs, and end nodes without
  // exactly one link. Throws Error(kValidationError).
  void validate() const;

  // First hop of a shortest path (hop count) from `from` to `to`, travelling
  // only through switches. Ties go to the lowest port.
  std::optional<PortId> next_hop(NodeId from, NodeId to) const;

 private:
  struct Node {
    std::string name;
    NodeKind kind;
    std::vector<std::pair<std::size_t, int>> ports;
  };

  const Node &node(NodeId id) const;
  void build_routes() const;

  std::vector<Node> nodes_;
  std::vector<LinkInfo> links_;
  // next_hop_[from][to], filled lazily.
  mutable std::vector<std::vector<std::optional<PortId>>> next_hop_;
};

// Value of a sensor as a function of time since the sensor started.
using Waveform = std::function<SensorValue(DurationUs since_start)>;

struct SensorBehavior {
  SensorId id;
  Waveform waveform;
  DurationUs interval = 0;  // 0: answer get requests only
  TimeUs start = 0;
  std::optional<TimeUs> stop;
  NodeId report_to;  // destination of reports; defaults to the controller
};

struct ActuatorBehavior {
  DurationUs liveness_interval = 0;  // 0: silent
  TimeUs start = 0;
  std::optional<TimeUs> stop;
};

struct GetSchedule {
  NodeId controller;
  SensorId sensor;
  OpCode opcode = OpCode::kLatest;
  TimeUs start = 0;
  DurationUs interval = 1'000'000;
  std::uint32_t count = 1;
};

struct SimConfig {
  DurationUs switch_proc_delay = 0;  // applied at every switch traversal
  DurationUs controller_delay = 0;
  std::uint32_t packet_bytes = 64;
};

struct SimStats {
  std::uint64_t transmitted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost_link_down = 0;
  std::uint64_t lost_queue_full = 0;
  std::uint64_t switch_drops = 0;
};

class Simulator {
 public:
  Simulator(Topology topology, SimConfig cfg);
  ~Simulator();
  Simulator(const Simulator &) = delete;
  Simulator &operator=(const Simulator &) = delete;

  const Topology &topology() const { return topo_; }
  const SimConfig &config() const { return cfg_; }

  // Replaces a FastReact switch's state with a fresh one built from `cfg`.
  // The port count always comes from the topology.
  void configure_switch(NodeId sw, SwitchConfig cfg);
  void configure_controller(NodeId ctrl, StoreConfig store);

  SwitchState &fastreact_switch(NodeId sw);
  IndustrialController &controller(NodeId ctrl);
  SdnController &sdn() { return sdn_; }

  void add_sensor(NodeId node, SensorBehavior behavior);
  void add_actuator(NodeId node, ActuatorBehavior behavior);
  void add_get_schedule(GetSchedule schedule);
  void schedule_link_flap(std::size_t link, TimeUs down_at, TimeUs up_at);
  // Intents at time 0 are installed immediately (and may throw); later ones
  // are applied between events at their scheduled time.
  void schedule_intent(TimeUs at, Intent intent);

  // Processes every event with time <= end_time. Can only run once.
  Trace run(TimeUs end_time);

  const SimStats &stats() const { return stats_; }

 private:
  struct Deliver {
    std::size_t link;
    int to_side;
    std::uint64_t epoch;
    Packet packet;
  };
  struct Send {
    NodeId node;
    PortId port;
    Packet packet;
  };
  struct SensorTick {
    NodeId node;
  };
  struct ActuatorTick {
    NodeId node;
  };
  struct GetTick {
    std::size_t schedule;
    std::uint32_t index;
  };
  struct LinkChange {
    std::size_t link;
    bool up;
  };
  struct Install {
    Intent intent;
  };
  using Action = std::variant<Deliver, Send, SensorTick, ActuatorTick, GetTick,
                              LinkChange, Install>;

  struct Event {
    TimeUs time;
    std::uint64_t order;
    Action action;
  };
  struct Later {
    bool operator()(const Event &x, const Event &y) const {
      return x.time != y.time ? x.time > y.time : x.order > y.order;
    }
  };

  struct LinkRuntime {
    bool up = true;
    std::uint64_t epoch = 0;
    TimeUs busy_until[2] = {0, 0};
    std::deque<TimeUs> in_queue[2];
  };

  struct SensorRuntime {
    SensorBehavior behavior;
    std::uint64_t seq = 0;
  };
  struct ActuatorRuntime {
    ActuatorBehavior behavior;
    std::uint64_t seq = 0;
  };

  void push(TimeUs at, Action action);
  void dispatch(TimeUs now, Action &action);
  void handle(TimeUs now, Deliver &d);
  void on_receive(TimeUs now, NodeId node, PortId port, const Packet &p);
  void transmit(TimeUs now, NodeId node, PortId port, const Packet &p);
  void send_after(TimeUs now, DurationUs delay, NodeId node, PortId port,
                  const Packet &p);
  void record(TimeUs now, NodeId node, TraceEvent event, const Packet &p);
  void install_forwarding(SwitchState &sw);

  Topology topo_;
  SimConfig cfg_;
  SdnController sdn_;
  std::map<NodeId, std::unique_ptr<SwitchState>> switches_;
  std::map<NodeId, std::unique_ptr<IndustrialController>> controllers_;
  std::map<NodeId, SensorRuntime> sensors_;
  std::map<NodeId, ActuatorRuntime> actuators_;
  std::map<SensorId, NodeId> sensor_nodes_;
  std::vector<GetSchedule> gets_;
  std::map<NodeId, std::uint64_t> get_seq_;
  std::vector<LinkRuntime> link_state_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_order_ = 0;
  bool ran_ = false;
  SimStats stats_;
  Trace trace_;
};

}  // namespace fastreact
