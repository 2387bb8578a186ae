#include "fastreact/simnet.hpp"

#include <algorithm>

#include "fastreact/error.hpp"

namespace fastreact {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kSensor: return "sensor";
    case NodeKind::kActuator: return "actuator";
    case NodeKind::kController: return "controller";
    case NodeKind::kFastReactSwitch: return "fastreact";
    case NodeKind::kPlainSwitch: return "plain";
  }
  return "?";
}

bool is_switch(NodeKind kind) {
  return kind == NodeKind::kFastReactSwitch || kind == NodeKind::kPlainSwitch;
}

// ---------------------------------------------------------------------------
// Topology

NodeId Topology::add_node(std::string name, NodeKind kind) {
  if (name.empty() || name.find_first_of(", \t") != std::string::npos) {
    throw Error(Errc::kValidationError,
                "node name '" + name + "' must be non-empty without spaces "
                                       "or commas");
  }
  if (find(name).valid()) {
    throw Error(Errc::kValidationError, "duplicate node '" + name + "'");
  }
  nodes_.push_back(Node{std::move(name), kind, {}});
  next_hop_.clear();
  return NodeId(static_cast<std::uint32_t>(nodes_.size()));
}

std::size_t Topology::add_link(NodeId a, NodeId b, LinkConfig cfg) {
  if (a == b) throw Error(Errc::kValidationError, "self-loop link");
  node(a);
  node(b);
  if (link_between(a, b)) {
    throw Error(Errc::kValidationError, "duplicate link " + name(a) + " -- " +
                                            name(b));
  }
  if (cfg.bandwidth_bps == 0) {
    throw Error(Errc::kValidationError, "link bandwidth must be > 0");
  }
  const std::size_t index = links_.size();
  Node &na = nodes_[a.value - 1];
  Node &nb = nodes_[b.value - 1];
  LinkInfo info{LinkEnd{a, PortId(static_cast<std::uint32_t>(na.ports.size()))},
                LinkEnd{b, PortId(static_cast<std::uint32_t>(nb.ports.size()))},
                cfg};
  na.ports.emplace_back(index, 0);
  nb.ports.emplace_back(index, 1);
  links_.push_back(info);
  next_hop_.clear();
  return index;
}

const Topology::Node &Topology::node(NodeId id) const {
  if (!id.valid() || id.value > nodes_.size()) {
    throw Error(Errc::kUnknownNode, "node id " + std::to_string(id.value));
  }
  return nodes_[id.value - 1];
}

NodeId Topology::find(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) {
      return NodeId(static_cast<std::uint32_t>(i + 1));
    }
  }
  return NodeId{};
}

const std::string &Topology::name(NodeId id) const { return node(id).name; }
NodeKind Topology::kind(NodeId id) const { return node(id).kind; }

std::uint32_t Topology::port_count(NodeId id) const {
  return static_cast<std::uint32_t>(node(id).ports.size());
}

std::optional<std::size_t> Topology::link_between(NodeId a, NodeId b) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto &l = links_[i];
    if ((l.a.node == a && l.b.node == b) || (l.a.node == b && l.b.node == a)) {
      return i;
    }
  }
  return std::nullopt;
}

std::pair<std::size_t, int> Topology::attachment(NodeId id,
                                                 PortId port) const {
  const Node &n = node(id);
  if (port.value >= n.ports.size()) {
    throw Error(Errc::kInvalidArgument, "node " + n.name + " has no port " +
                                            std::to_string(port.value));
  }
  return n.ports[port.value];
}

std::optional<PortId> Topology::port_toward(NodeId id,
                                            NodeId neighbor_id) const {
  const Node &n = node(id);
  for (std::uint32_t p = 0; p < n.ports.size(); ++p) {
    if (neighbor(id, PortId(p)) == neighbor_id) return PortId(p);
  }
  return std::nullopt;
}

NodeId Topology::neighbor(NodeId id, PortId port) const {
  const auto [link, side] = attachment(id, port);
  return side == 0 ? links_[link].b.node : links_[link].a.node;
}

void Topology::validate() const {
  if (nodes_.empty()) throw Error(Errc::kValidationError, "empty topology");
  for (const auto &n : nodes_) {
    if (!is_switch(n.kind) && n.ports.size() != 1) {
      throw Error(Errc::kValidationError,
                  std::string(to_string(n.kind)) + " '" + n.name +
                      "' must have exactly one link, has " +
                      std::to_string(n.ports.size()));
    }
  }
  // Connectivity over the raw graph.
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::uint32_t p = 0; p < nodes_[u].ports.size(); ++p) {
      const NodeId v =
          neighbor(NodeId(static_cast<std::uint32_t>(u + 1)), PortId(p));
      if (!seen[v.value - 1]) {
        seen[v.value - 1] = true;
        stack.push_back(v.value - 1);
      }
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!seen[i]) {
      throw Error(Errc::kValidationError,
                  "topology is not connected: '" + nodes_[i].name +
                      "' unreachable");
    }
  }
}

void Topology::build_routes() const {
  const std::size_t n = nodes_.size();
  next_hop_.assign(n + 1, std::vector<std::optional<PortId>>(n + 1));
  constexpr std::size_t kInf = ~std::size_t{0};
  for (std::size_t to = 1; to <= n; ++to) {
    // BFS from the destination; only switches relay traffic.
    std::vector<std::size_t> dist(n + 1, kInf);
    std::deque<std::size_t> frontier{to};
    dist[to] = 0;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      if (u != to && !is_switch(nodes_[u - 1].kind)) continue;
      for (std::uint32_t p = 0; p < nodes_[u - 1].ports.size(); ++p) {
        const NodeId v =
            neighbor(NodeId(static_cast<std::uint32_t>(u)), PortId(p));
        if (dist[v.value] == kInf) {
          dist[v.value] = dist[u] + 1;
          frontier.push_back(v.value);
        }
      }
    }
    for (std::size_t from = 1; from <= n; ++from) {
      if (from == to || dist[from] == kInf) continue;
      const auto id = NodeId(static_cast<std::uint32_t>(from));
      for (std::uint32_t p = 0; p < nodes_[from - 1].ports.size(); ++p) {
        const NodeId v = neighbor(id, PortId(p));
        if (dist[v.value] + 1 == dist[from] &&
            (v.value == to || is_switch(kind(v)))) {
          next_hop_[from][to] = PortId(p);
          break;
        }
      }
    }
  }
}

std::optional<PortId> Topology::next_hop(NodeId from, NodeId to) const {
  node(from);
  node(to);
  if (next_hop_.size() != nodes_.size() + 1) build_routes();
  return next_hop_[from.value][to.value];
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Simulator::Simulator(Topology topology, SimConfig cfg)
    : topo_(std::move(topology)), cfg_(cfg) {
  topo_.validate();
  link_state_.resize(topo_.links().size());
  for (std::size_t i = 1; i <= topo_.node_count(); ++i) {
    const auto id = NodeId(static_cast<std::uint32_t>(i));
    switch (topo_.kind(id)) {
      case NodeKind::kFastReactSwitch: {
        SwitchConfig sc;
        sc.ports = topo_.port_count(id);
        configure_switch(id, sc);
        break;
      }
      case NodeKind::kController:
        configure_controller(id, StoreConfig{});
        break;
      default:
        break;
    }
  }
}

Simulator::~Simulator() = default;

void Simulator::install_forwarding(SwitchState &sw) {
  for (std::size_t i = 1; i <= topo_.node_count(); ++i) {
    const auto dst = NodeId(static_cast<std::uint32_t>(i));
    if (dst == sw.self()) continue;
    if (const auto port = topo_.next_hop(sw.self(), dst)) {
      sw.set_forwarding(dst, *port);
    }
  }
}

void Simulator::configure_switch(NodeId id, SwitchConfig sc) {
  if (topo_.kind(id) != NodeKind::kFastReactSwitch) {
    throw Error(Errc::kUnknownSwitch,
                "'" + topo_.name(id) + "' is not a FastReact switch");
  }
  if (ran_) throw Error(Errc::kInvalidArgument, "simulation already ran");
  sc.ports = topo_.port_count(id);
  auto state = std::make_unique<SwitchState>(id, sc, 0);
  install_forwarding(*state);
  sdn_.attach(*state);
  switches_[id] = std::move(state);
}

void Simulator::configure_controller(NodeId id, StoreConfig store) {
  if (topo_.kind(id) != NodeKind::kController) {
    throw Error(Errc::kUnknownNode, "'" + topo_.name(id) +
                                        "' is not a controller");
  }
  std::vector<ControllerRule> rules;
  if (auto it = controllers_.find(id); it != controllers_.end()) {
    rules = it->second->rules();
  }
  auto ctrl = std::make_unique<IndustrialController>(id, store);
  for (auto &r : rules) ctrl->add_rule(std::move(r));
  controllers_[id] = std::move(ctrl);
}

SwitchState &Simulator::fastreact_switch(NodeId id) {
  auto it = switches_.find(id);
  if (it == switches_.end()) {
    throw Error(Errc::kUnknownSwitch,
                "node " + std::to_string(id.value) +
                    " is not a FastReact switch");
  }
  return *it->second;
}

IndustrialController &Simulator::controller(NodeId id) {
  auto it = controllers_.find(id);
  if (it == controllers_.end()) {
    throw Error(Errc::kUnknownNode,
                "node " + std::to_string(id.value) + " is not a controller");
  }
  return *it->second;
}

void Simulator::add_sensor(NodeId node, SensorBehavior behavior) {
  if (topo_.kind(node) != NodeKind::kSensor) {
    throw Error(Errc::kValidationError,
                "'" + topo_.name(node) + "' is not a sensor");
  }
  if (!behavior.id.valid()) {
    throw Error(Errc::kValidationError,
                "sensor '" + topo_.name(node) + "' needs an id");
  }
  if (!behavior.waveform) {
    throw Error(Errc::kValidationError,
                "sensor '" + topo_.name(node) + "' needs a waveform");
  }
  if (auto it = sensor_nodes_.find(behavior.id);
      it != sensor_nodes_.end() && it->second != node) {
    throw Error(Errc::kValidationError,
                "sensor id " + std::to_string(behavior.id.value) +
                    " used by two nodes");
  }
  if (!behavior.report_to.valid()) {
    for (const auto &[id, ctrl] : controllers_) {
      behavior.report_to = id;
      break;
    }
  }
  sensor_nodes_[behavior.id] = node;
  const bool periodic = behavior.interval > 0;
  const TimeUs start = behavior.start;
  sensors_[node] = SensorRuntime{std::move(behavior), 0};
  if (periodic) push(start, SensorTick{node});
}

void Simulator::add_actuator(NodeId node, ActuatorBehavior behavior) {
  if (topo_.kind(node) != NodeKind::kActuator) {
    throw Error(Errc::kValidationError,
                "'" + topo_.name(node) + "' is not an actuator");
  }
  const bool periodic = behavior.liveness_interval > 0;
  const TimeUs start = behavior.start;
  actuators_[node] = ActuatorRuntime{behavior, 0};
  if (periodic) push(start, ActuatorTick{node});
}

void Simulator::add_get_schedule(GetSchedule schedule) {
  if (topo_.kind(schedule.controller) != NodeKind::kController) {
    throw Error(Errc::kValidationError, "get requests originate at a "
                                        "controller");
  }
  if (schedule.count == 0) return;
  gets_.push_back(schedule);
  push(schedule.start, GetTick{gets_.size() - 1, 0});
}

void Simulator::schedule_link_flap(std::size_t link, TimeUs down_at,
                                   TimeUs up_at) {
  if (link >= link_state_.size()) {
    throw Error(Errc::kInvalidArgument, "no link " + std::to_string(link));
  }
  if (down_at >= up_at) {
    throw Error(Errc::kValidationError, "link flap must go down before up");
  }
  push(down_at, LinkChange{link, false});
  push(up_at, LinkChange{link, true});
}

void Simulator::schedule_intent(TimeUs at, Intent intent) {
  if (at == 0) {
    sdn_.install(intent);
    return;
  }
  push(at, Install{std::move(intent)});
}

void Simulator::push(TimeUs at, Action action) {
  queue_.push(Event{at, next_order_++, std::move(action)});
}

void Simulator::record(TimeUs now, NodeId node, TraceEvent event,
                       const Packet &p) {
  trace_.push_back(TraceRecord{now, topo_.name(node), event, p});
}

Trace Simulator::run(TimeUs end_time) {
  if (ran_) throw Error(Errc::kInvalidArgument, "simulation already ran");
  ran_ = true;
  while (!queue_.empty() && queue_.top().time <= end_time) {
    Event ev = queue_.top();
    queue_.pop();
    dispatch(ev.time, ev.action);
  }
  return std::move(trace_);
}

void Simulator::dispatch(TimeUs now, Action &action) {
  std::visit(
      Overloaded{
          [&](Deliver &d) { handle(now, d); },
          [&](Send &s) { transmit(now, s.node, s.port, s.packet); },
          [&](SensorTick &t) {
            SensorRuntime &rt = sensors_.at(t.node);
            const SensorBehavior &b = rt.behavior;
            if (b.stop && now >= *b.stop) return;
            Packet p;
            p.kind = PacketKind::kSensorReport;
            p.sensor = b.id;
            p.value = b.waveform(now - b.start);
            p.dst = b.report_to;
            p.seq = rt.seq++;
            p.sent_at = now;
            transmit(now, t.node, PortId(0), p);
            push(now + b.interval, SensorTick{t.node});
          },
          [&](ActuatorTick &t) {
            ActuatorRuntime &rt = actuators_.at(t.node);
            const ActuatorBehavior &b = rt.behavior;
            if (b.stop && now >= *b.stop) return;
            Packet p;
            p.kind = PacketKind::kLiveness;
            p.dst = topo_.neighbor(t.node, PortId(0));
            p.seq = rt.seq++;
            p.sent_at = now;
            transmit(now, t.node, PortId(0), p);
            push(now + b.liveness_interval, ActuatorTick{t.node});
          },
          [&](GetTick &t) {
            const GetSchedule &g = gets_.at(t.schedule);
            Packet p;
            p.kind = PacketKind::kGetRequest;
            p.sensor = g.sensor;
            p.opcode = g.opcode;
            p.requester = g.controller;
            if (auto it = sensor_nodes_.find(g.sensor);
                it != sensor_nodes_.end()) {
              p.dst = it->second;
            }
            p.seq = get_seq_[g.controller]++;
            p.sent_at = now;
            transmit(now, g.controller, PortId(0), p);
            if (t.index + 1 < g.count) {
              push(now + g.interval, GetTick{t.schedule, t.index + 1});
            }
          },
          [&](LinkChange &c) {
            LinkRuntime &l = link_state_.at(c.link);
            if (l.up == c.up) return;
            l.up = c.up;
            const LinkInfo &info = topo_.links()[c.link];
            const TraceEvent ev = c.up ? TraceEvent::kLinkUp
                                       : TraceEvent::kLinkDown;
            Packet note;
            note.dst = info.b.node;
            record(now, info.a.node, ev, note);
            note.dst = info.a.node;
            record(now, info.b.node, ev, note);
            if (!c.up) {
              // Everything queued or in flight on the link is lost.
              ++l.epoch;
              for (int side = 0; side < 2; ++side) {
                l.in_queue[side].clear();
                l.busy_until[side] = now;
              }
            }
          },
          [&](Install &i) { sdn_.install(i.intent); },
      },
      action);
}

void Simulator::transmit(TimeUs now, NodeId node, PortId port,
                         const Packet &p) {
  record(now, node, TraceEvent::kTx, p);
  ++stats_.transmitted;
  const auto [link, side] = topo_.attachment(node, port);
  LinkRuntime &l = link_state_[link];
  if (!l.up) {
    ++stats_.lost_link_down;
    record(now, node, TraceEvent::kDrop, p);
    return;
  }
  const LinkConfig &cfg = topo_.links()[link].cfg;
  auto &queue = l.in_queue[side];
  while (!queue.empty() && queue.front() <= now) queue.pop_front();
  if (queue.size() >= cfg.queue_capacity) {
    ++stats_.lost_queue_full;
    record(now, node, TraceEvent::kDrop, p);
    return;
  }
  // Serialization delay truncates to whole microseconds.
  const DurationUs serialization =
      std::uint64_t{cfg_.packet_bytes} * 8 * 1'000'000 / cfg.bandwidth_bps;
  const TimeUs start = std::max(now, l.busy_until[side]);
  const TimeUs done = start + serialization;
  l.busy_until[side] = done;
  queue.push_back(done);
  push(done + cfg.latency, Deliver{link, 1 - side, l.epoch, p});
}

void Simulator::send_after(TimeUs now, DurationUs delay, NodeId node,
                           PortId port, const Packet &p) {
  if (delay == 0) {
    transmit(now, node, port, p);
  } else {
    push(now + delay, Send{node, port, p});
  }
}

void Simulator::handle(TimeUs now, Deliver &d) {
  const LinkInfo &info = topo_.links()[d.link];
  const LinkEnd &to = d.to_side == 0 ? info.a : info.b;
  const LinkEnd &from = d.to_side == 0 ? info.b : info.a;
  const LinkRuntime &l = link_state_[d.link];
  if (!l.up || l.epoch != d.epoch) {
    ++stats_.lost_link_down;
    record(now, from.node, TraceEvent::kDrop, d.packet);
    return;
  }
  ++stats_.delivered;
  record(now, to.node, TraceEvent::kRx, d.packet);
  on_receive(now, to.node, to.port, d.packet);
}

void Simulator::on_receive(TimeUs now, NodeId node, PortId port,
                           const Packet &p) {
  switch (topo_.kind(node)) {
    case NodeKind::kSensor: {
      const SensorRuntime &rt = sensors_.count(node) ? sensors_.at(node)
                                                     : SensorRuntime{};
      if (p.kind != PacketKind::kGetRequest || !rt.behavior.waveform ||
          p.sensor != rt.behavior.id) {
        return;
      }
      Packet resp = p;
      resp.kind = PacketKind::kGetResponse;
      resp.value = rt.behavior.waveform(
          now >= rt.behavior.start ? now - rt.behavior.start : 0);
      resp.dst = p.requester;
      transmit(now, node, PortId(0), resp);
      return;
    }
    case NodeKind::kActuator:
      return;
    case NodeKind::kController: {
      if (p.kind != PacketKind::kSensorReport) return;
      for (const Packet &cmd : controller(node).controller_react(p, now)) {
        send_after(now, cfg_.controller_delay, node, PortId(0), cmd);
      }
      return;
    }
    case NodeKind::kPlainSwitch: {
      if (p.dst == node) return;
      const auto out = p.dst.valid() ? topo_.next_hop(node, p.dst)
                                     : std::nullopt;
      if (!out) {
        ++stats_.switch_drops;
        record(now, node, TraceEvent::kDrop, p);
        return;
      }
      send_after(now, cfg_.switch_proc_delay, node, *out, p);
      return;
    }
    case NodeKind::kFastReactSwitch: {
      StepResult step = fastreact_switch(node).process(p, port, now);
      for (const SwitchNote &note : step.notes) {
        if (note.event == TraceEvent::kDrop) ++stats_.switch_drops;
        record(now, node, note.event, note.packet);
      }
      for (const Egress &e : step.egress) {
        send_after(now, cfg_.switch_proc_delay, node, e.port, e.packet);
      }
      return;
    }
  }
}

}  // namespace fastreact
