#include "fastreact/dataplane.hpp"

#include <algorithm>

#include "fastreact/error.hpp"

namespace fastreact {

std::uint64_t update_avg(std::uint64_t acc, SensorValue v, bool first,
                         unsigned shift) {
  if (first) return std::uint64_t{v} << shift;
  return acc - (acc >> shift) + v;
}

// ---------------------------------------------------------------------------
// SensorStore

SensorStore::SensorStore(StoreConfig cfg) : cfg_(cfg) {
  if (cfg_.sensors == 0 || cfg_.history == 0) {
    throw Error(Errc::kInvalidArgument,
                "store needs at least one sensor and one history slot");
  }
  if (cfg_.value_bits == 0 || cfg_.value_bits > 32 || cfg_.ts_bits == 0 ||
      cfg_.ts_bits > 64 || cfg_.ewma_shift >= 32) {
    throw Error(Errc::kInvalidArgument, "bad store field widths");
  }
  slots_.resize(std::size_t{cfg_.sensors} + 1);
  for (std::size_t i = 1; i < slots_.size(); ++i) {
    slots_[i].ring.resize(cfg_.history);
  }
}

const SensorStore::Slot &SensorStore::slot(SensorId s) const {
  if (!covers(s)) {
    throw Error(Errc::kUnknownSensor,
                "sensor " + std::to_string(s.value) + " not in store");
  }
  return slots_[s.value];
}

SensorStore::Slot &SensorStore::slot(SensorId s) {
  if (!covers(s)) {
    throw Error(Errc::kUnknownSensor,
                "sensor " + std::to_string(s.value) + " not in store");
  }
  return slots_[s.value];
}

void SensorStore::record(SensorId s, SensorValue v, TimeUs now) {
  Slot &sl = slot(s);
  const SensorValue masked = mask_value(v, cfg_.value_bits);
  sl.ring[sl.rr_index] =
      Sample{masked, static_cast<TimeUs>(now & low_bits_mask(cfg_.ts_bits))};
  sl.rr_index = (sl.rr_index + 1) % cfg_.history;
  const bool first = sl.count == 0;
  sl.count = std::min(sl.count + 1, cfg_.history);
  sl.avg_acc = update_avg(sl.avg_acc, masked, first, cfg_.ewma_shift) &
               low_bits_mask(cfg_.value_bits + cfg_.ewma_shift);
}

std::optional<Sample> SensorStore::latest(SensorId s) const {
  const Slot &sl = slot(s);
  if (sl.count == 0) return std::nullopt;
  return sl.ring[(sl.rr_index + cfg_.history - 1) % cfg_.history];
}

std::optional<SensorValue> SensorStore::moving_average(SensorId s) const {
  const Slot &sl = slot(s);
  if (sl.count == 0) return std::nullopt;
  return mask_value(average_of(sl.avg_acc, cfg_.ewma_shift), cfg_.value_bits);
}

std::optional<SensorValue> SensorStore::value(SensorId s,
                                              ValueSource source) const {
  if (source == ValueSource::kMovingAverage) return moving_average(s);
  const auto sample = latest(s);
  if (!sample) return std::nullopt;
  return sample->value;
}

std::uint32_t SensorStore::count(SensorId s) const { return slot(s).count; }

std::uint32_t SensorStore::rr_index(SensorId s) const {
  return slot(s).rr_index;
}

std::vector<Sample> SensorStore::history(SensorId s) const {
  const Slot &sl = slot(s);
  std::vector<Sample> out;
  out.reserve(sl.count);
  const std::uint32_t oldest =
      (sl.rr_index + cfg_.history - sl.count) % cfg_.history;
  for (std::uint32_t i = 0; i < sl.count; ++i) {
    out.push_back(sl.ring[(oldest + i) % cfg_.history]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tables

PortId egress_port(const RouteAction &a) {
  return std::visit([](const auto &x) { return x.port; }, a);
}

PortId egress_port(const FailoverAction &a) {
  return std::visit([](const auto &x) { return x.port; }, a);
}

void RouteTable::set(SensorId sensor, std::optional<PortId> ingress,
                     RouteTag tag, std::vector<RouteAction> actions) {
  entries_[Key{sensor, ingress, tag}] = std::move(actions);
}

void RouteTable::erase(SensorId sensor, std::optional<PortId> ingress,
                       RouteTag tag) {
  entries_.erase(Key{sensor, ingress, tag});
}

const std::vector<RouteAction> *RouteTable::lookup(SensorId sensor,
                                                   PortId ingress,
                                                   RouteTag tag) const {
  if (auto it = entries_.find(Key{sensor, ingress, tag}); it != entries_.end()) {
    return &it->second;
  }
  if (auto it = entries_.find(Key{sensor, std::nullopt, tag});
      it != entries_.end()) {
    return &it->second;
  }
  return nullptr;
}

void FailoverTable::set(SensorId sensor, std::vector<FailoverAction> actions) {
  if (actions.empty()) {
    entries_.erase(sensor);
  } else {
    entries_[sensor] = std::move(actions);
  }
}

const std::vector<FailoverAction> *FailoverTable::lookup(
    SensorId sensor) const {
  auto it = entries_.find(sensor);
  return it == entries_.end() ? nullptr : &it->second;
}

LivenessState::LivenessState(std::uint32_t ports, TimeUs start)
    : last_rx_(ports, start), timeout_(ports) {}

void LivenessState::refresh(PortId port, TimeUs now) {
  TimeUs &t = last_rx_.at(port.value);
  t = std::max(t, now);
}

void LivenessState::set_timeout(PortId port,
                                std::optional<DurationUs> timeout) {
  timeout_.at(port.value) = timeout;
}

bool LivenessState::is_down(PortId port, TimeUs now) const {
  const auto &timeout = timeout_.at(port.value);
  if (!timeout) return false;
  const TimeUs last = last_rx_[port.value];
  return now > last && now - last > *timeout;
}

TimeUs LivenessState::last_rx(PortId port) const {
  return last_rx_.at(port.value);
}

std::optional<DurationUs> LivenessState::timeout(PortId port) const {
  return timeout_.at(port.value);
}

FilterState::FilterState(std::uint32_t sensors)
    : counter_(std::size_t{sensors} + 1, 0),
      rate_(std::size_t{sensors} + 1, 1) {}

void FilterState::set_rate(SensorId s, std::uint32_t rate) {
  if (rate == 0) throw Error(Errc::kInvalidRate, "filter rate must be >= 1");
  rate_.at(s.value) = rate;
  counter_.at(s.value) = 0;
}

bool FilterState::admit(SensorId s) {
  std::uint16_t &c = counter_.at(s.value);
  ++c;
  return c % rate_[s.value] == 0;
}

// ---------------------------------------------------------------------------
// SwitchState

namespace {

TableDims logic_dims_for(const SwitchConfig &cfg) {
  TableDims dims = cfg.logic;
  dims.sensors = cfg.store.sensors;
  return dims;
}

}  // namespace

SwitchState::SwitchState(NodeId self, SwitchConfig cfg, TimeUs start)
    : self_(self),
      cfg_(cfg),
      store_(cfg.store),
      logic_(logic_dims_for(cfg)),
      liveness_(cfg.ports, start),
      filter_(cfg.store.sensors) {
  if (cfg_.ports == 0) {
    throw Error(Errc::kInvalidArgument, "switch needs at least one port");
  }
  if (cfg_.cache_tolerance == 0) {
    throw Error(Errc::kInvalidArgument, "cache tolerance must be > 0");
  }
  cfg_.logic = logic_.dims();
}

void SwitchState::set_cache_tolerance(DurationUs tolerance) {
  if (tolerance == 0) {
    throw Error(Errc::kInvalidArgument, "cache tolerance must be > 0");
  }
  cfg_.cache_tolerance = tolerance;
}

void SwitchState::set_forwarding(NodeId dst, PortId port) {
  if (port.value >= cfg_.ports) {
    throw Error(Errc::kInvalidArgument, "forwarding port out of range");
  }
  forwarding_[dst] = port;
}

std::optional<PortId> SwitchState::forwarding(NodeId dst) const {
  auto it = forwarding_.find(dst);
  if (it == forwarding_.end()) return std::nullopt;
  return it->second;
}

void SwitchState::refresh_liveness(PortId ingress, TimeUs now) {
  liveness_.refresh(ingress, now);
}

void SwitchState::drop(const Packet &p, DropReason why, StepResult &out) {
  out.notes.push_back(SwitchNote{TraceEvent::kDrop, p, why});
}

void SwitchState::emit(PortId port, Packet p, TimeUs now,
                       StepResult &out) const {
  if (liveness_.is_down(port, now)) {
    drop(p, DropReason::kPortDown, out);
    return;
  }
  out.egress.push_back(Egress{port, std::move(p)});
}

void SwitchState::forward_normally(const Packet &p, TimeUs now,
                                   StepResult &out) const {
  if (p.dst == self_) return;
  const auto port = forwarding(p.dst);
  if (!port) {
    drop(p, DropReason::kNoRoute, out);
    return;
  }
  emit(*port, p, now, out);
}

StepResult SwitchState::process(const Packet &p, PortId ingress, TimeUs now) {
  switch (p.kind) {
    case PacketKind::kSensorReport:
      return process_sensor_report(p, ingress, now);
    case PacketKind::kGetRequest:
      return process_get(p, ingress, now);
    case PacketKind::kGetResponse:
      return process_get_response(p, ingress, now);
    case PacketKind::kActuatorCommand:
    case PacketKind::kLiveness:
      break;
  }
  StepResult out;
  if (packet_is_liveness_bearing(p)) refresh_liveness(ingress, now);
  forward_normally(p, now, out);
  return out;
}

void SwitchState::answer_pending(SensorId s, TimeUs now, StepResult &out,
                                 std::vector<NodeId> *answered) {
  auto it = pending_gets_.find(s);
  if (it == pending_gets_.end()) return;
  for (const PendingGet &g : it->second) {
    Packet resp;
    resp.kind = PacketKind::kGetResponse;
    resp.sensor = s;
    resp.opcode = g.opcode;
    resp.value = store_.value(s, g.opcode == OpCode::kMovingAverage
                                     ? ValueSource::kMovingAverage
                                     : ValueSource::kLatest)
                     .value_or(0);
    resp.requester = g.requester;
    resp.dst = g.requester;
    resp.seq = g.seq;
    resp.sent_at = g.sent_at;
    emit(g.ingress, resp, now, out);
    if (answered) answered->push_back(g.requester);
  }
  pending_gets_.erase(it);
}

StepResult SwitchState::process_sensor_report(const Packet &p, PortId ingress,
                                              TimeUs now) {
  StepResult out;
  refresh_liveness(ingress, now);
  const SensorId s = p.sensor;
  if (!store_.covers(s)) {
    drop(p, DropReason::kUnknownSensor, out);
    return out;
  }
  store_.record(s, p.value, now);
  answer_pending(s, now, out, nullptr);

  const ValueLookup lookup = [this](SensorId id, ValueSource src) {
    return store_.covers(id) ? store_.value(id, src) : std::nullopt;
  };
  if (!logic_.evaluate(s, lookup)) {
    drop(p, DropReason::kLogicFalse, out);
    return out;
  }
  if (!filter_.admit(s)) {
    drop(p, DropReason::kFiltered, out);
    return out;
  }
  const auto *actions = routes_.lookup(s, ingress, p.tag);
  if (actions == nullptr || actions->empty()) {
    drop(p, DropReason::kNoRoute, out);
    return out;
  }
  for (const RouteAction &action : *actions) {
    const PortId port = egress_port(action);
    if (liveness_.is_down(port, now)) {
      apply_failover(p, now, out);
      continue;
    }
    Packet q = p;
    if (const auto *mod = std::get_if<ForwardMod>(&action)) {
      q.kind = PacketKind::kActuatorCommand;
      q.dst = mod->actuator;
    }
    out.egress.push_back(Egress{port, std::move(q)});
  }
  return out;
}

void SwitchState::apply_failover(const Packet &p, TimeUs now,
                                 StepResult &out) const {
  out.notes.push_back(SwitchNote{TraceEvent::kFailover, p, std::nullopt});
  const auto *chain = failover_.lookup(p.sensor);
  if (chain == nullptr) {
    drop(p, DropReason::kAllBackupsDown, out);
    return;
  }
  for (const FailoverAction &action : *chain) {
    const auto *mod = std::get_if<ForwardMod>(&action);
    if (mod == nullptr || liveness_.is_down(mod->port, now)) continue;
    Packet q = p;
    q.kind = PacketKind::kActuatorCommand;
    q.dst = mod->actuator;
    out.egress.push_back(Egress{mod->port, std::move(q)});
    return;
  }
  for (const FailoverAction &action : *chain) {
    const auto *up = std::get_if<SendUp>(&action);
    if (up == nullptr) continue;
    // Last resort: emitted even if the uplink itself looks dead.
    Packet q = p;
    q.tag = RouteTag::kBackup;
    out.egress.push_back(Egress{up->port, std::move(q)});
    return;
  }
  drop(p, DropReason::kAllBackupsDown, out);
}

StepResult SwitchState::process_get(const Packet &p, PortId ingress,
                                    TimeUs now) {
  StepResult out;
  refresh_liveness(ingress, now);
  const SensorId s = p.sensor;
  if (!store_.covers(s)) {
    forward_normally(p, now, out);
    return out;
  }

  const auto latest = store_.latest(s);
  if (latest && now >= latest->ts && now - latest->ts <= cfg_.cache_tolerance) {
    out.notes.push_back(SwitchNote{TraceEvent::kCacheHit, p, std::nullopt});
    Packet resp = p;
    resp.kind = PacketKind::kGetResponse;
    resp.value = p.opcode == OpCode::kMovingAverage
                     ? store_.moving_average(s).value_or(0)
                     : latest->value;
    resp.dst = p.requester;
    emit(ingress, resp, now, out);
    return out;
  }

  out.notes.push_back(SwitchNote{TraceEvent::kCacheMiss, p, std::nullopt});
  const auto toward_sensor = forwarding(p.dst);
  if (!toward_sensor) {
    drop(p, DropReason::kUnknownSensor, out);
    return out;
  }
  auto &pending = pending_gets_[s];
  const bool duplicate =
      std::any_of(pending.begin(), pending.end(), [&](const PendingGet &g) {
        return g.requester == p.requester;
      });
  if (duplicate) return out;  // coalesced into the outstanding request
  pending.push_back(PendingGet{p.requester, p.opcode, ingress, p.seq,
                               p.sent_at});
  emit(*toward_sensor, p, now, out);
  return out;
}

StepResult SwitchState::process_get_response(const Packet &p, PortId ingress,
                                             TimeUs now) {
  StepResult out;
  refresh_liveness(ingress, now);
  std::vector<NodeId> answered;
  if (store_.covers(p.sensor)) {
    store_.record(p.sensor, p.value, now);
    answer_pending(p.sensor, now, out, &answered);
  }
  if (std::find(answered.begin(), answered.end(), p.requester) ==
      answered.end()) {
    forward_normally(p, now, out);
  }
  return out;
}

}  // namespace fastreact
