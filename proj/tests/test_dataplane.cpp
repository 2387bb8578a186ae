#include <doctest.h>

#include "fastreact/dataplane.hpp"
#include "fastreact/error.hpp"

using namespace fastreact;

namespace {

const NodeId kSelf(1);
const NodeId kActuator(7);
const NodeId kBackupActuator(8);
const NodeId kSensorNode(9);
const NodeId kController(10);

Packet report(std::uint32_t sensor, SensorValue v, std::uint64_t seq = 0) {
  Packet p;
  p.kind = PacketKind::kSensorReport;
  p.sensor = SensorId(sensor);
  p.value = v;
  p.seq = seq;
  p.dst = kController;
  return p;
}

Packet get(std::uint32_t sensor, OpCode op = OpCode::kLatest) {
  Packet p;
  p.kind = PacketKind::kGetRequest;
  p.sensor = SensorId(sensor);
  p.opcode = op;
  p.requester = kController;
  p.dst = kSensorNode;
  return p;
}

SwitchState make_switch() {
  SwitchConfig cfg;
  cfg.ports = 4;
  cfg.store.sensors = 8;
  cfg.store.history = 4;
  return SwitchState(kSelf, cfg);
}

bool has_note(const StepResult &r, TraceEvent e,
              std::optional<DropReason> why = std::nullopt) {
  for (const auto &n : r.notes) {
    if (n.event == e && (!why || n.reason == why)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("moving average accumulator") {
  CHECK(average_of(update_avg(0, 55, true)) == 55);
  // A constant input is a fixed point.
  std::uint64_t acc = update_avg(0, 40, true);
  for (int i = 0; i < 10; ++i) acc = update_avg(acc, 40, false);
  CHECK(average_of(acc) == 40);
  // 48 - 6 + 55/8 keeps the integer part at 48.
  acc = update_avg(0, 48, true);
  CHECK(average_of(update_avg(acc, 55, false)) == 48);
  // Repeated samples converge all the way to the input.
  for (int i = 0; i < 100; ++i) acc = update_avg(acc, 55, false);
  CHECK(average_of(acc) == 55);
}

TEST_CASE("store ring") {
  SensorStore st(StoreConfig{4, 3});
  CHECK_FALSE(st.latest(SensorId(1)));
  st.record(SensorId(1), 7, 10);
  CHECK(st.latest(SensorId(1)) == Sample{7, 10});
  CHECK(st.count(SensorId(1)) == 1);
  CHECK(st.moving_average(SensorId(1)) == 7);

  SensorStore ring(StoreConfig{4, 3});
  for (SensorValue v = 1; v <= 4; ++v) ring.record(SensorId(2), v, v * 100);
  CHECK(ring.count(SensorId(2)) == 3);
  CHECK(ring.latest(SensorId(2))->value == 4);
  const auto h = ring.history(SensorId(2));
  REQUIRE(h.size() == 3);
  CHECK(h[0].value == 2);
  CHECK(h[1].value == 3);
  CHECK(h[2].value == 4);
  CHECK(ring.rr_index(SensorId(2)) == 1);

  SensorStore one(StoreConfig{4, 1});
  one.record(SensorId(3), 5, 1);
  one.record(SensorId(3), 9, 2);
  CHECK(one.latest(SensorId(3))->value == 9);
  CHECK(one.count(SensorId(3)) == 1);
}

TEST_CASE("store masks widths and rejects unknown sensors") {
  StoreConfig cfg{4, 2};
  cfg.value_bits = 8;
  cfg.ts_bits = 8;
  SensorStore st(cfg);
  st.record(SensorId(1), 0x1FF, 0x305);
  CHECK(st.latest(SensorId(1)) == Sample{0xFF, 0x05});
  CHECK_THROWS_AS(st.record(SensorId(5), 1, 1), Error);
  CHECK_THROWS_AS(st.record(SensorId(0), 1, 1), Error);
  CHECK_THROWS_AS(SensorStore(StoreConfig{0, 1}), Error);
}

TEST_CASE("route lookup prefers the exact ingress") {
  RouteTable t;
  t.set(SensorId(1), std::nullopt, RouteTag::kNormal, {Forward{PortId(1)}});
  t.set(SensorId(1), PortId(2), RouteTag::kNormal, {Forward{PortId(3)}});
  CHECK(egress_port(t.lookup(SensorId(1), PortId(0), RouteTag::kNormal)->at(0))
            .value == 1);
  CHECK(egress_port(t.lookup(SensorId(1), PortId(2), RouteTag::kNormal)->at(0))
            .value == 3);
  CHECK(t.lookup(SensorId(1), PortId(0), RouteTag::kBackup) == nullptr);
  CHECK(t.lookup(SensorId(2), PortId(0), RouteTag::kNormal) == nullptr);
}

TEST_CASE("liveness") {
  LivenessState l(4, 0);
  l.refresh(PortId(2), 500);
  CHECK(l.last_rx(PortId(2)) == 500);
  CHECK_FALSE(l.is_down(PortId(2), 1'000'000));  // no timeout set
  l.set_timeout(PortId(2), 100);
  CHECK_FALSE(l.is_down(PortId(2), 600));  // equality is live
  CHECK(l.is_down(PortId(2), 601));
  for (TimeUs t = 600; t < 10'000; t += 100) {
    l.refresh(PortId(2), t);
    CHECK_FALSE(l.is_down(PortId(2), t + 100));
  }
}

TEST_CASE("filter forwards every n-th report") {
  FilterState f(4);
  CHECK_THROWS_AS(f.set_rate(SensorId(1), 0), Error);
  f.set_rate(SensorId(1), 5);
  int passed = 0;
  for (int i = 1; i <= 23; ++i) {
    const bool ok = f.admit(SensorId(1));
    CHECK(ok == (i % 5 == 0));
    passed += ok;
  }
  CHECK(passed == 4);
  int all = 0;
  for (int i = 0; i < 7; ++i) all += f.admit(SensorId(2));
  CHECK(all == 7);
}

TEST_CASE("report with true logic becomes an actuator command") {
  SwitchState sw = make_switch();
  sw.logic().encode(SensorId(1), to_cnf(parse_expr("s1<50"), {5, 5}));
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                  {ForwardMod{PortId(1), kActuator}});
  const StepResult r = sw.process(report(1, 40, 3), PortId(0), 1000);
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].port.value == 1);
  CHECK(r.egress[0].packet.kind == PacketKind::kActuatorCommand);
  CHECK(r.egress[0].packet.dst == kActuator);
  CHECK(r.egress[0].packet.seq == 3);
  CHECK(sw.store().latest(SensorId(1))->value == 40);
  CHECK(sw.liveness().last_rx(PortId(0)) == 1000);
}

TEST_CASE("false logic drops before the filter counts") {
  SwitchState sw = make_switch();
  sw.logic().encode(SensorId(1), to_cnf(parse_expr("s1<50"), {5, 5}));
  sw.filter().set_rate(SensorId(1), 2);
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                  {Forward{PortId(1)}});
  const StepResult r = sw.process(report(1, 60), PortId(0), 0);
  CHECK(r.egress.empty());
  CHECK(has_note(r, TraceEvent::kDrop, DropReason::kLogicFalse));
  CHECK(sw.filter().counter(SensorId(1)) == 0);
  // The value is still recorded.
  CHECK(sw.store().latest(SensorId(1))->value == 60);
}

TEST_CASE("pipeline filter and missing route") {
  SwitchState sw = make_switch();
  sw.filter().set_rate(SensorId(1), 5);
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                  {Forward{PortId(1)}});
  int out = 0;
  for (int i = 0; i < 20; ++i) {
    out += static_cast<int>(sw.process(report(1, 1), PortId(0), i).egress.size());
  }
  CHECK(out == 4);
  const StepResult r = sw.process(report(2, 1), PortId(0), 30);
  CHECK(has_note(r, TraceEvent::kDrop, DropReason::kNoRoute));
  const StepResult u = sw.process(report(99, 1), PortId(0), 30);
  CHECK(has_note(u, TraceEvent::kDrop, DropReason::kUnknownSensor));
}

TEST_CASE("multiple actuators per route") {
  SwitchState sw = make_switch();
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                  {ForwardMod{PortId(1), kActuator},
                   ForwardMod{PortId(2), kBackupActuator}});
  const StepResult r = sw.process(report(1, 1), PortId(0), 0);
  REQUIRE(r.egress.size() == 2);
  CHECK(r.egress[1].packet.dst == kBackupActuator);
}

TEST_CASE("failover") {
  SwitchState sw = make_switch();
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                  {ForwardMod{PortId(1), kActuator}});
  sw.liveness().set_timeout(PortId(1), 30'000);
  sw.liveness().set_timeout(PortId(2), 30'000);

  SUBCASE("first live backup actuator wins") {
    sw.failover().set(SensorId(1), {ForwardMod{PortId(2), NodeId(20)},
                                    ForwardMod{PortId(3), kBackupActuator}});
    const StepResult r = sw.process(report(1, 1), PortId(0), 40'000);
    CHECK(has_note(r, TraceEvent::kFailover));
    REQUIRE(r.egress.size() == 1);
    CHECK(r.egress[0].port.value == 3);
    CHECK(r.egress[0].packet.kind == PacketKind::kActuatorCommand);
    CHECK(r.egress[0].packet.dst == kBackupActuator);
  }
  SUBCASE("send_up re-tags the report") {
    sw.failover().set(SensorId(1), {SendUp{PortId(2)}});
    const StepResult r = sw.process(report(1, 1), PortId(0), 40'000);
    REQUIRE(r.egress.size() == 1);
    CHECK(r.egress[0].port.value == 2);  // emitted even though port 2 is down
    CHECK(r.egress[0].packet.kind == PacketKind::kSensorReport);
    CHECK(r.egress[0].packet.tag == RouteTag::kBackup);
  }
  SUBCASE("nothing reachable") {
    sw.failover().set(SensorId(1), {ForwardMod{PortId(2), NodeId(20)}});
    const StepResult r = sw.process(report(1, 1), PortId(0), 40'000);
    CHECK(r.egress.empty());
    CHECK(has_note(r, TraceEvent::kDrop, DropReason::kAllBackupsDown));
  }
  SUBCASE("live primary needs no failover") {
    sw.failover().set(SensorId(1), {SendUp{PortId(2)}});
    sw.refresh_liveness(PortId(1), 20'000);
    const StepResult r = sw.process(report(1, 1), PortId(0), 40'000);
    REQUIRE(r.egress.size() == 1);
    CHECK(r.egress[0].port.value == 1);
    CHECK_FALSE(has_note(r, TraceEvent::kFailover));
  }
}

TEST_CASE("backup-tagged reports use the backup route") {
  SwitchState sw = make_switch();
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                  {Forward{PortId(1)}});
  sw.routes().set(SensorId(1), std::nullopt, RouteTag::kBackup,
                  {ForwardMod{PortId(3), kBackupActuator}});
  Packet p = report(1, 1);
  p.tag = RouteTag::kBackup;
  const StepResult r = sw.process(p, PortId(0), 0);
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].port.value == 3);
  CHECK(r.egress[0].packet.dst == kBackupActuator);
}

TEST_CASE("cache") {
  SwitchState sw = make_switch();
  sw.set_forwarding(kSensorNode, PortId(0));
  sw.set_forwarding(kController, PortId(3));

  // Empty store: forwarded to the sensor and remembered.
  StepResult r = sw.process(get(1), PortId(3), 1'000'000);
  CHECK(has_note(r, TraceEvent::kCacheMiss));
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].port.value == 0);
  CHECK(sw.pending_gets().at(SensorId(1)).size() == 1);

  // A second request from the same requester is coalesced.
  r = sw.process(get(1), PortId(3), 1'000'100);
  CHECK(r.egress.empty());

  // The sensor's answer fills the store and is passed to the requester once.
  Packet resp;
  resp.kind = PacketKind::kGetResponse;
  resp.sensor = SensorId(1);
  resp.value = 42;
  resp.requester = kController;
  resp.dst = kController;
  r = sw.process(resp, PortId(0), 1'002'000);
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].port.value == 3);
  CHECK(r.egress[0].packet.value == 42);
  CHECK(sw.pending_gets().empty());

  // Fresh entry: answered by the switch.
  r = sw.process(get(1), PortId(3), 2'002'000);
  CHECK(has_note(r, TraceEvent::kCacheHit));
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].packet.kind == PacketKind::kGetResponse);
  CHECK(r.egress[0].packet.value == 42);
  CHECK(r.egress[0].packet.dst == kController);

  // Exactly at the tolerance is still fresh; past it is stale.
  r = sw.process(get(1), PortId(3), 6'002'000);
  CHECK(has_note(r, TraceEvent::kCacheHit));
  r = sw.process(get(1), PortId(3), 6'002'001);
  CHECK(has_note(r, TraceEvent::kCacheMiss));
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].port.value == 0);
}

TEST_CASE("cache answers moving-average requests") {
  SwitchState sw = make_switch();
  sw.process(report(1, 80), PortId(0), 0);
  sw.process(report(1, 0), PortId(0), 10);
  const StepResult r = sw.process(get(1, OpCode::kMovingAverage), PortId(3), 20);
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].packet.value == 70);
  CHECK(r.egress[0].packet.opcode == OpCode::kMovingAverage);
}

TEST_CASE("replaying the same packets reproduces the same egress") {
  auto run = [] {
    SwitchState sw = make_switch();
    sw.logic().encode(SensorId(1), to_cnf(parse_expr("s1~>=30"), {5, 5}));
    sw.routes().set(SensorId(1), std::nullopt, RouteTag::kNormal,
                    {ForwardMod{PortId(1), kActuator}});
    std::vector<std::size_t> sizes;
    for (int i = 0; i < 50; ++i) {
      sizes.push_back(
          sw.process(report(1, (i * 7) % 60), PortId(0), i * 1000).egress.size());
    }
    return sizes;
  };
  CHECK(run() == run());
}

TEST_CASE("liveness and other traffic use static forwarding") {
  SwitchState sw = make_switch();
  sw.set_forwarding(kActuator, PortId(2));
  Packet live;
  live.kind = PacketKind::kLiveness;
  live.dst = kSelf;
  StepResult r = sw.process(live, PortId(2), 500);
  CHECK(r.egress.empty());
  CHECK(sw.liveness().last_rx(PortId(2)) == 500);

  Packet cmd;
  cmd.kind = PacketKind::kActuatorCommand;
  cmd.dst = kActuator;
  r = sw.process(cmd, PortId(0), 600);
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].port.value == 2);
  cmd.dst = NodeId(55);
  r = sw.process(cmd, PortId(0), 600);
  CHECK(has_note(r, TraceEvent::kDrop, DropReason::kNoRoute));
  CHECK_THROWS_AS(sw.set_forwarding(kActuator, PortId(4)), Error);
}
