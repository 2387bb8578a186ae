#include <random>

#include <doctest.h>

#include "fastreact/control.hpp"
#include "fastreact/error.hpp"
#include "oracles.hpp"

using namespace fastreact;

namespace {

const NodeId kA1(1);
const NodeId kActuator(7);

SwitchState make_switch(NodeId id = kA1) {
  SwitchConfig cfg;
  cfg.ports = 4;
  cfg.store.sensors = 8;
  return SwitchState(id, cfg);
}

Packet report(std::uint32_t sensor, SensorValue v) {
  Packet p;
  p.kind = PacketKind::kSensorReport;
  p.sensor = SensorId(sensor);
  p.value = v;
  return p;
}

Errc code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::kIo;
}

}  // namespace

TEST_CASE("logic intent fills the register tables") {
  SwitchState sw = make_switch();
  install(sw, SetLogic{kA1, SensorId(1),
                       parse_expr("(s1<50 || s2>25) && (s3==10)")});
  const LogicTables &t = sw.logic();
  CHECK(t.row_index(SensorId(1), 0) == 1);
  CHECK(t.row_index(SensorId(1), 1) == 2);
  CHECK(t.row_index(SensorId(1), 2) == 0);
  CHECK(t.op_at(1, 0) == Operator::kLt);
  CHECK(t.op_at(1, 1) == Operator::kGt);
  CHECK(t.sensor_at(2, 0) == SensorId(3));
}

TEST_CASE("re-installing logic swaps the row and orphans the old one") {
  SwitchState sw = make_switch();
  install(sw, SetLogic{kA1, SensorId(1), parse_expr("s1<5")});
  install(sw, SetLogic{kA1, SensorId(1), parse_expr("s1>5")});
  CHECK(sw.logic().row_index(SensorId(1), 0) == 2);
  CHECK(to_string(sw.logic().decode(SensorId(1))) == "(s1>5)");
  install(sw, ClearLogic{kA1, SensorId(1)});
  CHECK_FALSE(sw.logic().configured(SensorId(1)));
}

TEST_CASE("route, failover, filter, timeout and cache intents") {
  SwitchState sw = make_switch();
  install(sw, SetRoute{kA1, SensorId(1), std::nullopt, RouteTag::kNormal,
                       {ForwardMod{PortId(2), kActuator}}});
  const auto *actions =
      sw.routes().lookup(SensorId(1), PortId(0), RouteTag::kNormal);
  REQUIRE(actions != nullptr);
  CHECK(std::get<ForwardMod>(actions->at(0)) == ForwardMod{PortId(2), kActuator});

  install(sw, SetFailover{kA1, SensorId(1), {SendUp{PortId(3)}}});
  CHECK(sw.failover().lookup(SensorId(1))->size() == 1);

  install(sw, SetFilter{kA1, SensorId(1), 5});
  CHECK(sw.filter().rate(SensorId(1)) == 5);

  install(sw, SetTimeout{kA1, PortId(2), 30'000});
  CHECK(sw.liveness().timeout(PortId(2)) == 30'000);
  install(sw, SetTimeout{kA1, PortId(2), std::nullopt});
  CHECK_FALSE(sw.liveness().timeout(PortId(2)));

  install(sw, SetCacheTolerance{kA1, 2'000'000});
  CHECK(sw.cache_tolerance() == 2'000'000);
}

TEST_CASE("invalid intents are rejected without side effects") {
  SwitchState sw = make_switch();
  CHECK(code_of([&] { install(sw, SetFilter{kA1, SensorId(1), 0}); }) ==
        Errc::kInvalidRate);
  CHECK(sw.filter().rate(SensorId(1)) == 1);
  CHECK(code_of([&] { install(sw, SetFilter{kA1, SensorId(9), 2}); }) ==
        Errc::kUnknownSensor);
  CHECK(code_of([&] {
          install(sw, SetRoute{kA1, SensorId(1), std::nullopt,
                               RouteTag::kNormal, {Forward{PortId(4)}}});
        }) == Errc::kInvalidArgument);
  CHECK(sw.routes().size() == 0);
  CHECK(code_of([&] {
          install(sw, SetLogic{kA1, SensorId(1), parse_expr("s9<1")});
        }) == Errc::kUnknownSensor);
  CHECK(code_of([&] {
          install(sw, SetLogic{kA1, SensorId(1), parse_expr("s1<70000")});
        }) == Errc::kInvalidArgument);
  CHECK_FALSE(sw.logic().configured(SensorId(1)));
  CHECK(code_of([&] { install(sw, SetFilter{NodeId(2), SensorId(1), 2}); }) ==
        Errc::kUnknownSwitch);
}

TEST_CASE("sdn controller dispatches by switch") {
  SwitchState a = make_switch(NodeId(1));
  SwitchState b = make_switch(NodeId(2));
  SdnController sdn;
  sdn.attach(a);
  sdn.attach(b);
  CHECK(sdn.manages(NodeId(2)));
  sdn.install(SetFilter{NodeId(2), SensorId(3), 4});
  CHECK(b.filter().rate(SensorId(3)) == 4);
  CHECK(a.filter().rate(SensorId(3)) == 1);
  CHECK(code_of([&] { sdn.install(SetFilter{NodeId(5), SensorId(3), 4}); }) ==
        Errc::kUnknownSwitch);
  CHECK(target_switch(Intent{SetFilter{NodeId(2), SensorId(3), 4}}) ==
        NodeId(2));
}

TEST_CASE("industrial controller") {
  IndustrialController ctl(NodeId(10), StoreConfig{8, 4});
  ctl.add_rule(ControllerRule{SensorId(1), parse_expr("s1>=0"), kActuator});

  auto cmds = ctl.controller_react(report(1, 5), 100);
  REQUIRE(cmds.size() == 1);
  CHECK(cmds[0].kind == PacketKind::kActuatorCommand);
  CHECK(cmds[0].dst == kActuator);
  CHECK(cmds[0].value == 5);
  CHECK(ctl.controller_react(report(2, 5), 100).empty());

  IndustrialController gated(NodeId(10), StoreConfig{8, 4});
  gated.add_rule(ControllerRule{SensorId(1), parse_expr("s1<3"), kActuator});
  CHECK(gated.controller_react(report(1, 5), 0).empty());
  // A sensor never heard from makes its comparison false.
  gated.add_rule(ControllerRule{SensorId(1), parse_expr("s2==0"), kActuator});
  CHECK(gated.controller_react(report(1, 1), 0).size() == 1);
}

TEST_CASE("controller and data plane decide alike") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const BoolExpr e = oracle::random_expr(rng, 3, 3, 4);
    SwitchState sw = make_switch();
    try {
      install(sw, SetLogic{kA1, SensorId(1), e});
    } catch (const Error &err) {
      CHECK(err.code() == Errc::kCapacityExceeded);
      continue;
    }
    install(sw, SetRoute{kA1, SensorId(1), std::nullopt, RouteTag::kNormal,
                         {ForwardMod{PortId(1), kActuator}}});
    IndustrialController ctl(NodeId(10), StoreConfig{8, 4});
    ctl.add_rule(ControllerRule{SensorId(1), e, kActuator});
    std::mt19937 values(i);
    for (int k = 0; k < 40; ++k) {
      const Packet p = report(1 + values() % 3, values() % 5);
      const bool plane = !sw.process(p, PortId(0), k).egress.empty();
      const bool central = !ctl.controller_react(p, k).empty();
      if (p.sensor == SensorId(1)) CHECK(plane == central);
    }
  }
}
