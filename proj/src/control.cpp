#include "fastreact/control.hpp"

#include "fastreact/error.hpp"

namespace fastreact {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_sensor(const SwitchState &sw, SensorId s) {
  if (!sw.store().covers(s)) {
    throw Error(Errc::kUnknownSensor,
                "sensor " + std::to_string(s.value) + " outside 1.." +
                    std::to_string(sw.config().store.sensors) +
                    " on switch " + std::to_string(sw.self().value));
  }
}

void check_port(const SwitchState &sw, PortId port) {
  if (port.value >= sw.config().ports) {
    throw Error(Errc::kInvalidArgument,
                "port " + std::to_string(port.value) + " outside switch " +
                    std::to_string(sw.self().value) + " (" +
                    std::to_string(sw.config().ports) + " ports)");
  }
}

void check_actuator(NodeId actuator) {
  if (!actuator.valid()) {
    throw Error(Errc::kInvalidArgument, "forward_mod needs an actuator");
  }
}

void check_expr_values(const SwitchState &sw, const Cnf &cnf) {
  const unsigned bits = sw.config().store.value_bits;
  for (const auto &clause : cnf.conjuncts) {
    for (const auto &c : clause) {
      check_sensor(sw, c.sensor);
      if (c.constant != mask_value(c.constant, bits)) {
        throw Error(Errc::kInvalidArgument,
                    "constant " + std::to_string(c.constant) +
                        " does not fit " + std::to_string(bits) + " bits");
      }
    }
  }
}

}  // namespace

NodeId target_switch(const Intent &intent) {
  return std::visit([](const auto &i) { return i.sw; }, intent);
}

InstallAck install(SwitchState &sw, const Intent &intent) {
  if (target_switch(intent) != sw.self()) {
    throw Error(Errc::kUnknownSwitch, "intent addressed to another switch");
  }
  return std::visit(
      Overloaded{
          [&](const SetLogic &i) {
            check_sensor(sw, i.trigger);
            const TableDims &dims = sw.logic().dims();
            const Cnf cnf =
                to_cnf(i.expr, CnfLimits{dims.conj_cols, dims.disj_cols});
            check_expr_values(sw, cnf);
            sw.logic().replace(i.trigger, cnf);
            return InstallAck{sw.self(), "logic s" +
                                             std::to_string(i.trigger.value) +
                                             " := " + to_string(cnf)};
          },
          [&](const ClearLogic &i) {
            check_sensor(sw, i.trigger);
            sw.logic().clear(i.trigger);
            return InstallAck{sw.self(),
                              "logic s" + std::to_string(i.trigger.value) +
                                  " cleared"};
          },
          [&](const SetRoute &i) {
            check_sensor(sw, i.sensor);
            if (i.ingress) check_port(sw, *i.ingress);
            for (const auto &a : i.actions) {
              check_port(sw, egress_port(a));
              if (const auto *mod = std::get_if<ForwardMod>(&a)) {
                check_actuator(mod->actuator);
              }
            }
            sw.routes().set(i.sensor, i.ingress, i.tag, i.actions);
            return InstallAck{sw.self(),
                              "route s" + std::to_string(i.sensor.value) +
                                  " (" + std::to_string(i.actions.size()) +
                                  " actions)"};
          },
          [&](const SetFailover &i) {
            check_sensor(sw, i.sensor);
            for (const auto &a : i.actions) {
              check_port(sw, egress_port(a));
              if (const auto *mod = std::get_if<ForwardMod>(&a)) {
                check_actuator(mod->actuator);
              }
            }
            sw.failover().set(i.sensor, i.actions);
            return InstallAck{sw.self(),
                              "failover s" + std::to_string(i.sensor.value)};
          },
          [&](const SetFilter &i) {
            check_sensor(sw, i.sensor);
            if (i.rate == 0) {
              throw Error(Errc::kInvalidRate, "filter rate must be >= 1");
            }
            sw.filter().set_rate(i.sensor, i.rate);
            return InstallAck{sw.self(),
                              "filter s" + std::to_string(i.sensor.value) +
                                  " every " + std::to_string(i.rate)};
          },
          [&](const SetTimeout &i) {
            check_port(sw, i.port);
            if (i.timeout && *i.timeout == 0) {
              throw Error(Errc::kInvalidArgument, "port timeout must be > 0");
            }
            sw.liveness().set_timeout(i.port, i.timeout);
            return InstallAck{sw.self(),
                              "timeout port " + std::to_string(i.port.value)};
          },
          [&](const SetCacheTolerance &i) {
            sw.set_cache_tolerance(i.tolerance);
            return InstallAck{sw.self(), "cache tolerance " +
                                             std::to_string(i.tolerance) +
                                             "us"};
          },
      },
      intent);
}

void SdnController::attach(SwitchState &sw) { switches_[sw.self()] = &sw; }

InstallAck SdnController::install(const Intent &intent) {
  const NodeId target = target_switch(intent);
  auto it = switches_.find(target);
  if (it == switches_.end()) {
    throw Error(Errc::kUnknownSwitch,
                "switch " + std::to_string(target.value) +
                    " is not managed by this controller");
  }
  return fastreact::install(*it->second, intent);
}

IndustrialController::IndustrialController(NodeId self, StoreConfig store)
    : self_(self), store_(store) {}

void IndustrialController::add_rule(ControllerRule rule) {
  if (!rule.actuator.valid()) {
    throw Error(Errc::kInvalidArgument, "controller rule needs an actuator");
  }
  rules_.push_back(std::move(rule));
}

std::vector<Packet> IndustrialController::controller_react(const Packet &report,
                                                           TimeUs now) {
  std::vector<Packet> out;
  if (report.kind != PacketKind::kSensorReport) return out;
  if (store_.covers(report.sensor)) {
    store_.record(report.sensor, report.value, now);
  }
  const ValueLookup lookup = [this](SensorId id, ValueSource src) {
    return store_.covers(id) ? store_.value(id, src) : std::nullopt;
  };
  for (const auto &rule : rules_) {
    if (rule.trigger != report.sensor) continue;
    if (!evaluate(rule.expr, lookup)) continue;
    Packet cmd = report;
    cmd.kind = PacketKind::kActuatorCommand;
    cmd.dst = rule.actuator;
    out.push_back(cmd);
  }
  return out;
}

}  // namespace fastreact
