#pragma once

// Northbound side: intents the industrial controller hands to the SDN
// controller, their compilation into switch tables, and the centralized
// controller logic used as the baseline.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fastreact/dataplane.hpp"
#include "fastreact/logic.hpp"

namespace fastreact {

struct SetLogic {
  NodeId sw;
  SensorId trigger;
  BoolExpr expr;
};

struct ClearLogic {
  NodeId sw;
  SensorId trigger;
};

struct SetRoute {
  NodeId sw;
  SensorId sensor;
  std::optional<PortId> ingress;  // empty = wildcard
  RouteTag tag = RouteTag::kNormal;
  std::vector<RouteAction> actions;
};

struct SetFailover {
  NodeId sw;
  SensorId sensor;
  std::vector<FailoverAction> actions;
};

struct SetFilter {
  NodeId sw;
  SensorId sensor;
  std::uint32_t rate = 1;
};

struct SetTimeout {
  NodeId sw;
  PortId port;
  std::optional<DurationUs> timeout;  // empty disables liveness checks
};

struct SetCacheTolerance {
  NodeId sw;
  DurationUs tolerance = kDefaultCacheToleranceUs;
};

using Intent = std::variant<SetLogic, ClearLogic, SetRoute, SetFailover,
                            SetFilter, SetTimeout, SetCacheTolerance>;

NodeId target_switch(const Intent &intent);

struct InstallAck {
  NodeId sw;
  std::string detail;
};

// Validates `intent` against the switch geometry and writes it. SetLogic
// compiles to CNF and swaps the trigger's conjunctive row; the previous
// disjunctive rows are not reclaimed. Throws Error on any violation and
// leaves the switch unchanged.
InstallAck install(SwitchState &sw, const Intent &intent);

// Registry of switches reachable through the southbound channel.
class SdnController {
 public:
  void attach(SwitchState &sw);
  bool manages(NodeId sw) const { return switches_.count(sw) != 0; }

  // Throws Error(kUnknownSwitch) for switches that were never attached.
  InstallAck install(const Intent &intent);

 private:
  std::map<NodeId, SwitchState *> switches_;
};

struct ControllerRule {
  SensorId trigger;
  BoolExpr expr;
  NodeId actuator;
};

// Industrial controller reacting to every report it receives, evaluating the
// rule expression directly instead of through register tables.
class IndustrialController {
 public:
  IndustrialController(NodeId self, StoreConfig store);

  NodeId self() const { return self_; }
  void add_rule(ControllerRule rule);
  const std::vector<ControllerRule> &rules() const { return rules_; }

  // Records the report and returns one actuator command per rule whose
  // trigger matches and whose expression holds. Sensors never heard from make
  // their comparisons false.
  std::vector<Packet> controller_react(const Packet &report, TimeUs now);

  const SensorStore &store() const { return store_; }

 private:
  NodeId self_;
  SensorStore store_;
  std::vector<ControllerRule> rules_;
};

}  // namespace fastreact
