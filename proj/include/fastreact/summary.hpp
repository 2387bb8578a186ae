#pragma once

// Experiment statistics derived from a trace. Node roles tell the summary
// which trace rows are end-host events; every number comes from the trace.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fastreact/model.hpp"
#include "fastreact/simnet.hpp"

namespace fastreact {

struct SummaryOptions {
  std::map<std::string, NodeKind> roles;
  // (primary actuator, backup actuator) for recovery episodes.
  std::optional<std::pair<std::string, std::string>> recovery;
};

struct DelayStats {
  std::uint64_t count = 0;
  double mean = 0;
  double median = 0;
  DurationUs p95 = 0;  // nearest rank
  DurationUs min = 0;
  DurationUs max = 0;
};

// Empty input yields count = 0 and zeros elsewhere.
DelayStats delay_stats(std::vector<DurationUs> samples);

struct Delivery {
  TimeUs time = 0;
  std::string actuator;
  SensorId sensor;
  std::uint64_t seq = 0;
  TimeUs sent_at = 0;
  RouteTag tag = RouteTag::kNormal;
};

struct ReportCounts {
  std::string node;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;  // reports that reached at least one actuator
  std::uint64_t undelivered() const { return sent - delivered; }
};

struct RecoveryEpisode {
  std::optional<TimeUs> last_primary;  // rx time at the primary actuator
  std::optional<TimeUs> first_backup;  // empty: no recovery
  std::uint64_t lost = 0;  // undelivered reports sent in between
  bool recovered() const { return first_backup.has_value(); }
  std::optional<DurationUs> gap() const;
};

enum class GetOutcome : std::uint8_t { kHit, kMiss, kNone };

struct GetResult {
  std::string requester;
  SensorId sensor;
  std::uint64_t seq = 0;
  TimeUs sent_at = 0;
  GetOutcome outcome = GetOutcome::kNone;
  std::optional<DurationUs> rtt;
};

struct Summary {
  // Actuator deliveries in trace order.
  std::vector<Delivery> deliveries;
  std::map<std::pair<std::string, SensorId>, DelayStats> delays;
  std::map<SensorId, ReportCounts> reports;
  std::vector<RecoveryEpisode> recovery;
  std::vector<GetResult> gets;
  // Report arrivals at controllers, per (controller, sensor).
  std::map<std::pair<std::string, SensorId>, std::vector<TimeUs>>
      controller_arrivals;
};

Summary summarize(const Trace &trace, const SummaryOptions &options);

// Long format: metric,node,sensor,value
std::string_view summary_csv_header();
void write_summary_csv(std::ostream &os, const Summary &summary);

std::string_view to_string(GetOutcome outcome);

}  // namespace fastreact
