#include "fastreact/summary.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

namespace fastreact {

DelayStats delay_stats(std::vector<DurationUs> samples) {
  DelayStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  s.count = n;
  s.min = samples.front();
  s.max = samples.back();
  // Sums of microsecond delays stay far below 2^53 for any realistic run.
  const long double total =
      std::accumulate(samples.begin(), samples.end(), 0.0L);
  s.mean = static_cast<double>(total / n);
  s.median = n % 2 == 1 ? static_cast<double>(samples[n / 2])
                        : (static_cast<double>(samples[n / 2 - 1]) +
                           static_cast<double>(samples[n / 2])) /
                              2.0;
  const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n), >= 1
  s.p95 = samples[rank - 1];
  return s;
}

std::optional<DurationUs> RecoveryEpisode::gap() const {
  if (!last_primary || !first_backup) return std::nullopt;
  return *first_backup - *last_primary;
}

std::string_view to_string(GetOutcome outcome) {
  switch (outcome) {
    case GetOutcome::kHit: return "hit";
    case GetOutcome::kMiss: return "miss";
    case GetOutcome::kNone: return "none";
  }
  return "?";
}

namespace {

bool has_role(const SummaryOptions &o, const std::string &node, NodeKind k) {
  auto it = o.roles.find(node);
  return it != o.roles.end() && it->second == k;
}

void find_recovery(const Summary &s, const SummaryOptions &o,
                   const Trace &trace, std::vector<RecoveryEpisode> &out) {
  const auto &[primary, backup] = *o.recovery;
  // (sensor, seq) pairs that reached any actuator.
  std::set<std::pair<SensorId, std::uint64_t>> delivered;
  for (const Delivery &d : s.deliveries) delivered.emplace(d.sensor, d.seq);

  auto lost_between = [&](SensorId sensor, TimeUs from, TimeUs to) {
    std::uint64_t lost = 0;
    for (const TraceRecord &r : trace) {
      const Packet &p = r.packet;
      if (r.event != TraceEvent::kTx || p.kind != PacketKind::kSensorReport ||
          p.sensor != sensor || !has_role(o, r.node, NodeKind::kSensor)) {
        continue;
      }
      if (p.sent_at > from && p.sent_at < to &&
          !delivered.count({p.sensor, p.seq})) {
        ++lost;
      }
    }
    return lost;
  };

  std::vector<TimeUs> downs;
  for (const TraceRecord &r : trace) {
    if (r.event == TraceEvent::kLinkDown && r.node == primary) {
      downs.push_back(r.time);
    }
  }

  if (downs.empty()) {
    // No recorded failure: every switch from primary to backup delivery is
    // an episode.
    const Delivery *last_primary = nullptr;
    bool on_backup = false;
    for (const Delivery &d : s.deliveries) {
      if (d.actuator == primary) {
        last_primary = &d;
        on_backup = false;
      } else if (d.actuator == backup && !on_backup) {
        on_backup = true;
        RecoveryEpisode ep;
        ep.first_backup = d.time;
        if (last_primary) {
          ep.last_primary = last_primary->time;
          ep.lost = lost_between(d.sensor, last_primary->sent_at, d.sent_at);
        }
        out.push_back(ep);
      }
    }
    if (out.empty()) {
      RecoveryEpisode ep;
      if (last_primary) ep.last_primary = last_primary->time;
      out.push_back(ep);
    }
    return;
  }

  // One episode per failure of the primary's link. Traffic that was already
  // on the backup path when the link failed has nothing to recover from.
  for (const TimeUs down : downs) {
    const Delivery *last_primary = nullptr;
    const Delivery *first_backup = nullptr;
    bool backup_before = false;
    for (const Delivery &d : s.deliveries) {
      if (d.time <= down) {
        if (d.actuator == primary) {
          last_primary = &d;
          backup_before = false;
        } else if (d.actuator == backup) {
          backup_before = true;
        }
        continue;
      }
      if (d.actuator == primary) break;  // primary path is back
      if (d.actuator == backup) {
        first_backup = &d;
        break;
      }
    }
    RecoveryEpisode ep;
    if (last_primary) ep.last_primary = last_primary->time;
    if (last_primary && first_backup && !backup_before) {
      ep.first_backup = first_backup->time;
      ep.lost = lost_between(first_backup->sensor, last_primary->sent_at,
                             first_backup->sent_at);
    }
    out.push_back(ep);
  }
}

}  // namespace

Summary summarize(const Trace &trace, const SummaryOptions &options) {
  Summary s;
  std::map<std::pair<std::string, SensorId>, std::vector<DurationUs>> delays;
  std::set<std::pair<SensorId, std::uint64_t>> delivered;
  // Outcome lookup for gets keyed by (requester, seq).
  std::map<std::pair<NodeId, std::uint64_t>, std::size_t> get_index;

  for (const TraceRecord &r : trace) {
    const Packet &p = r.packet;
    if (r.event == TraceEvent::kTx) {
      if (p.kind == PacketKind::kSensorReport &&
          has_role(options, r.node, NodeKind::kSensor)) {
        ReportCounts &c = s.reports[p.sensor];
        c.node = r.node;
        ++c.sent;
      } else if (p.kind == PacketKind::kGetRequest &&
                 has_role(options, r.node, NodeKind::kController)) {
        get_index[{p.requester, p.seq}] = s.gets.size();
        s.gets.push_back(GetResult{r.node, p.sensor, p.seq, p.sent_at,
                                   GetOutcome::kNone, std::nullopt});
      }
    } else if (r.event == TraceEvent::kRx) {
      if (p.kind == PacketKind::kActuatorCommand &&
          has_role(options, r.node, NodeKind::kActuator)) {
        s.deliveries.push_back(
            Delivery{r.time, r.node, p.sensor, p.seq, p.sent_at, p.tag});
        delays[{r.node, p.sensor}].push_back(r.time - p.sent_at);
        if (delivered.emplace(p.sensor, p.seq).second) {
          ++s.reports[p.sensor].delivered;
        }
      } else if (p.kind == PacketKind::kSensorReport &&
                 has_role(options, r.node, NodeKind::kController)) {
        s.controller_arrivals[{r.node, p.sensor}].push_back(r.time);
      } else if (p.kind == PacketKind::kGetResponse &&
                 has_role(options, r.node, NodeKind::kController)) {
        auto it = get_index.find({p.requester, p.seq});
        if (it != get_index.end() && !s.gets[it->second].rtt) {
          s.gets[it->second].rtt = r.time - p.sent_at;
        }
      }
    } else if (r.event == TraceEvent::kCacheHit ||
               r.event == TraceEvent::kCacheMiss) {
      auto it = get_index.find({p.requester, p.seq});
      if (it != get_index.end() &&
          s.gets[it->second].outcome == GetOutcome::kNone) {
        s.gets[it->second].outcome = r.event == TraceEvent::kCacheHit
                                         ? GetOutcome::kHit
                                         : GetOutcome::kMiss;
      }
    }
  }

  for (auto &[key, samples] : delays) {
    s.delays[key] = delay_stats(std::move(samples));
  }
  if (options.recovery) find_recovery(s, options, trace, s.recovery);
  return s;
}

std::string_view summary_csv_header() { return "metric,node,sensor,value"; }

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void row(std::ostream &os, std::string_view metric, std::string_view node,
         SensorId sensor, std::string_view value) {
  os << metric << ',' << node << ',';
  if (sensor.valid()) os << sensor.value;
  os << ',' << value << '\n';
}

void row(std::ostream &os, std::string_view metric, std::string_view node,
         SensorId sensor, std::uint64_t value) {
  row(os, metric, node, sensor, std::to_string(value));
}

}  // namespace

void write_summary_csv(std::ostream &os, const Summary &s) {
  os << summary_csv_header() << '\n';
  for (const auto &[key, d] : s.delays) {
    const auto &[node, sensor] = key;
    row(os, "delay_count", node, sensor, d.count);
    row(os, "delay_mean_us", node, sensor, fixed3(d.mean));
    row(os, "delay_median_us", node, sensor, fixed3(d.median));
    row(os, "delay_p95_us", node, sensor, d.p95);
    row(os, "delay_min_us", node, sensor, d.min);
    row(os, "delay_max_us", node, sensor, d.max);
  }
  for (const auto &[sensor, c] : s.reports) {
    row(os, "reports_sent", c.node, sensor, c.sent);
    row(os, "reports_delivered", c.node, sensor, c.delivered);
    row(os, "reports_undelivered", c.node, sensor, c.undelivered());
  }
  for (const RecoveryEpisode &ep : s.recovery) {
    if (!ep.recovered()) {
      row(os, "recovery_gap_us", "", SensorId{}, "no_recovery");
      continue;
    }
    row(os, "recovery_first_backup_us", "", SensorId{}, *ep.first_backup);
    if (ep.last_primary) {
      row(os, "recovery_last_primary_us", "", SensorId{}, *ep.last_primary);
      row(os, "recovery_gap_us", "", SensorId{}, *ep.gap());
      row(os, "recovery_lost", "", SensorId{}, ep.lost);
    }
  }
  std::map<std::pair<std::string, SensorId>, std::pair<int, int>> outcomes;
  for (const GetResult &g : s.gets) {
    auto &[hits, misses] = outcomes[{g.requester, g.sensor}];
    if (g.outcome == GetOutcome::kHit) ++hits;
    if (g.outcome == GetOutcome::kMiss) ++misses;
    const std::string metric = "get_" + std::string(to_string(g.outcome)) +
                               "_rtt_us";
    row(os, metric, g.requester, g.sensor,
        g.rtt ? std::to_string(*g.rtt) : std::string("none"));
  }
  for (const auto &[key, counts] : outcomes) {
    row(os, "get_hits", key.first, key.second,
        static_cast<std::uint64_t>(counts.first));
    row(os, "get_misses", key.first, key.second,
        static_cast<std::uint64_t>(counts.second));
  }
  for (const auto &[key, times] : s.controller_arrivals) {
    const auto &[node, sensor] = key;
    row(os, "controller_reports", node, sensor, times.size());
    if (times.size() >= 2) {
      const double mean =
          static_cast<double>(times.back() - times.front()) /
          static_cast<double>(times.size() - 1);
      row(os, "controller_interarrival_mean_us", node, sensor, fixed3(mean));
    }
  }
}

}  // namespace fastreact
