#pragma once

// Declarative experiment files: topology, intents, traffic generators,
// get schedules and link flaps, plus the run harness that turns a file into a
// trace and a summary. The grammar is documented in scenarios/README.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastreact/model.hpp"
#include "fastreact/simnet.hpp"
#include "fastreact/summary.hpp"

namespace fastreact {

// "250us", "10ms", "1000.5ms", "2s", "0". Throws kParseError when the value
// has no unit, is negative, or is not a whole number of microseconds.
DurationUs parse_duration(std::string_view text);
// "1Gbps", "100Mbps", "64kbps", "9600bps".
std::uint64_t parse_bandwidth(std::string_view text);
// Waveform expressions: constant(v), alternate(v0,v1,period[,phase]),
// ramp(start,slope_per_s), spikes(base,value,duration,interval[,first]).
// A bare integer is shorthand for constant(v).
Waveform parse_waveform(std::string_view text);

struct ScenarioRun {
  std::string name;
  Trace trace;
  Summary summary;
  SummaryOptions options;
  SimStats stats;
};

class Scenario {
 public:
  // Errors carry "<origin>:<line>: ..." diagnostics.
  static Scenario from_file(const std::filesystem::path &path);
  static Scenario from_string(std::string text,
                              std::string origin = "<string>");

  Scenario(Scenario &&) noexcept;
  Scenario &operator=(Scenario &&) noexcept;
  ~Scenario();

  const std::string &name() const;
  const std::string &origin() const;
  // Declared parameters and their current values.
  const std::map<std::string, std::string> &params() const;

  // Overrides a declared parameter and re-validates the whole file. Throws
  // kValidationError for undeclared names; on any error the scenario keeps
  // its previous parameter values.
  void set_param(const std::string &key, const std::string &value);
  void set_proc_delay(DurationUs delay);
  DurationUs proc_delay() const;
  TimeUs duration() const;

  ScenarioRun run() const;

  struct Spec;  // parsed form, private to the implementation

 private:
  Scenario(std::string text, std::string origin);
  void rebuild();

  std::string text_;
  std::string origin_;
  std::map<std::string, std::string> params_;
  std::optional<DurationUs> proc_delay_override_;
  std::unique_ptr<Spec> spec_;
};

// Writes trace.csv and summary.csv into `dir`, creating it if needed.
void write_run(const ScenarioRun &run, const std::filesystem::path &dir);
std::string trace_csv(const Trace &trace);
std::string summary_csv(const Summary &summary);

}  // namespace fastreact
