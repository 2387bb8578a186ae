// fastreact: run scenario files, sweep parameters, size switch memory.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fastreact/fastreact.h"

namespace fs = std::filesystem;

namespace {

struct ScenarioHandle {
  fr_scenario *ptr = nullptr;
  ~ScenarioHandle() { fr_scenario_close(ptr); }
};

struct RunHandle {
  fr_run *ptr = nullptr;
  ~RunHandle() { fr_run_free(ptr); }
};

bool check(fr_status st) {
  if (st == FR_OK) return true;
  std::cerr << "fastreact: " << fr_last_error() << '\n';
  return false;
}

bool apply_settings(fr_scenario *s, const std::vector<std::string> &sets,
                    const std::optional<std::uint64_t> &proc_delay) {
  for (const std::string &kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "fastreact: --set expects key=value, got '" << kv << "'\n";
      return false;
    }
    if (!check(fr_scenario_set_param(s, kv.substr(0, eq).c_str(),
                                     kv.substr(eq + 1).c_str()))) {
      return false;
    }
  }
  if (proc_delay && !check(fr_scenario_set_proc_delay_us(s, *proc_delay))) {
    return false;
  }
  return true;
}

int cmd_run(const std::string &file, const std::string &out,
            const std::vector<std::string> &sets,
            const std::optional<std::uint64_t> &proc_delay,
            std::uint64_t seed) {
  ScenarioHandle s;
  if (!check(fr_scenario_open(file.c_str(), &s.ptr))) return 1;
  if (!apply_settings(s.ptr, sets, proc_delay)) return 1;
  RunHandle r;
  if (!check(fr_scenario_run(s.ptr, &r.ptr))) return 1;
  const fs::path dir = out.empty() ? fs::path("out") / fr_scenario_name(s.ptr)
                                   : fs::path(out);
  if (!check(fr_run_write(r.ptr, dir.string().c_str()))) return 1;
  // The simulation draws no random numbers; the seed is only recorded.
  std::cout << "scenario " << fr_scenario_name(s.ptr) << " (seed " << seed
            << ")\n"
            << "wrote " << (dir / "trace.csv").string() << '\n'
            << "wrote " << (dir / "summary.csv").string() << '\n'
            << fr_run_summary_csv(r.ptr);
  return 0;
}

std::vector<std::string> split_values(const std::string &csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_sweep(const std::string &file, const std::string &out,
              const std::vector<std::string> &params,
              const std::vector<std::string> &values,
              const std::optional<std::uint64_t> &proc_delay) {
  if (params.empty() || params.size() != values.size()) {
    std::cerr << "fastreact: give one --values list per --param\n";
    return 2;
  }
  std::vector<std::vector<std::string>> grid;
  for (const std::string &v : values) {
    grid.push_back(split_values(v));
    if (grid.back().empty()) {
      std::cerr << "fastreact: empty --values list\n";
      return 2;
    }
  }

  ScenarioHandle s;
  if (!check(fr_scenario_open(file.c_str(), &s.ptr))) return 1;
  if (!apply_settings(s.ptr, {}, proc_delay)) return 1;
  const fs::path root =
      out.empty() ? fs::path("out") / (std::string(fr_scenario_name(s.ptr)) +
                                       "-sweep")
                  : fs::path(out);

  std::ostringstream combined;
  for (const std::string &p : params) combined << p << ',';
  combined << "metric,node,sensor,value\n";

  // Odometer over the cartesian product, last parameter fastest.
  std::vector<std::size_t> idx(grid.size(), 0);
  bool done = false;
  while (!done) {
    std::string label;
    std::string prefix;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string &v = grid[i][idx[i]];
      if (!check(fr_scenario_set_param(s.ptr, params[i].c_str(), v.c_str()))) {
        return 1;
      }
      label += (i ? "_" : "") + params[i] + "=" + v;
      prefix += v + ",";
    }
    RunHandle r;
    if (!check(fr_scenario_run(s.ptr, &r.ptr))) return 1;
    if (!check(fr_run_write(r.ptr, (root / label).string().c_str()))) {
      return 1;
    }
    std::istringstream summary(fr_run_summary_csv(r.ptr));
    std::string line;
    std::getline(summary, line);  // header
    while (std::getline(summary, line)) combined << prefix << line << '\n';
    std::cout << "ran " << label << '\n';

    std::size_t k = grid.size();
    while (true) {
      if (k == 0) {
        done = true;
        break;
      }
      --k;
      if (++idx[k] < grid[k].size()) break;
      idx[k] = 0;
    }
  }

  const fs::path sweep_csv = root / "sweep.csv";
  std::ofstream os(sweep_csv, std::ios::binary | std::ios::trunc);
  os << combined.str();
  if (!os) {
    std::cerr << "fastreact: cannot write " << sweep_csv.string() << '\n';
    return 1;
  }
  std::cout << "wrote " << sweep_csv.string() << '\n';
  return 0;
}

int cmd_footprint(const fr_footprint_params &p) {
  fr_footprint f{};
  if (!check(fr_footprint_compute(&p, &f))) return 1;
  const struct {
    const char *name;
    std::uint64_t bits;
  } rows[] = {{"conjunctive", f.conjunctive_bits},
              {"disjunctive", f.disjunctive_bits},
              {"timeseries", f.timeseries_bits},
              {"misc", f.misc_bits}};
  std::printf("%-12s %16s %16s\n", "table", "bits", "bytes");
  for (const auto &r : rows) {
    std::printf("%-12s %16llu %16llu\n", r.name,
                static_cast<unsigned long long>(r.bits),
                static_cast<unsigned long long>((r.bits + 7) / 8));
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"FastReact data plane simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fr_version());

  std::string file;
  std::string out;
  std::vector<std::string> sets;
  std::uint64_t proc_delay_us = 0;
  std::uint64_t seed = 0;

  auto *run = app.add_subcommand("run", "run one scenario file");
  run->add_option("scenario", file, "scenario file")->required();
  run->add_option("--out", out, "output directory (default out/<name>)");
  auto *run_delay = run->add_option("--proc-delay-us", proc_delay_us,
                                    "per-switch processing delay");
  run->add_option("--seed", seed, "recorded in the output; runs are "
                                  "deterministic");
  run->add_option("--set", sets, "override a [params] entry, key=value");

  std::vector<std::string> params;
  std::vector<std::string> values;
  auto *sweep = app.add_subcommand("sweep", "run a scenario over a grid");
  sweep->add_option("scenario", file, "scenario file")->required();
  sweep->add_option("--param", params, "parameter name (repeatable)")
      ->required();
  sweep->add_option("--values", values, "comma separated values, one list "
                                        "per --param")
      ->required();
  sweep->add_option("--out", out, "output root (default out/<name>-sweep)");
  auto *sweep_delay = sweep->add_option("--proc-delay-us", proc_delay_us,
                                        "per-switch processing delay");

  fr_footprint_params fp{5000, 100, 5, 25000, 5, 16, 48, 24};
  auto *foot = app.add_subcommand("footprint", "switch register memory");
  foot->add_option("--sensors", fp.sensors, "sensor count")->capture_default_str();
  foot->add_option("--history", fp.history, "samples per sensor")->capture_default_str();
  foot->add_option("--ccols", fp.conj_cols, "conjunctive columns")->capture_default_str();
  foot->add_option("--drows", fp.disj_rows, "disjunctive rows")->capture_default_str();
  foot->add_option("--dcols", fp.disj_cols, "disjunctive columns")->capture_default_str();
  foot->add_option("--sz-sen", fp.value_bits, "value width in bits")->capture_default_str();
  foot->add_option("--sz-ts", fp.ts_bits, "timestamp width in bits")->capture_default_str();
  foot->add_option("--ports", fp.ports, "switch ports")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(file, out, sets,
                   run_delay->count() ? std::optional(proc_delay_us)
                                      : std::nullopt,
                   seed);
  }
  if (sweep->parsed()) {
    return cmd_sweep(file, out, params, values,
                     sweep_delay->count() ? std::optional(proc_delay_us)
                                          : std::nullopt);
  }
  return cmd_footprint(fp);
}
