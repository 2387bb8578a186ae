#include "fastreact/fastreact.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "fastreact/error.hpp"
#include "fastreact/footprint.hpp"
#include "fastreact/logic.hpp"
#include "fastreact/scenario.hpp"

struct fr_scenario {
  fastreact::Scenario scenario;
};

struct fr_run {
  std::string trace_csv;
  std::string summary_csv;
  fastreact::ScenarioRun run;
};

namespace {

thread_local std::string g_last_error;

fr_status status_of(fastreact::Errc code) {
  using fastreact::Errc;
  switch (code) {
    case Errc::kCapacityExceeded: return FR_ERR_CAPACITY;
    case Errc::kParseError: return FR_ERR_PARSE;
    case Errc::kAlreadyConfigured:
    case Errc::kUnknownSwitch:
    case Errc::kUnknownSensor:
    case Errc::kUnknownNode:
    case Errc::kInvalidRate:
    case Errc::kValidationError: return FR_ERR_VALIDATION;
    case Errc::kInvalidArgument: return FR_ERR_INVALID_ARGUMENT;
    case Errc::kOverflow: return FR_ERR_OVERFLOW;
    case Errc::kIo: return FR_ERR_IO;
  }
  return FR_ERR_INTERNAL;
}

fr_status fail(fr_status status, const char *message) {
  g_last_error = message;
  return status;
}

template <class F>
fr_status guarded(F &&f) {
  try {
    return f();
  } catch (const fastreact::Error &e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(FR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(FR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FR_ERR_INTERNAL, "unknown exception");
  }
}

}  // namespace

extern "C" {

const char *fr_version(void) { return "0.1.0"; }

const char *fr_status_string(fr_status status) {
  switch (status) {
    case FR_OK: return "ok";
    case FR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FR_ERR_PARSE: return "parse error";
    case FR_ERR_VALIDATION: return "validation error";
    case FR_ERR_CAPACITY: return "capacity exceeded";
    case FR_ERR_IO: return "i/o error";
    case FR_ERR_OVERFLOW: return "arithmetic overflow";
    case FR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *fr_last_error(void) { return g_last_error.c_str(); }

fr_status fr_scenario_open(const char *path, fr_scenario **out) {
  if (path == nullptr || out == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "path and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    *out = new fr_scenario{fastreact::Scenario::from_file(path)};
    return FR_OK;
  });
}

fr_status fr_scenario_from_string(const char *text, const char *origin,
                                  fr_scenario **out) {
  if (text == nullptr || out == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "text and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    *out = new fr_scenario{fastreact::Scenario::from_string(
        text, origin != nullptr ? origin : "<string>")};
    return FR_OK;
  });
}

void fr_scenario_close(fr_scenario *scenario) { delete scenario; }

const char *fr_scenario_name(const fr_scenario *scenario) {
  return scenario != nullptr ? scenario->scenario.name().c_str() : nullptr;
}

fr_status fr_scenario_set_param(fr_scenario *scenario, const char *key,
                                const char *value) {
  if (scenario == nullptr || key == nullptr || value == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "arguments must be non-null");
  }
  return guarded([&] {
    scenario->scenario.set_param(key, value);
    return FR_OK;
  });
}

fr_status fr_scenario_set_proc_delay_us(fr_scenario *scenario,
                                        uint64_t delay_us) {
  if (scenario == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "scenario must be non-null");
  }
  scenario->scenario.set_proc_delay(delay_us);
  return FR_OK;
}

fr_status fr_scenario_run(const fr_scenario *scenario, fr_run **out) {
  if (scenario == nullptr || out == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "scenario and out must be non-null");
  }
  *out = nullptr;
  return guarded([&] {
    auto *run = new fr_run{};
    run->run = scenario->scenario.run();
    run->trace_csv = fastreact::trace_csv(run->run.trace);
    run->summary_csv = fastreact::summary_csv(run->run.summary);
    *out = run;
    return FR_OK;
  });
}

void fr_run_free(fr_run *run) { delete run; }

fr_status fr_run_write(const fr_run *run, const char *out_dir) {
  if (run == nullptr || out_dir == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "run and out_dir must be non-null");
  }
  return guarded([&] {
    fastreact::write_run(run->run, out_dir);
    return FR_OK;
  });
}

const char *fr_run_trace_csv(const fr_run *run) {
  return run != nullptr ? run->trace_csv.c_str() : nullptr;
}

const char *fr_run_summary_csv(const fr_run *run) {
  return run != nullptr ? run->summary_csv.c_str() : nullptr;
}

fr_status fr_footprint_compute(const fr_footprint_params *params,
                               fr_footprint *out) {
  if (params == nullptr || out == nullptr) {
    return fail(FR_ERR_INVALID_ARGUMENT, "params and out must be non-null");
  }
  return guarded([&] {
    fastreact::FootprintParams p;
    p.sensors = params->sensors;
    p.history = params->history;
    p.conj_cols = params->conj_cols;
    p.disj_rows = params->disj_rows;
    p.disj_cols = params->disj_cols;
    p.value_bits = params->value_bits;
    p.ts_bits = params->ts_bits;
    p.ports = params->ports;
    const fastreact::Footprint f = fastreact::footprint(p);
    *out = fr_footprint{f.conjunctive, f.disjunctive, f.timeseries, f.misc};
    return FR_OK;
  });
}

fr_status fr_expr_to_cnf(const char *expr, uint32_t max_conjuncts,
                         uint32_t max_disjuncts, char *buf, size_t len,
                         size_t *needed) {
  if (expr == nullptr || (buf == nullptr && len != 0)) {
    return fail(FR_ERR_INVALID_ARGUMENT, "expr must be non-null");
  }
  return guarded([&] {
    const fastreact::Cnf cnf =
        fastreact::to_cnf(fastreact::parse_expr(expr),
                          fastreact::CnfLimits{max_conjuncts, max_disjuncts});
    const std::string text = fastreact::to_string(cnf);
    if (needed != nullptr) *needed = text.size() + 1;
    if (len < text.size() + 1) {
      return fail(FR_ERR_CAPACITY, "output buffer too small");
    }
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return FR_OK;
  });
}

}  // extern "C"
