// ponsim: command-line front end for sweeps, single runs and idle analysis.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ponsim/errors.hpp"
#include "ponsim/experiment.hpp"
#include "ponsim/idle.hpp"
#include "ponsim/kernel.hpp"
#include "ponsim/log.hpp"
#include "ponsim/traffic.hpp"

namespace {

using namespace ponsim;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

SimTime duration_arg(const std::string& name, const std::string& text) {
  if (text == "0") return SimTime::zero();
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.back())))
    throw ConfigError(0, name + ": '" + text + "' needs a unit (ps, ns, us, ms, s)");
  try {
    return parse_duration(text);
  } catch (const Error& e) {
    throw ConfigError(0, name + ": " + e.what());
  }
}

template <class T, class F>
T enum_arg(const std::string& name, const std::string& text, F parse) {
  const auto v = parse(text);
  if (!v) throw ConfigError(0, "unknown " + name + " '" + text + "'");
  return *v;
}

json summary_json(const RunSummary& s) {
  return {{"mean_delay_s", s.mean_delay},       {"ci_delay", s.ci_delay},
          {"mean_idle_s", s.mean_idle},         {"ci_idle", s.ci_idle},
          {"mean_cycle_s", s.mean_cycle_len},   {"ci_cycle", s.ci_cycle_len},
          {"mean_window_s", s.mean_window_len}, {"ci_window", s.ci_window_len},
          {"delay_samples", s.delay_samples},   {"idle_samples", s.idle_samples},
          {"replications", s.replications},     {"saturated", s.saturated}};
}

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed_base;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  ExperimentSpec spec = load_config(a.config);
  for (const auto& w : spec.warnings) spdlog::warn("{}", w);
  if (a.seed_base) {
    const std::size_t n = spec.seeds.empty() ? spec.replications : spec.seeds.size();
    spec.seeds.clear();
    spec.seed_base = *a.seed_base;
    spec.replications = static_cast<unsigned>(n);
  }
  const std::filesystem::path out = a.out.empty() ? spec.output : a.out;
  for (const auto& p : run_experiment(spec, a.jobs, out)) std::cout << p.string() << '\n';
  return 0;
}

struct AnalyzeArgs {
  std::string gamma_a, gamma_b, gate_delay, omega, guard = "1us";
  bool as_json = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const IdleInputs in{duration_arg("--gamma-a", a.gamma_a), duration_arg("--gamma-b", a.gamma_b),
                      duration_arg("--T", a.gate_delay), duration_arg("--omega", a.omega),
                      duration_arg("--tg", a.guard)};
  if (in.gamma_b < in.gamma_a) throw ConfigError(0, "--gamma-b must not precede --gamma-a");
  const SimTime i_a = idle_time(in.gamma_a, in.gate_delay, in.omega, in.guard);
  const SimTime i_b = idle_time(in.gamma_b, in.gate_delay, in.omega, in.guard);
  const DeltaIdle d = delta_idle(in);
  if (a.as_json) {
    std::cout << json{{"idle_beginning_ps", i_a.count()},
                      {"idle_end_ps", i_b.count()},
                      {"case", static_cast<int>(d.kind)},
                      {"case_name", to_string(d.kind)},
                      {"delta_ps", d.delta.count()}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "idle (beginning) " << to_string(i_a) << '\n'
              << "idle (end)       " << to_string(i_b) << '\n'
              << "case             " << static_cast<int>(d.kind) << " (" << to_string(d.kind)
              << ")\n"
              << "delta            " << to_string(d.delta) << '\n';
  }
  return 0;
}

struct RunArgs {
  std::string standard = "epon1g", range = "100km";
  std::size_t onus = 32;
  std::string framework = "offline-stp", sizing = "gated", reporting = "end";
  std::string z = "4ms", duration = "60s";
  double load = 0.5;
  std::uint64_t seed = 1, max_packets = 2'000'000;
  bool drain = false;
  std::string trace;
};

int cmd_run(const RunArgs& a) {
  ExperimentSpec spec;
  spec.standard = enum_arg<Standard>("standard", a.standard, parse_standard);
  spec.range = enum_arg<RangeProfile>("range", a.range, parse_range);
  spec.duration = duration_arg("--duration", a.duration);
  spec.max_packets = a.max_packets;
  if (!(a.load > 0.0 && a.load < 1.0)) throw ConfigError(0, "--load must lie in (0, 1)");
  const PolicyChoice p{enum_arg<Framework>("framework", a.framework, parse_framework),
                       enum_arg<Sizing>("sizing", a.sizing, parse_sizing),
                       enum_arg<Reporting>("reporting", a.reporting, parse_reporting)};
  RunConfig rc = make_run_config(spec, p, duration_arg("--Z", a.z), a.onus, a.load, a.seed);
  rc.drain = a.drain;

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) throw IoError("cannot write " + a.trace);
    rc.trace = &trace;
  }
  const RunResult r = run(rc);
  if (trace.is_open() && !trace.flush()) throw IoError("failed writing " + a.trace);

  const RunChecks& c = r.checks;
  json out{{"policy", rc.policy.label()},
           {"reporting", to_string(p.reporting)},
           {"standard", to_string(spec.standard)},
           {"onus", a.onus},
           {"max_cycle", to_string(rc.policy.max_cycle)},
           {"load", a.load},
           {"seed", a.seed},
           {"horizon", to_string(r.horizon)},
           {"warmup", to_string(r.warmup)},
           {"bursts", r.bursts},
           {"max_backlog_bytes", r.max_backlog_bytes},
           {"summary", summary_json(r.summary)},
           {"checks",
            {{"guard_violations", c.guard_violations},
             {"causality_violations", c.causality_violations},
             {"downstream_overlaps", c.downstream_overlaps},
             {"order_violations", c.order_violations},
             {"oracle_mismatches", c.oracle_mismatches},
             {"generated", c.generated},
             {"delivered", c.delivered},
             {"queued", c.queued},
             {"drained", c.drained}}}};
  if (!r.calibration.warning.empty()) out["warning"] = r.calibration.warning;
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct TrafficArgs {
  std::string standard = "epon1g", duration = "1s", out;
  std::size_t onus = 32;
  double load = 0.5;
  std::uint64_t seed = 1;
};

int cmd_traffic(const TrafficArgs& a) {
  const PonProfile profile = PonProfile::make(enum_arg<Standard>("standard", a.standard, parse_standard));
  TrafficConfig tc;
  tc.load_bps = a.load * static_cast<double>(profile.rate);
  tc.seed = a.seed;
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw IoError("cannot write " + a.out);
    out = &file;
  }
  const auto n = write_traffic_trace(*out, tc, a.onus, profile.rate, duration_arg("--duration", a.duration));
  if (!out->flush()) throw IoError("failed writing " + a.out);
  spdlog::info("{} packets", n);
  return 0;
}

struct PlotArgs {
  std::vector<std::string> csv;
  std::string out = ".";
};

int cmd_plotdata(const PlotArgs& a) {
  for (const auto& csv : a.csv) {
    std::vector<std::string> warnings;
    for (const auto& p : emit_plotdata(csv, a.out, &warnings)) std::cout << p.string() << '\n';
    for (const auto& w : warnings) spdlog::warn("{}", w);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Upstream DBA simulator for long-reach PONs"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run a configured sweep and write result CSVs");
  s->add_option("--config", sim.config, "experiment config file")->required();
  s->add_option("--seed-base", sim.seed_base, "first replication seed");
  s->add_option("--jobs", sim.jobs, "parallel simulation instances")->check(CLI::PositiveNumber);
  s->add_option("--out", sim.out, "output directory (default: config 'output')");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "idle time of one burst under both report positions");
  a->add_option("--gamma-a", an.gamma_a, "scheduling instant, reporting at the beginning")->required();
  a->add_option("--gamma-b", an.gamma_b, "scheduling instant, reporting at the end")->required();
  a->add_option("--T", an.gate_delay, "gate signalling delay")->required();
  a->add_option("--omega", an.omega, "end of the previous burst at the OLT")->required();
  a->add_option("--tg", an.guard, "guard time")->capture_default_str();
  a->add_flag("--json", an.as_json);

  RunArgs ra;
  auto* r = app.add_subcommand("run", "one simulation instance; prints a JSON summary");
  r->add_option("--standard", ra.standard)->capture_default_str();
  r->add_option("--range", ra.range)->capture_default_str();
  r->add_option("--onus", ra.onus)->capture_default_str()->check(CLI::PositiveNumber);
  r->add_option("--framework", ra.framework)->capture_default_str();
  r->add_option("--sizing", ra.sizing)->capture_default_str();
  r->add_option("--reporting", ra.reporting)->capture_default_str();
  r->add_option("--Z", ra.z, "maximum cycle length")->capture_default_str();
  r->add_option("--load", ra.load, "fraction of the line rate")->capture_default_str();
  r->add_option("--seed", ra.seed)->capture_default_str();
  r->add_option("--duration", ra.duration)->capture_default_str();
  r->add_option("--max-packets", ra.max_packets, "0 disables")->capture_default_str();
  r->add_flag("--drain", ra.drain, "run until all queues empty");
  r->add_option("--trace", ra.trace, "per-burst CSV trace");

  TrafficArgs ta;
  auto* t = app.add_subcommand("traffic", "write a generated packet trace as CSV");
  t->add_option("--standard", ta.standard)->capture_default_str();
  t->add_option("--onus", ta.onus)->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--load", ta.load)->capture_default_str();
  t->add_option("--seed", ta.seed)->capture_default_str();
  t->add_option("--duration", ta.duration)->capture_default_str();
  t->add_option("--out", ta.out, "file (default stdout)");

  PlotArgs pa;
  auto* p = app.add_subcommand("plotdata", "split result CSVs into per-curve .dat files");
  p->add_option("csv", pa.csv, "results CSV files")->required();
  p->add_option("--out", pa.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*a) return cmd_analyze(an);
    if (*r) return cmd_run(ra);
    if (*t) return cmd_traffic(ta);
    if (*p) return cmd_plotdata(pa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidPolicy& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
