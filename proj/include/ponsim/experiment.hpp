#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ponsim/dba.hpp"
#include "ponsim/kernel.hpp"
#include "ponsim/metrics.hpp"
#include "ponsim/model.hpp"

namespace ponsim {

struct PolicyChoice {
  Framework framework;
  Sizing sizing;
  Reporting reporting;
};

/// Maximum cycle lengths swept by default.
inline const std::vector<SimTime> kStudiedCycleLengths{SimTime::ms(2), SimTime::ms(4),
                                                     SimTime::ms(8)};

struct ExperimentSpec {
  Standard standard = Standard::Epon1G;
  std::vector<SimTime> max_cycles = kStudiedCycleLengths;  // Z values
  std::vector<std::size_t> onus{32};
  RangeProfile range = RangeProfile::LongReach100km;
  std::vector<PolicyChoice> policies;
  std::vector<double> loads;  // fractions of the line rate, in (0, 1)
  std::vector<std::uint64_t> seeds;  // explicit list; else seed_base + i
  unsigned replications = 1;
  std::uint64_t seed_base = 1;

  SimTime duration = SimTime::s(60);
  std::uint64_t max_packets = 2'000'000;
  double warmup = 0.1;
  double hurst = 0.75;
  unsigned sources_per_onu = 32;
  SimTime mean_on = TrafficConfig{}.mean_on;
  double duty_cycle = TrafficConfig{}.duty_cycle;
  unsigned t_tune = 5;
  std::string output = "results";

  std::vector<std::string> warnings;  // accepted but noteworthy values

  /// Seeds used for every (policy, load) point.
  std::vector<std::uint64_t> run_seeds() const;
  /// Throws ConfigError (line 0) if the experiment cannot run.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError with
/// the offending line number.
ExperimentSpec parse_config(std::string_view text);
/// Reads and parses a config file; IoError if unreadable.
ExperimentSpec load_config(const std::filesystem::path& path);

/// One simulation instance of a sweep.
RunConfig make_run_config(const ExperimentSpec& spec, const PolicyChoice& policy, SimTime z,
                          std::size_t onus, double load, std::uint64_t seed);

struct ResultRow {
  std::string policy;  // DbaPolicy::label()
  Reporting reporting;
  double load;
  RunSummary summary;  // merged over seeds
};

struct ResultTable {
  Standard standard;
  SimTime max_cycle;
  std::size_t onus;
  std::vector<ResultRow> rows;  // sorted by (policy, load, reporting)
};

/// Runs every (Z, O, policy, load, seed) instance on `jobs` workers and
/// merges replications. Deterministic regardless of `jobs`.
std::vector<ResultTable> run_sweep(const ExperimentSpec& spec, unsigned jobs);

/// "results_<std>_Z<ms>[_O<n>].csv"; the O suffix appears when the experiment
/// sweeps several ONU counts.
std::string results_file_name(Standard s, SimTime z, std::size_t onus, bool with_onus);

inline constexpr std::string_view kResultsHeader =
    "policy,reporting,load,mean_delay_s,ci_delay,mean_idle_s,ci_idle,mean_cycle_s,"
    "mean_window_s,seed_count,saturated";

void write_results_csv(std::ostream& out, const ResultTable& table);

/// run_sweep, then one CSV per table under `out_dir`. Returns the paths.
/// Throws IoError when the directory or a file cannot be written.
std::vector<std::filesystem::path> run_experiment(const ExperimentSpec& spec, unsigned jobs,
                                                  const std::filesystem::path& out_dir);

/// Splits a results CSV into `load mean ci` files, one per (metric, policy,
/// reporting) with metric in {delay, idle}. Throws SchemaError on missing
/// columns; an empty CSV yields no files and a warning.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& csv,
                                                 const std::filesystem::path& out_dir,
                                                 std::vector<std::string>* warnings = nullptr);

/// "2", "2.5" etc: Z in milliseconds without trailing zeros.
std::string format_ms(SimTime t);

}  // namespace ponsim
