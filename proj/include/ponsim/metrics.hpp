#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ponsim/model.hpp"
#include "ponsim/sim_time.hpp"

namespace ponsim {

/// Two-sided 95% Student-t quantile; df >= 1.
double t_quantile_95(std::size_t df);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% CI of the mean by batch means: the samples are cut, in order, into
/// min(10, n) contiguous batches. Throws InvalidInputs for n < 2.
Interval confidence_interval(const std::vector<double>& samples);

/// Mean and CI half-width over time batches of a window [start, end).
class BatchMeans {
 public:
  BatchMeans(SimTime start, SimTime end, unsigned batches);

  /// Samples stamped outside the window are ignored.
  void add(SimTime at, double value);
  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept;
  /// NaN when fewer than two batches hold samples.
  double half_width() const;
  /// Per-batch means, NaN for empty batches.
  std::vector<double> batch_means() const;

 private:
  SimTime start_;
  SimTime end_;
  std::vector<double> sum_;
  std::vector<std::uint64_t> n_;
  double total_ = 0.0;
  std::uint64_t count_ = 0;
};

/// All means and half-widths are in seconds.
struct RunSummary {
  double mean_delay = 0.0;
  double mean_idle = 0.0;
  double mean_cycle_len = 0.0;
  double mean_window_len = 0.0;
  double ci_delay = 0.0;
  double ci_idle = 0.0;
  double ci_cycle_len = 0.0;
  double ci_window_len = 0.0;
  std::uint64_t delay_samples = 0;
  std::uint64_t idle_samples = 0;
  std::uint64_t cycle_samples = 0;
  std::uint64_t window_samples = 0;
  std::size_t replications = 1;
  bool saturated = false;
};

/// Streaming accumulator for one run. Idle and window samples are stamped at
/// α, delays at delivery, cycle lengths at the slot-1 scheduling instant that
/// closes them.
class MetricsCollector {
 public:
  MetricsCollector(SimTime start, SimTime end, unsigned batches = 10);

  void add_delay(SimTime delivered, SimTime delay);
  void add_record(const TransmissionRecord& r);
  /// Throws EmptySummary if no burst fell inside the window.
  RunSummary summary(bool saturated) const;

  const BatchMeans& delay() const noexcept { return delay_; }
  const BatchMeans& idle() const noexcept { return idle_; }

 private:
  BatchMeans delay_;
  BatchMeans idle_;
  BatchMeans cycle_;
  BatchMeans window_;
  std::vector<std::optional<SimTime>> last_cycle_start_;  // per thread
};

/// Summary of explicit record and packet lists over [start, end).
RunSummary summarize(const std::vector<TransmissionRecord>& records,
                     const std::vector<Packet>& packets, SimTime start, SimTime end,
                     unsigned batches = 10);

/// Combines independent replications. With two or more, each mean is the
/// average of the replication means and the CI comes from their spread; a
/// single summary is returned unchanged. Throws EmptySummary for none.
RunSummary merge(const std::vector<RunSummary>& runs);

}  // namespace ponsim
