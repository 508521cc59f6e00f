#include "ponsim/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "ponsim/errors.hpp"

namespace ponsim {

namespace {

constexpr std::array<double, 30> kT95{
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

__extension__ using u128 = unsigned __int128;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Half-width of the t interval around the mean of `xs`.
double spread_half_width(const std::vector<double>& xs) {
  const std::size_t k = xs.size();
  if (k < 2) return kNaN;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  return t_quantile_95(k - 1) * sd / std::sqrt(static_cast<double>(k));
}

}  // namespace

double t_quantile_95(std::size_t df) {
  if (df == 0) throw InvalidInputs("t quantile needs at least one degree of freedom");
  if (df <= kT95.size()) return kT95[df - 1];
  return 1.960;
}

Interval confidence_interval(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidInputs("confidence interval needs at least two samples");
  const std::size_t k = std::min<std::size_t>(10, n);
  std::vector<double> means(k, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t lo = b * n / k;
    const std::size_t hi = (b + 1) * n / k;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += samples[i];
    total += s;
    means[b] = s / static_cast<double>(hi - lo);
  }
  const double mean = total / static_cast<double>(n);
  const double h = spread_half_width(means);
  return {mean - h, mean + h};
}

BatchMeans::BatchMeans(SimTime start, SimTime end, unsigned batches)
    : start_(start), end_(end), sum_(batches, 0.0), n_(batches, 0) {
  if (batches == 0) throw InvalidInputs("at least one batch is required");
  if (end <= start) throw InvalidInputs("statistics window is empty");
}

void BatchMeans::add(SimTime at, double value) {
  if (at < start_ || at >= end_) return;
  const u128 off = (at - start_).count();
  const auto b = static_cast<std::size_t>(off * sum_.size() / (end_ - start_).count());
  sum_[b] += value;
  ++n_[b];
  total_ += value;
  ++count_;
}

double BatchMeans::mean() const noexcept {
  return count_ == 0 ? kNaN : total_ / static_cast<double>(count_);
}

std::vector<double> BatchMeans::batch_means() const {
  std::vector<double> out(sum_.size(), kNaN);
  for (std::size_t b = 0; b < sum_.size(); ++b)
    if (n_[b] > 0) out[b] = sum_[b] / static_cast<double>(n_[b]);
  return out;
}

double BatchMeans::half_width() const {
  std::vector<double> filled;
  for (double m : batch_means())
    if (!std::isnan(m)) filled.push_back(m);
  return spread_half_width(filled);
}

MetricsCollector::MetricsCollector(SimTime start, SimTime end, unsigned batches)
    : delay_(start, end, batches),
      idle_(start, end, batches),
      cycle_(start, end, batches),
      window_(start, end, batches) {}

void MetricsCollector::add_delay(SimTime delivered, SimTime delay) {
  delay_.add(delivered, delay.seconds());
}

void MetricsCollector::add_record(const TransmissionRecord& r) {
  idle_.add(r.alpha, r.idle.seconds());
  window_.add(r.alpha, (r.beta - r.alpha).seconds());
  if (r.slot != 1) return;
  if (last_cycle_start_.size() < r.thread) last_cycle_start_.resize(r.thread);
  std::optional<SimTime>& last = last_cycle_start_[r.thread - 1];
  if (last) cycle_.add(r.gamma, (r.gamma - *last).seconds());
  last = r.gamma;
}

RunSummary MetricsCollector::summary(bool saturated) const {
  if (idle_.count() == 0) throw EmptySummary("no transmission fell inside the statistics window");
  RunSummary s;
  s.mean_delay = delay_.count() ? delay_.mean() : 0.0;
  s.mean_idle = idle_.mean();
  s.mean_cycle_len = cycle_.count() ? cycle_.mean() : 0.0;
  s.mean_window_len = window_.mean();
  s.ci_delay = delay_.half_width();
  s.ci_idle = idle_.half_width();
  s.ci_cycle_len = cycle_.half_width();
  s.ci_window_len = window_.half_width();
  s.delay_samples = delay_.count();
  s.idle_samples = idle_.count();
  s.cycle_samples = cycle_.count();
  s.window_samples = window_.count();
  s.saturated = saturated;
  return s;
}

RunSummary summarize(const std::vector<TransmissionRecord>& records,
                     const std::vector<Packet>& packets, SimTime start, SimTime end,
                     unsigned batches) {
  MetricsCollector c(start, end, batches);
  for (const auto& r : records) c.add_record(r);
  for (const auto& p : packets)
    if (p.t_delivered) c.add_delay(*p.t_delivered, *p.t_delivered - p.t_gen);
  return c.summary(false);
}

RunSummary merge(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw EmptySummary("nothing to merge");
  if (runs.size() == 1) return runs.front();

  RunSummary out;
  out.replications = runs.size();
  auto combine = [&](double RunSummary::*mean, double RunSummary::*ci) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    double sum = 0.0;
    for (const auto& r : runs) {
      xs.push_back(r.*mean);
      sum += r.*mean;
    }
    out.*mean = sum / static_cast<double>(runs.size());
    out.*ci = spread_half_width(xs);
  };
  combine(&RunSummary::mean_delay, &RunSummary::ci_delay);
  combine(&RunSummary::mean_idle, &RunSummary::ci_idle);
  combine(&RunSummary::mean_cycle_len, &RunSummary::ci_cycle_len);
  combine(&RunSummary::mean_window_len, &RunSummary::ci_window_len);
  for (const auto& r : runs) {
    out.delay_samples += r.delay_samples;
    out.idle_samples += r.idle_samples;
    out.cycle_samples += r.cycle_samples;
    out.window_samples += r.window_samples;
    out.saturated = out.saturated || r.saturated;
  }
  return out;
}

}  // namespace ponsim
