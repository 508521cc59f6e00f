#include "ponsim/traffic.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "ponsim/errors.hpp"

namespace ponsim {

double mean_packet_bytes(const std::vector<SizeClass>& mix) {
  double sum = 0.0;
  for (const auto& c : mix) sum += static_cast<double>(c.bytes) * c.weight;
  return sum / kPmfDenominator;
}

double SourceParams::analytic_rate_bps() const noexcept {
  if (mean_on_ps + mean_off_ps <= 0.0) return 0.0;
  return peak_bps * mean_on_ps / (mean_on_ps + mean_off_ps);
}

Calibration calibrate(const TrafficConfig& config, std::size_t onus, BitRate line_rate) {
  if (onus == 0) throw InvalidInputs("traffic needs at least one ONU");
  if (!(config.hurst > 0.5 && config.hurst < 1.0))
    throw InvalidInputs("Hurst parameter must lie in (0.5, 1)");
  if (!(config.load_bps >= 0.0) || !std::isfinite(config.load_bps))
    throw InvalidInputs("load must be a finite non-negative bit rate");
  if (config.sources_per_onu == 0) throw InvalidInputs("sources_per_onu must be positive");
  if (!(config.duty_cycle > 0.0 && config.duty_cycle <= 1.0))
    throw InvalidInputs("duty cycle must lie in (0, 1]");
  if (config.mean_on == SimTime::zero()) throw InvalidInputs("mean ON period must be positive");

  std::uint64_t weight_sum = 0;
  for (const auto& c : config.size_mix) {
    if (c.bytes == 0) throw InvalidInputs("packet sizes must be positive");
    weight_sum += c.weight;
  }
  if (config.size_mix.empty() || weight_sum != kPmfDenominator)
    throw InvalidInputs("packet size mix must sum to 1");

  std::vector<double> weights = config.onu_weights;
  if (weights.empty()) weights.assign(onus, 1.0 / static_cast<double>(onus));
  if (weights.size() != onus) throw InvalidInputs("one traffic weight per ONU is required");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidInputs("traffic weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw InvalidInputs("traffic weights must sum to 1");

  Calibration cal;
  cal.sources_per_onu = config.sources_per_onu;
  cal.mean_packet_bytes = mean_packet_bytes(config.size_mix);
  const double shape = 3.0 - 2.0 * config.hurst;
  const double mean_on = static_cast<double>(config.mean_on.count());
  const double duty = config.duty_cycle;

  for (std::size_t o = 0; o < onus; ++o) {
    const double onu_rate = config.load_bps * weights[o];
    SourceParams p;
    p.shape = shape;
    p.mean_rate_bps = onu_rate / config.sources_per_onu;
    p.peak_bps = p.mean_rate_bps / duty;
    p.mean_on_ps = mean_on;
    p.mean_off_ps = mean_on * (1.0 - duty) / duty;
    p.on_scale_ps = p.mean_on_ps * (shape - 1.0) / shape;
    p.off_scale_ps = p.mean_off_ps * (shape - 1.0) / shape;
    cal.onu_rate_bps.push_back(onu_rate);
    cal.onu_sources.push_back(p);
    if (p.active()) cal.predicted_load_bps += p.analytic_rate_bps() * config.sources_per_onu;
  }

  if (config.load_bps >= static_cast<double>(line_rate)) {
    cal.overload = true;
    cal.warning = "offered load is not below the line rate; queues grow without bound";
  }
  return cal;
}

PacketSource::PacketSource(std::uint32_t onu, const SourceParams& params, unsigned sources,
                           const std::vector<SizeClass>& mix, std::uint64_t seed)
    : onu_(onu), params_(params), mix_(mix), rng_(seed) {
  std::uint32_t acc = 0;
  for (const auto& c : mix_) cumulative_.push_back(acc += c.weight);
  if (!params_.active()) return;

  // Each sub-source starts in its stationary state: ON with probability
  // equal to the duty cycle, with an equilibrium residual sojourn. Starting
  // from a fresh OFF period instead biases the rate upward for a long time
  // because the residual of a Pareto(1.5) sojourn has an infinite mean.
  const double duty = params_.mean_on_ps / (params_.mean_on_ps + params_.mean_off_ps);
  subs_.resize(sources);
  for (std::uint32_t k = 0; k < sources; ++k) {
    SubSource& s = subs_[k];
    if (uniform01(rng_) < duty) {
      s.on_left_ps = draw_residual(params_.on_scale_ps);
    } else {
      s.clock_ps = draw_residual(params_.off_scale_ps);
      s.on_left_ps = draw_pareto(params_.on_scale_ps);
    }
    advance(s);
    heap_.emplace(s.pending_time.count(), k);
  }
}

double PacketSource::draw_pareto(double scale) {
  if (scale <= 0.0) return 0.0;
  return scale * std::pow(uniform_open0(rng_), -1.0 / params_.shape);
}

double PacketSource::draw_residual(double scale) {
  // Equilibrium density F(x > t) / mean: uniform on [0, scale] with weight
  // (shape - 1) / shape, else a Pareto tail of index shape - 1.
  if (scale <= 0.0) return 0.0;
  const double shape = params_.shape;
  if (uniform01(rng_) < (shape - 1.0) / shape) return scale * uniform01(rng_);
  return scale * std::pow(uniform_open0(rng_), -1.0 / (shape - 1.0));
}

std::uint32_t PacketSource::draw_size() {
  const auto u = static_cast<std::uint32_t>(rng_() % kPmfDenominator);
  for (std::size_t i = 0; i < cumulative_.size(); ++i)
    if (u < cumulative_[i]) return mix_[i].bytes;
  return mix_.back().bytes;
}

void PacketSource::advance(SubSource& s) {
  const std::uint32_t size = draw_size();
  double need = static_cast<double>(size) * 8.0 * 1e12 / params_.peak_bps;
  while (need > s.on_left_ps) {
    need -= s.on_left_ps;
    s.clock_ps += s.on_left_ps;
    s.clock_ps += draw_pareto(params_.off_scale_ps);
    s.on_left_ps = draw_pareto(params_.on_scale_ps);
  }
  s.clock_ps += need;
  s.on_left_ps -= need;
  s.pending_size = size;
  s.pending_time = SimTime::ticks(static_cast<SimTime::rep>(std::llround(s.clock_ps)));
}

SimTime PacketSource::peek() const noexcept {
  return heap_.empty() ? SimTime::max() : SimTime::ticks(heap_.top().first);
}

Arrival PacketSource::next_arrival() {
  const std::uint32_t k = heap_.top().second;
  heap_.pop();
  SubSource& s = subs_[k];
  Arrival a{s.pending_time, s.pending_size};
  advance(s);
  heap_.emplace(s.pending_time.count(), k);
  return a;
}

std::vector<PacketSource> make_sources(const TrafficConfig& config, const Calibration& cal) {
  std::vector<PacketSource> out;
  out.reserve(cal.onu_sources.size());
  for (std::size_t o = 0; o < cal.onu_sources.size(); ++o)
    out.emplace_back(static_cast<std::uint32_t>(o), cal.onu_sources[o], cal.sources_per_onu,
                     config.size_mix, derive_seed(config.seed, {kTrafficStream, o}));
  return out;
}

std::uint64_t write_traffic_trace(std::ostream& out, const TrafficConfig& config,
                                  std::size_t onus, BitRate line_rate, SimTime horizon) {
  const Calibration cal = calibrate(config, onus, line_rate);
  std::vector<PacketSource> sources = make_sources(config, cal);
  using Entry = std::pair<SimTime::rep, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::uint32_t o = 0; o < sources.size(); ++o)
    if (sources[o].active()) heap.emplace(sources[o].peek().count(), o);

  out << "t_gen_ps,onu,size_bytes\n";
  std::uint64_t rows = 0;
  while (!heap.empty() && heap.top().first < horizon.count()) {
    const std::uint32_t o = heap.top().second;
    heap.pop();
    const Arrival a = sources[o].next_arrival();
    out << a.t_gen.count() << ',' << o << ',' << a.size << '\n';
    ++rows;
    heap.emplace(sources[o].peek().count(), o);
  }
  if (!out) throw IoError("failed writing traffic trace");
  return rows;
}

}  // namespace ponsim
