#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <queue>
#include <string>
#include <vector>

#include "ponsim/model.hpp"
#include "ponsim/rng.hpp"
#include "ponsim/sim_time.hpp"

namespace ponsim {

/// Packet-size mix. Weights are integers out of kPmfDenominator so the mix
/// sums to one exactly.
struct SizeClass {
  std::uint32_t bytes;
  std::uint32_t weight;
};

inline constexpr std::uint32_t kPmfDenominator = 10'000;

/// 60% 64 B, 4% 300 B, 11% 580 B, 25% 1518 B.
inline constexpr std::array<SizeClass, 4> kDefaultSizeMix{{
    {64, 6000}, {300, 400}, {580, 1100}, {1518, 2500}}};

double mean_packet_bytes(const std::vector<SizeClass>& mix);

struct TrafficConfig {
  double hurst = 0.75;
  double load_bps = 0.0;             // aggregate payload over all ONUs
  std::vector<double> onu_weights;   // empty: uniform split
  std::vector<SizeClass> size_mix{kDefaultSizeMix.begin(), kDefaultSizeMix.end()};
  unsigned sources_per_onu = 32;
  std::uint64_t seed = 1;
  // Mean ON sojourn of every sub-source, and the fraction of time it is ON.
  SimTime mean_on = SimTime::us(300);
  double duty_cycle = 0.05;
};

/// On/off parameters of each sub-source feeding one ONU.
struct SourceParams {
  double mean_rate_bps = 0.0;  // long-run rate of one sub-source
  double peak_bps = 0.0;       // emission rate while ON
  double shape = 1.5;          // Pareto tail index of ON and OFF sojourns
  double mean_on_ps = 0.0;
  double mean_off_ps = 0.0;
  double on_scale_ps = 0.0;    // Pareto minimum of ON sojourns
  double off_scale_ps = 0.0;

  bool active() const noexcept { return mean_rate_bps > 0.0; }
  /// Closed-form long-run rate: peak * E[on] / (E[on] + E[off]).
  double analytic_rate_bps() const noexcept;
};

struct Calibration {
  std::vector<double> onu_rate_bps;
  std::vector<SourceParams> onu_sources;
  unsigned sources_per_onu = 0;
  double predicted_load_bps = 0.0;  // sum of analytic sub-source rates
  double mean_packet_bytes = 0.0;
  bool overload = false;            // load >= line rate: queues cannot be stable
  std::string warning;
};

/// Validates `config` and derives per-sub-source on/off parameters.
/// Throws InvalidInputs on malformed weights, size mix or Hurst value.
Calibration calibrate(const TrafficConfig& config, std::size_t onus, BitRate line_rate);

struct Arrival {
  SimTime t_gen;
  std::uint32_t size = 0;
};

/// Superposition of the on/off sub-sources of one ONU. While ON a
/// sub-source emits bits at its peak rate; a packet arrives when its last
/// bit has been emitted, so a packet may straddle several ON periods.
class PacketSource {
 public:
  PacketSource(std::uint32_t onu, const SourceParams& params, unsigned sources,
               const std::vector<SizeClass>& mix, std::uint64_t seed);

  std::uint32_t onu() const noexcept { return onu_; }
  bool active() const noexcept { return !heap_.empty(); }
  /// Generation instant of the next arrival; SimTime::max() if inactive.
  SimTime peek() const noexcept;
  /// Removes and returns the next arrival. Instants never decrease.
  Arrival next_arrival();

 private:
  struct SubSource {
    double clock_ps = 0.0;    // end of the last emitted bit
    double on_left_ps = 0.0;  // ON time remaining at clock_ps
    SimTime pending_time;
    std::uint32_t pending_size = 0;
  };

  void advance(SubSource& s);
  std::uint32_t draw_size();
  double draw_pareto(double scale);
  double draw_residual(double scale);

  std::uint32_t onu_;
  SourceParams params_;
  std::vector<SizeClass> mix_;
  std::vector<std::uint32_t> cumulative_;
  Rng rng_;
  std::vector<SubSource> subs_;
  using HeapEntry = std::pair<SimTime::rep, std::uint32_t>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
};

/// One PacketSource per ONU, each on its own seed substream.
std::vector<PacketSource> make_sources(const TrafficConfig& config, const Calibration& cal);

/// Writes every arrival with t_gen < horizon as CSV `t_gen_ps,onu,size_bytes`,
/// merged across ONUs in time order. Returns the number of rows.
std::uint64_t write_traffic_trace(std::ostream& out, const TrafficConfig& config,
                                  std::size_t onus, BitRate line_rate, SimTime horizon);

}  // namespace ponsim
