#include "ponsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ponsim/errors.hpp"
#include "ponsim/rng.hpp"

namespace ponsim {

namespace {

SimTime::rep ticks_per_bit(BitRate rate) {
  if (rate == 0) throw InvalidProfile("line rate must be positive");
  if (SimTime::kTicksPerSecond % rate != 0)
    throw InvalidProfile("line rate " + std::to_string(rate) +
                         " b/s does not give a whole-picosecond bit time");
  return SimTime::kTicksPerSecond / rate;
}

}  // namespace

SimTime transmission_time(std::uint64_t bytes, BitRate rate) {
  const SimTime::rep per_bit = ticks_per_bit(rate);
  return SimTime::ticks(per_bit * 8) * bytes;
}

std::uint64_t bytes_within(SimTime window, BitRate rate) {
  return window.count() / (ticks_per_bit(rate) * 8);
}

SimTime g_max(SimTime max_cycle, unsigned threads, std::size_t onus) {
  if (threads == 0 || onus == 0) throw InvalidPolicy("g_max needs at least one thread and one ONU");
  if (max_cycle == SimTime::zero()) throw InvalidPolicy("maximum cycle length must be positive");
  return max_cycle / (static_cast<SimTime::rep>(threads) * onus);
}

std::string_view to_string(Standard s) {
  switch (s) {
    case Standard::Epon1G: return "epon1g";
    case Standard::Epon10G: return "epon10g";
    case Standard::Gpon1G: return "gpon1g";
    case Standard::Gpon10G: return "gpon10g";
  }
  return "?";
}

std::optional<Standard> parse_standard(std::string_view text) {
  for (Standard s : {Standard::Epon1G, Standard::Epon10G, Standard::Gpon1G, Standard::Gpon10G})
    if (text == to_string(s)) return s;
  return std::nullopt;
}

PonProfile PonProfile::make(Standard s) {
  PonProfile p;
  p.standard = s;
  const bool epon = s == Standard::Epon1G || s == Standard::Epon10G;
  p.rate = (s == Standard::Epon1G || s == Standard::Gpon1G) ? k1G : k10G;
  if (epon) {
    p.framing = Framing::EponBurst;
    p.guard = SimTime::us(1);
    p.report_bytes = 64;  // MPCP REPORT
    p.gate_time = transmission_time(64, p.rate);  // MPCP GATE
  } else {
    p.framing = Framing::GponFrame;
    p.guard = SimTime::ns(30);
    p.report_bytes = 4;  // DBRu
    p.gate_time = SimTime::zero();  // carried in the BWMap of the frame header
  }
  p.report_time = transmission_time(p.report_bytes, p.rate);
  return p;
}

std::string_view to_string(RangeProfile r) {
  return r == RangeProfile::LongReach100km ? "100km" : "20km";
}

std::optional<RangeProfile> parse_range(std::string_view text) {
  if (text == "100km" || text == "100") return RangeProfile::LongReach100km;
  if (text == "20km" || text == "20") return RangeProfile::Standard20km;
  return std::nullopt;
}

double reach_km(RangeProfile r) { return r == RangeProfile::LongReach100km ? 100.0 : 20.0; }

Topology::Topology(std::vector<SimTime> tau, RangeProfile range)
    : tau_(std::move(tau)), range_(range) {
  if (tau_.empty()) throw InvalidInputs("topology needs at least one ONU");
  for (SimTime t : tau_)
    if (t == SimTime::zero()) throw InvalidInputs("propagation delays must be positive");
  max_tau_ = *std::max_element(tau_.begin(), tau_.end());
  order_.resize(tau_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [this](std::size_t a, std::size_t b) { return tau_[a] > tau_[b]; });
}

Topology Topology::place(std::size_t onus, RangeProfile range, std::uint64_t seed) {
  if (onus == 0) throw InvalidInputs("topology needs at least one ONU");
  Rng rng(derive_seed(seed, {kTopologyStream}));
  const double reach = reach_km(range);
  const double splitter = 0.9 * reach;
  const double per_km = static_cast<double>(kPropagationPerKm.count());

  std::vector<double> km(onus);
  for (double& d : km) d = splitter + (reach - splitter) * uniform01(rng);
  const auto far = static_cast<std::size_t>(std::max_element(km.begin(), km.end()) - km.begin());
  km[far] = reach;

  std::vector<SimTime> tau(onus);
  for (std::size_t o = 0; o < onus; ++o)
    tau[o] = SimTime::ticks(static_cast<SimTime::rep>(std::llround(km[o] * per_km)));
  return Topology(std::move(tau), range);
}

Topology Topology::from_delays(std::vector<SimTime> tau, RangeProfile range) {
  return Topology(std::move(tau), range);
}

}  // namespace ponsim
