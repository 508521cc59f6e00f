#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ponsim/sim_time.hpp"

namespace ponsim {

/// Upstream line rate in bit/s.
using BitRate = std::uint64_t;

inline constexpr BitRate k1G = 1'000'000'000;
inline constexpr BitRate k10G = 10'000'000'000;

/// Serialization time of `bytes` at `rate`. Throws InvalidProfile for a zero
/// rate or one whose bit time is not a whole number of ticks.
SimTime transmission_time(std::uint64_t bytes, BitRate rate);

/// Largest number of whole bytes that serialize within `window` at `rate`.
std::uint64_t bytes_within(SimTime window, BitRate rate);

/// Per-ONU grant cap for limited sizing: Z / (threads * onus), floored to a
/// tick.
SimTime g_max(SimTime max_cycle, unsigned threads, std::size_t onus);

enum class Standard { Epon1G, Epon10G, Gpon1G, Gpon10G };
enum class Framing { EponBurst, GponFrame };

std::string_view to_string(Standard s);
std::optional<Standard> parse_standard(std::string_view text);

inline constexpr SimTime kGponFramePeriod = SimTime::us(125);

/// Protocol constants of one PON flavour.
struct PonProfile {
  Standard standard = Standard::Epon1G;
  BitRate rate = k1G;
  SimTime guard;        // t_g
  SimTime report_time;  // t_R
  SimTime gate_time;    // t_G
  Framing framing = Framing::EponBurst;
  std::uint32_t report_bytes = 64;

  static PonProfile make(Standard s);

  bool fragments() const noexcept { return framing == Framing::GponFrame; }
  SimTime frame_period() const noexcept {
    return framing == Framing::GponFrame ? kGponFramePeriod : SimTime::zero();
  }
};

enum class RangeProfile { LongReach100km, Standard20km };

std::string_view to_string(RangeProfile r);
std::optional<RangeProfile> parse_range(std::string_view text);

/// Fibre propagation delay per kilometre.
inline constexpr SimTime kPropagationPerKm = SimTime::us(5);

/// ONU placement: one-way delays tau(o), and the polling order derived from
/// them. ONU indices are 0-based internally.
class Topology {
 public:
  /// Splitter at 90% of the reach, ONUs uniform over the last 10%; the
  /// farthest ONU is pinned to the full reach so the round-trip bound is
  /// exact. Deterministic in `seed`.
  static Topology place(std::size_t onus, RangeProfile range, std::uint64_t seed);

  /// Explicit delays, for hand-built scenarios.
  static Topology from_delays(std::vector<SimTime> tau,
                              RangeProfile range = RangeProfile::LongReach100km);

  std::size_t onus() const noexcept { return tau_.size(); }
  SimTime tau(std::size_t onu) const { return tau_.at(onu); }
  const std::vector<SimTime>& delays() const noexcept { return tau_; }
  RangeProfile range() const noexcept { return range_; }
  SimTime max_tau() const noexcept { return max_tau_; }
  SimTime max_round_trip() const noexcept { return max_tau_ * 2; }

  /// ONU index of 1-based polling slot j. Slots are ordered farthest first.
  std::size_t onu_at_slot(std::size_t slot) const { return order_.at(slot - 1); }
  const std::vector<std::size_t>& polling_order() const noexcept { return order_; }

 private:
  Topology(std::vector<SimTime> tau, RangeProfile range);

  std::vector<SimTime> tau_;
  std::vector<std::size_t> order_;
  SimTime max_tau_;
  RangeProfile range_;
};

/// Nominal reach of a range profile, in km.
double reach_km(RangeProfile r);

struct Packet {
  std::uint64_t id = 0;
  std::uint32_t onu = 0;
  std::uint32_t size = 0;
  SimTime t_gen;
  std::optional<SimTime> t_delivered;
};

/// Complete timing state of one upstream burst.
struct TransmissionRecord {
  std::uint64_t cycle = 0;   // n
  std::uint32_t thread = 1;  // theta, 1-based
  std::uint32_t slot = 1;    // j, 1-based
  std::uint32_t onu = 0;     // 0-based ONU index
  SimTime gamma;             // scheduling instant
  SimTime gate_delay;        // T: gate end - gamma + 2 tau(o)
  SimTime omega;             // end of the preceding arrival
  SimTime alpha;             // burst starts arriving at the OLT
  SimTime beta;              // burst fully received
  SimTime idle;              // alpha - omega as observed by the receiver
  std::uint64_t payload_bytes = 0;
  bool report_at_beginning = false;
};

}  // namespace ponsim
