#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "ponsim/model.hpp"
#include "ponsim/sim_time.hpp"

namespace ponsim {

enum class Framework { OfflineStp, Dpp, OnlineStp, OnlineMtp };
enum class Sizing { Gated, Limited, Excess, ExcessShare };
enum class Reporting { End, Beginning, Optimized };
/// Where the report sits inside one burst.
enum class ReportPosition { End, Beginning };

std::string_view to_string(Framework f);
std::string_view to_string(Sizing s);
std::string_view to_string(Reporting r);
std::optional<Framework> parse_framework(std::string_view text);
std::optional<Sizing> parse_sizing(std::string_view text);
std::optional<Reporting> parse_reporting(std::string_view text);

struct DbaPolicy {
  Framework framework = Framework::OfflineStp;
  Sizing sizing = Sizing::Gated;
  Reporting reporting = Reporting::End;
  unsigned threads = 1;  // Θ
  SimTime max_cycle = SimTime::ms(4);  // Z
  unsigned t_tune = 5;  // carried only; thread tuning is not modelled

  /// Builds a policy with Θ set from the framework, then validates it.
  static DbaPolicy make(Framework f, Sizing s, Reporting r, SimTime z);
  /// Throws InvalidPolicy (UnsupportedPolicy for online optimized reporting).
  void validate() const;
  /// "<framework>-<sizing>", e.g. "offline-stp-gated".
  std::string label() const;
  bool online() const noexcept {
    return framework == Framework::OnlineStp || framework == Framework::OnlineMtp;
  }
};

/// Arrival interval of one burst at the OLT.
struct BurstTiming {
  SimTime alpha;
  SimTime beta;
  ReportPosition position = ReportPosition::End;
};

/// Bursts of one (cycle, thread), keyed by slot j (1-based).
using CycleLedger = std::map<unsigned, BurstTiming>;

/// Instant the report of a burst is fully received: α + t_R or β.
SimTime report_received(const BurstTiming& b, SimTime report_time);

/// Last slot of DPP group 1; group 1 is slots 1..⌈O/2⌉.
unsigned dpp_split(std::size_t onus);
/// 1 or 2 for DPP; always 1 otherwise.
unsigned group_of(Framework f, unsigned slot, std::size_t onus);
/// Slots [first, last] of the scheduling group containing `slot`.
std::pair<unsigned, unsigned> group_bounds(Framework f, unsigned slot, std::size_t onus);
/// Slot whose report triggers scheduling of the group containing `slot`.
unsigned gating_slot(Framework f, unsigned slot, std::size_t onus);

/// γ(n,θ,j) from the bursts of cycle n-1 of the same thread, or nullopt if
/// the gating burst is not in the ledger yet.
std::optional<SimTime> scheduling_instant(const DbaPolicy& policy, unsigned slot,
                                          std::size_t onus, const CycleLedger& previous,
                                          SimTime report_time);

/// Beginning iff `slot` gates the next scheduling decision.
/// Throws UnsupportedPolicy for online frameworks.
ReportPosition optimized_reporting_position(Framework f, unsigned slot, std::size_t onus);
/// Report position a burst in `slot` uses under `policy`.
ReportPosition report_position(const DbaPolicy& policy, unsigned slot, std::size_t onus);

/// Window needed to empty a queue of `bytes`, report included.
SimTime size_gated(std::uint64_t bytes, const PonProfile& profile);
/// min(size_gated, G_max). Throws InvalidPolicy if G_max <= t_R.
SimTime size_limited(std::uint64_t bytes, SimTime g_max, const PonProfile& profile);

struct ExcessResult {
  std::vector<SimTime> windows;
  SimTime leftover;  // pool not handed out
};

/// Equal-share water-filling. Each window starts at min(demand, G_max); the
/// pool Σ(G_max - demand)⁺ + carry_in is then split evenly over unsatisfied
/// windows, capped at their demand, until the pool or the demand runs out.
/// Ticks that do not split evenly go to the lowest indices.
ExcessResult distribute_excess(const std::vector<SimTime>& demands, SimTime g_max,
                               SimTime carry_in = SimTime::zero());

/// Per-(cycle, thread) pool for online excess: each grant may take G_max plus
/// what earlier grants of the same cycle left unused.
class OnlineExcessPool {
 public:
  SimTime grant(std::uint64_t cycle, unsigned thread, SimTime demand, SimTime g_max);
  /// Drops pools of cycles older than `cycle`.
  void forget_before(std::uint64_t cycle);
  std::size_t size() const noexcept { return pools_.size(); }

 private:
  std::map<std::pair<std::uint64_t, unsigned>, SimTime> pools_;
};

/// Payload bytes that fit in `window` after the report.
std::uint64_t payload_capacity(SimTime window, const PonProfile& profile);

/// Largest packet boundary not above `limit`. `ends` holds cumulative end
/// offsets of queued packets in increasing order; 0 if none fits.
template <std::ranges::random_access_range Ends>
std::uint64_t trim_to_packet(std::uint64_t limit, const Ends& ends) {
  auto it = std::ranges::upper_bound(ends, limit);
  return it == std::ranges::begin(ends) ? 0 : *std::ranges::prev(it);
}

}  // namespace ponsim
