#include "ponsim/dba.hpp"

#include <array>
#include <utility>

#include "ponsim/errors.hpp"

namespace ponsim {

namespace {

constexpr std::array<std::pair<Framework, std::string_view>, 4> kFrameworkNames{{
    {Framework::OfflineStp, "offline-stp"},
    {Framework::Dpp, "dpp"},
    {Framework::OnlineStp, "online-stp"},
    {Framework::OnlineMtp, "online-mtp"},
}};
constexpr std::array<std::pair<Sizing, std::string_view>, 4> kSizingNames{{
    {Sizing::Gated, "gated"},
    {Sizing::Limited, "limited"},
    {Sizing::Excess, "excess"},
    {Sizing::ExcessShare, "excess-share"},
}};
constexpr std::array<std::pair<Reporting, std::string_view>, 3> kReportingNames{{
    {Reporting::End, "end"},
    {Reporting::Beginning, "beginning"},
    {Reporting::Optimized, "optimized"},
}};

template <class Table, class E>
std::string_view name_of(const Table& table, E value) {
  for (const auto& [v, n] : table)
    if (v == value) return n;
  return "?";
}

template <class E, class Table>
std::optional<E> value_of(const Table& table, std::string_view text) {
  for (const auto& [v, n] : table)
    if (n == text) return v;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Framework f) { return name_of(kFrameworkNames, f); }
std::string_view to_string(Sizing s) { return name_of(kSizingNames, s); }
std::string_view to_string(Reporting r) { return name_of(kReportingNames, r); }

std::optional<Framework> parse_framework(std::string_view text) {
  return value_of<Framework>(kFrameworkNames, text);
}
std::optional<Sizing> parse_sizing(std::string_view text) {
  return value_of<Sizing>(kSizingNames, text);
}
std::optional<Reporting> parse_reporting(std::string_view text) {
  if (text == "begin") return Reporting::Beginning;
  return value_of<Reporting>(kReportingNames, text);
}

DbaPolicy DbaPolicy::make(Framework f, Sizing s, Reporting r, SimTime z) {
  DbaPolicy p;
  p.framework = f;
  p.sizing = s;
  p.reporting = r;
  p.threads = f == Framework::OnlineMtp ? 2 : 1;
  p.max_cycle = z;
  p.validate();
  return p;
}

void DbaPolicy::validate() const {
  if (max_cycle == SimTime::zero()) throw InvalidPolicy("maximum cycle length Z must be positive");
  if (sizing == Sizing::ExcessShare && framework != Framework::Dpp)
    throw InvalidPolicy("excess-share sizing requires the dpp framework");
  if ((threads == 2) != (framework == Framework::OnlineMtp))
    throw InvalidPolicy("two threads are used exactly when the framework is online-mtp");
  if (threads != 1 && threads != 2) throw InvalidPolicy("thread count must be 1 or 2");
  if (reporting == Reporting::Optimized && online())
    throw UnsupportedPolicy(
        "optimized reporting needs offline or dpp scheduling: an online grant is issued as "
        "soon as its own report arrives, so no report can be moved to hide an idle period");
}

std::string DbaPolicy::label() const {
  return std::string(to_string(framework)) + "-" + std::string(to_string(sizing));
}

SimTime report_received(const BurstTiming& b, SimTime report_time) {
  return b.position == ReportPosition::Beginning ? b.alpha + report_time : b.beta;
}

unsigned dpp_split(std::size_t onus) { return static_cast<unsigned>((onus + 1) / 2); }

unsigned group_of(Framework f, unsigned slot, std::size_t onus) {
  if (f != Framework::Dpp) return 1;
  return slot <= dpp_split(onus) ? 1 : 2;
}

std::pair<unsigned, unsigned> group_bounds(Framework f, unsigned slot, std::size_t onus) {
  const auto last = static_cast<unsigned>(onus);
  switch (f) {
    case Framework::OfflineStp: return {1, last};
    case Framework::Dpp: {
      const unsigned h = dpp_split(onus);
      if (slot <= h) return {1, h};
      return {h + 1, last};
    }
    case Framework::OnlineStp:
    case Framework::OnlineMtp: return {slot, slot};
  }
  return {slot, slot};
}

unsigned gating_slot(Framework f, unsigned slot, std::size_t onus) {
  return group_bounds(f, slot, onus).second;
}

std::optional<SimTime> scheduling_instant(const DbaPolicy& policy, unsigned slot,
                                          std::size_t onus, const CycleLedger& previous,
                                          SimTime report_time) {
  if (slot == 0 || slot > onus) throw InvalidInputs("slot index out of range");
  const auto it = previous.find(gating_slot(policy.framework, slot, onus));
  if (it == previous.end()) return std::nullopt;
  return report_received(it->second, report_time);
}

ReportPosition optimized_reporting_position(Framework f, unsigned slot, std::size_t onus) {
  if (f == Framework::OnlineStp || f == Framework::OnlineMtp)
    throw UnsupportedPolicy("online scheduling cannot select the report position per burst");
  return gating_slot(f, slot, onus) == slot ? ReportPosition::Beginning : ReportPosition::End;
}

ReportPosition report_position(const DbaPolicy& policy, unsigned slot, std::size_t onus) {
  switch (policy.reporting) {
    case Reporting::End: return ReportPosition::End;
    case Reporting::Beginning: return ReportPosition::Beginning;
    case Reporting::Optimized: return optimized_reporting_position(policy.framework, slot, onus);
  }
  return ReportPosition::End;
}

SimTime size_gated(std::uint64_t bytes, const PonProfile& profile) {
  return profile.report_time + transmission_time(bytes, profile.rate);
}

SimTime size_limited(std::uint64_t bytes, SimTime g_max, const PonProfile& profile) {
  if (g_max <= profile.report_time)
    throw InvalidPolicy("G_max " + to_string(g_max) + " leaves no room beside the report");
  return std::min(size_gated(bytes, profile), g_max);
}

ExcessResult distribute_excess(const std::vector<SimTime>& demands, SimTime g_max,
                               SimTime carry_in) {
  if (g_max == SimTime::zero()) throw InvalidPolicy("G_max must be positive");
  ExcessResult out;
  out.windows.reserve(demands.size());
  SimTime pool = carry_in;
  for (SimTime d : demands) {
    out.windows.push_back(std::min(d, g_max));
    if (d < g_max) pool += g_max - d;
  }

  std::vector<std::size_t> hungry;
  while (pool > SimTime::zero()) {
    hungry.clear();
    for (std::size_t i = 0; i < demands.size(); ++i)
      if (out.windows[i] < demands[i]) hungry.push_back(i);
    if (hungry.empty()) break;
    const SimTime share = pool / hungry.size();
    if (share == SimTime::zero()) {
      // Fewer ticks than takers: one each, lowest index first.
      for (std::size_t i : hungry) {
        if (pool == SimTime::zero()) break;
        out.windows[i] += SimTime::ticks(1);
        pool -= SimTime::ticks(1);
      }
      break;
    }
    for (std::size_t i : hungry) {
      const SimTime add = std::min(share, demands[i] - out.windows[i]);
      out.windows[i] += add;
      pool -= add;
    }
  }
  out.leftover = pool;
  return out;
}

SimTime OnlineExcessPool::grant(std::uint64_t cycle, unsigned thread, SimTime demand,
                                SimTime g_max) {
  SimTime& pool = pools_[{cycle, thread}];
  const SimTime allowance = g_max + pool;
  const SimTime granted = std::min(demand, allowance);
  pool = allowance - granted;
  return granted;
}

void OnlineExcessPool::forget_before(std::uint64_t cycle) {
  pools_.erase(pools_.begin(), pools_.lower_bound({cycle, 0}));
}

std::uint64_t payload_capacity(SimTime window, const PonProfile& profile) {
  if (window < profile.report_time) throw ProtocolViolation("grant shorter than the report");
  return bytes_within(window - profile.report_time, profile.rate);
}

}  // namespace ponsim
