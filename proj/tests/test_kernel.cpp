#include <algorithm>
#include <map>
#include <sstream>

#include "ponsim/errors.hpp"
#include "ponsim/idle.hpp"
#include "ponsim/kernel.hpp"
#include "support.hpp"

using namespace ponsim;
using namespace ponsim::literals;

namespace {

RunConfig base(Framework f, Sizing s, Reporting r, double load, std::size_t onus = 8,
               Standard std = Standard::Epon1G, SimTime duration = 2_s) {
  RunConfig c;
  c.profile = PonProfile::make(std);
  c.topology = Topology::place(onus, RangeProfile::LongReach100km, 3);
  c.policy = DbaPolicy::make(f, s, r, 4_ms);
  c.traffic.load_bps = load * static_cast<double>(c.profile.rate);
  c.traffic.seed = 3;
  c.duration = duration;
  c.max_packets = 0;
  c.keep_records = true;
  return c;
}

void check_record_identities(const RunConfig& c, const RunResult& res) {
  for (const auto& r : res.records) {
    const SimTime tau = c.topology.tau(r.onu);
    REQUIRE(r.alpha == arrival_instant(r.gamma, r.gate_delay, r.omega, c.profile.guard));
    REQUIRE(r.idle == r.alpha - r.omega);
    REQUIRE(r.idle == idle_time(r.gamma, r.gate_delay, r.omega, c.profile.guard));
    REQUIRE(r.beta >= r.alpha + c.profile.report_time);
    REQUIRE(r.beta - r.alpha ==
            c.profile.report_time + transmission_time(r.payload_bytes, c.profile.rate));
    REQUIRE(r.gate_delay >= c.profile.gate_time + tau * 2);
    REQUIRE(r.alpha >= r.gamma + c.profile.gate_time + tau * 2);
  }
}

void check_guard(const RunConfig& c, const RunResult& res) {
  auto recs = res.records;
  std::sort(recs.begin(), recs.end(),
            [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  for (std::size_t i = 1; i < recs.size(); ++i)
    REQUIRE(recs[i].alpha >= recs[i - 1].beta + c.profile.guard);
}

}  // namespace

TEST_CASE("GPON frame alignment") {
  const auto gpon = PonProfile::make(Standard::Gpon1G);
  const auto epon = PonProfile::make(Standard::Epon1G);
  CHECK(gpon_frame_align(130_us, gpon) == 250_us);
  CHECK(gpon_frame_align(250_us, gpon) == 250_us);
  CHECK(gpon_frame_align(0_us, gpon) == 0_us);
  CHECK(gpon_frame_align(130_us, epon) == 130_us);
}

TEST_CASE("single ONU without traffic settles into report-only cycles") {
  RunConfig c;
  c.topology = Topology::from_delays({500_us});
  c.policy = DbaPolicy::make(Framework::OfflineStp, Sizing::Gated, Reporting::End, 8_ms);
  c.traffic.load_bps = 0.0;
  c.duration = 100_ms;
  c.max_packets = 0;
  c.keep_records = true;
  const auto res = run(c);
  REQUIRE(res.records.size() > 10);
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    CHECK(r.payload_bytes == 0);
    CHECK(r.idle == 1_ms + c.profile.gate_time);
    CHECK(r.beta - r.alpha == c.profile.report_time);
    CHECK(r.gamma == res.records[i - 1].beta);
  }
  CHECK(res.checks.generated == 0);
}

TEST_CASE("offline end reporting at high load: 2τ before slot 1, guard otherwise") {
  auto c = base(Framework::OfflineStp, Sizing::Gated, Reporting::End, 0.9, 32);
  const auto res = run(c);
  std::uint64_t slot1 = 0, rest = 0, rest_at_guard = 0;
  for (const auto& r : res.records) {
    if (r.cycle == 0) continue;
    if (r.slot == 1) {
      ++slot1;
      CHECK(r.idle == 1_ms + c.profile.gate_time);
    } else {
      ++rest;
      if (r.idle == c.profile.guard) ++rest_at_guard;
    }
  }
  CHECK(slot1 > 100);
  CHECK(static_cast<double>(rest_at_guard) / static_cast<double>(rest) > 0.99);
  const auto approx = approx_mean_idle_offline(Reporting::End, c.topology.max_tau(), 32, {});
  CHECK(res.summary.mean_idle == doctest::Approx(approx.idle.seconds()).epsilon(0.15));
}

TEST_CASE("every policy keeps the timing identities and the guard") {
  struct P {
    Framework f;
    Sizing s;
    Reporting r;
  };
  const std::vector<P> policies{
      {Framework::OfflineStp, Sizing::Gated, Reporting::End},
      {Framework::OfflineStp, Sizing::Limited, Reporting::Beginning},
      {Framework::OfflineStp, Sizing::Excess, Reporting::Optimized},
      {Framework::Dpp, Sizing::ExcessShare, Reporting::End},
      {Framework::Dpp, Sizing::Excess, Reporting::Optimized},
      {Framework::OnlineStp, Sizing::Limited, Reporting::Beginning},
      {Framework::OnlineStp, Sizing::Excess, Reporting::End},
      {Framework::OnlineMtp, Sizing::Excess, Reporting::Beginning},
      {Framework::OnlineMtp, Sizing::Gated, Reporting::End},
  };
  for (Standard std : {Standard::Epon1G, Standard::Gpon10G}) {
    for (const auto& p : policies) {
      CAPTURE(to_string(std));
      CAPTURE(DbaPolicy::make(p.f, p.s, p.r, 4_ms).label());
      CAPTURE(to_string(p.r));
      auto c = base(p.f, p.s, p.r, 0.7, 8, std, 500_ms);
      const auto res = run(c);
      CHECK(res.checks.clean());
      CHECK(res.checks.conserved());
      check_record_identities(c, res);
      check_guard(c, res);
    }
  }
}

TEST_CASE("GPON grants leave on frame boundaries") {
  auto c = base(Framework::OnlineStp, Sizing::Excess, Reporting::End, 0.5, 8, Standard::Gpon1G,
                200_ms);
  const auto res = run(c);
  for (const auto& r : res.records) {
    const SimTime tau = c.topology.tau(r.onu);
    const SimTime gate_sent = r.gamma + r.gate_delay - tau * 2;  // t_G = 0
    REQUIRE(gate_sent % kGponFramePeriod == SimTime::zero());
  }
}

TEST_CASE("sizing caps") {
  SUBCASE("limited windows never exceed G_max") {
    auto c = base(Framework::OfflineStp, Sizing::Limited, Reporting::End, 0.75);
    const auto res = run(c);
    const SimTime g = g_max(c.policy.max_cycle, 1, 8);
    for (const auto& r : res.records) REQUIRE(r.beta - r.alpha <= g);
    CHECK(res.summary.mean_window_len <= g.seconds());
  }
  SUBCASE("excess windows of one cycle stay within Z") {
    auto c = base(Framework::OfflineStp, Sizing::Excess, Reporting::End, 0.75);
    const auto res = run(c);
    std::map<std::uint64_t, SimTime> per_cycle;
    for (const auto& r : res.records) per_cycle[r.cycle] += r.beta - r.alpha;
    for (const auto& [n, total] : per_cycle) REQUIRE(total <= c.policy.max_cycle);
  }
  SUBCASE("MTP threads each stay within Z / 2") {
    auto c = base(Framework::OnlineMtp, Sizing::Limited, Reporting::End, 0.75);
    const auto res = run(c);
    const SimTime g = g_max(c.policy.max_cycle, 2, 8);
    for (const auto& r : res.records) REQUIRE(r.beta - r.alpha <= g);
  }
}

TEST_CASE("offline cycle length bounded for capped sizing") {
  for (Sizing s : {Sizing::Limited, Sizing::Excess}) {
    auto c = base(Framework::OfflineStp, s, Reporting::End, 0.9, 32);
    const auto res = run(c);
    const SimTime bound = c.policy.max_cycle + c.topology.max_round_trip() + c.profile.guard * 32;
    CHECK(res.summary.mean_cycle_len <= bound.seconds());
  }
}

TEST_CASE("runs are deterministic") {
  auto c = base(Framework::Dpp, Sizing::ExcessShare, Reporting::Optimized, 0.6);
  c.keep_packets = true;
  std::ostringstream t1, t2;
  c.trace = &t1;
  const auto a = run(c);
  c.trace = &t2;
  const auto b = run(c);
  CHECK(t1.str() == t2.str());
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.summary.mean_delay == b.summary.mean_delay);
  CHECK(a.summary.mean_idle == b.summary.mean_idle);
  REQUIRE(a.packets.size() == b.packets.size());
  for (std::size_t i = 0; i < a.packets.size(); ++i)
    REQUIRE(a.packets[i].t_delivered == b.packets[i].t_delivered);
  CHECK(t1.str().rfind("n,theta,j,onu,gamma_ps,T_ps,omega_ps,alpha_ps,beta_ps,idle_ps,payload_bytes\n", 0) == 0);
}

TEST_CASE("draining delivers every packet") {
  for (Framework f : {Framework::OfflineStp, Framework::OnlineMtp}) {
    auto c = base(f, Sizing::Limited, Reporting::Beginning, 0.6, 8, Standard::Epon1G, 500_ms);
    c.drain = true;
    c.keep_packets = true;
    const auto res = run(c);
    CHECK(res.checks.drained);
    CHECK(res.checks.generated == res.checks.delivered);
    CHECK(res.checks.queued == 0);
    for (const auto& p : res.packets) {
      REQUIRE(p.t_delivered.has_value());
      REQUIRE(*p.t_delivered >= p.t_gen + transmission_time(p.size, c.profile.rate) +
                                     c.topology.tau(p.onu));
    }
  }
}

TEST_CASE("report position shapes the delivery schedule") {
  // With the report first, no packet of a burst lands before α + t_R.
  auto c = base(Framework::OfflineStp, Sizing::Gated, Reporting::Beginning, 0.5, 4,
                Standard::Epon1G, 300_ms);
  c.keep_packets = true;
  const auto res = run(c);
  std::vector<std::pair<SimTime, SimTime>> spans;
  for (const auto& r : res.records)
    if (r.payload_bytes > 0) spans.emplace_back(r.alpha, r.beta);
  std::sort(spans.begin(), spans.end());
  for (const auto& p : res.packets) {
    auto it = std::upper_bound(spans.begin(), spans.end(),
                               std::pair{*p.t_delivered, SimTime::max()});
    REQUIRE(it != spans.begin());
    --it;
    REQUIRE(*p.t_delivered >= it->first + c.profile.report_time);
    REQUIRE(*p.t_delivered <= it->second);
  }
}

TEST_CASE("report snapshot decides which burst carries a packet") {
  // One ONU, gated: a report covers every packet generated before its
  // snapshot (burst start at the ONU for Beginning, report start for End),
  // and the next grant carries exactly those.
  for (Reporting rep : {Reporting::End, Reporting::Beginning}) {
    CAPTURE(to_string(rep));
    RunConfig c;
    c.topology = Topology::from_delays({250_us});
    c.policy = DbaPolicy::make(Framework::OfflineStp, Sizing::Gated, rep, 4_ms);
    c.traffic.load_bps = 0.4e9;
    c.traffic.seed = 8;
    c.duration = 200_ms;
    c.max_packets = 0;
    c.keep_records = true;
    c.keep_packets = true;
    const auto res = run(c);
    const SimTime tau = 250_us, tr = c.profile.report_time;
    std::vector<SimTime> snapshot, end;
    for (const auto& r : res.records) {
      snapshot.push_back(rep == Reporting::End ? r.beta - tau - tr : r.alpha - tau);
      end.push_back(r.beta);
    }
    for (const auto& p : res.packets) {
      // First snapshot after generation; the burst after it delivers.
      const auto k = static_cast<std::size_t>(
          std::upper_bound(snapshot.begin(), snapshot.end(), p.t_gen) - snapshot.begin());
      REQUIRE(k + 1 < end.size());
      REQUIRE(*p.t_delivered <= end[k + 1]);
      REQUIRE(*p.t_delivered > end[k]);
    }
  }
}

TEST_CASE("saturation is flagged") {
  auto c = base(Framework::OfflineStp, Sizing::Limited, Reporting::End, 0.95, 32);
  c.keep_records = false;
  const auto res = run(c);
  CHECK(res.summary.saturated);
  auto ok = base(Framework::OfflineStp, Sizing::Limited, Reporting::End, 0.3, 32);
  ok.keep_records = false;
  CHECK_FALSE(run(ok).summary.saturated);
}

TEST_CASE("bad configurations are rejected") {
  auto c = base(Framework::OfflineStp, Sizing::Gated, Reporting::End, 0.5);
  c.warmup_fraction = 1.0;
  CHECK_THROWS_AS(run(c), InvalidInputs);
  c = base(Framework::OfflineStp, Sizing::Limited, Reporting::End, 0.5, 8);
  c.policy.max_cycle = 4_us;  // G_max of 500 ns cannot hold the report
  CHECK_THROWS_AS(run(c), InvalidPolicy);
  c = base(Framework::OnlineStp, Sizing::Gated, Reporting::End, 0.5);
  c.policy.reporting = Reporting::Optimized;
  CHECK_THROWS_AS(run(c), UnsupportedPolicy);
}
