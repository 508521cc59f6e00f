#include <random>

#include "ponsim/errors.hpp"
#include "ponsim/idle.hpp"
#include "support.hpp"

using namespace ponsim;
using namespace ponsim::literals;

TEST_CASE("arrival instant") {
  CHECK(arrival_instant(0_ms, 1_ms, 0_ms, 1_us) == 1_ms);
  CHECK(arrival_instant(3_ms, 1_ms, 5_ms, 1_us) == 5'001_us);
  CHECK(arrival_instant(4'001_us, 1_ms, 5_ms, 1_us) == 5'001_us);
}

TEST_CASE("idle time") {
  CHECK(idle_time(7_ms, 1_ms, 7_ms, 1_us) == 1_ms);  // offline cycle boundary, end reporting
  CHECK(idle_time(5_ms, 1_ms, 5'200_us, 1_us) == 800_us);
  CHECK(idle_time(5_ms, 1_ms, 9_ms, 1_us) == 1_us);  // masked: guard floor
  CHECK(idle_time(5_ms, 1_ms, 6_ms, 1_us) == 1_us);
}

TEST_CASE("delta idle cases") {
  SUBCASE("guard masked") {
    // γ_β + T - Ω = t_g / 2
    const auto d = delta_idle({9_ms, 9_ms + 500_ns, 1_ms, 10_ms, 1_us});
    CHECK(d.kind == DeltaCase::GuardMasked);
    CHECK(d.delta == SimTime::zero());
  }
  SUBCASE("full") {
    // γ_α + T - Ω = t_g + 5 us, payload 100 us
    const SimTime ga = 9_ms + 6_us;
    const auto d = delta_idle({ga, ga + 100_us, 1_ms, 10_ms, 1_us});
    CHECK(d.kind == DeltaCase::Full);
    CHECK(d.delta == 100_us);
  }
  SUBCASE("partial") {
    const auto d = delta_idle({9'900_us, 10_ms, 1_ms, 10'950_us, 1_us});
    CHECK(d.kind == DeltaCase::Partial);
    CHECK(d.delta == 49_us);
    CHECK(d.delta > SimTime::zero());
    CHECK(d.delta < 100_us);
  }
  CHECK_THROWS_AS(delta_idle({2_ms, 1_ms, 1_ms, 0_ms, 1_us}), InvalidInputs);
  CHECK(to_string(DeltaCase::Partial) == "partial");
}

TEST_CASE("delta idle equals the difference of two idle evaluations") {
  std::mt19937_64 rng(7);
  auto draw = [&](std::uint64_t hi) { return SimTime::ticks(rng() % hi); };
  for (int i = 0; i < 100'000; ++i) {
    const SimTime ga = draw(20'000'000'000);
    const SimTime gb = ga + (rng() % 4 == 0 ? SimTime::zero() : draw(500'000'000));
    const SimTime t = draw(2'000'000'000);
    const SimTime omega = draw(25'000'000'000);
    const SimTime tg = draw(2'000'000);
    const IdleInputs in{ga, gb, t, omega, tg};
    const auto d = delta_idle(in);
    const SimTime direct = idle_time(gb, t, omega, tg) - idle_time(ga, t, omega, tg);
    REQUIRE(d.delta == direct);
    const std::int64_t hb = signed_diff(gb + t, omega) - tg.signed_count();
    const std::int64_t ha = signed_diff(ga + t, omega) - tg.signed_count();
    const DeltaCase want =
        hb <= 0 ? DeltaCase::GuardMasked : ha >= 0 ? DeltaCase::Full : DeltaCase::Partial;
    REQUIRE(d.kind == want);
    if (d.kind == DeltaCase::Partial) {
      REQUIRE(d.delta > SimTime::zero());
      REQUIRE(d.delta < gb - ga);
    }
  }
}

TEST_CASE("idle properties") {
  std::mt19937_64 rng(11);
  auto draw = [&](std::uint64_t hi) { return SimTime::ticks(rng() % hi); };
  for (int i = 0; i < 20'000; ++i) {
    const SimTime g = draw(1'000'000'000), t = draw(1'000'000'000), o = draw(2'000'000'000);
    const SimTime tg = draw(1'000'000) + 1_ps, step = draw(1'000'000);
    const SimTime idle = idle_time(g, t, o, tg);
    REQUIRE(idle >= tg);
    REQUIRE((idle == tg) == (g + t <= o + tg));
    REQUIRE(arrival_instant(g, t, o, tg) - o == idle);
    REQUIRE(idle_time(g + step, t, o, tg) >= idle);
    REQUIRE(idle_time(g, t + step, o, tg) >= idle);
    REQUIRE(idle_time(g, t, o + step, tg) <= idle);
  }
}

TEST_CASE("approximate mean idle of offline polling") {
  CHECK(approx_mean_idle_offline(Reporting::End, 500_us, 32, 125_us).idle == 31'250_ns);
  const auto beg = approx_mean_idle_offline(Reporting::Beginning, 500_us, 32, 125_us);
  CHECK(beg.idle == SimTime::ps(27'343'750));
  CHECK_FALSE(beg.over_masked);
  CHECK(approx_mean_idle_offline(Reporting::Optimized, 500_us, 32, 125_us).idle == beg.idle);
  CHECK(approx_mean_idle_offline(Reporting::End, 500_us, 1, 1_ms).idle == 1_ms);
  const auto over = approx_mean_idle_offline(Reporting::Beginning, 500_us, 4, 2_ms);
  CHECK(over.idle == SimTime::zero());
  CHECK(over.over_masked);
}

TEST_CASE("utilization limit") {
  const auto end = utilization_limit(Reporting::End, 2_ms, 500_us, 2_ms);
  CHECK(end.to_string() == "0.666667");
  CHECK(end.value() == doctest::Approx(2.0 / 3.0));
  CHECK(utilization_limit(Reporting::Beginning, 4_ms, 500_us, 125_us).to_string() == "0.775000");
  CHECK(utilization_limit(Reporting::End, SimTime::s(10'000), 500_us, 1_ms).value() ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(utilization_limit(Reporting::End, SimTime::zero(), 500_us, 1_ms), InvalidInputs);
  CHECK(Rational{1, 8}.to_string() == "0.125000");
  CHECK(Rational{5, 10'000'000}.to_string() == "0.000001");  // half-up
}
