#include "ponsim/idle.hpp"

#include <cstdio>

#include "ponsim/errors.hpp"

namespace ponsim {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

SimTime arrival_instant(SimTime gamma, SimTime gate_delay, SimTime omega, SimTime guard) {
  return std::max(omega + guard, gamma + gate_delay);
}

SimTime idle_time(SimTime gamma, SimTime gate_delay, SimTime omega, SimTime guard) {
  const SimTime signalled = gamma + gate_delay;
  if (signalled <= omega + guard) return guard;
  return signalled - omega;
}

std::string_view to_string(DeltaCase c) {
  switch (c) {
    case DeltaCase::GuardMasked: return "guard-masked";
    case DeltaCase::Partial: return "partial";
    case DeltaCase::Full: return "full";
  }
  return "?";
}

DeltaIdle delta_idle(const IdleInputs& in) {
  if (in.gamma_b < in.gamma_a)
    throw InvalidInputs("end-reporting instant precedes beginning-reporting instant");
  const SimTime floor = in.omega + in.guard;
  const SimTime end_arrival = in.gamma_b + in.gate_delay;
  const SimTime begin_arrival = in.gamma_a + in.gate_delay;
  if (end_arrival <= floor) return {DeltaCase::GuardMasked, SimTime::zero()};
  if (begin_arrival >= floor) return {DeltaCase::Full, in.gamma_b - in.gamma_a};
  return {DeltaCase::Partial, end_arrival - floor};
}

std::string Rational::to_string() const {
  // Integer part plus six rounded decimals; 128-bit keeps num * 10^6 exact.
  const u128 scaled = static_cast<u128>(num) * 1'000'000u;
  const u128 q = (scaled + den / 2) / den;
  const auto whole = static_cast<unsigned long long>(q / 1'000'000u);
  const auto frac = static_cast<unsigned long long>(q % 1'000'000u);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%llu.%06llu", whole, frac);
  return buf;
}

IdleApprox approx_mean_idle_offline(Reporting reporting, SimTime tau_max, std::size_t onus,
                                    SimTime g_last) {
  if (onus == 0) throw InvalidInputs("approximation needs at least one ONU");
  const SimTime round_trip = tau_max * 2;
  if (reporting == Reporting::End) return {round_trip / onus, false};
  if (g_last > round_trip) return {SimTime::zero(), true};
  return {(round_trip - g_last) / onus, false};
}

Rational utilization_limit(Reporting reporting, SimTime max_cycle, SimTime tau_max,
                           SimTime g_max) {
  if (max_cycle == SimTime::zero()) throw InvalidInputs("Z must be positive");
  const SimTime den = tau_max * 2 + max_cycle;
  if (reporting == Reporting::End) return {max_cycle.count(), den.count()};
  const SimTime usable = g_max < max_cycle ? max_cycle - g_max : SimTime::zero();
  return {usable.count(), den.count()};
}

}  // namespace ponsim
