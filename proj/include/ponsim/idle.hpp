#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "ponsim/dba.hpp"
#include "ponsim/sim_time.hpp"

namespace ponsim {

/// max(Ω + t_g, γ + T): earliest instant a burst can start arriving.
SimTime arrival_instant(SimTime gamma, SimTime gate_delay, SimTime omega, SimTime guard);

/// max(t_g, γ + T - Ω); always arrival_instant - Ω.
SimTime idle_time(SimTime gamma, SimTime gate_delay, SimTime omega, SimTime guard);

struct IdleInputs {
  SimTime gamma_a;     // scheduling instant with reporting at the beginning
  SimTime gamma_b;     // scheduling instant with reporting at the end
  SimTime gate_delay;  // T
  SimTime omega;       // Ω
  SimTime guard;       // t_g
};

enum class DeltaCase : std::uint8_t { GuardMasked = 1, Partial = 2, Full = 3 };
std::string_view to_string(DeltaCase c);

struct DeltaIdle {
  DeltaCase kind;
  SimTime delta;  // idle saved by reporting at the beginning
};

/// Classifies the idle reduction of beginning over end reporting.
/// Throws InvalidInputs if gamma_b < gamma_a.
DeltaIdle delta_idle(const IdleInputs& in);

/// Non-negative fraction num / den, exact in ticks.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  /// Rounded half-up to 6 decimal places, e.g. "0.666667".
  std::string to_string() const;
};

struct IdleApprox {
  SimTime idle;
  bool over_masked = false;  // G_last > 2τ: the formula floors at zero
};

/// Mean idle per burst of saturated offline polling: 2τ/O with reporting at
/// the end, (2τ - G_last)/O when the last ONU reports at the beginning
/// (Beginning or Optimized).
IdleApprox approx_mean_idle_offline(Reporting reporting, SimTime tau_max, std::size_t onus,
                                    SimTime g_last);

/// Channel share usable by offline polling: Z/(2τ + Z) with reporting at the
/// end, (Z - G_max)/(2τ + Z) otherwise. Throws InvalidInputs for Z = 0.
Rational utilization_limit(Reporting reporting, SimTime max_cycle, SimTime tau_max,
                           SimTime g_max);

}  // namespace ponsim
