#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ponsim/dba.hpp"
#include "ponsim/metrics.hpp"
#include "ponsim/model.hpp"
#include "ponsim/sim_time.hpp"
#include "ponsim/traffic.hpp"

namespace ponsim {

struct RunConfig {
  PonProfile profile = PonProfile::make(Standard::Epon1G);
  Topology topology = Topology::from_delays({SimTime::us(500)});
  DbaPolicy policy;
  TrafficConfig traffic;

  SimTime duration = SimTime::s(60);
  /// Ends the run earlier once this many packets are expected at the
  /// calibrated rate; 0 disables the cap.
  std::uint64_t max_packets = 2'000'000;
  double warmup_fraction = 0.1;
  unsigned batches = 10;

  /// Stop generating at the horizon and run until every queue is empty.
  bool drain = false;
  /// Give up draining this long after the horizon.
  SimTime drain_limit = SimTime::s(10);

  bool keep_records = false;
  bool keep_packets = false;
  /// Per-record CSV; not owned.
  std::ostream* trace = nullptr;

  /// Total queued bytes beyond which a run is flagged saturated; 0 means one
  /// second of line rate.
  std::uint64_t saturation_bytes = 0;
  /// Also flagged when the queue grows by more than this fraction of the
  /// bytes offered across the statistics window.
  double saturation_growth = 0.01;
};

struct RunChecks {
  std::uint64_t guard_violations = 0;
  std::uint64_t causality_violations = 0;
  std::uint64_t downstream_overlaps = 0;
  std::uint64_t order_violations = 0;
  std::uint64_t oracle_mismatches = 0;  // receiver idle != idle_time(...)
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t queued = 0;     // still at an ONU, including in flight
  std::uint64_t in_flight = 0;  // granted but not yet received
  bool drained = false;

  bool conserved() const noexcept { return generated == delivered + queued; }
  bool clean() const noexcept {
    return guard_violations == 0 && causality_violations == 0 && downstream_overlaps == 0 &&
           order_violations == 0 && oracle_mismatches == 0;
  }
};

struct RunResult {
  RunSummary summary;
  RunChecks checks;
  Calibration calibration;
  SimTime horizon;
  SimTime warmup;
  std::uint64_t bursts = 0;
  std::uint64_t max_backlog_bytes = 0;
  /// Total queued bytes at the warmup instant and at the end of each batch.
  std::vector<std::uint64_t> backlog_samples;
  std::vector<TransmissionRecord> records;  // when keep_records
  std::vector<Packet> packets;              // delivered, when keep_packets
};

/// Next 125 µs downstream frame boundary at or after `raw` for GPON;
/// identity for EPON.
SimTime gpon_frame_align(SimTime raw, const PonProfile& profile);

/// Header of the per-record trace CSV.
void write_trace_header(std::ostream& out);

/// Runs one simulation instance. Deterministic in the configuration.
/// Throws InvalidPolicy / InvalidInputs for an unusable configuration.
RunResult run(const RunConfig& config);

}  // namespace ponsim
