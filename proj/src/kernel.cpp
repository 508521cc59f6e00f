#include "ponsim/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <queue>
#include <ranges>
#include <stdexcept>
#include <tuple>

#include <spdlog/spdlog.h>

#include "ponsim/errors.hpp"
#include "ponsim/idle.hpp"

namespace ponsim {

namespace {

// Rank order breaks ties between events at the same tick.
enum class EventKind : std::uint8_t {
  ReportDecoded = 0,
  GrantArrivesAtOnu = 1,
  BurstStartsAtOlt = 2,
  BurstEndsAtOlt = 3,
  BatchBoundary = 4,
};

struct Event {
  SimTime::rep time;
  EventKind kind;
  std::uint32_t onu;
  std::uint64_t seq;
  std::uint32_t ref;  // burst slot, or batch index
};

struct Later {
  bool operator()(const Event& a, const Event& b) const noexcept {
    return std::tie(a.time, a.kind, a.onu, a.seq) > std::tie(b.time, b.kind, b.onu, b.seq);
  }
};

struct Queued {
  SimTime t_gen;
  std::uint64_t end;  // cumulative byte offset just past this packet
  std::uint64_t id;
  std::uint32_t size;
};

struct OnuState {
  std::deque<Queued> queue;
  std::uint64_t arrived = 0;    // bytes generated and enqueued so far
  std::uint64_t granted = 0;    // bytes covered by issued grants
  std::uint64_t delivered = 0;  // bytes received at the OLT
  std::uint64_t next_id = 0;
  std::array<std::uint64_t, 2> reported{};  // per thread: arrivals before the last snapshot
};

struct Burst {
  TransmissionRecord rec;
  SimTime gate_end;
  std::uint64_t payload_begin = 0;
  std::uint64_t payload_end = 0;
  int pending = 0;  // events still referring to this slot
};

class Simulator {
 public:
  explicit Simulator(const RunConfig& cfg);
  RunResult run();

 private:
  void push(SimTime t, EventKind kind, std::uint32_t onu, std::uint32_t ref);
  std::uint32_t new_burst();
  void release(std::uint32_t b);

  void pull_until(std::size_t o, SimTime t);
  std::uint64_t reported_through(std::size_t o, SimTime snapshot);

  void decide_group(unsigned thread, std::uint64_t cycle, unsigned first, unsigned last,
                    SimTime gamma);
  void schedule_burst(unsigned thread, std::uint64_t cycle, unsigned slot, SimTime gamma,
                      SimTime window, std::uint64_t payload, ReportPosition pos);
  void start_cycle_zero();

  void on_report(std::uint32_t b);
  void on_grant(std::uint32_t b);
  void on_start(std::uint32_t b);
  void on_end(std::uint32_t b);
  void on_batch(std::uint32_t k);
  bool drain_complete();

  const RunConfig& cfg_;
  const PonProfile& prof_;
  const Topology& topo_;
  const DbaPolicy& policy_;
  const std::size_t onus_;
  Calibration cal_;
  SimTime g_max_;
  SimTime per_byte_;
  SimTime horizon_;
  SimTime warmup_;
  SimTime now_;

  std::vector<PacketSource> sources_;
  std::vector<OnuState> onu_;

  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  std::vector<Burst> bursts_;
  std::vector<std::uint32_t> free_;

  SimTime channel_tail_;     // Ω for the next scheduled burst
  SimTime downstream_free_;  // end of the last gate on the downstream link
  SimTime last_gate_end_;    // monitor copy for the overlap check
  SimTime rx_last_end_;      // receiver's view of the last arrival end
  bool rx_seen_ = false;

  std::map<std::pair<unsigned, std::uint64_t>, CycleLedger> ledgers_;
  std::map<std::pair<unsigned, std::uint64_t>, SimTime> share_carry_;
  OnlineExcessPool online_pool_;

  MetricsCollector metrics_;
  RunResult out_;
  bool finished_ = false;
};

SimTime compute_horizon(const RunConfig& cfg, const Calibration& cal) {
  SimTime h = cfg.duration;
  if (cfg.max_packets > 0 && cfg.traffic.load_bps > 0.0) {
    const double pkt_rate = cfg.traffic.load_bps / (8.0 * cal.mean_packet_bytes);
    const double secs = static_cast<double>(cfg.max_packets) / pkt_rate;
    if (secs < h.seconds()) h = SimTime::from_seconds(secs);
  }
  return h;
}

Simulator::Simulator(const RunConfig& cfg)
    : cfg_(cfg),
      prof_(cfg.profile),
      topo_(cfg.topology),
      policy_(cfg.policy),
      onus_(cfg.topology.onus()),
      cal_(calibrate(cfg.traffic, cfg.topology.onus(), cfg.profile.rate)),
      g_max_(g_max(cfg.policy.max_cycle, cfg.policy.threads, cfg.topology.onus())),
      per_byte_(transmission_time(1, cfg.profile.rate)),
      horizon_(compute_horizon(cfg, cal_)),
      warmup_(SimTime::from_seconds(horizon_.seconds() * cfg.warmup_fraction)),
      sources_(make_sources(cfg.traffic, cal_)),
      onu_(cfg.topology.onus()),
      metrics_(warmup_, horizon_, cfg.batches) {
  policy_.validate();
  if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
    throw InvalidInputs("warmup fraction must lie in [0, 1)");
  if (policy_.sizing != Sizing::Gated && g_max_ <= prof_.report_time)
    throw InvalidPolicy("G_max " + to_string(g_max_) + " does not exceed the report time");
  out_.calibration = cal_;
  out_.horizon = horizon_;
  out_.warmup = warmup_;
}

void Simulator::push(SimTime t, EventKind kind, std::uint32_t onu, std::uint32_t ref) {
  events_.push(Event{t.count(), kind, onu, seq_++, ref});
}

std::uint32_t Simulator::new_burst() {
  if (!free_.empty()) {
    const std::uint32_t b = free_.back();
    free_.pop_back();
    return b;
  }
  bursts_.emplace_back();
  return static_cast<std::uint32_t>(bursts_.size() - 1);
}

void Simulator::release(std::uint32_t b) {
  if (--bursts_[b].pending == 0) free_.push_back(b);
}

void Simulator::pull_until(std::size_t o, SimTime t) {
  const SimTime limit = cfg_.drain ? std::min(t, horizon_) : t;
  PacketSource& src = sources_[o];
  OnuState& s = onu_[o];
  while (src.active() && src.peek() < limit) {
    const Arrival a = src.next_arrival();
    s.arrived += a.size;
    s.queue.push_back(Queued{a.t_gen, s.arrived, s.next_id++, a.size});
    ++out_.checks.generated;
  }
}

std::uint64_t Simulator::reported_through(std::size_t o, SimTime snapshot) {
  pull_until(o, snapshot);
  const auto& q = onu_[o].queue;
  std::size_t i = q.size();
  while (i > 0 && q[i - 1].t_gen >= snapshot) --i;
  if (i > 0) return q[i - 1].end;
  if (!q.empty()) return q.front().end - q.front().size;
  return onu_[o].arrived;
}

void Simulator::decide_group(unsigned thread, std::uint64_t cycle, unsigned first,
                             unsigned last, SimTime gamma) {
  const std::size_t count = last - first + 1;
  std::vector<std::uint64_t> backlog(count);
  std::vector<SimTime> windows(count);
  for (std::size_t i = 0; i < count; ++i) {
    const OnuState& s = onu_[topo_.onu_at_slot(first + i)];
    const std::uint64_t rep = s.reported[thread - 1];
    backlog[i] = rep > s.granted ? rep - s.granted : 0;
    windows[i] = size_gated(backlog[i], prof_);
  }

  switch (policy_.sizing) {
    case Sizing::Gated: break;
    case Sizing::Limited:
      for (std::size_t i = 0; i < count; ++i)
        windows[i] = size_limited(backlog[i], g_max_, prof_);
      break;
    case Sizing::Excess:
    case Sizing::ExcessShare:
      if (policy_.online()) {
        for (std::size_t i = 0; i < count; ++i)
          windows[i] = online_pool_.grant(cycle, thread, windows[i], g_max_);
      } else {
        const bool share = policy_.sizing == Sizing::ExcessShare;
        const unsigned group = group_of(policy_.framework, first, onus_);
        SimTime carry = SimTime::zero();
        if (share && group == 2) {
          const auto it = share_carry_.find({thread, cycle});
          if (it != share_carry_.end()) {
            carry = it->second;
            share_carry_.erase(it);
          }
        }
        ExcessResult r = distribute_excess(windows, g_max_, carry);
        if (share && group == 1 && dpp_split(onus_) < onus_)
          share_carry_[{thread, cycle}] = r.leftover;
        windows = std::move(r.windows);
      }
      break;
  }

  for (std::size_t i = 0; i < count; ++i) {
    const unsigned slot = first + static_cast<unsigned>(i);
    const OnuState& s = onu_[topo_.onu_at_slot(slot)];
    if (windows[i] < prof_.report_time) throw ProtocolViolation("grant leaves no room for the report");
    std::uint64_t payload = std::min(backlog[i], payload_capacity(windows[i], prof_));
    if (!prof_.fragments() && payload < backlog[i]) {
      const std::uint64_t edge =
          trim_to_packet(s.granted + payload, s.queue | std::views::transform(&Queued::end));
      payload = edge > s.granted ? edge - s.granted : 0;
    }
    const SimTime window = prof_.report_time + per_byte_ * payload;
    schedule_burst(thread, cycle, slot, gamma, window, payload,
                   report_position(policy_, slot, onus_));
  }
}

void Simulator::schedule_burst(unsigned thread, std::uint64_t cycle, unsigned slot,
                               SimTime gamma, SimTime window, std::uint64_t payload,
                               ReportPosition pos) {
  const std::size_t o = topo_.onu_at_slot(slot);
  const SimTime tau = topo_.tau(o);

  // Gates leave in decision order; one waits for the link if the previous
  // gate is still being sent.
  const SimTime gate_start = std::max(gpon_frame_align(gamma, prof_), downstream_free_);
  const SimTime gate_end = gate_start + prof_.gate_time;
  if (gate_start < last_gate_end_) ++out_.checks.downstream_overlaps;
  last_gate_end_ = gate_end;
  downstream_free_ = gate_end;

  const SimTime gate_delay = gate_end + tau * 2 - gamma;
  const SimTime alpha = std::max(channel_tail_ + prof_.guard, gamma + gate_delay);
  const SimTime beta = alpha + window;

  const std::uint32_t b = new_burst();
  Burst& burst = bursts_[b];
  burst.rec = TransmissionRecord{cycle,  thread, slot,           static_cast<std::uint32_t>(o),
                                 gamma,  gate_delay, channel_tail_, alpha,
                                 beta,   SimTime::zero(), payload,
                                 pos == ReportPosition::Beginning};
  burst.gate_end = gate_end;
  burst.payload_begin = onu_[o].granted;
  burst.payload_end = onu_[o].granted + payload;
  burst.pending = 4;
  onu_[o].granted += payload;
  channel_tail_ = beta;

  ledgers_[{thread, cycle}][slot] = BurstTiming{alpha, beta, pos};

  const auto ou = static_cast<std::uint32_t>(o);
  push(gate_end + tau, EventKind::GrantArrivesAtOnu, ou, b);
  push(alpha, EventKind::BurstStartsAtOlt, ou, b);
  push(beta, EventKind::BurstEndsAtOlt, ou, b);
  push(report_received(BurstTiming{alpha, beta, pos}, prof_.report_time), EventKind::ReportDecoded,
       ou, b);
}

void Simulator::start_cycle_zero() {
  for (unsigned th = 1; th <= policy_.threads; ++th) {
    unsigned slot = 1;
    while (slot <= onus_) {
      const auto [first, last] = group_bounds(policy_.framework, slot, onus_);
      decide_group(th, 0, first, last, SimTime::zero());
      slot = last + 1;
    }
  }
}

void Simulator::on_report(std::uint32_t b) {
  const TransmissionRecord rec = bursts_[b].rec;
  const SimTime tau = topo_.tau(rec.onu);
  const SimTime snapshot = rec.report_at_beginning ? rec.alpha - tau
                                                   : rec.beta - tau - prof_.report_time;
  onu_[rec.onu].reported[rec.thread - 1] = reported_through(rec.onu, snapshot);

  const auto key = std::make_pair(static_cast<unsigned>(rec.thread), rec.cycle);
  if (gating_slot(policy_.framework, rec.slot, onus_) == rec.slot) {
    const auto ledger = ledgers_.find(key);
    const std::optional<SimTime> gamma =
        scheduling_instant(policy_, rec.slot, onus_, ledger->second, prof_.report_time);
    if (!gamma || *gamma != now_) throw std::logic_error("scheduling instant out of step");
    const auto [first, last] = group_bounds(policy_.framework, rec.slot, onus_);
    decide_group(rec.thread, rec.cycle + 1, first, last, *gamma);
    if (last == onus_) ledgers_.erase(ledger);
  }
  if (policy_.online() && rec.slot == 1 && rec.cycle >= 2) online_pool_.forget_before(rec.cycle - 1);
  release(b);
}

void Simulator::on_grant(std::uint32_t b) {
  const Burst& burst = bursts_[b];
  const TransmissionRecord& r = burst.rec;
  const SimTime tau = topo_.tau(r.onu);
  // The ONU must hold the gate before it starts sending at α - τ.
  if (now_ + tau > r.alpha) ++out_.checks.causality_violations;
  if (r.alpha < r.gamma + prof_.gate_time + tau * 2) ++out_.checks.causality_violations;
  release(b);
}

void Simulator::on_start(std::uint32_t b) {
  TransmissionRecord& r = bursts_[b].rec;
  if (rx_seen_ && r.alpha < rx_last_end_ + prof_.guard) ++out_.checks.guard_violations;
  if (r.alpha < rx_last_end_) {
    ++out_.checks.order_violations;
    r.idle = SimTime::zero();
  } else {
    r.idle = r.alpha - rx_last_end_;
  }
  if (r.idle != idle_time(r.gamma, r.gate_delay, r.omega, prof_.guard))
    ++out_.checks.oracle_mismatches;
  rx_seen_ = true;
  release(b);
}

void Simulator::on_end(std::uint32_t b) {
  const Burst& burst = bursts_[b];
  const TransmissionRecord& r = burst.rec;
  rx_last_end_ = r.beta;

  OnuState& s = onu_[r.onu];
  const SimTime base = r.alpha + (r.report_at_beginning ? prof_.report_time : SimTime::zero());
  while (!s.queue.empty() && s.queue.front().end <= burst.payload_end) {
    const Queued& q = s.queue.front();
    const SimTime at = base + per_byte_ * (q.end - burst.payload_begin);
    metrics_.add_delay(at, at - q.t_gen);
    if (cfg_.keep_packets)
      out_.packets.push_back(Packet{q.id, r.onu, q.size, q.t_gen, at});
    ++out_.checks.delivered;
    s.queue.pop_front();
  }
  s.delivered = burst.payload_end;

  metrics_.add_record(r);
  ++out_.bursts;
  if (cfg_.keep_records) out_.records.push_back(r);
  if (cfg_.trace != nullptr) {
    *cfg_.trace << r.cycle << ',' << r.thread << ',' << r.slot << ',' << r.onu << ','
                << r.gamma.count() << ',' << r.gate_delay.count() << ',' << r.omega.count()
                << ',' << r.alpha.count() << ',' << r.beta.count() << ',' << r.idle.count()
                << ',' << r.payload_bytes << '\n';
  }
  release(b);
  if (cfg_.drain && now_ >= horizon_ && drain_complete()) finished_ = true;
}

void Simulator::on_batch(std::uint32_t) {
  std::uint64_t total = 0;
  for (std::size_t o = 0; o < onus_; ++o) {
    pull_until(o, now_);
    total += onu_[o].arrived - onu_[o].delivered;
  }
  out_.backlog_samples.push_back(total);
  out_.max_backlog_bytes = std::max(out_.max_backlog_bytes, total);
}

bool Simulator::drain_complete() {
  for (std::size_t o = 0; o < onus_; ++o) {
    pull_until(o, horizon_);
    if (!onu_[o].queue.empty()) return false;
  }
  return true;
}

RunResult Simulator::run() {
  if (cfg_.trace != nullptr) write_trace_header(*cfg_.trace);
  spdlog::debug("run {} reporting={} horizon={} G_max={}", policy_.label(),
                to_string(policy_.reporting), to_string(horizon_), to_string(g_max_));

  for (unsigned k = 0; k <= cfg_.batches; ++k) {
    const SimTime at = warmup_ + (horizon_ - warmup_) * k / cfg_.batches;
    push(at, EventKind::BatchBoundary, 0, k);
  }
  start_cycle_zero();

  const SimTime stop = cfg_.drain ? horizon_ + cfg_.drain_limit : horizon_;
  while (!events_.empty() && !finished_) {
    const Event e = events_.top();
    if (SimTime::ticks(e.time) > stop) break;
    events_.pop();
    now_ = SimTime::ticks(e.time);
    switch (e.kind) {
      case EventKind::ReportDecoded: on_report(e.ref); break;
      case EventKind::GrantArrivesAtOnu: on_grant(e.ref); break;
      case EventKind::BurstStartsAtOlt: on_start(e.ref); break;
      case EventKind::BurstEndsAtOlt: on_end(e.ref); break;
      case EventKind::BatchBoundary: on_batch(e.ref); break;
    }
  }

  RunChecks& c = out_.checks;
  c.drained = cfg_.drain && finished_;
  for (const OnuState& s : onu_) {
    c.queued += s.queue.size();
    for (const Queued& q : s.queue) {
      if (q.end > s.granted) break;
      ++c.in_flight;
    }
  }

  bool saturated = false;
  const std::uint64_t bound = cfg_.saturation_bytes != 0 ? cfg_.saturation_bytes : prof_.rate / 8;
  const auto& samples = out_.backlog_samples;
  if (out_.max_backlog_bytes > bound) saturated = true;
  if (samples.size() >= 2 && !cfg_.drain) {
    const double offered = cfg_.traffic.load_bps / 8.0 * (horizon_ - warmup_).seconds();
    const double growth = static_cast<double>(samples.back()) - static_cast<double>(samples.front());
    if (growth > cfg_.saturation_growth * offered) saturated = true;
  }
  out_.summary = metrics_.summary(saturated);
  if (saturated) spdlog::debug("{}: queues grow without bound", policy_.label());
  return std::move(out_);
}

}  // namespace

SimTime gpon_frame_align(SimTime raw, const PonProfile& profile) {
  if (profile.framing != Framing::GponFrame) return raw;
  const SimTime period = profile.frame_period();
  const SimTime rem = raw % period;
  return rem == SimTime::zero() ? raw : raw + (period - rem);
}

void write_trace_header(std::ostream& out) {
  out << "n,theta,j,onu,gamma_ps,T_ps,omega_ps,alpha_ps,beta_ps,idle_ps,payload_bytes\n";
}

RunResult run(const RunConfig& config) {
  Simulator sim(config);
  return sim.run();
}

}  // namespace ponsim
