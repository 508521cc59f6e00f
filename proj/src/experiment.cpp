#include "ponsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "ponsim/errors.hpp"

namespace ponsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(sep, start), s.size());
    const std::string_view item = trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double parse_real(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(line, "'" + text + "' is not a number");
  }
}

std::uint64_t parse_count(const std::string& text, std::size_t line) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
      }))
    throw ConfigError(line, "'" + text + "' is not a non-negative integer");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(line, "'" + text + "' is out of range");
  }
}

SimTime parse_span(const std::string& text, std::size_t line) {
  if (text == "0") return SimTime::zero();
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.back())))
    throw ConfigError(line, "duration '" + text + "' needs a unit (ps, ns, us, ms, s)");
  try {
    return parse_duration(text);
  } catch (const Error& e) {
    throw ConfigError(line, e.what());
  }
}

/// Comma list; an item "a:b:step" expands to a, a+step, ..., b.
std::vector<double> parse_reals(std::string_view value, std::size_t line) {
  std::vector<double> out;
  for (const std::string& item : split(value, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_real(parts[0], line));
    } else if (parts.size() == 3) {
      const double a = parse_real(parts[0], line);
      const double b = parse_real(parts[1], line);
      const double step = parse_real(parts[2], line);
      if (!(step > 0.0) || b < a) throw ConfigError(line, "range '" + item + "' is empty");
      const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
      for (long i = 0; i <= n; ++i)
        out.push_back(std::round((a + static_cast<double>(i) * step) * 1e9) / 1e9);
    } else {
      throw ConfigError(line, "malformed list item '" + item + "'");
    }
  }
  return out;
}

PolicyChoice parse_policy_words(const std::vector<std::string>& w, std::size_t line) {
  if (w.size() != 3)
    throw ConfigError(line, "policy needs '<framework> <sizing> <reporting>'");
  const auto f = parse_framework(lower(w[0]));
  const auto s = parse_sizing(lower(w[1]));
  const auto r = parse_reporting(lower(w[2]));
  if (!f) throw ConfigError(line, "unknown framework '" + w[0] + "'");
  if (!s) throw ConfigError(line, "unknown sizing '" + w[1] + "'");
  if (!r) throw ConfigError(line, "unknown reporting '" + w[2] + "'");
  return {*f, *s, *r};
}

void check_policy(const PolicyChoice& p, std::size_t line) {
  try {
    DbaPolicy::make(p.framework, p.sizing, p.reporting, SimTime::ms(1));
  } catch (const InvalidPolicy& e) {
    throw ConfigError(line, e.what());
  }
}

std::string format_real(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string format_ms(SimTime t) {
  std::string s = format_real("%.6f", static_cast<double>(t.count()) / SimTime::kTicksPerMs);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::vector<std::uint64_t> ExperimentSpec::run_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (unsigned i = 0; i < replications; ++i) out.push_back(seed_base + i);
  return out;
}

void ExperimentSpec::validate() const {
  if (loads.empty()) throw ConfigError(0, "at least one load is required");
  for (double l : loads)
    if (!(l > 0.0 && l < 1.0)) throw ConfigError(0, "loads must lie strictly between 0 and 1");
  if (policies.empty()) throw ConfigError(0, "at least one policy is required");
  if (max_cycles.empty()) throw ConfigError(0, "at least one Z value is required");
  for (SimTime z : max_cycles)
    if (z == SimTime::zero()) throw ConfigError(0, "Z must be positive");
  if (onus.empty()) throw ConfigError(0, "at least one ONU count is required");
  for (std::size_t o : onus)
    if (o == 0) throw ConfigError(0, "onus must be positive");
  if (replications == 0 && seeds.empty()) throw ConfigError(0, "replications must be positive");
  if (!(warmup >= 0.0 && warmup < 1.0)) throw ConfigError(0, "warmup must lie in [0, 1)");
  if (!(hurst > 0.5 && hurst < 1.0)) throw ConfigError(0, "hurst must lie in (0.5, 1)");
  if (sources_per_onu == 0) throw ConfigError(0, "sources_per_onu must be positive");
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) throw ConfigError(0, "duty_cycle must lie in (0, 1]");
  if (duration == SimTime::zero()) throw ConfigError(0, "duration must be positive");
}

ExperimentSpec parse_config(std::string_view text) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::vector<std::string> frameworks, sizings, reportings;
  std::size_t cross_line = 0;
  bool have_loads = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(line_no, "'" + key + "' has no value");
    if (key != "policy" && !seen.insert(key).second)
      throw ConfigError(line_no, "duplicate key '" + key + "'");

    if (key == "standard") {
      const auto s = parse_standard(lower(value));
      if (!s) throw ConfigError(line_no, "unknown standard '" + std::string(value) + "'");
      spec.standard = *s;
    } else if (key == "loads" || key == "load") {
      spec.loads = parse_reals(value, line_no);
      for (double l : spec.loads)
        if (!(l > 0.0 && l < 1.0))
          throw ConfigError(line_no, "load " + format_real("%g", l) + " is outside (0, 1)");
      have_loads = true;
    } else if (key == "z") {
      spec.max_cycles.clear();
      for (const std::string& item : split(value, ',')) {
        const SimTime z = parse_span(item, line_no);
        if (z == SimTime::zero()) throw ConfigError(line_no, "Z must be positive");
        if (std::find(kStudiedCycleLengths.begin(), kStudiedCycleLengths.end(), z) ==
            kStudiedCycleLengths.end())
          spec.warnings.push_back("line " + std::to_string(line_no) + ": Z = " + item +
                                  " is not one of the studied values (2, 4, 8 ms)");
        spec.max_cycles.push_back(z);
      }
    } else if (key == "onus") {
      spec.onus.clear();
      for (const std::string& item : split(value, ',')) {
        const std::uint64_t o = parse_count(item, line_no);
        if (o == 0) throw ConfigError(line_no, "onus must be positive");
        spec.onus.push_back(o);
      }
    } else if (key == "range") {
      const auto r = parse_range(lower(value));
      if (!r) throw ConfigError(line_no, "range must be 100km or 20km");
      spec.range = *r;
    } else if (key == "policy") {
      const PolicyChoice p = parse_policy_words(words(value), line_no);
      check_policy(p, line_no);
      spec.policies.push_back(p);
    } else if (key == "framework" || key == "sizing" || key == "reporting") {
      auto& list = key == "framework" ? frameworks : key == "sizing" ? sizings : reportings;
      for (const std::string& item : split(value, ',')) list.push_back(lower(item));
      cross_line = std::max(cross_line, line_no);
    } else if (key == "seeds") {
      spec.seeds.clear();
      for (const std::string& item : split(value, ','))
        spec.seeds.push_back(parse_count(item, line_no));
    } else if (key == "replications") {
      spec.replications = static_cast<unsigned>(parse_count(std::string(value), line_no));
      if (spec.replications == 0) throw ConfigError(line_no, "replications must be positive");
    } else if (key == "seed_base") {
      spec.seed_base = parse_count(std::string(value), line_no);
    } else if (key == "duration") {
      spec.duration = parse_span(std::string(value), line_no);
    } else if (key == "max_packets") {
      spec.max_packets = parse_count(std::string(value), line_no);
    } else if (key == "warmup") {
      spec.warmup = parse_real(std::string(value), line_no);
      if (!(spec.warmup >= 0.0 && spec.warmup < 1.0))
        throw ConfigError(line_no, "warmup must lie in [0, 1)");
    } else if (key == "hurst") {
      spec.hurst = parse_real(std::string(value), line_no);
      if (!(spec.hurst > 0.5 && spec.hurst < 1.0))
        throw ConfigError(line_no, "hurst must lie in (0.5, 1)");
    } else if (key == "sources_per_onu") {
      spec.sources_per_onu = static_cast<unsigned>(parse_count(std::string(value), line_no));
    } else if (key == "mean_on") {
      spec.mean_on = parse_span(std::string(value), line_no);
    } else if (key == "duty_cycle") {
      spec.duty_cycle = parse_real(std::string(value), line_no);
    } else if (key == "t_tune") {
      spec.t_tune = static_cast<unsigned>(parse_count(std::string(value), line_no));
    } else if (key == "output") {
      spec.output = std::string(value);
    } else {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
  }

  if (!frameworks.empty() || !sizings.empty() || !reportings.empty()) {
    if (frameworks.empty() || sizings.empty())
      throw ConfigError(cross_line, "framework and sizing lists must be given together");
    if (reportings.empty()) reportings.push_back("end");
    for (const auto& f : frameworks)
      for (const auto& s : sizings)
        for (const auto& r : reportings) {
          const PolicyChoice p = parse_policy_words({f, s, r}, cross_line);
          check_policy(p, cross_line);
          spec.policies.push_back(p);
        }
  }
  if (!have_loads) throw ConfigError(0, "'loads' is required");
  if (spec.policies.empty())
    spec.policies.push_back({Framework::OfflineStp, Sizing::Gated, Reporting::End});
  spec.validate();
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

RunConfig make_run_config(const ExperimentSpec& spec, const PolicyChoice& policy, SimTime z,
                          std::size_t onus, double load, std::uint64_t seed) {
  RunConfig rc;
  rc.profile = PonProfile::make(spec.standard);
  rc.topology = Topology::place(onus, spec.range, seed);
  rc.policy = DbaPolicy::make(policy.framework, policy.sizing, policy.reporting, z);
  rc.policy.t_tune = spec.t_tune;
  rc.traffic.load_bps = load * static_cast<double>(rc.profile.rate);
  rc.traffic.hurst = spec.hurst;
  rc.traffic.sources_per_onu = spec.sources_per_onu;
  rc.traffic.mean_on = spec.mean_on;
  rc.traffic.duty_cycle = spec.duty_cycle;
  rc.traffic.seed = seed;
  rc.duration = spec.duration;
  rc.max_packets = spec.max_packets;
  rc.warmup_fraction = spec.warmup;
  return rc;
}

std::vector<ResultTable> run_sweep(const ExperimentSpec& spec, unsigned jobs) {
  spec.validate();
  const std::vector<std::uint64_t> seeds = spec.run_seeds();

  struct Task {
    std::size_t table;
    std::size_t row;
    std::size_t seed;
  };
  std::vector<ResultTable> tables;
  std::vector<Task> tasks;
  for (SimTime z : spec.max_cycles)
    for (std::size_t o : spec.onus) {
      ResultTable t{spec.standard, z, o, {}};
      for (const PolicyChoice& p : spec.policies)
        for (double load : spec.loads) {
          const DbaPolicy dp = DbaPolicy::make(p.framework, p.sizing, p.reporting, z);
          for (std::size_t s = 0; s < seeds.size(); ++s)
            tasks.push_back({tables.size(), t.rows.size(), s});
          t.rows.push_back({dp.label(), p.reporting, load, {}});
        }
      tables.push_back(std::move(t));
    }

  // Summaries indexed like `tasks`; workers only write their own slot.
  std::vector<RunSummary> done(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const Task& t = tasks[i];
      try {
        const ResultTable& table = tables[t.table];
        const std::size_t per = spec.loads.size();
        const PolicyChoice& p = spec.policies[t.row / per];
        const RunConfig rc = make_run_config(spec, p, table.max_cycle, table.onus,
                                             table.rows[t.row].load, seeds[t.seed]);
        done[i] = run(rc).summary;
        spdlog::debug("done {} {} load={} seed={}", table.rows[t.row].policy,
                      to_string(p.reporting), table.rows[t.row].load, seeds[t.seed]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::map<std::pair<std::size_t, std::size_t>, std::vector<RunSummary>> grouped;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    grouped[{tasks[i].table, tasks[i].row}].push_back(done[i]);
  for (auto& [key, runs] : grouped) tables[key.first].rows[key.second].summary = merge(runs);

  for (ResultTable& t : tables)
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const ResultRow& a, const ResultRow& b) {
      if (a.policy != b.policy) return a.policy < b.policy;
      if (a.load != b.load) return a.load < b.load;
      return a.reporting < b.reporting;
    });
  return tables;
}

std::string results_file_name(Standard s, SimTime z, std::size_t onus, bool with_onus) {
  std::string name = "results_" + std::string(to_string(s)) + "_Z" + format_ms(z);
  if (with_onus) name += "_O" + std::to_string(onus);
  return name + ".csv";
}

void write_results_csv(std::ostream& out, const ResultTable& table) {
  out << kResultsHeader << '\n';
  for (const ResultRow& r : table.rows) {
    const RunSummary& s = r.summary;
    out << r.policy << ',' << to_string(r.reporting) << ',' << format_real("%.6g", r.load) << ','
        << format_real("%.8e", s.mean_delay) << ',' << format_real("%.8e", s.ci_delay) << ','
        << format_real("%.8e", s.mean_idle) << ',' << format_real("%.8e", s.ci_idle) << ','
        << format_real("%.8e", s.mean_cycle_len) << ','
        << format_real("%.8e", s.mean_window_len) << ',' << s.replications << ','
        << (s.saturated ? 1 : 0) << '\n';
  }
}

std::vector<std::filesystem::path> run_experiment(const ExperimentSpec& spec, unsigned jobs,
                                                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  const std::vector<ResultTable> tables = run_sweep(spec, jobs);
  std::vector<std::filesystem::path> files;
  for (const ResultTable& t : tables) {
    const auto path =
        out_dir / results_file_name(t.standard, t.max_cycle, t.onus, spec.onus.size() > 1);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_results_csv(out, t);
    if (!out) throw IoError("failed writing " + path.string());
    files.push_back(path);
  }
  return files;
}

std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& csv,
                                                 const std::filesystem::path& out_dir,
                                                 std::vector<std::string>* warnings) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot read " + csv.string());
  std::string header;
  if (!std::getline(in, header)) {
    if (warnings) warnings->push_back(csv.string() + " is empty; no plot data written");
    return {};
  }
  const std::vector<std::string> cols = split(header, ',');
  auto column = [&](std::string_view name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw SchemaError(csv.string() + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t c_policy = column("policy");
  const std::size_t c_rep = column("reporting");
  const std::size_t c_load = column("load");
  const std::array<std::pair<std::string_view, std::pair<std::size_t, std::size_t>>, 2> metrics{{
      {"delay", {column("mean_delay_s"), column("ci_delay")}},
      {"idle", {column("mean_idle_s"), column("ci_idle")}},
  }};

  // Curves keep file order of their rows.
  std::map<std::string, std::vector<std::vector<std::string>>> curves;
  std::vector<std::string> order;
  for (std::string line; std::getline(in, line);) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      f.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != cols.size()) throw SchemaError(csv.string() + ": row has the wrong number of fields");
    const std::string key = f[c_policy] + "_" + f[c_rep];
    if (!curves.contains(key)) order.push_back(key);
    curves[key].push_back(std::move(f));
  }
  if (curves.empty()) {
    if (warnings) warnings->push_back(csv.string() + " has no rows; no plot data written");
    return {};
  }

  std::string stem = csv.stem().string();
  if (stem.rfind("results_", 0) == 0) stem = stem.substr(8);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& [metric, idx] : metrics)
    for (const std::string& key : order) {
      const auto path = out_dir / ("fig_" + stem + "_" + std::string(metric) + "_" + key + ".dat");
      std::ofstream out(path);
      if (!out) throw IoError("cannot write " + path.string());
      for (const auto& f : curves[key])
        out << f[c_load] << ' ' << f[idx.first] << ' ' << f[idx.second] << '\n';
      if (!out) throw IoError("failed writing " + path.string());
      files.push_back(path);
    }
  return files;
}

}  // namespace ponsim
