#include <filesystem>
#include <fstream>
#include <sstream>

#include "ponsim/errors.hpp"
#include "ponsim/experiment.hpp"
#include "support.hpp"

using namespace ponsim;
using namespace ponsim::literals;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ponsim_test_" + std::to_string(std::hash<std::string>{}(
                                 doctest::getContextOptions()->binary_name.c_str())) +
            "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::size_t config_error_line(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

ExperimentSpec fast(std::string text) {
  auto spec = parse_config(text + "\nduration = 200ms\nmax_packets = 0\n");
  return spec;
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const auto spec = parse_config("standard = epon1g\nloads = 0.5\n");
  CHECK(spec.standard == Standard::Epon1G);
  CHECK(spec.onus == std::vector<std::size_t>{32});
  CHECK(spec.range == RangeProfile::LongReach100km);
  CHECK(spec.warmup == doctest::Approx(0.1));
  CHECK(spec.max_cycles == kStudiedCycleLengths);
  REQUIRE(spec.policies.size() == 1);
  CHECK(spec.policies[0].framework == Framework::OfflineStp);
  CHECK(spec.run_seeds() == std::vector<std::uint64_t>{1});
  CHECK(spec.warnings.empty());
}

TEST_CASE("config syntax") {
  const auto spec = parse_config(
      "# comment\n"
      "standard = GPON10G   # trailing comment\n"
      "loads = 0.1:0.3:0.1, 0.9\n"
      "Z = 2ms, 8ms\n"
      "onus = 8, 32\n"
      "range = 20km\n"
      "seeds = 4, 9\n"
      "policy = dpp excess-share optimized\n"
      "framework = online-stp, online-mtp\n"
      "sizing = limited, excess\n"
      "reporting = end, beginning\n");
  CHECK(spec.standard == Standard::Gpon10G);
  CHECK(spec.loads == std::vector<double>{0.1, 0.2, 0.3, 0.9});
  CHECK(spec.max_cycles == std::vector<SimTime>{2_ms, 8_ms});
  CHECK(spec.range == RangeProfile::Standard20km);
  CHECK(spec.run_seeds() == std::vector<std::uint64_t>{4, 9});
  CHECK(spec.policies.size() == 9);
}

TEST_CASE("Z outside the studied set is accepted with a warning") {
  const auto spec = parse_config("loads = 0.5\nZ = 3ms\n");
  CHECK(spec.max_cycles == std::vector<SimTime>{3_ms});
  REQUIRE(spec.warnings.size() == 1);
  CHECK(spec.warnings[0].find("line 2") != std::string::npos);
}

TEST_CASE("online optimized reporting is rejected with its reason") {
  try {
    parse_config("loads = 0.5\nframework = online-stp\nsizing = gated\nreporting = optimized\n");
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("online") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("loads = 0.5\npolicy = online-mtp excess optimized\n"), ConfigError);
}

TEST_CASE("diagnostics carry line numbers") {
  CHECK(config_error_line("loads = 0.5\n\nbogus = 1\n") == 3);
  CHECK(config_error_line("loads = 0.5, 1.2\n") == 1);
  CHECK(config_error_line("loads = 0.5\nZ = 4\n") == 2);  // needs a unit
  CHECK(config_error_line("loads = 0.5\nonus = 0\n") == 2);
  CHECK(config_error_line("loads = 0.5\nloads = 0.6\n") == 2);
  CHECK(config_error_line("loads = 0.5\npolicy = offline-stp gated\n") == 2);
  CHECK(config_error_line("loads = 0.5\npolicy = offline-stp excess-share end\n") == 2);
  CHECK(config_error_line("loads = 0.5\nstandard = xgpon\n") == 2);
  CHECK(config_error_line("just text\n") == 1);
  CHECK(config_error_line("standard = epon1g\n") == 0);  // no loads at all
  CHECK_THROWS_AS(parse_config("loads =\n"), ConfigError);
}

TEST_CASE("validation rejects an empty load list") {
  ExperimentSpec spec = parse_config("loads = 0.5\n");
  spec.loads.clear();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(run_sweep(spec, 1), ConfigError);
}

TEST_CASE("run configuration of one instance") {
  const auto spec = parse_config("standard = epon10g\nloads = 0.5\nrange = 20km\n");
  const auto rc = make_run_config(spec, {Framework::OnlineMtp, Sizing::Excess, Reporting::End},
                                  4_ms, 16, 0.5, 7);
  CHECK(rc.profile.rate == k10G);
  CHECK(rc.topology.onus() == 16);
  CHECK(rc.topology.max_round_trip() == 200_us);
  CHECK(rc.policy.threads == 2);
  CHECK(rc.traffic.load_bps == doctest::Approx(5e9));
  CHECK(rc.traffic.seed == 7);
}

TEST_CASE("two ONU counts by three report positions gives six rows") {
  auto spec = fast(
      "standard = epon1g\nonus = 8, 32\nZ = 8ms\nloads = 0.9\nframework = offline-stp\n"
      "sizing = gated\nreporting = end, beginning, optimized\n");
  TempDir dir;
  const auto files = run_experiment(spec, 2, dir.path);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "results_epon1g_Z8_O8.csv");
  CHECK(files[1].filename() == "results_epon1g_Z8_O32.csv");
  std::size_t rows = 0;
  for (const auto& f : files) {
    const auto text = slurp(f);
    CHECK(text.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    rows += lines(text) - 1;
  }
  CHECK(rows == 6);
}

TEST_CASE("results are deterministic and independent of the worker count") {
  auto spec = fast(
      "loads = 0.3, 0.6\nZ = 4ms\nonus = 8\nreplications = 2\n"
      "policy = offline-stp limited end\npolicy = online-stp excess beginning\n");
  TempDir a, b;
  const auto fa = run_experiment(spec, 1, a.path);
  const auto fb = run_experiment(spec, 3, b.path);
  REQUIRE(fa.size() == 1);
  const auto text = slurp(fa[0]);
  CHECK(text == slurp(fb[0]));
  CHECK(lines(text) == 5);
  // Rows sorted by policy, then load.
  std::istringstream in(text);
  std::string header, r1, r2, r3, r4;
  std::getline(in, header);
  std::getline(in, r1);
  std::getline(in, r2);
  std::getline(in, r3);
  std::getline(in, r4);
  CHECK(r1.rfind("offline-stp-limited,end,0.3,", 0) == 0);
  CHECK(r2.rfind("offline-stp-limited,end,0.6,", 0) == 0);
  CHECK(r3.rfind("online-stp-excess,beginning,0.3,", 0) == 0);
  CHECK(r4.find(",2,") != std::string::npos);  // seed_count
}

TEST_CASE("CSV numbers carry nine significant digits") {
  ResultTable t{Standard::Epon1G, 4_ms, 32, {}};
  RunSummary s;
  s.mean_delay = 0.0123456789012;
  s.mean_idle = 31.25e-6;
  t.rows.push_back({"offline-stp-gated", Reporting::End, 0.9, s});
  std::ostringstream out;
  write_results_csv(out, t);
  CHECK(out.str().find("offline-stp-gated,end,0.9,1.23456789e-02,0.00000000e+00,3.12500000e-05") !=
        std::string::npos);
  CHECK(results_file_name(Standard::Gpon1G, SimTime::us(2500), 8, false) == "results_gpon1g_Z2.5.csv");
  CHECK(format_ms(4_ms) == "4");
}

TEST_CASE("unwritable output is an I/O error") {
  auto spec = fast("loads = 0.3\nZ = 4ms\nonus = 4\n");
  TempDir dir;
  const fs::path blocker = dir.path / "file";
  std::ofstream(blocker) << "x";
  CHECK_THROWS_AS(run_experiment(spec, 1, blocker / "sub"), IoError);
  CHECK_THROWS_AS(load_config(dir.path / "missing.cfg"), IoError);
}

TEST_CASE("plot data") {
  TempDir dir;
  SUBCASE("one policy, three loads") {
    std::ofstream(dir.path / "results_epon1g_Z4.csv")
        << kResultsHeader << "\n"
        << "offline-stp-gated,end,0.1,1.0e-03,1.0e-05,3.2e-05,1.0e-07,1.0e-03,1.0e-05,3,0\n"
        << "offline-stp-gated,end,0.5,2.0e-03,1.0e-05,3.2e-05,1.0e-07,1.0e-03,1.0e-05,3,0\n"
        << "offline-stp-gated,end,0.9,9.0e-03,1.0e-05,3.2e-05,1.0e-07,1.0e-03,1.0e-05,3,0\n";
    const auto files = emit_plotdata(dir.path / "results_epon1g_Z4.csv", dir.path / "plot");
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "fig_epon1g_Z4_delay_offline-stp-gated_end.dat");
    CHECK(files[1].filename() == "fig_epon1g_Z4_idle_offline-stp-gated_end.dat");
    const auto text = slurp(files[0]);
    CHECK(lines(text) == 3);
    CHECK(text.rfind("0.1 1.0e-03 1.0e-05\n", 0) == 0);
  }
  SUBCASE("empty CSV") {
    std::ofstream(dir.path / "empty.csv");
    std::vector<std::string> warnings;
    CHECK(emit_plotdata(dir.path / "empty.csv", dir.path, &warnings).empty());
    CHECK(warnings.size() == 1);
  }
  SUBCASE("missing column") {
    std::ofstream(dir.path / "bad.csv") << "policy,reporting,load,mean_delay_s\nx,end,0.1,1\n";
    CHECK_THROWS_AS(emit_plotdata(dir.path / "bad.csv", dir.path), SchemaError);
  }
  SUBCASE("seven mechanisms with both report positions") {
    auto spec = parse_config(slurp(fs::path(PONSIM_SOURCE_DIR) / "configs/sweep_epon1g.cfg"));
    CHECK(spec.policies.size() == 14);
    spec.max_cycles = {4_ms};
    spec.loads = {0.3};
    spec.onus = {4};
    spec.duration = 100_ms;
    spec.max_packets = 0;
    spec.seeds.clear();
    spec.replications = 1;
    const auto csv = run_experiment(spec, 2, dir.path);
    REQUIRE(csv.size() == 1);
    const auto files = emit_plotdata(csv[0], dir.path / "plot");
    std::size_t delay = 0;
    for (const auto& f : files)
      if (f.filename().string().find("_delay_") != std::string::npos) ++delay;
    CHECK(delay == 14);
  }
}

TEST_CASE("every shipped config parses") {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(PONSIM_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
    ++n;
  }
  CHECK(n >= 8);
}

TEST_CASE("optimized-placement scenarios cover O x range x Z") {
  for (const char* name : {"optimized_100km.cfg", "optimized_20km.cfg"}) {
    const auto spec = load_config(fs::path(PONSIM_SOURCE_DIR) / "configs" / name);
    CHECK(spec.onus == std::vector<std::size_t>{8, 32});
    CHECK(spec.max_cycles == kStudiedCycleLengths);
    CHECK(spec.policies.size() == 18);
  }
}
