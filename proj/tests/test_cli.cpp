#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path out_file = dir / "_stdout.txt";
  const fs::path err_file = dir / "_stderr.txt";
  const std::string cmd = std::string(BDYX_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = (status >= 0) ? ((status >> 8) & 0xff) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bdyx_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("equilibrium command writes the closed-form summary") {
  const fs::path dir = fresh_dir("eq_default");
  const CliResult r = run_cli("equilibrium --out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  const json summary = load_json(dir / "summary.json");
  CHECK(summary["r_bar"].get<double>() == doctest::Approx(0.450879).epsilon(1e-5));
  CHECK(summary["gini"].get<double>() == doctest::Approx(0.7011).epsilon(1e-3));
  CHECK(summary["params"]["n_h"].get<double>() == 0.5);
  CHECK(fs::exists(dir / "pmfs.csv"));
  CHECK(fs::exists(dir / "config.json"));

  // first data line of pmfs.csv is the honest head (1 - r_bar)
  std::istringstream lines(slurp(dir / "pmfs.csv"));
  std::string header;
  std::string first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "group,n,probability");
  CHECK(first.rfind("h,0,0.549121", 0) == 0);
}

TEST_CASE("equilibrium command: degenerate honest economy") {
  const fs::path dir = fresh_dir("eq_honest");
  const CliResult r =
      run_cli("equilibrium --n-h 1 --gamma 0.3 --out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  const json summary = load_json(dir / "summary.json");
  CHECK(summary["r_bar"].get<double>() == doctest::Approx(5.0 / 6.0));
  CHECK(summary["cheater_law_defined"].get<bool>() == false);
}

TEST_CASE("invalid gamma exits with code 2 and names the field") {
  const fs::path dir = fresh_dir("eq_bad_gamma");
  const CliResult r =
      run_cli("equilibrium --gamma 1.5 --out " + dir.string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("gamma") != std::string::npos);
}

TEST_CASE("numeric failure exits with code 3") {
  // n_max far too small for the 1e-12 tail budget
  const fs::path dir = fresh_dir("eq_tail");
  const CliResult r =
      run_cli("equilibrium --n-max 20 --out " + dir.string(), dir);
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("tail") != std::string::npos);
}

TEST_CASE("unknown flag and missing subcommand exit with code 2") {
  const fs::path dir = fresh_dir("bad_usage");
  CHECK(run_cli("equilibrium --no-such-flag 1", dir).exit_code == 2);
  CHECK(run_cli("", dir).exit_code == 2);
}

TEST_CASE("abm command: reruns with one seed are byte-identical") {
  const fs::path dir_a = fresh_dir("abm_a");
  const fs::path dir_b = fresh_dir("abm_b");
  const std::string args =
      " --n-agents 200 --t-end 50 --snapshot-every 10 --record-from 20 --out ";
  REQUIRE(run_cli("abm --seed 31" + args + dir_a.string(), dir_a).exit_code ==
          0);
  REQUIRE(run_cli("abm --seed 31" + args + dir_b.string(), dir_b).exit_code ==
          0);
  for (const char* name : {"snapshots.csv", "comparison.csv", "metadata.json"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    CHECK(!slurp(dir_a / name).empty());
  }
  // a different seed produces different snapshots
  const fs::path dir_c = fresh_dir("abm_c");
  REQUIRE(run_cli("abm --seed 32" + args + dir_c.string(), dir_c).exit_code ==
          0);
  CHECK(slurp(dir_a / "snapshots.csv") != slurp(dir_c / "snapshots.csv"));
}

TEST_CASE("abm command: zero snapshots leaves metadata only") {
  const fs::path dir = fresh_dir("abm_meta");
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"n_agents": 100, "t_end": 10, "snapshot_every": 0})";
  }
  const CliResult r = run_cli(
      "abm --config " + cfg.string() + " --out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "metadata.json"));
  CHECK_FALSE(fs::exists(dir / "snapshots.csv"));
  const json meta = load_json(dir / "metadata.json");
  CHECK(meta["snapshot_count"].get<int>() == 0);
  CHECK(meta["event_count"].get<std::int64_t>() > 0);
}

TEST_CASE("config file values are applied and flags override them") {
  const fs::path dir = fresh_dir("cfg_override");
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"mu": 3.0, "n_h": 0.25, "gamma": 0.1, "n_max": 400})";
  }
  const CliResult r = run_cli("equilibrium --config " + cfg.string() +
                                  " --gamma 0.2 --out " + dir.string(),
                              dir);
  REQUIRE(r.exit_code == 0);
  const json effective = load_json(dir / "config.json");
  CHECK(effective["mu"].get<double>() == 3.0);      // from file
  CHECK(effective["n_h"].get<double>() == 0.25);    // from file
  CHECK(effective["gamma"].get<double>() == 0.2);   // flag wins
  CHECK(effective["n_max"].get<int>() == 400);

  // round trip: feeding the effective config back reproduces it exactly
  const fs::path dir2 = fresh_dir("cfg_roundtrip");
  const CliResult r2 =
      run_cli("equilibrium --config " + (dir / "config.json").string() +
                  " --out " + dir2.string(),
              dir2);
  REQUIRE(r2.exit_code == 0);
  json a = load_json(dir / "config.json");
  json b = load_json(dir2 / "config.json");
  a.erase("out");
  b.erase("out");
  CHECK(a == b);
}

TEST_CASE("ode command writes trajectory and a monotone H trace") {
  const fs::path dir = fresh_dir("ode_small");
  const CliResult r = run_cli(
      "ode --mu 2 --n-max 200 --t-end 5 --dt 0.01 --trajectory-every 2.5 "
      "--h-trace-every 0.1 --out " +
          dir.string(),
      dir);
  REQUIRE(r.exit_code == 0);
  const json summary = load_json(dir / "summary.json");
  CHECK(summary["max_mass_drift"].get<double>() < 1e-9);
  CHECK(summary["final_weighted_mean_drift"].get<double>() < 1e-6);

  std::istringstream lines(slurp(dir / "h_trace.csv"));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "time,H,H_equilibrium_minus_H,production_rate");
  double prev = -1e300;
  int rows = 0;
  bool monotone = true;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double h = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    if (h < prev - 1e-10) monotone = false;
    prev = h;
    ++rows;
  }
  CHECK(monotone);
  CHECK(rows == 51);

  // trajectory has c, h and mix groups
  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.find(",c,") != std::string::npos);
  CHECK(traj.find(",h,") != std::string::npos);
  CHECK(traj.find(",mix,") != std::string::npos);
}

TEST_CASE("ode command: t_end=0 echoes the initial Dirac") {
  const fs::path dir = fresh_dir("ode_echo");
  const CliResult r = run_cli(
      "ode --mu 3 --n-max 200 --t-end 0 --out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.find("0,h,3,1") != std::string::npos);
}

TEST_CASE("gini-sweep command") {
  SUBCASE("default grids produce monotone curves") {
    const fs::path dir = fresh_dir("sweep_default");
    const CliResult r = run_cli(
        "gini-sweep --points 50 --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "mu,n_h,gamma,r_bar,gini,mean_cheater,mean_honest");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 4 * 50);
    const json mono = load_json(dir / "monotonicity.json");
    REQUIRE(mono.is_array());
    for (const auto& entry : mono) {
      CHECK(entry["adjacent_decreases"].get<int>() == 0);
    }
  }
  SUBCASE("empty grid exits with code 2") {
    const fs::path dir = fresh_dir("sweep_empty");
    CHECK(run_cli("gini-sweep --points 0 --out " + dir.string(), dir)
              .exit_code == 2);
  }
  SUBCASE("single-point grid") {
    const fs::path dir = fresh_dir("sweep_single");
    const CliResult r = run_cli(
        "gini-sweep --mu 5 --n-h 0.5 --points 1 --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const std::string sweep = slurp(dir / "sweep.csv");
    CHECK(sweep.find("0.545454545455") != std::string::npos);
  }
}

TEST_CASE("linearized command: decaying energy traces") {
  const fs::path dir = fresh_dir("lin_small");
  const CliResult r = run_cli(
      "linearized --support 40 --samples 2 --t-end 5 "
      "--record-every 1 --seed 9 --out " +
          dir.string(),
      dir);
  REQUIRE(r.exit_code == 0);
  const json summary = load_json(dir / "summary.json");
  REQUIRE(summary.is_array());
  REQUIRE(summary.size() == 2);
  for (const auto& entry : summary) {
    CHECK(entry["monotone_violations"].get<int>() == 0);
    CHECK(entry["energy_final"].get<double>() <
          entry["energy_initial"].get<double>());
    CHECK(entry["max_identity_residual"].get<double>() < 1e-6);
  }
  CHECK(fs::exists(dir / "traces.csv"));
}

TEST_CASE("json format switch") {
  const fs::path dir = fresh_dir("fmt_json");
  const CliResult r = run_cli(
      "equilibrium --format json --out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "pmfs.json"));
  const json pmfs = load_json(dir / "pmfs.json");
  REQUIRE(pmfs.is_array());
  CHECK(pmfs[0]["group"].get<std::string>() == "h");

  const fs::path dir2 = fresh_dir("fmt_bad");
  CHECK(run_cli("equilibrium --format yaml --out " + dir2.string(), dir2)
            .exit_code == 2);
}
