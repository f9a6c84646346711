// bdyx: simulation and analysis of the BDY money-exchange game with
// probabilistic cheaters. Subcommands mirror the standard experiments:
// closed-form equilibrium, agent-based runs, mean-field ODE integration
// with an entropy trace, Gini sweeps over the cheat probability, the
// linearized-energy decay study, and a self-contained verification
// suite.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bdy/abm.hpp"
#include "bdy/analysis.hpp"
#include "bdy/equilibrium.hpp"
#include "bdy/errors.hpp"
#include "bdy/lyapunov.hpp"
#include "bdy/meanfield.hpp"
#include "bdy/model_params.hpp"
#include "bdy/rng.hpp"
#include "bdy/verify.hpp"

#include "output.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using bdyx_cli::fmt_double;
using bdyx_cli::Table;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInvariant = 4;

struct CommonCfg {
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 1;
};

void common_from_json(const json& j, CommonCfg& c) {
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  if (j.contains("format")) c.format = j["format"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
}

json common_to_json(const CommonCfg& c) {
  return json{{"out", c.out}, {"format", c.format}, {"seed", c.seed}};
}

void validate_common(const CommonCfg& c) {
  if (c.format != "csv" && c.format != "json") {
    throw bdy::invalid_params("format must be csv or json, got " + c.format);
  }
}

fs::path prepare_out_dir(const CommonCfg& c, const std::string& fallback) {
  fs::path dir = c.out.empty() ? fs::path("out") / fallback : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw bdy::invalid_params("cannot read config file " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw bdy::invalid_params(std::string("config parse error: ") + e.what());
  }
}

// first pass over argv: which subcommand, and is there a --config?
struct Preparse {
  std::string subcommand;
  std::optional<std::string> config_path;
};

Preparse prescan(int argc, char** argv) {
  Preparse pre;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (pre.subcommand.empty() && !arg.empty() && arg[0] != '-') {
      pre.subcommand = arg;
    }
    if (arg == "--config" && i + 1 < argc) {
      pre.config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      pre.config_path = arg.substr(9);
    }
  }
  return pre;
}

// ---------------------------------------------------------------- equilibrium

struct EquilibriumCfg {
  CommonCfg common;
  double mu = 5.0;
  double n_h = 0.5;
  double gamma = 0.5;
  int n_max = 500;

  static EquilibriumCfg from_json(const json& j) {
    EquilibriumCfg c;
    common_from_json(j, c.common);
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("n_h")) c.n_h = j["n_h"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("n_max")) c.n_max = j["n_max"].get<int>();
    return c;
  }
  json to_json() const {
    json j = common_to_json(common);
    j["mu"] = mu;
    j["n_h"] = n_h;
    j["gamma"] = gamma;
    j["n_max"] = n_max;
    return j;
  }
};

int run_equilibrium(const EquilibriumCfg& cfg) {
  validate_common(cfg.common);
  const bdy::ModelParams params(cfg.mu, cfg.n_h, cfg.gamma);
  const fs::path dir = prepare_out_dir(cfg.common, "equilibrium");
  bdyx_cli::write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");

  const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params, cfg.n_max);

  Table pmfs({"group", "n", "probability"});
  const auto emit = [&](const char* group, const bdy::WealthPMF& p) {
    for (std::size_t n = 0; n < p.size(); ++n) {
      pmfs.add_row({group, std::to_string(n), fmt_double(p[n])});
    }
  };
  emit("h", eq.p_bar_h);
  emit("c", eq.p_bar_c);
  emit("mix", eq.p_bar_mix);
  pmfs.write(dir, "pmfs", cfg.common.format);

  json summary;
  summary["r_bar"] = eq.r_bar;
  summary["quadratic_residual"] = eq.quadratic_residual;
  summary["cheater_ratio"] = eq.r_bar / (1.0 - params.gamma());
  summary["cheater_law_defined"] = eq.cheater_law_defined;
  summary["mean_honest"] = eq.mean_h;
  summary["mean_cheater"] = eq.mean_c;
  summary["weighted_mean"] =
      params.n_h() * eq.mean_h + params.n_c() * eq.mean_c;
  summary["gini"] = bdy::gini_equilibrium(params);
  summary["tail_mass_honest"] = bdy::geometric_tail_mass(eq.r_bar, cfg.n_max);
  summary["tail_mass_cheater"] =
      eq.cheater_law_defined
          ? bdy::geometric_tail_mass(eq.r_bar / (1.0 - params.gamma()),
                                     cfg.n_max)
          : 0.0;
  summary["params"] = json::parse(params.to_json());
  bdyx_cli::write_text_file(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "equilibrium: r_bar=" << fmt_double(eq.r_bar)
            << " gini=" << fmt_double(summary["gini"].get<double>())
            << " -> " << dir.string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------------ abm

struct AbmCfg {
  CommonCfg common;
  double mu = 5.0;
  double n_h = 0.5;
  double gamma = 0.5;
  int n_agents = 2000;
  double t_end = 20000.0;
  double snapshot_every = 50.0;
  double record_from = -1.0;  // default: t_end / 2
  std::vector<double> record_times;  // config-file only; overrides schedule

  static AbmCfg from_json(const json& j) {
    AbmCfg c;
    common_from_json(j, c.common);
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("n_h")) c.n_h = j["n_h"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("n_agents")) c.n_agents = j["n_agents"].get<int>();
    if (j.contains("t_end")) c.t_end = j["t_end"].get<double>();
    if (j.contains("snapshot_every"))
      c.snapshot_every = j["snapshot_every"].get<double>();
    if (j.contains("record_from"))
      c.record_from = j["record_from"].get<double>();
    if (j.contains("record_times"))
      c.record_times = j["record_times"].get<std::vector<double>>();
    return c;
  }
  json to_json() const {
    json j = common_to_json(common);
    j["mu"] = mu;
    j["n_h"] = n_h;
    j["gamma"] = gamma;
    j["n_agents"] = n_agents;
    j["t_end"] = t_end;
    j["snapshot_every"] = snapshot_every;
    j["record_from"] = record_from;
    j["record_times"] = record_times;
    return j;
  }
};

int run_abm(const AbmCfg& cfg) {
  validate_common(cfg.common);
  const bdy::ModelParams params(cfg.mu, cfg.n_h, cfg.gamma, cfg.n_agents);
  const fs::path dir = prepare_out_dir(cfg.common, "abm");
  bdyx_cli::write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");

  bdy::SimConfig sim;
  sim.seed = cfg.common.seed;
  sim.t_end = cfg.t_end;
  const double window_from =
      cfg.record_from >= 0.0 ? cfg.record_from : cfg.t_end / 2.0;
  if (!cfg.record_times.empty() || cfg.snapshot_every <= 0.0) {
    sim.record_times = cfg.record_times;
  } else {
    sim.record_times.push_back(0.0);
    for (double t = window_from; t <= cfg.t_end; t += cfg.snapshot_every) {
      if (!sim.record_times.empty() && t <= sim.record_times.back()) continue;
      sim.record_times.push_back(t);
    }
  }

  const bdy::PopulationState initial =
      bdy::PopulationState::uniform_initial(params);
  const bdy::SimResult result = bdy::run(params, sim, initial);

  json meta;
  meta["params"] = json::parse(params.to_json());
  meta["seed"] = sim.seed;
  meta["t_end"] = sim.t_end;
  meta["event_count"] = result.event_count;
  meta["transferred"] = result.transferred;
  meta["withheld"] = result.withheld;
  meta["broke_giver"] = result.broke_giver;
  meta["solvent_cheater_events"] = result.solvent_cheater_events;
  meta["snapshot_count"] = result.snapshots.size();

  if (!result.snapshots.empty()) {
    Table snaps({"time", "group", "n", "probability"});
    const auto emit = [&](double t, const char* group,
                          const bdy::WealthPMF& p) {
      for (std::size_t n = 0; n < p.size(); ++n) {
        snaps.add_row(
            {fmt_double(t), group, std::to_string(n), fmt_double(p[n])});
      }
    };
    for (const auto& s : result.snapshots) {
      emit(s.time, "all", s.all);
      if (params.honest_count() > 0) emit(s.time, "honest", s.honest);
      if (params.n_agents() - params.honest_count() > 0) {
        emit(s.time, "cheater", s.cheater);
      }
    }
    snaps.write(dir, "snapshots", cfg.common.format);

    // TV against the equilibrium laws: terminal snapshot and the
    // stationary-window average (the latter is the meaningful
    // stationarity number; a single snapshot of ~10^3 agents carries
    // O(0.05) multinomial noise by itself)
    const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params, 500);
    std::vector<bdy::WealthPMF> wa;
    std::vector<bdy::WealthPMF> wh;
    std::vector<bdy::WealthPMF> wc;
    for (const auto& s : result.snapshots) {
      if (s.time < window_from) continue;
      wa.push_back(s.all);
      wh.push_back(s.honest);
      wc.push_back(s.cheater);
    }
    const auto& last = result.snapshots.back();
    Table cmp({"group", "tv_terminal", "tv_window_average"});
    const auto tv = [](const bdy::WealthPMF& a, const bdy::WealthPMF& b) {
      return bdy::distance(a, b, bdy::Metric::TV);
    };
    const bool have_window = !wa.empty();
    cmp.add_row({"all", fmt_double(tv(last.all, eq.p_bar_mix)),
                 have_window
                     ? fmt_double(tv(bdy::average_pmfs(wa), eq.p_bar_mix))
                     : "nan"});
    if (params.honest_count() > 0) {
      cmp.add_row({"honest", fmt_double(tv(last.honest, eq.p_bar_h)),
                   have_window
                       ? fmt_double(tv(bdy::average_pmfs(wh), eq.p_bar_h))
                       : "nan"});
    }
    if (params.n_agents() - params.honest_count() > 0) {
      cmp.add_row({"cheater", fmt_double(tv(last.cheater, eq.p_bar_c)),
                   have_window
                       ? fmt_double(tv(bdy::average_pmfs(wc), eq.p_bar_c))
                       : "nan"});
    }
    cmp.write(dir, "comparison", cfg.common.format);
  }

  bdyx_cli::write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
  std::cout << "abm: " << result.event_count << " events, "
            << result.snapshots.size() << " snapshots -> " << dir.string()
            << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------------ ode

struct OdeCfg {
  CommonCfg common;
  double mu = 5.0;
  double n_h = 0.5;
  double gamma = 0.5;
  int n_max = 500;
  double dt = 0.01;
  double t_end = 500.0;
  double trajectory_every = 50.0;
  double h_trace_every = 0.1;

  static OdeCfg from_json(const json& j) {
    OdeCfg c;
    common_from_json(j, c.common);
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("n_h")) c.n_h = j["n_h"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("n_max")) c.n_max = j["n_max"].get<int>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("t_end")) c.t_end = j["t_end"].get<double>();
    if (j.contains("trajectory_every"))
      c.trajectory_every = j["trajectory_every"].get<double>();
    if (j.contains("h_trace_every"))
      c.h_trace_every = j["h_trace_every"].get<double>();
    return c;
  }
  json to_json() const {
    json j = common_to_json(common);
    j["mu"] = mu;
    j["n_h"] = n_h;
    j["gamma"] = gamma;
    j["n_max"] = n_max;
    j["dt"] = dt;
    j["t_end"] = t_end;
    j["trajectory_every"] = trajectory_every;
    j["h_trace_every"] = h_trace_every;
    return j;
  }
};

int run_ode(const OdeCfg& cfg) {
  validate_common(cfg.common);
  if (!(cfg.dt > 0.0)) {
    throw bdy::invalid_params("dt must be positive");
  }
  const bdy::ModelParams params(cfg.mu, cfg.n_h, cfg.gamma);
  const fs::path dir = prepare_out_dir(cfg.common, "ode");
  bdyx_cli::write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");

  const auto mu_bin = static_cast<int>(std::llround(cfg.mu));
  if (std::abs(cfg.mu - mu_bin) > 1e-12 || mu_bin > cfg.n_max) {
    throw bdy::invalid_params(
        "Dirac initial condition needs integer mu within [0, n_max]");
  }

  const double h_eq = bdy::h_equilibrium_value(params);
  Table trace({"time", "H", "H_equilibrium_minus_H", "production_rate"});
  Table traj({"time", "group", "n", "probability"});

  double last_frame_time = -1.0;
  const auto emit_frame = [&](const bdy::MeanFieldState& s) {
    last_frame_time = s.time;
    const bdy::WealthPMF mixed = bdy::mix(s.pc, s.ph, s.params);
    for (std::size_t n = 0; n < s.pc.size(); ++n) {
      traj.add_row({fmt_double(s.time), "c", std::to_string(n),
                    fmt_double(s.pc[n])});
    }
    for (std::size_t n = 0; n < s.ph.size(); ++n) {
      traj.add_row({fmt_double(s.time), "h", std::to_string(n),
                    fmt_double(s.ph[n])});
    }
    for (std::size_t n = 0; n < mixed.size(); ++n) {
      traj.add_row({fmt_double(s.time), "mix", std::to_string(n),
                    fmt_double(mixed[n])});
    }
  };

  std::vector<bdy::Observer> observers;
  observers.push_back(bdy::Observer{
      cfg.h_trace_every, [&](const bdy::MeanFieldState& s) {
        const double h = bdy::h_functional(s.pc, s.ph, s.params);
        trace.add_row({fmt_double(s.time), fmt_double(h),
                       fmt_double(h_eq - h),
                       fmt_double(bdy::h_production_rate(s))});
      }});
  observers.push_back(bdy::Observer{cfg.trajectory_every, emit_frame});

  bdy::MeanFieldState state{bdy::WealthPMF::dirac(mu_bin, cfg.n_max),
                            bdy::WealthPMF::dirac(mu_bin, cfg.n_max), params,
                            0.0};
  bdy::IntegrationStats stats;
  state = bdy::integrate(std::move(state), cfg.t_end, cfg.dt, observers,
                         &stats);
  if (last_frame_time < state.time - 1e-9) {
    emit_frame(state);  // horizon was not on the frame grid
  }

  trace.write(dir, "h_trace", cfg.common.format);
  traj.write(dir, "trajectory", cfg.common.format);

  const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params, cfg.n_max);
  json summary;
  summary["params"] = json::parse(params.to_json());
  summary["t_end"] = cfg.t_end;
  summary["dt"] = cfg.dt;
  summary["n_max"] = cfg.n_max;
  summary["l1_cheater_to_equilibrium"] =
      bdy::distance(state.pc, eq.p_bar_c, bdy::Metric::L1);
  summary["l1_honest_to_equilibrium"] =
      bdy::distance(state.ph, eq.p_bar_h, bdy::Metric::L1);
  summary["tv_mix_to_equilibrium"] = bdy::distance(
      bdy::mix(state.pc, state.ph, params), eq.p_bar_mix, bdy::Metric::TV);
  summary["final_H"] = bdy::h_functional(state.pc, state.ph, params);
  summary["H_equilibrium"] = h_eq;
  summary["max_mass_drift"] = stats.max_mass_drift;
  summary["negative_clamps"] = stats.negative_clamps;
  summary["worst_negative"] = stats.worst_negative;
  summary["renormalizations"] = stats.renormalizations;
  summary["steps"] = stats.steps;
  const double mean_drift = std::abs(
      params.n_h() * state.ph.mean() + params.n_c() * state.pc.mean() -
      params.mu());
  summary["final_weighted_mean_drift"] = mean_drift;
  bdyx_cli::write_text_file(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "ode: t=" << fmt_double(state.time) << " L1(ph)="
            << fmt_double(summary["l1_honest_to_equilibrium"].get<double>())
            << " L1(pc)="
            << fmt_double(summary["l1_cheater_to_equilibrium"].get<double>())
            << " -> " << dir.string() << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- gini-sweep

struct SweepCfg {
  CommonCfg common;
  std::vector<double> mu{5.0};
  std::vector<double> n_h{0.2, 0.4, 0.6, 0.8};
  int points = 100;
  double gamma_max = 0.99;

  static SweepCfg from_json(const json& j) {
    SweepCfg c;
    common_from_json(j, c.common);
    if (j.contains("mu")) c.mu = j["mu"].get<std::vector<double>>();
    if (j.contains("n_h")) c.n_h = j["n_h"].get<std::vector<double>>();
    if (j.contains("points")) c.points = j["points"].get<int>();
    if (j.contains("gamma_max")) c.gamma_max = j["gamma_max"].get<double>();
    return c;
  }
  json to_json() const {
    json j = common_to_json(common);
    j["mu"] = mu;
    j["n_h"] = n_h;
    j["points"] = points;
    j["gamma_max"] = gamma_max;
    return j;
  }
};

int run_gini_sweep(const SweepCfg& cfg) {
  validate_common(cfg.common);
  if (cfg.points < 1) {
    throw bdy::invalid_params("points must be >= 1 (empty gamma grid)");
  }
  if (!(cfg.gamma_max >= 0.0 && cfg.gamma_max < 1.0)) {
    throw bdy::invalid_params("gamma_max must lie in [0,1)");
  }
  if (cfg.mu.empty() || cfg.n_h.empty()) {
    throw bdy::invalid_params("mu and n_h lists must be nonempty");
  }
  const fs::path dir = prepare_out_dir(cfg.common, "gini-sweep");
  bdyx_cli::write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");

  std::vector<double> grid(static_cast<std::size_t>(cfg.points));
  for (int i = 0; i < cfg.points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        cfg.points == 1 ? 0.0 : cfg.gamma_max * i / (cfg.points - 1);
  }

  Table sweep({"mu", "n_h", "gamma", "r_bar", "gini", "mean_cheater",
               "mean_honest"});
  json monotonicity = json::array();
  for (const double mu : cfg.mu) {
    for (const double nh : cfg.n_h) {
      const bdy::GiniSweepResult res = bdy::gini_sweep(mu, nh, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        sweep.add_row({fmt_double(mu), fmt_double(nh),
                       fmt_double(res.gamma_grid[i]), fmt_double(res.r_bar[i]),
                       fmt_double(res.gini[i]), fmt_double(res.mean_cheater[i]),
                       fmt_double(res.mean_honest[i])});
      }
      monotonicity.push_back(json{{"mu", mu},
                                  {"n_h", nh},
                                  {"adjacent_decreases", res.adjacent_decreases}});
    }
  }
  sweep.write(dir, "sweep", cfg.common.format);
  bdyx_cli::write_text_file(dir / "monotonicity.json",
                            monotonicity.dump(2) + "\n");
  std::cout << "gini-sweep: " << cfg.mu.size() * cfg.n_h.size() << " curves x "
            << cfg.points << " points -> " << dir.string() << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- linearized

struct LinearizedCfg {
  CommonCfg common;
  double mu = 5.0;
  double n_h = 0.5;
  double gamma = 0.5;
  int n_max = 300;
  int support = 60;
  int samples = 5;
  double t_end = 50.0;
  double dt = 0.01;
  double record_every = 0.5;

  static LinearizedCfg from_json(const json& j) {
    LinearizedCfg c;
    common_from_json(j, c.common);
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("n_h")) c.n_h = j["n_h"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("n_max")) c.n_max = j["n_max"].get<int>();
    if (j.contains("support")) c.support = j["support"].get<int>();
    if (j.contains("samples")) c.samples = j["samples"].get<int>();
    if (j.contains("t_end")) c.t_end = j["t_end"].get<double>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("record_every"))
      c.record_every = j["record_every"].get<double>();
    return c;
  }
  json to_json() const {
    json j = common_to_json(common);
    j["mu"] = mu;
    j["n_h"] = n_h;
    j["gamma"] = gamma;
    j["n_max"] = n_max;
    j["support"] = support;
    j["samples"] = samples;
    j["t_end"] = t_end;
    j["dt"] = dt;
    j["record_every"] = record_every;
    return j;
  }
};

int run_linearized(const LinearizedCfg& cfg) {
  validate_common(cfg.common);
  if (cfg.samples < 1) {
    throw bdy::invalid_params("samples must be >= 1");
  }
  if (!(cfg.dt > 0.0) || !(cfg.record_every > 0.0)) {
    throw bdy::invalid_params("dt and record_every must be positive");
  }
  const bdy::ModelParams params(cfg.mu, cfg.n_h, cfg.gamma);
  const fs::path dir = prepare_out_dir(cfg.common, "linearized");
  bdyx_cli::write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");

  const bdy::EquilibriumPair eq = bdy::solve_equilibrium(params, cfg.n_max);
  bdy::Rng rng(cfg.common.seed);

  // Richardson-extrapolated centered difference of E along the flow
  const auto fd_rate = [&](const bdy::PerturbationPair& w) {
    const auto energy_at = [&](double h) {
      bdy::PerturbationPair v = w;
      const int steps = 20;
      const double sub = h / steps;
      for (int k = 0; k < steps; ++k) {
        v = bdy::linearized_rk4_step(v, eq, params, sub);
      }
      return bdy::perturbation_energy(v, eq, params);
    };
    const double h = 0.02;
    const double d1 = (energy_at(h) - energy_at(-h)) / (2.0 * h);
    const double d2 = (energy_at(h / 2) - energy_at(-h / 2)) / h;
    return (4.0 * d2 - d1) / 3.0;
  };

  Table traces(
      {"sample", "time", "energy", "dissipation_rate", "fd_rate", "residual"});
  json summary = json::array();

  for (int s = 0; s < cfg.samples; ++s) {
    bdy::PerturbationPair w =
        bdy::sample_admissible(eq, params, cfg.support, rng);
    const auto steps_per_record = static_cast<int>(
        std::llround(cfg.record_every / cfg.dt));
    const auto records = static_cast<int>(
        std::llround(cfg.t_end / cfg.record_every));

    std::vector<double> times;
    std::vector<double> energies;
    double max_residual = 0.0;
    int monotone_violations = 0;
    double prev_e = bdy::perturbation_energy(w, eq, params);

    const auto record = [&](double t) {
      const double e = bdy::perturbation_energy(w, eq, params);
      const double rate = bdy::energy_dissipation_rate(w, eq, params);
      const double fd = fd_rate(w);
      const double residual = std::abs(rate - fd);
      max_residual = std::max(max_residual, residual);
      times.push_back(t);
      energies.push_back(e);
      traces.add_row({std::to_string(s), fmt_double(t), fmt_double(e),
                      fmt_double(rate), fmt_double(fd), fmt_double(residual)});
    };

    record(0.0);
    for (int rec = 1; rec <= records; ++rec) {
      for (int k = 0; k < steps_per_record; ++k) {
        w = bdy::linearized_rk4_step(w, eq, params, cfg.dt);
        const double e = bdy::perturbation_energy(w, eq, params);
        if (e > prev_e + 1e-10) ++monotone_violations;
        prev_e = e;
      }
      record(rec * cfg.record_every);
    }

    json entry;
    entry["sample"] = s;
    entry["energy_initial"] = energies.front();
    entry["energy_final"] = energies.back();
    entry["monotone_violations"] = monotone_violations;
    entry["max_identity_residual"] = max_residual;
    entry["decay_rate_estimate"] =
        bdy::estimate_decay_rate(times, energies);
    summary.push_back(entry);
  }

  traces.write(dir, "traces", cfg.common.format);
  bdyx_cli::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "linearized: " << cfg.samples << " samples -> " << dir.string()
            << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- verify

int run_verify(std::uint64_t seed) {
  const auto results = bdy::verify::run_acceptance(seed, &std::cout);
  const bool ok = bdy::verify::print_results(results, std::cout);
  return ok ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BDY money-exchange game with probabilistic cheaters"};
  app.require_subcommand(1);

  const Preparse pre = prescan(argc, argv);
  json file_cfg;
  try {
    if (pre.config_path) {
      file_cfg = load_config_file(*pre.config_path);
    }
  } catch (const bdy::invalid_params& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  // per-command configs, seeded from the config file when present;
  // explicit flags override file values
  EquilibriumCfg eq_cfg;
  AbmCfg abm_cfg;
  OdeCfg ode_cfg;
  SweepCfg sweep_cfg;
  LinearizedCfg lin_cfg;
  std::uint64_t verify_seed = 20240901;

  try {
    if (pre.config_path) {
      if (pre.subcommand == "equilibrium") {
        eq_cfg = EquilibriumCfg::from_json(file_cfg);
      } else if (pre.subcommand == "abm") {
        abm_cfg = AbmCfg::from_json(file_cfg);
      } else if (pre.subcommand == "ode") {
        ode_cfg = OdeCfg::from_json(file_cfg);
      } else if (pre.subcommand == "gini-sweep") {
        sweep_cfg = SweepCfg::from_json(file_cfg);
      } else if (pre.subcommand == "linearized") {
        lin_cfg = LinearizedCfg::from_json(file_cfg);
      }
    }
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::string config_dummy;  // --config is consumed by the prescan
  const auto add_common = [&](CLI::App* cmd, CommonCfg& common) {
    cmd->add_option("--config", config_dummy, "JSON config file");
    cmd->add_option("--out", common.out, "output directory");
    cmd->add_option("--seed", common.seed, "RNG seed");
    cmd->add_option("--format", common.format, "table format: csv|json");
  };

  auto* c_eq = app.add_subcommand("equilibrium",
                                  "closed-form equilibrium summary and PMFs");
  add_common(c_eq, eq_cfg.common);
  c_eq->add_option("--mu", eq_cfg.mu, "average dollars per agent");
  c_eq->add_option("--n-h", eq_cfg.n_h, "honest fraction");
  c_eq->add_option("--gamma", eq_cfg.gamma, "cheat probability");
  c_eq->add_option("--n-max", eq_cfg.n_max, "truncation bound");

  auto* c_abm = app.add_subcommand("abm", "agent-based simulation run");
  add_common(c_abm, abm_cfg.common);
  c_abm->add_option("--mu", abm_cfg.mu, "average dollars per agent (integer)");
  c_abm->add_option("--n-h", abm_cfg.n_h, "honest fraction");
  c_abm->add_option("--gamma", abm_cfg.gamma, "cheat probability");
  c_abm->add_option("--n-agents", abm_cfg.n_agents, "number of agents");
  c_abm->add_option("--t-end", abm_cfg.t_end, "simulated time horizon");
  c_abm->add_option("--snapshot-every", abm_cfg.snapshot_every,
                    "snapshot cadence inside the stationary window");
  c_abm->add_option("--record-from", abm_cfg.record_from,
                    "window start (default t_end/2)");

  auto* c_ode = app.add_subcommand("ode",
                                   "mean-field ODE integration with H trace");
  add_common(c_ode, ode_cfg.common);
  c_ode->add_option("--mu", ode_cfg.mu, "average dollars per agent (integer)");
  c_ode->add_option("--n-h", ode_cfg.n_h, "honest fraction");
  c_ode->add_option("--gamma", ode_cfg.gamma, "cheat probability");
  c_ode->add_option("--n-max", ode_cfg.n_max, "truncation bound");
  c_ode->add_option("--dt", ode_cfg.dt, "RK4 time step");
  c_ode->add_option("--t-end", ode_cfg.t_end, "integration horizon");
  c_ode->add_option("--trajectory-every", ode_cfg.trajectory_every,
                    "trajectory frame cadence");
  c_ode->add_option("--h-trace-every", ode_cfg.h_trace_every,
                    "H trace cadence");

  auto* c_sweep = app.add_subcommand("gini-sweep",
                                     "equilibrium Gini vs cheat probability");
  add_common(c_sweep, sweep_cfg.common);
  c_sweep->add_option("--mu", sweep_cfg.mu, "mu values (repeatable)");
  c_sweep->add_option("--n-h", sweep_cfg.n_h, "honest fractions (repeatable)");
  c_sweep->add_option("--points", sweep_cfg.points, "gamma grid size");
  c_sweep->add_option("--gamma-max", sweep_cfg.gamma_max, "grid upper end");

  auto* c_lin = app.add_subcommand(
      "linearized", "energy decay of the linearized system");
  add_common(c_lin, lin_cfg.common);
  c_lin->add_option("--mu", lin_cfg.mu, "average dollars per agent");
  c_lin->add_option("--n-h", lin_cfg.n_h, "honest fraction");
  c_lin->add_option("--gamma", lin_cfg.gamma, "cheat probability");
  c_lin->add_option("--n-max", lin_cfg.n_max, "truncation bound");
  c_lin->add_option("--support", lin_cfg.support, "perturbation support");
  c_lin->add_option("--samples", lin_cfg.samples, "number of random samples");
  c_lin->add_option("--t-end", lin_cfg.t_end, "integration horizon");
  c_lin->add_option("--dt", lin_cfg.dt, "RK4 time step");
  c_lin->add_option("--record-every", lin_cfg.record_every, "trace cadence");

  auto* c_verify = app.add_subcommand("verify", "run the acceptance suite");
  c_verify->add_option("--seed", verify_seed, "base seed for stochastic runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (c_eq->parsed()) return run_equilibrium(eq_cfg);
    if (c_abm->parsed()) return run_abm(abm_cfg);
    if (c_ode->parsed()) return run_ode(ode_cfg);
    if (c_sweep->parsed()) return run_gini_sweep(sweep_cfg);
    if (c_lin->parsed()) return run_linearized(lin_cfg);
    if (c_verify->parsed()) return run_verify(verify_seed);
  } catch (const bdy::invalid_params& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bdy::invariant_violation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const bdy::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
