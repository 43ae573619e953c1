#pragma once

// Command-line front end: simulate / fit / select / bench / stats.
//
// Precedence of settings: built-in defaults < --config file < environment
// (DRIFTSEL_SEED, DRIFTSEL_THREADS) < command-line flags.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "driftsel/bench.hpp"
#include "driftsel/config.hpp"
#include "driftsel/csv.hpp"
#include "driftsel/ensemble_io.hpp"
#include "driftsel/manifest.hpp"

namespace driftsel {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
inline constexpr int io = 4;
}  // namespace exit_code

namespace cli_detail {

namespace fs = std::filesystem;

struct Overrides {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<long long> seed;
  std::optional<long long> threads;
  std::vector<std::string> models;
  std::vector<std::string> bases;
  std::optional<long long> n_paths;
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<long long> replicates;
  std::string correlation;
  std::vector<double> rhos;
  std::optional<double> kappa;
  std::optional<long long> m_max;
  std::string gate;
  std::optional<double> p;
  std::string penalty;
  std::optional<double> x0;
  std::string route;
  std::optional<long long> mise_grid;
};

inline std::optional<long long> env_integer(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == std::string(v).size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string(name) + ": expected an integer, got '" + v + "'");
}

inline ExperimentConfig resolve(const Overrides& o) {
  nlohmann::json doc = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw IoError("cannot open config " + o.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    doc = toml_lite::parse(ss.str());
  }
  // Flatten an [experiment] section so flags can override its keys.
  if (doc.contains("experiment")) {
    nlohmann::json exp = doc["experiment"];
    doc.erase("experiment");
    if (!exp.is_object()) throw ConfigError("experiment: expected a section");
    for (auto& [k, v] : exp.items()) {
      if (doc.contains(k)) throw ConfigError(k + ": set both at top level and in [experiment]");
      doc[k] = v;
    }
  }
  if (auto s = env_integer("DRIFTSEL_SEED")) doc["seed"] = *s;
  if (auto t = env_integer("DRIFTSEL_THREADS")) doc["threads"] = *t;

  if (o.seed) doc["seed"] = *o.seed;
  if (o.threads) doc["threads"] = *o.threads;
  if (!o.models.empty()) doc["model"] = o.models;
  if (!o.bases.empty()) doc["basis"] = o.bases;
  if (o.n_paths) doc["N"] = *o.n_paths;
  if (o.horizon) doc["T"] = *o.horizon;
  if (o.dt) doc["dt"] = *o.dt;
  if (o.replicates) doc["replicates"] = *o.replicates;
  if (!o.correlation.empty() || !o.rhos.empty()) {
    nlohmann::json corr = nlohmann::json::object();
    if (doc.contains("correlation")) {
      if (doc["correlation"].is_string()) corr["kind"] = doc["correlation"];
      else corr = doc["correlation"];
    }
    if (doc.contains("rho")) {
      corr["rho"] = doc["rho"];
      doc.erase("rho");
    }
    if (!o.correlation.empty()) corr["kind"] = o.correlation;
    if (!o.rhos.empty()) {
      corr.erase("a");
      corr["rho"] = o.rhos;
    }
    doc["correlation"] = corr;
  }
  if (o.kappa) doc["kappa"] = *o.kappa;
  if (o.m_max) doc["m_max"] = *o.m_max;
  if (!o.gate.empty()) doc["gate"] = o.gate;
  if (o.p) doc["p"] = *o.p;
  if (!o.penalty.empty()) doc["penalty"] = o.penalty;
  if (o.x0) doc["x0"] = *o.x0;
  if (!o.route.empty()) doc["route"] = o.route;
  if (o.mise_grid) doc["mise_grid"] = *o.mise_grid;
  return apply_config(ExperimentConfig{}, doc);
}

inline fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return fs::path(dir);
}

inline std::string slug(double v) {
  std::string s = format_double(v);
  for (char& c : s) {
    if (c == '-') c = 'm';
  }
  return s;
}

inline void write_curve(const fs::path& path, const DriftEstimate& est, const ModelSpec& model,
                        int grid_n) {
  CsvWriter csv(path);
  csv.header({"x", "b_hat", "b"});
  for (double x : uniform_grid(model.interval, grid_n)) {
    csv.field(x);
    csv.field(est(x));
    csv.field(model.drift(x));
    csv.end_row();
  }
}

inline void write_theta(const fs::path& path, const DriftEstimate& est) {
  CsvWriter csv(path);
  csv.header({"j", "theta"});
  for (Eigen::Index j = 0; j < est.theta.size(); ++j) {
    csv.field(static_cast<std::int64_t>(j + 1));
    csv.field(est.theta(j));
    csv.end_row();
  }
}

struct Context {
  ExperimentConfig cfg;
  fs::path out;
  std::ostream& os;
  RunManifest manifest;
};

inline PathEnsemble obtain_ensemble(const ExperimentConfig& cfg, const ModelSpec& model,
                                    const std::string& input, std::uint64_t replicate) {
  if (!input.empty()) {
    PathEnsemble ens = read_ensemble_binary(input);
    ens.model_id = model.id;
    return ens;
  }
  const CorrelationMatrix R = make_correlation(cfg.correlation, cfg.n_paths, cfg.rhos.front());
  return simulate_ensemble(model, cholesky(R), cfg.horizon, cfg.dt, {cfg.seed, replicate, false},
                           R.descriptor().label());
}

inline GateSpec gate_of(const ExperimentConfig& cfg) {
  GateSpec g;
  g.kind = cfg.gate;
  g.p = cfg.gate_p;
  return g;
}

inline void cmd_simulate(Context& ctx, bool csv, std::uint64_t replicate) {
  const ModelSpec model = configured_model(ctx.cfg, ctx.cfg.models.front());
  const PathEnsemble ens = obtain_ensemble(ctx.cfg, model, "", replicate);
  const fs::path bin = ctx.out / "ensemble.bin";
  write_ensemble_binary(ens, bin);
  ctx.manifest.add_output(bin);
  if (csv) {
    const fs::path c = ctx.out / "ensemble.csv";
    write_ensemble_csv(ens, c);
    ctx.manifest.add_output(c);
  }
  ctx.os << "simulated " << ens.n_paths() << " paths x " << ens.n_steps() << " steps -> "
         << bin.generic_string() << '\n';
}

inline void cmd_fit(Context& ctx, int m, const std::string& input) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelSpec model = configured_model(cfg, cfg.models.front());
  const PathEnsemble ens = obtain_ensemble(cfg, model, input, 0);
  const BasisSpec basis = make_basis(cfg.bases.front(), model, m);
  const DriftEstimate est = fit_fixed_m(ens, basis, m, gate_of(cfg));
  const fs::path theta = ctx.out / "theta.csv", curve = ctx.out / "fit_curve.csv";
  write_theta(theta, est);
  write_curve(curve, est, model, cfg.mise_grid);
  ctx.manifest.add_output(theta);
  ctx.manifest.add_output(curve);
  ctx.os << "m=" << m << " truncated=" << (est.truncated ? 1 : 0)
         << " mise=" << format_double(mise(est, model, cfg.mise_grid)) << '\n';
}

inline void cmd_select(Context& ctx, const std::string& input) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelSpec model = configured_model(cfg, cfg.models.front());
  const PathEnsemble ens = obtain_ensemble(cfg, model, input, 0);
  const int m_max = cfg.m_max.value_or(default_m_max(model.id, cfg.bases.front()));
  const BasisSpec basis = make_basis(cfg.bases.front(), model, m_max);
  const CorrelationMatrix R =
      make_correlation(cfg.correlation, ens.n_paths(), cfg.rhos.front());
  SelectionOptions opt;
  opt.m_max = m_max;
  opt.kappa = cfg.kappa;
  opt.gate = gate_of(cfg);
  opt.penalty = cfg.penalty;
  opt.correlation = &R;
  const SelectionResult sel = select(ens, basis, opt, model.diffusion);

  const fs::path crit = ctx.out / "criterion.csv";
  {
    CsvWriter csv(crit);
    csv.header({"m", "norm_sq", "penalty", "criterion", "admissible"});
    for (const auto& c : sel.candidates) {
      csv.field(c.m);
      csv.field(c.norm_sq);
      csv.field(c.penalty);
      csv.field(c.criterion);
      csv.field(c.admissible);
      csv.end_row();
    }
  }
  const fs::path theta = ctx.out / "theta.csv", curve = ctx.out / "select_curve.csv";
  write_theta(theta, sel.estimate);
  write_curve(curve, sel.estimate, model, cfg.mise_grid);
  for (const auto& p : {crit, theta, curve}) ctx.manifest.add_output(p);
  ctx.os << "m_hat=" << sel.m_hat << " mise=" << format_double(mise(sel.estimate, model, cfg.mise_grid))
         << '\n';
}

inline void write_tab0(const fs::path& path, std::size_t n, const std::vector<double>& rhos) {
  CsvWriter csv(path);
  csv.header({"rho", "abs_sum", "op_norm"});
  for (const auto& row : tab0_stats(n, rhos)) {
    csv.field(row.rho);
    csv.field(row.stats.abs_sum);
    csv.field(row.stats.op_norm);
    csv.end_row();
  }
}

inline void cmd_bench(Context& ctx, int parametric_reps, double parametric_t, bool beams) {
  const ExperimentConfig& cfg = ctx.cfg;
  const StudyResult res = run_study(cfg);
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);

  const fs::path table = ctx.out / "table1.csv";
  {
    CsvWriter csv(table);
    csv.header({"model", "basis", "rho", "mean_mise_x100", "std_mise_x100", "mean_dim", "std_dim"});
    for (const auto& r : res.rows) {
      csv.field(to_string(r.model));
      csv.field(to_string(r.basis));
      csv.field(r.rho);
      csv.field(r.mean_mise_x100);
      csv.field(r.std_mise_x100);
      csv.field(r.mean_dim);
      csv.field(r.std_dim);
      csv.end_row();
    }
  }
  ctx.manifest.add_output(table);

  const fs::path per_rep = ctx.out / "replicates.csv";
  {
    CsvWriter csv(per_rep);
    csv.header({"model", "basis", "rho", "replicate", "ok", "mise", "m_hat", "selected_penalty",
                "oracle_mise", "oracle_m", "error"});
    for (const auto& o : res.replicates) {
      std::string err = o.error;
      for (char& c : err) {
        if (c == ',' || c == '\n') c = ';';
      }
      csv.field(to_string(o.model));
      csv.field(to_string(o.basis));
      csv.field(o.rho);
      csv.field(o.replicate);
      csv.field(o.ok);
      csv.field(o.mise);
      csv.field(o.m_hat);
      csv.field(o.selected_penalty);
      csv.field(o.oracle_mise);
      csv.field(o.oracle_m);
      csv.field(err);
      csv.end_row();
    }
  }
  ctx.manifest.add_output(per_rep);

  if (beams) {
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      const BenchRow& row = res.rows[i];
      const ModelSpec model = configured_model(cfg, row.model);
      const fs::path p = ctx.out / ("beams_" + std::string(to_string(row.model)) + "_" +
                                    std::string(to_string(row.basis)) + "_rho" + slug(row.rho) + ".csv");
      CsvWriter csv(p);
      std::vector<std::string> header{"x", "b"};
      for (std::size_t r = 0; r < reps; ++r) header.push_back("b_hat_" + std::to_string(r + 1));
      csv.header(header);
      const auto grid = uniform_grid(model.interval, cfg.mise_grid);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        csv.field(grid[g]);
        csv.field(model.drift(grid[g]));
        for (std::size_t r = 0; r < reps; ++r) {
          const auto& o = res.outcome(i, static_cast<int>(r), cfg.replicates);
          csv.field(o.beam.size() == grid.size() ? o.beam[g]
                                                 : std::numeric_limits<double>::quiet_NaN());
        }
        csv.end_row();
      }
      ctx.manifest.add_output(p);
    }
  }

  const fs::path tab0 = ctx.out / "tab0.csv";
  write_tab0(tab0, cfg.n_paths, cfg.rhos);
  ctx.manifest.add_output(tab0);

  const fs::path para = ctx.out / "parametric.csv";
  {
    CsvWriter csv(para);
    csv.header({"rho", "N", "T", "sigma", "replicates", "mc_mse", "formula_mse", "rel_error"});
    for (double rho : cfg.rhos) {
      const CorrelationMatrix R = make_correlation(cfg.correlation, cfg.n_paths, rho);
      const ParametricRate pr = parametric_rate_check(R, parametric_t, 0.0, 1.0, parametric_reps, cfg.seed);
      csv.field(rho);
      csv.field(cfg.n_paths);
      csv.field(parametric_t);
      csv.field(1.0);
      csv.field(parametric_reps);
      csv.field(pr.mc_mse);
      csv.field(pr.formula_mse);
      csv.field(std::abs(pr.mc_mse - pr.formula_mse) / pr.formula_mse);
      csv.end_row();
    }
  }
  ctx.manifest.add_output(para);

  ctx.os << "wrote " << ctx.manifest.outputs.size() << " files to " << ctx.out.generic_string()
         << " (" << res.failures << " failed replicates)\n";
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests. Returns the exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Drift estimation for correlated diffusions: simulation, fitting, model selection"};
  app.name("driftsel");
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_path, "Config file (key = value, [sections])");
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_option("--seed", o.seed, "Master seed (env DRIFTSEL_SEED)");
  app.add_option("--threads", o.threads, "Worker threads (env DRIFTSEL_THREADS)");
  app.add_option("--model", o.models, "ex1..ex5");
  app.add_option("--basis", o.bases, "hermite or cosine");
  app.add_option("--N", o.n_paths, "Number of paths");
  app.add_option("--T", o.horizon, "Time horizon");
  app.add_option("--dt", o.dt, "Sampling step");
  app.add_option("--replicates", o.replicates, "Monte-Carlo replicates");
  app.add_option("--correlation", o.correlation, "identity, toeplitz, tridiagonal, equicorrelated");
  app.add_option("--rho", o.rhos, "Correlation parameter(s)");
  app.add_option("--kappa", o.kappa, "Penalty constant");
  app.add_option("--m-max", o.m_max, "Largest dimension");
  app.add_option("--gate", o.gate, "empirical or theoretical");
  app.add_option("--p", o.p, "Moment order of the theoretical gate (>= 12)");
  app.add_option("--penalty", o.penalty, "empirical or theoretical");
  app.add_option("--x0", o.x0, "Initial state");
  app.add_option("--route", o.route, "default, latent or direct");
  app.add_option("--mise-grid", o.mise_grid, "Grid points for MISE and curves");

  auto* sim = app.add_subcommand("simulate", "Simulate one ensemble and write ensemble.bin");
  bool sim_csv = false;
  long long sim_rep = 0;
  sim->add_flag("--csv", sim_csv, "Also write ensemble.csv");
  sim->add_option("--replicate", sim_rep, "Replicate index of the noise stream");

  auto* fit = app.add_subcommand("fit", "Projection estimator at a fixed dimension");
  int fit_m = 0;
  std::string fit_input;
  fit->add_option("--m", fit_m, "Dimension")->required();
  fit->add_option("--input", fit_input, "Ensemble file (simulated from the config otherwise)");

  auto* sel = app.add_subcommand("select", "Penalized choice of the dimension");
  std::string sel_input;
  sel->add_option("--input", sel_input, "Ensemble file (simulated from the config otherwise)");

  auto* bench = app.add_subcommand("bench", "Monte-Carlo study over models, bases and rho");
  int para_reps = 10000;
  double para_t = 1.0;
  bool no_beams = false;
  bench->add_option("--parametric-reps", para_reps, "Replicates for parametric.csv");
  bench->add_option("--parametric-T", para_t, "Horizon for parametric.csv");
  bench->add_flag("--no-beams", no_beams, "Skip the per-replicate curve files");

  auto* stats = app.add_subcommand("stats", "abs_sum and op_norm of Toeplitz R(rho)");
  long long stats_n = 100;
  stats->add_option("--n", stats_n, "Matrix size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_code::config;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    if (stats->parsed()) {
      if (stats_n < 1) throw ConfigError("n: must be positive");
      const std::vector<double> rhos = o.rhos.empty() ? std::vector<double>{0.0, 0.5, 0.9} : o.rhos;
      for (double r : rhos) {
        if (!(std::abs(r) < 1.0)) throw ConfigError("rho must lie in (-1,1)");
      }
      out << "rho,abs_sum,op_norm\n";
      for (const auto& row : tab0_stats(static_cast<std::size_t>(stats_n), rhos)) {
        out << format_double(row.rho) << ',' << format_double(row.stats.abs_sum) << ','
            << format_double(row.stats.op_norm) << '\n';
      }
      if (app.get_option("--out")->count() > 0) {
        Context ctx{ExperimentConfig{}, prepare_out_dir(o.out_dir), out, {}};
        ctx.manifest.command = "stats";
        const fs::path p = ctx.out / "tab0.csv";
        write_tab0(p, static_cast<std::size_t>(stats_n), rhos);
        ctx.manifest.add_output(p);
        ctx.manifest.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ctx.manifest.write(ctx.out / "manifest.json");
      }
      return exit_code::ok;
    }

    Context ctx{resolve(o), prepare_out_dir(o.out_dir), out, {}};
    ctx.manifest.config = serialize_config(ctx.cfg);
    ctx.manifest.seed = ctx.cfg.seed;
    if (sim->parsed()) {
      ctx.manifest.command = "simulate";
      if (sim_rep < 0) throw ConfigError("replicate: must be nonnegative");
      cmd_simulate(ctx, sim_csv, static_cast<std::uint64_t>(sim_rep));
    } else if (fit->parsed()) {
      ctx.manifest.command = "fit";
      if (fit_m < 1) throw ConfigError("m: must be positive");
      cmd_fit(ctx, fit_m, fit_input);
    } else if (sel->parsed()) {
      ctx.manifest.command = "select";
      cmd_select(ctx, sel_input);
    } else if (bench->parsed()) {
      ctx.manifest.command = "bench";
      if (para_reps < 1) throw ConfigError("parametric-reps: must be positive");
      if (!(para_t > 0.0)) throw ConfigError("parametric-T: must be positive");
      cmd_bench(ctx, para_reps, para_t, !no_beams);
    }
    ctx.manifest.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx.manifest.write(ctx.out / "manifest.json");
    return exit_code::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config;
  } catch (const std::out_of_range& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return exit_code::numerical;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return exit_code::io;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return exit_code::io;
  }
}

}  // namespace driftsel
