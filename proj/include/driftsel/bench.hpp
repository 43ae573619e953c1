#pragma once

// Monte-Carlo studies: MISE tables over (model, basis, rho), the parametric
// rate check, correlation summaries and the variance-trace check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "driftsel/basis.hpp"
#include "driftsel/correlation.hpp"
#include "driftsel/estimator.hpp"
#include "driftsel/models.hpp"
#include "driftsel/parallel.hpp"
#include "driftsel/rng.hpp"
#include "driftsel/selection.hpp"
#include "driftsel/simulate.hpp"

namespace driftsel {

// ---------------------------------------------------------------------------
// Configuration

enum class CorrelationFamily { Identity, Toeplitz, Tridiagonal, Equicorrelated };

inline std::string_view to_string(CorrelationFamily f) {
  switch (f) {
    case CorrelationFamily::Identity: return "identity";
    case CorrelationFamily::Toeplitz: return "toeplitz";
    case CorrelationFamily::Tridiagonal: return "tridiagonal";
    case CorrelationFamily::Equicorrelated: return "equicorrelated";
  }
  return "identity";
}

inline CorrelationFamily correlation_family_from_string(std::string_view s) {
  for (auto f : {CorrelationFamily::Identity, CorrelationFamily::Toeplitz,
                 CorrelationFamily::Tridiagonal, CorrelationFamily::Equicorrelated}) {
    if (s == to_string(f)) return f;
  }
  throw ConfigError("unknown correlation kind '" + std::string(s) + "'");
}

inline CorrelationMatrix make_correlation(CorrelationFamily family, std::size_t n, double param) {
  switch (family) {
    case CorrelationFamily::Identity: return CorrelationMatrix::identity(n);
    case CorrelationFamily::Toeplitz: return CorrelationMatrix::toeplitz(n, param);
    case CorrelationFamily::Tridiagonal: return CorrelationMatrix::tridiagonal_factor(n, param);
    case CorrelationFamily::Equicorrelated: return CorrelationMatrix::equicorrelated(n, param);
  }
  return CorrelationMatrix::identity(n);
}

struct ExperimentConfig {
  std::vector<ModelId> models{ModelId::Ex1};
  std::vector<BasisFamily> bases{BasisFamily::Hermite};
  std::size_t n_paths = 100;
  double horizon = 100.0;
  double dt = 0.1;
  int replicates = 25;
  CorrelationFamily correlation = CorrelationFamily::Toeplitz;
  std::vector<double> rhos{0.0};  // rho for Toeplitz/equicorrelated, a for tridiagonal
  double kappa = 2.0;
  std::optional<int> m_max;  // per (model, basis) default when unset
  std::uint64_t seed = 1;
  int mise_grid = 500;
  GateKind gate = GateKind::Empirical;
  double gate_p = 12.0;
  PenaltyKind penalty = PenaltyKind::Empirical;
  std::optional<double> x0;  // observed-space start; model default when unset
  SimulationRoute route = SimulationRoute::Default;
  unsigned threads = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.models.empty()) throw ConfigError("model: at least one model is required");
  if (cfg.bases.empty()) throw ConfigError("basis: at least one basis is required");
  if (cfg.n_paths == 0) throw ConfigError("N must be positive");
  if (!(cfg.horizon > 0.0)) throw ConfigError("T must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  step_count(cfg.horizon, cfg.dt);
  if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (!(cfg.kappa >= 0.0)) throw ConfigError("kappa must be nonnegative");
  if (cfg.m_max && *cfg.m_max < 1) throw ConfigError("m_max must be positive");
  if (cfg.mise_grid < 2) throw ConfigError("mise_grid must be >= 2");
  if (cfg.gate_p < 12.0) throw ConfigError("p must be >= 12");
  if (cfg.rhos.empty()) throw ConfigError("rho: at least one value is required");
  for (double r : cfg.rhos) {
    switch (cfg.correlation) {
      case CorrelationFamily::Toeplitz:
        if (!(std::abs(r) < 1.0)) throw ConfigError("rho must lie in (-1,1)");
        break;
      case CorrelationFamily::Tridiagonal:
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rho (tridiagonal a) must lie in [0,1]");
        break;
      case CorrelationFamily::Equicorrelated:
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("rho must lie in [0,1) for equicorrelation");
        break;
      case CorrelationFamily::Identity: break;
    }
  }
}

inline BasisSpec make_basis(BasisFamily family, const ModelSpec& model, int m_max) {
  return family == BasisFamily::Cosine ? BasisSpec::cosine(model.interval, m_max)
                                       : BasisSpec::hermite(m_max);
}

inline ModelSpec configured_model(const ExperimentConfig& cfg, ModelId id) {
  ModelSpec m = make_model(id, cfg.route);
  if (cfg.x0) m.x0 = *cfg.x0;
  return m;
}

// ---------------------------------------------------------------------------
// Error measures

/// Trapezoid approximation of the integral over I of (bhat - b)^2 on grid_n points.
template <class Estimate, class Truth>
double integrated_squared_error(const Estimate& est, const Truth& truth, const Interval& I,
                                int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("grid_n must be >= 2");
  const double h = I.length() / (grid_n - 1);
  double s = 0.0;
  for (int g = 0; g < grid_n; ++g) {
    const double x = (g == grid_n - 1) ? I.hi : I.lo + g * h;
    const double d = est(x) - truth(x);
    s += (g == 0 || g == grid_n - 1 ? 0.5 : 1.0) * d * d;
  }
  return s * h;
}

inline double mise(const DriftEstimate& est, const ModelSpec& model, int grid_n) {
  return integrated_squared_error(est, model.drift, model.interval, grid_n);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for fewer than two values
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return r;
}

// ---------------------------------------------------------------------------
// Studies

struct BenchRow {
  ModelId model = ModelId::Ex1;
  BasisFamily basis = BasisFamily::Hermite;
  double rho = 0.0;
  double mean_mise_x100 = 0.0;
  double std_mise_x100 = 0.0;
  double mean_dim = 0.0;
  double std_dim = 0.0;
};

struct ReplicateOutcome {
  ModelId model = ModelId::Ex1;
  BasisFamily basis = BasisFamily::Hermite;
  double rho = 0.0;
  int replicate = 0;
  bool ok = false;
  std::string error;
  double mise = std::numeric_limits<double>::quiet_NaN();
  int m_hat = 0;
  double selected_penalty = std::numeric_limits<double>::quiet_NaN();
  double oracle_mise = std::numeric_limits<double>::quiet_NaN();  // min over admissible m
  int oracle_m = 0;
  std::vector<double> beam;  // bhat on the MISE grid
};

struct StudyResult {
  std::vector<BenchRow> rows;                 // (model, basis, rho) in config order
  std::vector<ReplicateOutcome> replicates;   // row-major over rows, then replicate
  int failures = 0;

  const ReplicateOutcome& outcome(std::size_t row, int rep, int replicates_per_row) const {
    return replicates.at(row * static_cast<std::size_t>(replicates_per_row) +
                         static_cast<std::size_t>(rep));
  }
};

inline std::vector<double> uniform_grid(const Interval& I, int grid_n) {
  std::vector<double> x(static_cast<std::size_t>(grid_n));
  const double h = I.length() / (grid_n - 1);
  for (int g = 0; g < grid_n; ++g) x[static_cast<std::size_t>(g)] = (g == grid_n - 1) ? I.hi : I.lo + g * h;
  return x;
}

/// Simulates `replicates` ensembles per (model, rho) and runs selection for every
/// basis on each. Replicate r uses Gaussian streams (seed, r, path) for every
/// model, basis and rho, so configurations are compared on matched noise.
inline StudyResult run_study(const ExperimentConfig& cfg) {
  validate(cfg);
  struct Cell {
    ModelId model;
    double rho;
  };
  std::vector<Cell> cells;
  for (ModelId id : cfg.models) {
    for (double rho : cfg.rhos) cells.push_back({id, rho});
  }
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t nb = cfg.bases.size();

  // outcomes[cell][basis][rep]
  std::vector<ReplicateOutcome> flat(cells.size() * nb * reps);
  auto slot = [&](std::size_t c, std::size_t b, std::size_t r) -> ReplicateOutcome& {
    return flat[(c * nb + b) * reps + r];
  };

  std::vector<CholeskyFactor> factors;
  factors.reserve(cells.size());
  for (const auto& cell : cells) {
    factors.push_back(cholesky(make_correlation(cfg.correlation, cfg.n_paths, cell.rho)));
  }

  parallel_for(cells.size() * reps, cfg.threads, [&](std::size_t task) {
    const std::size_t c = task / reps;
    const std::size_t r = task % reps;
    const ModelSpec model = configured_model(cfg, cells[c].model);
    for (std::size_t b = 0; b < nb; ++b) {
      auto& out = slot(c, b, r);
      out.model = cells[c].model;
      out.basis = cfg.bases[b];
      out.rho = cells[c].rho;
      out.replicate = static_cast<int>(r);
    }
    std::optional<PathEnsemble> ens;
    try {
      ens = simulate_ensemble(model, factors[c], cfg.horizon, cfg.dt,
                              {cfg.seed, static_cast<std::uint64_t>(r), false});
    } catch (const NumericalError& e) {
      for (std::size_t b = 0; b < nb; ++b) slot(c, b, r).error = e.what();
      return;
    }
    const auto grid = uniform_grid(model.interval, cfg.mise_grid);
    const CorrelationMatrix R = make_correlation(cfg.correlation, cfg.n_paths, cells[c].rho);
    for (std::size_t b = 0; b < nb; ++b) {
      auto& out = slot(c, b, r);
      try {
        const int m_max = cfg.m_max.value_or(default_m_max(cells[c].model, cfg.bases[b]));
        const BasisSpec basis = make_basis(cfg.bases[b], model, m_max);
        SelectionOptions opt;
        opt.m_max = m_max;
        opt.kappa = cfg.kappa;
        opt.gate.kind = cfg.gate;
        opt.gate.p = cfg.gate_p;
        opt.penalty = cfg.penalty;
        opt.correlation = &R;
        const SelectionResult sel = select(*ens, basis, opt, model.diffusion);
        out.m_hat = sel.m_hat;
        out.selected_penalty = sel.selected_penalty();
        out.mise = mise(sel.estimate, model, cfg.mise_grid);
        out.oracle_mise = std::numeric_limits<double>::infinity();
        for (const auto& cand : sel.candidates) {
          if (!cand.admissible) continue;
          const double e = mise(cand.estimate, model, cfg.mise_grid);
          if (e < out.oracle_mise) {
            out.oracle_mise = e;
            out.oracle_m = cand.m;
          }
        }
        out.beam.reserve(grid.size());
        for (double x : grid) out.beam.push_back(sel.estimate(x));
        out.ok = std::isfinite(out.mise);
        if (!out.ok) out.error = "non-finite MISE";
      } catch (const NumericalError& e) {
        out.error = e.what();
      }
    }
  });

  StudyResult res;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<double> errs, dims;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& o = slot(c, b, r);
        if (o.ok) {
          errs.push_back(100.0 * o.mise);
          dims.push_back(o.m_hat);
        } else {
          ++res.failures;
        }
        res.replicates.push_back(o);
      }
      const MeanStd e = mean_std(errs), d = mean_std(dims);
      res.rows.push_back({cells[c].model, cfg.bases[b], cells[c].rho, e.mean, e.std, d.mean, d.std});
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Parametric example: thetahat_N = (1/(NT)) sum_i Y^i_T with Y^i_T = theta T + sigma B^i_T.

struct ParametricRate {
  double mc_mse = 0.0;
  double formula_mse = 0.0;  // sigma^2/(NT) (1 + (1/N) sum_{i!=k} R_ik)
};

inline double parametric_formula_mse(const CorrelationMatrix& R, double horizon, double sigma) {
  const double n = static_cast<double>(R.size());
  const double off = R.entries().sum() - n;
  return sigma * sigma / (n * horizon) * (1.0 + off / n);
}

inline ParametricRate parametric_rate_check(const CorrelationMatrix& R, double horizon, double mu,
                                            double sigma, int replicates, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (replicates < 1) throw ConfigError("replicates must be positive");
  const CholeskyFactor C = cholesky(R);
  const auto n = static_cast<Eigen::Index>(R.size());
  const double theta = mu - 0.5 * sigma * sigma;
  const double nt = static_cast<double>(n) * horizon;
  // Column sums of C: sum_i B^i_T = sqrt(T) * (1' C) Z.
  const Eigen::RowVectorXd ones_c = C.lower().colwise().sum();
  double sq = 0.0;
  Eigen::VectorXd z(n);
  for (int r = 0; r < replicates; ++r) {
    GaussianStream g(seed, static_cast<std::uint64_t>(r), 0);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = g();
    const double sum_b = std::sqrt(horizon) * ones_c.dot(z);
    const double sum_y = static_cast<double>(n) * theta * horizon + sigma * sum_b;
    const double err = sum_y / nt - theta;
    sq += err * err;
  }
  return {sq / replicates, parametric_formula_mse(R, horizon, sigma)};
}

// ---------------------------------------------------------------------------
// Correlation summaries for Toeplitz R(rho).

struct Tab0Row {
  double rho = 0.0;
  DependenceStats stats;
};

inline std::vector<Tab0Row> tab0_stats(std::size_t n, const std::vector<double>& rhos) {
  std::vector<Tab0Row> out;
  for (double rho : rhos) out.push_back({rho, dependence_stats(CorrelationMatrix::toeplitz(n, rho))});
  return out;
}

// ---------------------------------------------------------------------------
// Variance trace: Monte-Carlo Psi_m = E psihat_m and Psi_{m,sigma} = NT E(Ehat Ehat'),
// compared with m ||sigma||_inf^2 (1 + (1/N) sum_{i!=k} |R_ik|).

struct TraceCheck {
  double trace = 0.0;
  double bound = 0.0;
  double sigma_sup = 0.0;
  double dependence = 0.0;
};

inline TraceCheck variance_trace_check(const ModelSpec& model, const BasisSpec& basis, int m,
                                       const CorrelationMatrix& R, double horizon, double dt,
                                       int replicates, std::uint64_t seed, unsigned threads = 1) {
  if (model.scheme != Scheme::Euler || model.transform) {
    throw ConfigError("trace check needs a directly Euler-simulated model");
  }
  const CholeskyFactor C = cholesky(R);
  std::vector<Eigen::MatrixXd> psi(static_cast<std::size_t>(replicates));
  std::vector<Eigen::MatrixXd> outer(static_cast<std::size_t>(replicates));
  std::vector<double> sup(static_cast<std::size_t>(replicates), 0.0);
  double nt = 0.0;
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    const PathEnsemble ens =
        simulate_ensemble(model, C, horizon, dt, {seed, static_cast<std::uint64_t>(r), true});
    psi[r] = empirical_gram(ens, basis, m).psi_hat;
    const Eigen::VectorXd e = noise_projection(ens, basis, m, model.diffusion);
    outer[r] = e * e.transpose();
    double s = 0.0;
    for (Eigen::Index i = 0; i < ens.values.size(); ++i) {
      s = std::max(s, std::abs(model.diffusion(ens.values.data()[i])));
    }
    sup[r] = s;
  });
  nt = static_cast<double>(R.size()) * horizon;
  Eigen::MatrixXd psi_mean = Eigen::MatrixXd::Zero(m, m), outer_mean = Eigen::MatrixXd::Zero(m, m);
  double sigma_sup = 0.0;
  for (std::size_t r = 0; r < psi.size(); ++r) {
    psi_mean += psi[r];
    outer_mean += outer[r];
    sigma_sup = std::max(sigma_sup, sup[r]);
  }
  psi_mean /= replicates;
  const Eigen::MatrixXd psi_sigma = nt * outer_mean / replicates;
  TraceCheck out;
  // trace(Psi^{-1/2} Psi_sigma Psi^{-1/2}) = trace(Psi^{-1} Psi_sigma)
  out.trace = psi_mean.llt().solve(psi_sigma).trace();
  out.sigma_sup = sigma_sup;
  out.dependence = dependence_factor(R);
  out.bound = m * sigma_sup * sigma_sup * out.dependence;
  return out;
}

}  // namespace driftsel
