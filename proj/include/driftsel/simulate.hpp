#pragma once

// Ensembles of N diffusion paths on [0, T] driven by correlated Brownian motions.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "driftsel/correlation.hpp"
#include "driftsel/error.hpp"
#include "driftsel/models.hpp"
#include "driftsel/rng.hpp"

namespace driftsel {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PathEnsemble {
  RowMatrix values;  // N x (n_steps + 1), row i is path i
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  ModelId model_id = ModelId::Custom;
  std::string correlation;
  // Driving Brownian increments (N x n_steps) when requested at simulation time.
  std::optional<RowMatrix> increments;

  std::size_t n_paths() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_steps() const noexcept {
    return values.cols() == 0 ? 0 : static_cast<std::size_t>(values.cols() - 1);
  }
  double horizon() const noexcept { return dt * static_cast<double>(n_steps()); }
  /// N * T, the normalization of every empirical quantity.
  double nt() const noexcept { return static_cast<double>(n_paths()) * horizon(); }
};

/// Column k equals sqrt(dt) * C * Z_k, Z_k standard Gaussian; row i of Z is
/// drawn from the stream (seed, replicate, i).
inline RowMatrix correlated_increments(const CholeskyFactor& C, std::size_t n_steps, double dt,
                                       std::uint64_t seed, std::uint64_t replicate = 0) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const auto n = static_cast<Eigen::Index>(C.size());
  const auto steps = static_cast<Eigen::Index>(n_steps);
  RowMatrix z(n, steps);
  for (Eigen::Index i = 0; i < n; ++i) {
    GaussianStream g(seed, replicate, static_cast<std::uint64_t>(i));
    for (Eigen::Index k = 0; k < steps; ++k) z(i, k) = g();
  }
  const double scale = std::sqrt(dt);
  if (C.is_identity()) return scale * z;
  RowMatrix out = C.lower().triangularView<Eigen::Lower>() * z;
  out *= scale;
  return out;
}

/// Number of steps T/dt; rejects horizons that are not an integer multiple of dt.
inline std::size_t step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("T and dt must be positive");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("T/dt must be an integer");
  }
  return static_cast<std::size_t>(rounded);
}

struct SimulationOptions {
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  bool keep_increments = false;
};

inline PathEnsemble simulate_ensemble(const ModelSpec& model, const CholeskyFactor& C, double T,
                                      double dt, const SimulationOptions& opt,
                                      const std::string& correlation_label = "custom") {
  const std::size_t steps = step_count(T, dt);
  const auto n = static_cast<Eigen::Index>(C.size());
  RowMatrix db = correlated_increments(C, steps, dt, opt.seed, opt.replicate);

  PathEnsemble ens;
  ens.dt = dt;
  ens.seed = opt.seed;
  ens.replicate = opt.replicate;
  ens.model_id = model.id;
  ens.correlation = correlation_label;
  ens.values.resize(n, static_cast<Eigen::Index>(steps) + 1);

  const double xi0 = model.to_latent(model.x0);
  const bool transformed = static_cast<bool>(model.transform);

  if (model.scheme == Scheme::ExactOU) {
    const double kappa = model.ou_rate;
    const double decay = std::exp(-kappa * dt);
    const double innov =
        kappa > 0.0 ? model.ou_scale * std::sqrt((1.0 - std::exp(-2.0 * kappa * dt)) / (2.0 * kappa))
                    : model.ou_scale * std::sqrt(dt);
    const double inv_sqrt_dt = 1.0 / std::sqrt(dt);
    for (Eigen::Index i = 0; i < n; ++i) {
      double xi = xi0;
      ens.values(i, 0) = model.x0;
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(steps); ++k) {
        xi = decay * xi + innov * db(i, k) * inv_sqrt_dt;
        const double x = model.to_observed(xi);
        if (!std::isfinite(x)) {
          throw NonFiniteState(static_cast<std::size_t>(i), static_cast<std::size_t>(k + 1));
        }
        ens.values(i, k + 1) = x;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      double xi = xi0;
      ens.values(i, 0) = model.x0;
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(steps); ++k) {
        xi += model.latent_drift(xi) * dt + model.latent_diffusion(xi) * db(i, k);
        const double x = transformed ? model.transform(xi) : xi;
        if (!std::isfinite(x)) {
          throw NonFiniteState(static_cast<std::size_t>(i), static_cast<std::size_t>(k + 1));
        }
        ens.values(i, k + 1) = x;
      }
    }
  }
  if (opt.keep_increments) ens.increments = std::move(db);
  return ens;
}

inline PathEnsemble simulate_ensemble(const ModelSpec& model, const CorrelationMatrix& R, double T,
                                      double dt, const SimulationOptions& opt) {
  return simulate_ensemble(model, cholesky(R), T, dt, opt, R.descriptor().label());
}

}  // namespace driftsel
