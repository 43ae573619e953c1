#pragma once

// Projection least-squares drift estimation at a fixed dimension m.
//
// Time integrals are left-point sums on the observation grid:
//   <f, g>_N = (1/(NT)) sum_i sum_k f(X^i_k) g(X^i_k) dt,
//   Xhat_j   = (1/(NT)) sum_i sum_k phi_j(X^i_k) (X^i_{k+1} - X^i_k).
// The same rule for the Gram matrix and the target keeps the contrast identity
// gamma_N(bhat_m) = -||bhat_m||_N^2 exact up to rounding.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "driftsel/basis.hpp"
#include "driftsel/error.hpp"
#include "driftsel/models.hpp"
#include "driftsel/simulate.hpp"

namespace driftsel {

struct GramMatrices {
  int m = 0;
  Eigen::MatrixXd psi_hat;
  std::optional<Eigen::MatrixXd> psi_hat_sigma;
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  /// ||psi_hat^{-1}||_op = 1 / lambda_min, infinite when psi_hat is singular.
  double inv_op_norm() const {
    return lambda_min > 0.0 ? 1.0 / lambda_min : std::numeric_limits<double>::infinity();
  }
  double condition_number() const {
    return lambda_min > 0.0 ? lambda_max / lambda_min : std::numeric_limits<double>::infinity();
  }
};

/// Gram, sigma-weighted Gram and target accumulated once at the largest
/// dimension; every smaller dimension reads leading blocks.
class EmpiricalSystem {
 public:
  EmpiricalSystem(const PathEnsemble& ens, const BasisSpec& basis, int m, const ScalarFn& sigma = {})
      : basis_(basis), m_(m), nt_(ens.nt()), horizon_(ens.horizon()), n_paths_(ens.n_paths()) {
    if (m < 1 || m > basis.m_max()) throw std::out_of_range("dimension outside [1, m_max]");
    if (ens.n_paths() == 0 || ens.n_steps() == 0) throw ConfigError("ensemble is empty");
    const auto mm = static_cast<std::size_t>(m);
    std::vector<double> psi(mm * mm, 0.0), psis(sigma ? mm * mm : 0, 0.0), target(mm, 0.0);
    std::vector<double> phi(mm);
    const auto rows = ens.values.rows();
    const auto steps = static_cast<Eigen::Index>(ens.n_steps());
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index k = 0; k < steps; ++k) {
        const double x = ens.values(i, k);
        const double dx = ens.values(i, k + 1) - x;
        eval_into(basis, x, phi);
        const double w = sigma ? sigma(x) * sigma(x) : 0.0;
        for (std::size_t j = 0; j < mm; ++j) {
          const double pj = phi[j];
          target[j] += pj * dx;
          double* row = psi.data() + j * mm;
          for (std::size_t l = 0; l <= j; ++l) row[l] += pj * phi[l];
          if (sigma) {
            double* srow = psis.data() + j * mm;
            const double wpj = w * pj;
            for (std::size_t l = 0; l <= j; ++l) srow[l] += wpj * phi[l];
          }
        }
      }
    }
    const double gram_scale = ens.dt / nt_;
    psi_.resize(m, m);
    target_.resize(m);
    if (sigma) psi_sigma_ = Eigen::MatrixXd(m, m);
    for (int j = 0; j < m; ++j) {
      target_(j) = target[static_cast<std::size_t>(j)] / nt_;
      for (int l = 0; l <= j; ++l) {
        const std::size_t at = static_cast<std::size_t>(j) * mm + static_cast<std::size_t>(l);
        psi_(j, l) = psi_(l, j) = psi[at] * gram_scale;
        if (sigma) (*psi_sigma_)(j, l) = (*psi_sigma_)(l, j) = psis[at] * gram_scale;
      }
    }
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  int max_dimension() const noexcept { return m_; }
  double nt() const noexcept { return nt_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  bool has_sigma() const noexcept { return psi_sigma_.has_value(); }

  GramMatrices grams(int m) const {
    check(m);
    GramMatrices g;
    g.m = m;
    g.psi_hat = psi_.topLeftCorner(m, m);
    if (psi_sigma_) g.psi_hat_sigma = psi_sigma_->topLeftCorner(m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.psi_hat, Eigen::EigenvaluesOnly);
    g.lambda_min = es.eigenvalues()(0);
    g.lambda_max = es.eigenvalues()(m - 1);
    return g;
  }

  Eigen::VectorXd target(int m) const {
    check(m);
    return target_.head(m);
  }

 private:
  void check(int m) const {
    if (m < 1 || m > m_) throw std::out_of_range("dimension outside the accumulated system");
  }

  BasisSpec basis_;
  int m_;
  double nt_;
  double horizon_;
  std::size_t n_paths_;
  Eigen::MatrixXd psi_;
  std::optional<Eigen::MatrixXd> psi_sigma_;
  Eigen::VectorXd target_;
};

inline GramMatrices empirical_gram(const PathEnsemble& ens, const BasisSpec& basis, int m,
                                   const ScalarFn& sigma = {}) {
  return EmpiricalSystem(ens, basis, m, sigma).grams(m);
}

inline Eigen::VectorXd empirical_target(const PathEnsemble& ens, const BasisSpec& basis, int m) {
  return EmpiricalSystem(ens, basis, m).target(m);
}

// ---------------------------------------------------------------------------
// Stability gate

enum class GateKind {
  Empirical,    // m ||psi^-1||^{1/4} <= NT
  Theoretical,  // L(m) (||psi^-1|| v 1) <= c_T(p) NT / log(NT)
};

struct GateSpec {
  GateKind kind = GateKind::Empirical;
  double p = 12.0;
  std::optional<double> threshold;  // overrides the right-hand side
  int sup_grid_points = kDefaultSupGridPoints;
};

struct GateCheck {
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// c_T(p) = 1 / (256 T (1 + p/2)).
inline double theoretical_gate_constant(double horizon, double p) {
  return 1.0 / (256.0 * horizon * (1.0 + 0.5 * p));
}

inline GateCheck evaluate_gate(const GateSpec& gate, const BasisSpec& basis, int m,
                               double inv_op_norm, double nt, double horizon) {
  GateCheck c;
  if (gate.kind == GateKind::Empirical) {
    c.statistic = m * std::pow(inv_op_norm, 0.25);
    c.threshold = nt;
  } else {
    if (gate.p < 12.0) throw ConfigError("gate p must be >= 12");
    c.statistic = l_of_m(basis, m, gate.sup_grid_points) * std::max(inv_op_norm, 1.0);
    c.threshold = theoretical_gate_constant(horizon, gate.p) * nt / std::log(nt);
  }
  if (gate.threshold) c.threshold = *gate.threshold;
  c.passed = std::isfinite(c.statistic) && c.statistic <= c.threshold;
  return c;
}

// ---------------------------------------------------------------------------
// Estimates

struct FitDiagnostics {
  double condition_number = 0.0;
  double inv_op_norm = 0.0;
  double gate_statistic = 0.0;
  double gate_threshold = 0.0;
  bool singular = false;  // factorization failed although the gate passed
};

struct DriftEstimate {
  BasisSpec basis = BasisSpec::hermite(1);
  int m = 0;
  Eigen::VectorXd theta;
  bool truncated = false;
  FitDiagnostics diagnostics;

  double operator()(double x) const {
    return eval_expansion(basis, std::span<const double>(theta.data(), theta.size()), x);
  }
};

/// Solves psi_hat theta = Xhat at dimension m of an accumulated system. A failed
/// gate or a failed factorization yields the zero estimate with truncated = true.
inline DriftEstimate fit_from_system(const EmpiricalSystem& sys, int m, const GateSpec& gate = {}) {
  const GramMatrices g = sys.grams(m);
  DriftEstimate est;
  est.basis = sys.basis();
  est.m = m;
  est.theta = Eigen::VectorXd::Zero(m);
  est.diagnostics.condition_number = g.condition_number();
  est.diagnostics.inv_op_norm = g.inv_op_norm();
  const GateCheck check =
      evaluate_gate(gate, sys.basis(), m, g.inv_op_norm(), sys.nt(), sys.horizon());
  est.diagnostics.gate_statistic = check.statistic;
  est.diagnostics.gate_threshold = check.threshold;
  if (!check.passed) {
    est.truncated = true;
    return est;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g.psi_hat);
  if (llt.info() != Eigen::Success) {
    est.truncated = true;
    est.diagnostics.singular = true;
    return est;
  }
  est.theta = llt.solve(sys.target(m));
  if (!est.theta.allFinite()) {
    est.theta.setZero();
    est.truncated = true;
    est.diagnostics.singular = true;
  }
  return est;
}

inline DriftEstimate fit_fixed_m(const PathEnsemble& ens, const BasisSpec& basis, int m,
                                 const GateSpec& gate = {}) {
  return fit_from_system(EmpiricalSystem(ens, basis, m), m, gate);
}

/// gamma_N(sum theta_j phi_j) = theta' psi theta - 2 theta' Xhat.
inline double contrast(const Eigen::MatrixXd& psi_hat, const Eigen::VectorXd& target,
                       const Eigen::VectorXd& theta) {
  return theta.dot(psi_hat * theta) - 2.0 * theta.dot(target);
}

/// ||f||_N^2 = (1/(NT)) sum_i sum_k f(X^i_k)^2 dt.
template <class F>
double empirical_norm_sq_fn(const PathEnsemble& ens, F&& f) {
  double s = 0.0;
  const auto steps = static_cast<Eigen::Index>(ens.n_steps());
  for (Eigen::Index i = 0; i < ens.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < steps; ++k) {
      const double v = f(ens.values(i, k));
      s += v * v;
    }
  }
  return s * ens.dt / ens.nt();
}

inline double empirical_norm_sq(const PathEnsemble& ens, const BasisSpec& basis,
                                const Eigen::VectorXd& theta) {
  std::span<const double> t(theta.data(), static_cast<std::size_t>(theta.size()));
  return empirical_norm_sq_fn(ens, [&](double x) { return eval_expansion(basis, t, x); });
}

/// Ehat_m = (1/(NT)) sum_i sum_k sigma(X^i_k) phi_j(X^i_k) dB^i_k, the noise part
/// of the target. Needs the driving increments kept at simulation time.
inline Eigen::VectorXd noise_projection(const PathEnsemble& ens, const BasisSpec& basis, int m,
                                        const ScalarFn& sigma) {
  if (!ens.increments) throw ConfigError("ensemble was simulated without keeping increments");
  const auto& db = *ens.increments;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  std::vector<double> phi(static_cast<std::size_t>(m));
  const auto steps = static_cast<Eigen::Index>(ens.n_steps());
  for (Eigen::Index i = 0; i < ens.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < steps; ++k) {
      const double x = ens.values(i, k);
      eval_into(basis, x, phi);
      const double w = sigma(x) * db(i, k);
      for (int j = 0; j < m; ++j) e(j) += w * phi[static_cast<std::size_t>(j)];
    }
  }
  return e / ens.nt();
}

}  // namespace driftsel
