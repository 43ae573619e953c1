#pragma once

// Data-driven choice of the projection dimension:
//   mhat = argmin_{m admissible} { -||bhat_m||_N^2 + pen(m) }.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "driftsel/correlation.hpp"
#include "driftsel/estimator.hpp"

namespace driftsel {

enum class PenaltyKind {
  Empirical,    // kappa m/(NT) ||psi^-1 psi_sigma||_op, needs sigma
  Theoretical,  // kappa m/(NT) (1 + (1/N) sum_{i!=k} |R_ik|), needs R
};

inline double penalty_empirical(const GramMatrices& g, double nt, double kappa) {
  if (!g.psi_hat_sigma) throw ConfigError("empirical penalty needs the sigma-weighted Gram matrix");
  Eigen::LLT<Eigen::MatrixXd> llt(g.psi_hat);
  if (llt.info() != Eigen::Success) throw SingularGram("Gram matrix is not invertible");
  const Eigen::MatrixXd product = llt.solve(*g.psi_hat_sigma);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(product);
  const double op = svd.singularValues()(0);
  if (!std::isfinite(op)) throw SingularGram("Gram matrix is not invertible");
  return kappa * (static_cast<double>(g.m) / nt) * op;
}

inline double penalty_theoretical(int m, double nt, const CorrelationMatrix& R, double kappa) {
  return kappa * (static_cast<double>(m) / nt) * dependence_factor(R);
}

inline std::vector<int> admissible_models(const EmpiricalSystem& sys, int m_max,
                                          const GateSpec& gate = {}) {
  std::vector<int> out;
  for (int m = 1; m <= std::min(m_max, sys.max_dimension()); ++m) {
    const GramMatrices g = sys.grams(m);
    if (evaluate_gate(gate, sys.basis(), m, g.inv_op_norm(), sys.nt(), sys.horizon()).passed) {
      out.push_back(m);
    }
  }
  return out;
}

inline std::vector<int> admissible_models(const PathEnsemble& ens, const BasisSpec& basis,
                                          int m_max, const GateSpec& gate = {}) {
  return admissible_models(EmpiricalSystem(ens, basis, m_max), m_max, gate);
}

struct SelectionOptions {
  int m_max = 10;
  double kappa = 2.0;
  GateSpec gate;
  PenaltyKind penalty = PenaltyKind::Empirical;
  const CorrelationMatrix* correlation = nullptr;  // theoretical penalty only
};

struct CandidateModel {
  int m = 0;
  bool admissible = false;
  double norm_sq = std::numeric_limits<double>::quiet_NaN();  // ||bhat_m||_N^2
  double penalty = std::numeric_limits<double>::quiet_NaN();
  double criterion = std::numeric_limits<double>::quiet_NaN();
  DriftEstimate estimate;
};

struct SelectionResult {
  int m_hat = 0;
  std::vector<CandidateModel> candidates;  // m = 1..m_max in order
  DriftEstimate estimate;

  std::vector<int> admissible() const {
    std::vector<int> out;
    for (const auto& c : candidates) {
      if (c.admissible) out.push_back(c.m);
    }
    return out;
  }
  const CandidateModel& candidate(int m) const { return candidates.at(static_cast<std::size_t>(m - 1)); }
  double selected_penalty() const { return candidate(m_hat).penalty; }
};

/// Fits every admissible dimension of an accumulated system and returns the
/// minimizer of the penalized criterion, ties going to the smaller m.
inline SelectionResult select_from_system(const EmpiricalSystem& sys, const SelectionOptions& opt) {
  if (opt.kappa < 0.0) throw ConfigError("kappa must be nonnegative");
  if (opt.penalty == PenaltyKind::Theoretical && opt.correlation == nullptr) {
    throw ConfigError("theoretical penalty needs the correlation matrix");
  }
  const int m_max = std::min(opt.m_max, sys.max_dimension());
  SelectionResult res;
  double best = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= m_max; ++m) {
    CandidateModel c;
    c.m = m;
    c.estimate = fit_from_system(sys, m, opt.gate);
    c.admissible = !c.estimate.truncated;
    if (c.admissible) {
      const GramMatrices g = sys.grams(m);
      c.norm_sq = c.estimate.theta.dot(g.psi_hat * c.estimate.theta);
      c.penalty = opt.penalty == PenaltyKind::Empirical
                      ? penalty_empirical(g, sys.nt(), opt.kappa)
                      : penalty_theoretical(m, sys.nt(), *opt.correlation, opt.kappa);
      c.criterion = -c.norm_sq + c.penalty;
      if (c.criterion < best) {
        best = c.criterion;
        res.m_hat = m;
      }
    }
    res.candidates.push_back(std::move(c));
  }
  if (res.m_hat == 0) throw EmptyCollection();
  res.estimate = res.candidate(res.m_hat).estimate;
  return res;
}

inline SelectionResult select(const PathEnsemble& ens, const BasisSpec& basis,
                              const SelectionOptions& opt, const ScalarFn& sigma = {}) {
  if (opt.penalty == PenaltyKind::Empirical && !sigma) {
    throw ConfigError("empirical penalty needs the diffusion coefficient");
  }
  const int m_max = std::min(opt.m_max, basis.m_max());
  const EmpiricalSystem sys(ens, basis, m_max,
                            opt.penalty == PenaltyKind::Empirical ? sigma : ScalarFn{});
  return select_from_system(sys, opt);
}

}  // namespace driftsel
