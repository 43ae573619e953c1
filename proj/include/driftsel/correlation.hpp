#pragma once

// Correlation matrix R of the driving Brownian motions, E(B^i_s B^k_t) = R_ik (s ^ t),
// together with its Cholesky factor and the dependence summaries that enter
// the variance of the drift estimators.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "driftsel/error.hpp"

namespace driftsel {

enum class CorrelationKind { Identity, Toeplitz, BlockDiagonal, Tridiagonal, Custom };

struct CorrelationDescriptor {
  CorrelationKind kind = CorrelationKind::Identity;
  double parameter = 0.0;  // rho (Toeplitz) or a (Tridiagonal)

  std::string label() const {
    std::ostringstream os;
    switch (kind) {
      case CorrelationKind::Identity: os << "identity"; break;
      case CorrelationKind::Toeplitz: os << "toeplitz(" << parameter << ")"; break;
      case CorrelationKind::BlockDiagonal: os << "block_diagonal"; break;
      case CorrelationKind::Tridiagonal: os << "tridiagonal(" << parameter << ")"; break;
      case CorrelationKind::Custom: os << "custom"; break;
    }
    return os.str();
  }
};

class CorrelationMatrix {
 public:
  static constexpr double kEntryTolerance = 1e-12;

  static CorrelationMatrix identity(std::size_t n) {
    check_size(n);
    return CorrelationMatrix(Eigen::MatrixXd::Identity(idx(n), idx(n)),
                             {CorrelationKind::Identity, 0.0});
  }

  /// R_ik = rho^|i-k|, the stationary AR(1) correlation. Strictly PD for |rho| < 1.
  static CorrelationMatrix toeplitz(std::size_t n, double rho) {
    check_size(n);
    if (!(std::abs(rho) < 1.0)) throw ConfigError("rho must lie in (-1,1)");
    Eigen::MatrixXd r(idx(n), idx(n));
    for (Eigen::Index i = 0; i < idx(n); ++i) {
      for (Eigen::Index k = 0; k < idx(n); ++k) {
        r(i, k) = std::pow(rho, static_cast<double>(std::abs(i - k)));
      }
    }
    return CorrelationMatrix(std::move(r), {CorrelationKind::Toeplitz, rho});
  }

  /// Single-factor chain dB^i = sqrt(a) dW^i + sqrt(1-a) dW^{i+1}:
  /// unit diagonal, sqrt(a(1-a)) on the first off-diagonals.
  static CorrelationMatrix tridiagonal_factor(std::size_t n, double a) {
    check_size(n);
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("tridiagonal parameter a must lie in [0,1]");
    const double off = std::sqrt(a * (1.0 - a));
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(idx(n), idx(n));
    for (Eigen::Index i = 0; i + 1 < idx(n); ++i) {
      r(i, i + 1) = off;
      r(i + 1, i) = off;
    }
    return CorrelationMatrix(std::move(r), {CorrelationKind::Tridiagonal, a});
  }

  static CorrelationMatrix block_diagonal(const std::vector<CorrelationMatrix>& blocks) {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    check_size(n);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(idx(n), idx(n));
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
      const Eigen::Index s = idx(b.size());
      r.block(at, at, s, s) = b.entries();
      at += s;
    }
    return CorrelationMatrix(std::move(r), {CorrelationKind::BlockDiagonal, 0.0});
  }

  /// R_ik = rho for every i != k.
  static CorrelationMatrix equicorrelated(std::size_t n, double rho) {
    check_size(n);
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(idx(n), idx(n), rho);
    r.diagonal().setOnes();
    return custom(std::move(r));
  }

  /// Validated user matrix: square, symmetric, unit diagonal, |R_ik| <= 1, PSD.
  static CorrelationMatrix custom(Eigen::MatrixXd r) {
    if (r.rows() != r.cols()) throw ConfigError("correlation matrix must be square");
    check_size(static_cast<std::size_t>(r.rows()));
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      if (std::abs(r(i, i) - 1.0) > kEntryTolerance) {
        throw ConfigError("correlation matrix must have a unit diagonal");
      }
      for (Eigen::Index k = 0; k < i; ++k) {
        if (std::abs(r(i, k) - r(k, i)) > kEntryTolerance) {
          throw ConfigError("correlation matrix must be symmetric");
        }
        if (std::abs(r(i, k)) > 1.0 + kEntryTolerance) {
          throw ConfigError("correlation entries must satisfy |R_ik| <= 1");
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      throw ConfigError("correlation matrix must be positive semidefinite");
    }
    return CorrelationMatrix(std::move(r), {CorrelationKind::Custom, 0.0});
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t k) const { return entries_(idx(i), idx(k)); }
  const CorrelationDescriptor& descriptor() const noexcept { return descriptor_; }

 private:
  CorrelationMatrix(Eigen::MatrixXd r, CorrelationDescriptor d)
      : entries_(std::move(r)), descriptor_(d) {}

  static Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

  static void check_size(std::size_t n) {
    if (n == 0) throw ConfigError("correlation matrix needs at least one path");
  }

  Eigen::MatrixXd entries_;
  CorrelationDescriptor descriptor_;
};

/// Lower-triangular C with C C^T = R.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Eigen::MatrixXd lower) : lower_(std::move(lower)) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
  const Eigen::MatrixXd& lower() const noexcept { return lower_; }

  Eigen::MatrixXd reconstruct() const { return lower_ * lower_.transpose(); }

  bool is_identity() const { return lower_.isIdentity(0.0); }

 private:
  Eigen::MatrixXd lower_;
};

inline constexpr double kPivotTolerance = 1e-10;

/// Cholesky-Banachiewicz factorization. Throws NotPositiveDefinite when a
/// squared pivot falls below kPivotTolerance.
inline CholeskyFactor cholesky(const CorrelationMatrix& R) {
  const auto& a = R.entries();
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - c.row(j).head(j).squaredNorm();
    if (!(d > kPivotTolerance)) throw NotPositiveDefinite(static_cast<std::size_t>(j), d);
    const double cjj = std::sqrt(d);
    c(j, j) = cjj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      c(i, j) = (a(i, j) - c.row(i).head(j).dot(c.row(j).head(j))) / cjj;
    }
  }
  return CholeskyFactor(std::move(c));
}

struct DependenceStats {
  double abs_sum = 0.0;  // (1/n) sum_{i,k} |R_ik|
  double op_norm = 0.0;  // largest |eigenvalue|
};

inline DependenceStats dependence_stats(const CorrelationMatrix& R) {
  const auto& a = R.entries();
  DependenceStats s;
  s.abs_sum = a.cwiseAbs().sum() / static_cast<double>(a.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  s.op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  return s;
}

/// 1 + (1/N) sum_{i != k} |R_ik|, the dependence inflation of the variance term.
inline double dependence_factor(const CorrelationMatrix& R) {
  return R.entries().cwiseAbs().sum() / static_cast<double>(R.size());
}

}  // namespace driftsel
