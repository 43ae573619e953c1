#pragma once

// Orthonormal function systems used as nested projection spaces.
//
// Indices are 1-based: phi_1, ..., phi_m span the m-th space, and the space
// of dimension m' < m is spanned by a prefix of the same functions.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "driftsel/error.hpp"

namespace driftsel {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class BasisFamily { Cosine, Hermite };

inline std::string_view to_string(BasisFamily f) {
  return f == BasisFamily::Cosine ? "cosine" : "hermite";
}

inline BasisFamily basis_family_from_string(std::string_view name) {
  if (name == "cosine") return BasisFamily::Cosine;
  if (name == "hermite") return BasisFamily::Hermite;
  throw ConfigError("unknown basis '" + std::string(name) + "' (expected cosine or hermite)");
}

// Default sup-grid for Hermite functions, whose support is the whole line.
inline constexpr Interval kHermiteSupGrid{-12.0, 12.0};
inline constexpr int kDefaultSupGridPoints = 4096;

class BasisSpec {
 public:
  static BasisSpec cosine(Interval support, int m_max) {
    if (!(support.hi > support.lo)) throw ConfigError("cosine basis needs b > a");
    return BasisSpec(BasisFamily::Cosine, support, m_max);
  }

  static BasisSpec hermite(int m_max) {
    return BasisSpec(BasisFamily::Hermite, kHermiteSupGrid, m_max);
  }

  BasisFamily family() const noexcept { return family_; }
  // For Hermite this is only the grid used by l_of_m, not a support.
  const Interval& support() const noexcept { return support_; }
  int m_max() const noexcept { return m_max_; }

  BasisSpec with_m_max(int m_max) const { return BasisSpec(family_, support_, m_max); }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;

 private:
  BasisSpec(BasisFamily family, Interval support, int m_max)
      : family_(family), support_(support), m_max_(m_max) {
    if (m_max < 1) throw ConfigError("m_max must be a positive integer");
  }

  BasisFamily family_;
  Interval support_;
  int m_max_;
};

namespace detail {

inline void check_dimension(const BasisSpec& spec, int m) {
  if (m < 1 || m > spec.m_max()) {
    throw std::out_of_range("basis index " + std::to_string(m) + " outside [1, " +
                            std::to_string(spec.m_max()) + "]");
  }
}

// Normalized Hermite functions h_0..h_{m-1} by the three-term recurrence
//   h_{n+1} = x sqrt(2/(n+1)) h_n - sqrt(n/(n+1)) h_{n-1},
// which never forms H_n or n! and stays bounded for large n.
inline void hermite_functions(double x, std::span<double> out) {
  if (out.empty()) return;
  const double h0 = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
  out[0] = h0;
  if (out.size() == 1) return;
  out[1] = std::numbers::sqrt2 * x * h0;
  for (std::size_t n = 1; n + 1 < out.size(); ++n) {
    const double dn = static_cast<double>(n);
    out[n + 1] = x * std::sqrt(2.0 / (dn + 1.0)) * out[n] - std::sqrt(dn / (dn + 1.0)) * out[n - 1];
  }
}

inline void cosine_functions(const Interval& I, double x, std::span<double> out) {
  if (!I.contains(x)) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double len = I.length();
  if (out.empty()) return;
  out[0] = 1.0 / std::sqrt(len);
  const double scale = std::sqrt(2.0 / len);
  const double u = std::numbers::pi * (x - I.lo) / len;
  for (std::size_t j = 1; j < out.size(); ++j) {
    // phi_{j+1}(x) = sqrt(2/L) cos(pi j (x-a)/L)
    out[j] = scale * std::cos(static_cast<double>(j) * u);
  }
}

}  // namespace detail

/// Fills out[0..m) with phi_1(x)..phi_m(x). Single recurrence pass for Hermite.
inline void eval_into(const BasisSpec& spec, double x, std::span<double> out) {
  detail::check_dimension(spec, static_cast<int>(out.size()));
  if (spec.family() == BasisFamily::Hermite) {
    detail::hermite_functions(x, out);
  } else {
    detail::cosine_functions(spec.support(), x, out);
  }
}

inline std::vector<double> eval_all(const BasisSpec& spec, int m, double x) {
  detail::check_dimension(spec, m);
  std::vector<double> out(static_cast<std::size_t>(m));
  eval_into(spec, x, out);
  return out;
}

inline double eval(const BasisSpec& spec, int j, double x) {
  detail::check_dimension(spec, j);
  if (spec.family() == BasisFamily::Cosine) {
    const Interval& I = spec.support();
    if (!I.contains(x)) return 0.0;
    if (j == 1) return 1.0 / std::sqrt(I.length());
    return std::sqrt(2.0 / I.length()) *
           std::cos(std::numbers::pi * (j - 1) * (x - I.lo) / I.length());
  }
  return eval_all(spec, j, x).back();
}

/// Sum_j theta_j phi_j(x) with m = theta.size().
inline double eval_expansion(const BasisSpec& spec, std::span<const double> theta, double x) {
  if (theta.empty()) return 0.0;
  std::vector<double> phi(theta.size());
  eval_into(spec, x, phi);
  double s = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) s += theta[j] * phi[j];
  return s;
}

inline double l_of_m_on(const BasisSpec& spec, int m, const Interval& grid, int grid_n) {
  detail::check_dimension(spec, m);
  if (grid_n < 2) throw std::invalid_argument("l_of_m needs grid_n >= 2");
  std::vector<double> phi(static_cast<std::size_t>(m));
  double best = 1.0;
  const double h = grid.length() / (grid_n - 1);
  for (int g = 0; g < grid_n; ++g) {
    const double x = (g == grid_n - 1) ? grid.hi : grid.lo + g * h;
    eval_into(spec, x, phi);
    double s = 0.0;
    for (double v : phi) s += v * v;
    best = std::max(best, s);
  }
  return best;
}

/// L(m) = max(1, sup_x sum_{j<=m} phi_j(x)^2), the sup taken over a uniform
/// grid of grid_n points on the support (cosine) or on [-12, 12] (Hermite).
/// A lower bound of the true supremum.
inline double l_of_m(const BasisSpec& spec, int m, int grid_n = kDefaultSupGridPoints) {
  detail::check_dimension(spec, m);
  if (grid_n < 2) throw std::invalid_argument("l_of_m needs grid_n >= 2");
  return l_of_m_on(spec, m, spec.support(), grid_n);
}

}  // namespace driftsel
