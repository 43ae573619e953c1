#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "driftsel/basis.hpp"

using namespace driftsel;

namespace {

const double kPiQuarter = std::pow(std::numbers::pi, -0.25);

// Independent oracle: physicists' Hermite polynomials with explicit normalization.
long double hermite_oracle(int n, long double x) {
  long double h0 = 1.0L, h1 = 2.0L * x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    const long double h2 = 2.0L * x * h1 - 2.0L * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

long double hermite_function_oracle(int n, long double x) {
  long double fact = 1.0L;
  for (int k = 2; k <= n; ++k) fact *= k;
  const long double c = 1.0L / std::sqrt(std::pow(2.0L, n) * fact * std::sqrt(std::numbers::pi_v<long double>));
  return c * hermite_oracle(n, x) * std::exp(-x * x / 2.0L);
}

}  // namespace

TEST(Basis, CosinePointValues) {
  const auto b = BasisSpec::cosine({0.0, 1.0}, 5);
  EXPECT_DOUBLE_EQ(eval(b, 1, 0.3), 1.0);
  EXPECT_NEAR(eval(b, 2, 0.0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(eval(b, 3, -0.1), 0.0);
  EXPECT_EQ(eval(b, 1, 1.5), 0.0);
}

TEST(Basis, HermitePointValues) {
  const auto h = BasisSpec::hermite(5);
  EXPECT_NEAR(eval(h, 1, 0.0), 0.751126, 1e-6);
  EXPECT_NEAR(eval(h, 1, 0.0), kPiQuarter, 1e-15);
  EXPECT_NEAR(eval(h, 2, 0.0), 0.0, 1e-15);
}

TEST(Basis, HermiteMatchesExplicitPolynomials) {
  const auto h = BasisSpec::hermite(12);
  for (double x : {-4.0, -1.3, 0.0, 0.7, 2.5, 5.0}) {
    for (int j = 1; j <= 12; ++j) {
      EXPECT_NEAR(eval(h, j, x), static_cast<double>(hermite_function_oracle(j - 1, x)), 1e-12)
          << "j=" << j << " x=" << x;
    }
  }
}

TEST(Basis, EvalAllConcatenatesEval) {
  const auto c = BasisSpec::cosine({0.0, 1.0}, 4);
  const auto v = eval_all(c, 2, 0.0);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_NEAR(v[1], std::sqrt(2.0), 1e-15);

  const auto h = BasisSpec::hermite(4);
  const auto w = eval_all(h, 2, 0.0);
  EXPECT_NEAR(w[0], kPiQuarter, 1e-15);
  EXPECT_NEAR(w[1], 0.0, 1e-15);

  for (double x : {-0.4, 0.2, 3.0}) {
    EXPECT_EQ(eval_all(c, 1, x).size(), 1u);
    EXPECT_EQ(eval_all(c, 1, x)[0], eval(c, 1, x));
    EXPECT_EQ(eval_all(h, 1, x)[0], eval(h, 1, x));
  }
}

TEST(Basis, IndexOutOfRange) {
  const auto h = BasisSpec::hermite(3);
  EXPECT_THROW(eval(h, 0, 0.0), std::out_of_range);
  EXPECT_THROW(eval(h, 4, 0.0), std::out_of_range);
  EXPECT_THROW(eval_all(h, 4, 0.0), std::out_of_range);
}

TEST(Basis, Nesting) {
  const auto c = BasisSpec::cosine({-0.9, 0.8}, 20);
  const auto h = BasisSpec::hermite(20);
  for (double x : {-0.5, 0.1, 0.77}) {
    for (const auto* spec : {&c, &h}) {
      const auto big = eval_all(*spec, 20, x);
      for (int m = 1; m < 20; ++m) {
        const auto small = eval_all(*spec, m, x);
        for (int j = 0; j < m; ++j) EXPECT_EQ(small[j], big[j]);
      }
    }
  }
}

TEST(Basis, CosineOrthonormal) {
  // Trapezoid on a uniform grid integrates cos(pi k x / L) exactly for k < 2n.
  const Interval I{-0.9, 0.8};
  const auto c = BasisSpec::cosine(I, 20);
  const int n = 2000;
  const double h = I.length() / n;
  std::vector<std::vector<double>> vals(n + 1);
  for (int g = 0; g <= n; ++g) {
    const double x = g == n ? I.hi : I.lo + g * h;
    vals[g] = eval_all(c, 20, x);
  }
  for (int j = 0; j < 20; ++j) {
    for (int l = 0; l < 20; ++l) {
      double s = 0.0;
      for (int g = 0; g <= n; ++g) s += (g == 0 || g == n ? 0.5 : 1.0) * vals[g][j] * vals[g][l];
      EXPECT_NEAR(s * h, j == l ? 1.0 : 0.0, 1e-8) << j << "," << l;
    }
  }
}

TEST(Basis, HermiteOrthonormal) {
  const auto hs = BasisSpec::hermite(20);
  const double lo = -30.0, hi = 30.0;
  const int n = 12000;
  const double h = (hi - lo) / n;
  std::vector<std::vector<double>> vals(n + 1);
  for (int g = 0; g <= n; ++g) vals[g] = eval_all(hs, 20, lo + g * h);
  for (int j = 0; j < 20; ++j) {
    for (int l = 0; l < 20; ++l) {
      double s = 0.0;
      for (int g = 0; g <= n; ++g) s += (g == 0 || g == n ? 0.5 : 1.0) * vals[g][j] * vals[g][l];
      EXPECT_NEAR(s * h, j == l ? 1.0 : 0.0, 1e-6) << j << "," << l;
    }
  }
}

TEST(Basis, HermiteUniformBound) {
  const auto hs = BasisSpec::hermite(20);
  for (int g = 0; g <= 40000; ++g) {
    const double x = -20.0 + g * 1e-3;
    for (double v : eval_all(hs, 20, x)) ASSERT_LE(std::abs(v), kPiQuarter + 1e-12) << x;
  }
}

TEST(Basis, LOfMCosine) {
  const auto c = BasisSpec::cosine({0.0, 1.0}, 20);
  EXPECT_NEAR(l_of_m(c, 1), 1.0, 1e-12);
  EXPECT_NEAR(l_of_m(c, 3), 5.0, 1e-12);
  for (const Interval I : {Interval{-0.9, 0.8}, Interval{0.44, 2.0}, Interval{-4.0, 4.0}}) {
    const auto ci = BasisSpec::cosine(I, 20);
    for (int m = 1; m <= 20; ++m) {
      const double bound = (2.0 * m - 1.0) / I.length();
      EXPECT_LE(l_of_m(ci, m), std::max(1.0, bound) + 1e-12);
      EXPECT_LE(l_of_m(ci, m), 2.0 * m);
    }
  }
}

TEST(Basis, LOfMHermite) {
  const auto hs = BasisSpec::hermite(20);
  const double v = l_of_m_on(hs, 6, {-10.0, 10.0}, 10000);
  EXPECT_GE(v, 1.0);
  EXPECT_LE(v, 6.0 / std::sqrt(std::numbers::pi));
  // Dense-grid oracle.
  double sup = 0.0;
  for (int g = 0; g < 10000; ++g) {
    const double x = -10.0 + 20.0 * g / 9999.0;
    double s = 0.0;
    for (int j = 1; j <= 6; ++j) s += std::pow(static_cast<double>(hermite_function_oracle(j - 1, x)), 2);
    sup = std::max(sup, s);
  }
  EXPECT_NEAR(v, std::max(1.0, sup), 1e-12);
  for (int m = 1; m <= 20; ++m) EXPECT_LE(l_of_m(hs, m) / std::sqrt(static_cast<double>(m)), 1.0);
}

TEST(Basis, Names) {
  EXPECT_EQ(basis_family_from_string("cosine"), BasisFamily::Cosine);
  EXPECT_EQ(basis_family_from_string("hermite"), BasisFamily::Hermite);
  EXPECT_THROW(basis_family_from_string("legendre"), ConfigError);
  EXPECT_THROW(BasisSpec::cosine({1.0, 1.0}, 3), ConfigError);
  EXPECT_THROW(BasisSpec::hermite(0), ConfigError);
}
