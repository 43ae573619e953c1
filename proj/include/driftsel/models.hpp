#pragma once

// The five benchmark diffusions and user-defined ones.
//
// Each model is described twice: by its observed-space coefficients (b, sigma),
// which the estimators and MISE use, and by the latent dynamics the simulator
// integrates before mapping back through `transform`.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "driftsel/basis.hpp"
#include "driftsel/error.hpp"

namespace driftsel {

using ScalarFn = std::function<double(double)>;

enum class ModelId { Ex1, Ex2, Ex3, Ex4, Ex5, Custom };
enum class Scheme { Euler, ExactOU };

// How a benchmark model is generated. Latent integrates the underlying process
// (Euler for ex4/ex5, exact AR(1) for ex2/ex3) and maps it through the
// transform; Direct runs Euler on dX = b(X) dt + sigma(X) dB itself.
enum class SimulationRoute { Default, Latent, Direct };

inline std::string_view to_string(SimulationRoute r) {
  switch (r) {
    case SimulationRoute::Default: return "default";
    case SimulationRoute::Latent: return "latent";
    case SimulationRoute::Direct: return "direct";
  }
  return "default";
}

inline SimulationRoute simulation_route_from_string(std::string_view s) {
  for (auto r : {SimulationRoute::Default, SimulationRoute::Latent, SimulationRoute::Direct}) {
    if (s == to_string(r)) return r;
  }
  throw ConfigError("unknown route '" + std::string(s) + "' (expected default, latent or direct)");
}

inline std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::Ex1: return "ex1";
    case ModelId::Ex2: return "ex2";
    case ModelId::Ex3: return "ex3";
    case ModelId::Ex4: return "ex4";
    case ModelId::Ex5: return "ex5";
    case ModelId::Custom: return "custom";
  }
  return "custom";
}

inline ModelId model_id_from_string(std::string_view s) {
  for (ModelId id : {ModelId::Ex1, ModelId::Ex2, ModelId::Ex3, ModelId::Ex4, ModelId::Ex5}) {
    if (s == to_string(id)) return id;
  }
  throw ConfigError("unknown model '" + std::string(s) + "' (expected ex1..ex5)");
}

struct ModelSpec {
  ModelId id = ModelId::Custom;
  ScalarFn drift;      // b
  ScalarFn diffusion;  // sigma
  double x0 = 0.0;     // observed-space initial value
  Interval interval;   // estimation / MISE interval I
  Scheme scheme = Scheme::Euler;

  // Latent dynamics. Euler integrates d(xi) = latent_drift dt + latent_diffusion dB;
  // ExactOU uses d(xi) = -ou_rate xi dt + ou_scale dB.
  ScalarFn latent_drift;
  ScalarFn latent_diffusion;
  double ou_rate = 0.0;
  double ou_scale = 0.0;
  ScalarFn transform;          // xi -> X; empty means identity
  ScalarFn inverse_transform;  // X -> xi

  double to_observed(double xi) const { return transform ? transform(xi) : xi; }
  double to_latent(double x) const { return inverse_transform ? inverse_transform(x) : x; }

  /// Euler on dX = b dt + sigma dB directly.
  static ModelSpec custom(ScalarFn b, ScalarFn sigma, double x0, Interval I) {
    ModelSpec m;
    m.id = ModelId::Custom;
    m.drift = b;
    m.diffusion = sigma;
    m.latent_drift = std::move(b);
    m.latent_diffusion = std::move(sigma);
    m.x0 = x0;
    m.interval = I;
    m.scheme = Scheme::Euler;
    return m;
  }
};

namespace models {

// Ex1: hyperbolic diffusion.
inline constexpr double kEx1Theta = 2.0;
inline const double kEx1Gamma = std::sqrt(0.5);
// Ex2: tanh of an OU process.
inline constexpr double kEx2R = 2.0;
inline constexpr double kEx2Gamma = 2.0;
// Ex3: exp of an OU process.
inline constexpr double kEx3R = 1.0;
inline constexpr double kEx3Gamma = 2.0;
// Ex4: asinh(c xi), alpha(x) = -theta x / sqrt(1 + c^2 x^2).
inline constexpr double kEx4Theta = 3.0;
inline constexpr double kEx4C = 2.0;
// Ex5: G2(xi) with alpha using these constants.
inline constexpr double kEx5Theta = 1.0;
inline constexpr double kEx5C = 10.0;
inline constexpr double kEx5Shift = 5.0;

inline constexpr double kLogFloor = 1e-30;

inline double alpha(double x, double theta, double c) {
  return -theta * x / std::sqrt(1.0 + c * c * x * x);
}

inline double g2(double xi) { return std::asinh(xi - kEx5Shift) + std::asinh(xi + kEx5Shift); }

inline double g2_prime(double xi) {
  const double u = xi - kEx5Shift, v = xi + kEx5Shift;
  return 1.0 / std::sqrt(1.0 + u * u) + 1.0 / std::sqrt(1.0 + v * v);
}

inline double g2_second(double xi) {
  const double u = xi - kEx5Shift, v = xi + kEx5Shift;
  return -u / std::pow(1.0 + u * u, 1.5) - v / std::pow(1.0 + v * v, 1.5);
}

/// Closed form of G2^{-1}. Loses accuracy near 0 by cancellation and is
/// undefined at 0 itself; g2_inverse refines it.
inline double g2_inverse_closed_form(double x) {
  const double sh = std::sinh(x), ch = std::cosh(x);
  const double inner = (49.0 + ch) * sh * sh + 100.0 * (1.0 - ch);
  return std::sqrt(std::max(inner, 0.0)) / (std::sqrt(2.0) * sh);
}

/// H = G2^{-1} by safeguarded Newton. G2 is odd and strictly increasing, H(0) = 0.
inline double g2_inverse(double x) {
  if (x == 0.0) return 0.0;
  if (!std::isfinite(x)) return x;
  const double ax = std::abs(x);
  double lo = 0.0;
  double hi = std::sinh(0.5 * ax) + 2.0 * kEx5Shift;
  double h = ax > 1e-2 ? g2_inverse_closed_form(ax) : ax / g2_prime(0.0);
  if (!(h > lo && h < hi)) h = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = g2(h) - ax;
    if (f > 0.0) hi = h; else lo = h;
    double next = h - f / g2_prime(h);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - h) <= 1e-15 * std::max(1.0, std::abs(h))) {
      h = next;
      break;
    }
    h = next;
  }
  return x > 0.0 ? h : -h;
}

inline double b1(double x) { return -kEx1Theta * x; }
inline double s1(double x) { return kEx1Gamma * std::sqrt(1.0 + x * x); }

inline double b2(double x) {
  return (1.0 - x * x) * (-0.5 * kEx2R * std::atanh(x) - 0.25 * kEx2Gamma * kEx2Gamma * x);
}
inline double s2(double x) { return 0.5 * kEx2Gamma * (1.0 - x * x); }

inline double b3(double x) {
  const double xp = std::max(x, 0.0);
  return x * (-0.5 * kEx3R * std::log(std::max(xp, kLogFloor)) + kEx3Gamma * kEx3Gamma / 8.0);
}
inline double s3(double x) { return 0.5 * kEx3Gamma * std::max(x, 0.0); }

inline double b4(double x) {
  const double ch = std::cosh(x);
  return -(kEx4Theta + kEx4C * kEx4C / (2.0 * ch)) * std::sinh(x) / (ch * ch);
}
inline double s4(double x) { return kEx4C / std::cosh(x); }

inline double b5(double x) {
  const double h = g2_inverse(x);
  return g2_prime(h) * alpha(h, kEx5Theta, kEx5C) + 0.5 * g2_second(h);
}
inline double s5(double x) { return g2_prime(g2_inverse(x)); }

}  // namespace models

/// Route used when none is requested: ex1 and ex4 direct Euler, ex2 and ex3
/// exact OU then transform, ex5 latent Euler then transform.
// ex4 through the latent route, observed at dt = 0.1, has a one-step
// conditional-mean bias of order dt (100 x MISE near 9 on I4).
inline SimulationRoute default_route(ModelId id) {
  switch (id) {
    case ModelId::Ex2:
    case ModelId::Ex3:
    case ModelId::Ex5: return SimulationRoute::Latent;
    default: return SimulationRoute::Direct;
  }
}

namespace detail {
inline ModelSpec make_latent_model(ModelId id);
}

/// The five benchmark models with their parameter settings. x0 defaults to the
/// image of a zero latent start: 0 for ex1, ex2, ex4, ex5 and 1 for ex3.
inline ModelSpec make_model(ModelId id, SimulationRoute route = SimulationRoute::Default) {
  if (route == SimulationRoute::Default) route = default_route(id);
  ModelSpec m = detail::make_latent_model(id);
  if (route == SimulationRoute::Direct) {
    m.scheme = Scheme::Euler;
    m.latent_drift = m.drift;
    m.latent_diffusion = m.diffusion;
    m.transform = nullptr;
    m.inverse_transform = nullptr;
  }
  return m;
}

namespace detail {

inline ModelSpec make_latent_model(ModelId id) {
  using namespace models;
  ModelSpec m;
  m.id = id;
  switch (id) {
    case ModelId::Ex1:
      m.drift = b1;
      m.diffusion = s1;
      m.latent_drift = b1;
      m.latent_diffusion = s1;
      m.interval = {-0.9, 0.8};
      m.scheme = Scheme::Euler;
      m.x0 = 0.0;
      break;
    case ModelId::Ex2:
      m.drift = b2;
      m.diffusion = s2;
      m.interval = {-0.9, 0.9};
      m.scheme = Scheme::ExactOU;
      m.ou_rate = 0.5 * kEx2R;
      m.ou_scale = 0.5 * kEx2Gamma;
      m.transform = [](double xi) { return std::tanh(xi); };
      m.inverse_transform = [](double x) { return std::atanh(x); };
      m.x0 = 0.0;
      break;
    case ModelId::Ex3:
      m.drift = b3;
      m.diffusion = s3;
      m.interval = {0.44, 2.0};
      m.scheme = Scheme::ExactOU;
      m.ou_rate = 0.5 * kEx3R;
      m.ou_scale = 0.5 * kEx3Gamma;
      m.transform = [](double xi) { return std::exp(xi); };
      m.inverse_transform = [](double x) { return std::log(x); };
      m.x0 = 1.0;
      break;
    case ModelId::Ex4:
      m.drift = b4;
      m.diffusion = s4;
      m.interval = {-1.15, 1.15};
      m.scheme = Scheme::Euler;
      m.latent_drift = [](double xi) { return alpha(xi, kEx4Theta, kEx4C); };
      m.latent_diffusion = [](double) { return 1.0; };
      m.transform = [](double xi) { return std::asinh(kEx4C * xi); };
      m.inverse_transform = [](double x) { return std::sinh(x) / kEx4C; };
      m.x0 = 0.0;
      break;
    case ModelId::Ex5:
      m.drift = b5;
      m.diffusion = s5;
      m.interval = {-4.0, 4.0};
      m.scheme = Scheme::Euler;
      m.latent_drift = [](double xi) { return alpha(xi, kEx5Theta, kEx5C); };
      m.latent_diffusion = [](double) { return 1.0; };
      m.transform = g2;
      m.inverse_transform = g2_inverse;
      m.x0 = 0.0;
      break;
    case ModelId::Custom:
      throw ConfigError("custom models are built with ModelSpec::custom");
  }
  return m;
}

}  // namespace detail

/// (b(x), sigma(x)) of a benchmark model.
inline std::pair<double, double> model_drift_sigma(ModelId id, double x) {
  using namespace models;
  switch (id) {
    case ModelId::Ex1: return {b1(x), s1(x)};
    case ModelId::Ex2: return {b2(x), s2(x)};
    case ModelId::Ex3: return {b3(x), s3(x)};
    case ModelId::Ex4: return {b4(x), s4(x)};
    case ModelId::Ex5: return {b5(x), s5(x)};
    case ModelId::Custom: break;
  }
  throw ConfigError("model_drift_sigma needs a benchmark model id");
}

/// Largest dimension searched by default: 10 for Hermite (15 for ex5), 20 for cosine.
inline int default_m_max(ModelId id, BasisFamily family) {
  if (family == BasisFamily::Cosine) return 20;
  return id == ModelId::Ex5 ? 15 : 10;
}

}  // namespace driftsel
