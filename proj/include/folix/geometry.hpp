#pragma once

// Transverse geometry of a Riemannian metric g = a du^2 + 2b du dv + c dv^2 on
// the torus, relative to the linear foliation by lines of slope θ.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "folix/trig_poly.hpp"

namespace folix {

class Slope {
 public:
  static Slope rational(std::int64_t p, std::int64_t q);
  static Slope real(double x);

  bool is_rational() const { return rational_; }
  std::int64_t p() const { return p_; }
  std::int64_t q() const { return q_; }
  double value() const { return value_; }

 private:
  Slope() = default;
  bool rational_ = true;
  std::int64_t p_ = 0;
  std::int64_t q_ = 1;
  double value_ = 0.0;
};

struct MetricCoeffs {
  TrigPoly a;
  TrigPoly b;
  TrigPoly c;
  Slope theta = Slope::rational(0, 1);

  int support_u() const;
  int support_v() const;
};

struct MetricValues {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

using Vec2 = std::array<double, 2>;

// Everything the flows and operators need at one point, with first
// derivatives taken exactly from the trigonometric coefficients.
struct LocalGeometry {
  double u = 0.0, v = 0.0;
  ValueGrad a, b, c;
  double det_gF = 0.0;  // a + 2bθ + cθ²
  double det_g = 0.0;   // ac − b²
  double a_H = 0.0;
  double a_H_u = 0.0;
  double a_H_v = 0.0;
  double F = 0.0;       // mean curvature function
  Vec2 e_F{}, e_H{};    // vector fields, (∂u, ∂v) components
  Vec2 E_F{}, E_H{};    // covectors, (du, dv) components
};

MetricValues eval_metric(const MetricCoeffs& metric, double u, double v);

// Throws NonPositiveMetric if a <= 0 or ac − b² <= 0 at the point.
LocalGeometry local_geometry(const MetricCoeffs& metric, double u, double v);

double mean_curvature(const MetricCoeffs& metric, double u, double v);

// g_F and g_H as coefficient triples (du², 2·du dv / 2, dv²).
struct MetricSplit {
  MetricValues g_F;
  MetricValues g_H;
};
MetricSplit split_metric(const MetricCoeffs& metric, double u, double v);

// Real field sampled at nodes (i/n_u, j/n_v), stored row-major in i.
struct GridField {
  int n_u = 0;
  int n_v = 0;
  std::vector<double> values;

  GridField() = default;
  GridField(int nu, int nv) : n_u(nu), n_v(nv), values(static_cast<std::size_t>(nu) * nv) {}
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * n_v + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * n_v + j]; }
  double min() const;
  double max() const;
};

struct GeometryCache {
  MetricCoeffs metric;
  int n_u = 0;
  int n_v = 0;
  GridField det_gF, det_g, a_H, F;
  GridField e_F_u, e_F_v, e_H_u, e_H_v;
  GridField E_F_u, E_F_v, E_H_u, E_H_v;

  double theta() const { return metric.theta.value(); }
};

// Samples every derived field on an n_u x n_v grid. Positivity is checked on
// that grid and on an oversampled validation grid (oversample x the metric's
// Fourier support).
GeometryCache build_geometry(const MetricCoeffs& metric, int n_u, int n_v, int oversample = 4);

// Throws NonPositiveMetric at the first failing node of the validation grid.
void validate_metric(const MetricCoeffs& metric, int oversample = 4);

struct BundleLikeReport {
  bool bundle_like = false;
  double max_violation = 0.0;  // sup |(∂u + θ∂v) a_H|
  double tolerance = 0.0;
  bool theta_rational = true;
  double a_H_spread = 0.0;     // max − min of a_H
  bool a_H_constant = false;
  int samples_u = 0;
  int samples_v = 0;
};

// Spectral leafwise derivative of a_H, refined by grid doubling until the
// estimate is stable. For irrational θ, bundle-like additionally requires a_H
// constant to within tol.
BundleLikeReport is_bundle_like(const MetricCoeffs& metric, double tol, int oversample = 4);

struct TransverseDerivatives {
  GridField e_H_f;       // e_H(f)
  GridField e_H_star_f;  // −e_H(f) + F·f
};

// Throws GridMismatch if f is not on the cache grid.
TransverseDerivatives transverse_derivatives(const GeometryCache& geometry, const GridField& f);

// Trapezoid rule of f·h·√det g over the cache grid.
double weighted_inner(const GeometryCache& geometry, const GridField& f, const GridField& h);

}  // namespace folix
