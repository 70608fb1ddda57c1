#include "folix/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "folix/errors.hpp"
#include "folix/fourier.hpp"

namespace folix {

Slope Slope::rational(std::int64_t p, std::int64_t q) {
  if (q == 0) throw std::invalid_argument("Slope: zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  Slope s;
  s.rational_ = true;
  s.p_ = p / g;
  s.q_ = q / g;
  s.value_ = static_cast<double>(s.p_) / static_cast<double>(s.q_);
  return s;
}

Slope Slope::real(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("Slope: non-finite value");
  Slope s;
  s.rational_ = false;
  s.value_ = x;
  return s;
}

int MetricCoeffs::support_u() const { return std::max({a.max_m(), b.max_m(), c.max_m()}); }
int MetricCoeffs::support_v() const { return std::max({a.max_n(), b.max_n(), c.max_n()}); }

MetricValues eval_metric(const MetricCoeffs& metric, double u, double v) {
  const PhaseTable ph(u, v, metric.support_u(), metric.support_v());
  return {metric.a.eval_grad(ph).value, metric.b.eval_grad(ph).value, metric.c.eval_grad(ph).value};
}

LocalGeometry local_geometry(const MetricCoeffs& metric, double u, double v) {
  const PhaseTable ph(u, v, metric.support_u(), metric.support_v());
  LocalGeometry g;
  g.u = u;
  g.v = v;
  g.a = metric.a.eval_grad(ph);
  g.b = metric.b.eval_grad(ph);
  g.c = metric.c.eval_grad(ph);
  const double th = metric.theta.value();
  const auto& [a, a_u, a_v] = g.a;
  const auto& [b, b_u, b_v] = g.b;
  const auto& [c, c_u, c_v] = g.c;
  if (!(a > 0.0)) throw NonPositiveMetric(u, v, "a <= 0");
  g.det_g = a * c - b * b;
  if (!(g.det_g > 0.0)) throw NonPositiveMetric(u, v, "ac - b^2 <= 0");
  g.det_gF = a + 2.0 * b * th + c * th * th;
  const double gF_u = a_u + 2.0 * b_u * th + c_u * th * th;
  const double gF_v = a_v + 2.0 * b_v * th + c_v * th * th;
  const double det_u = a_u * c + a * c_u - 2.0 * b * b_u;
  const double det_v = a_v * c + a * c_v - 2.0 * b * b_v;

  const double sq_gF = std::sqrt(g.det_gF);
  const double sq_det = std::sqrt(g.det_g);
  g.a_H = sq_det / sq_gF;
  const double gF2 = g.det_gF * g.det_gF;
  g.a_H_u = (det_u * g.det_gF - g.det_g * gF_u) / (2.0 * g.a_H * gF2);
  g.a_H_v = (det_v * g.det_gF - g.det_g * gF_v) / (2.0 * g.a_H * gF2);

  const double gF32 = g.det_gF * sq_gF;
  const double P_u = (b_u + c_u * th) / sq_gF - (b + c * th) * gF_u / (2.0 * gF32);
  const double Q_v = (a_v + b_v * th) / sq_gF - (a + b * th) * gF_v / (2.0 * gF32);
  g.F = (P_u - Q_v) / sq_det;

  g.e_F = {1.0 / sq_gF, th / sq_gF};
  g.e_H = {-(b + c * th) / (sq_gF * sq_det), (a + b * th) / (sq_gF * sq_det)};
  g.E_F = {(a + b * th) / sq_gF, (b + c * th) / sq_gF};
  g.E_H = {-th * sq_det / sq_gF, sq_det / sq_gF};
  return g;
}

double mean_curvature(const MetricCoeffs& metric, double u, double v) {
  return local_geometry(metric, u, v).F;
}

MetricSplit split_metric(const MetricCoeffs& metric, double u, double v) {
  const auto [a, b, c] = eval_metric(metric, u, v);
  const double th = metric.theta.value();
  const double gF = a + 2.0 * b * th + c * th * th;
  const double p = a + b * th;
  const double q = b + c * th;
  const double aH2 = (a * c - b * b) / gF;
  MetricSplit s;
  s.g_F = {p * p / gF, p * q / gF, q * q / gF};
  s.g_H = {aH2 * th * th, -aH2 * th, aH2};
  return s;
}

double GridField::min() const { return *std::min_element(values.begin(), values.end()); }
double GridField::max() const { return *std::max_element(values.begin(), values.end()); }

namespace {

int validation_size(int support, int oversample) {
  return std::max(16, oversample * (2 * support + 1));
}

}  // namespace

void validate_metric(const MetricCoeffs& metric, int oversample) {
  const int pu = validation_size(metric.support_u(), oversample);
  const int pv = validation_size(metric.support_v(), oversample);
  for (int i = 0; i < pu; ++i)
    for (int j = 0; j < pv; ++j) {
      const double u = static_cast<double>(i) / pu;
      const double v = static_cast<double>(j) / pv;
      const auto [a, b, c] = eval_metric(metric, u, v);
      if (!(a > 0.0)) throw NonPositiveMetric(u, v, "a <= 0");
      if (!(a * c - b * b > 0.0)) throw NonPositiveMetric(u, v, "ac - b^2 <= 0");
    }
}

GeometryCache build_geometry(const MetricCoeffs& metric, int n_u, int n_v, int oversample) {
  if (n_u <= 0 || n_v <= 0) throw std::invalid_argument("build_geometry: empty grid");
  validate_metric(metric, oversample);
  GeometryCache g;
  g.metric = metric;
  g.n_u = n_u;
  g.n_v = n_v;
  for (GridField* f : {&g.det_gF, &g.det_g, &g.a_H, &g.F, &g.e_F_u, &g.e_F_v, &g.e_H_u, &g.e_H_v,
                       &g.E_F_u, &g.E_F_v, &g.E_H_u, &g.E_H_v})
    *f = GridField(n_u, n_v);
  for (int i = 0; i < n_u; ++i) {
    for (int j = 0; j < n_v; ++j) {
      const LocalGeometry p =
          local_geometry(metric, static_cast<double>(i) / n_u, static_cast<double>(j) / n_v);
      g.det_gF(i, j) = p.det_gF;
      g.det_g(i, j) = p.det_g;
      g.a_H(i, j) = p.a_H;
      g.F(i, j) = p.F;
      g.e_F_u(i, j) = p.e_F[0];
      g.e_F_v(i, j) = p.e_F[1];
      g.e_H_u(i, j) = p.e_H[0];
      g.e_H_v(i, j) = p.e_H[1];
      g.E_F_u(i, j) = p.E_F[0];
      g.E_F_v(i, j) = p.E_F[1];
      g.E_H_u(i, j) = p.E_H[0];
      g.E_H_v(i, j) = p.E_H[1];
    }
  }
  return g;
}

BundleLikeReport is_bundle_like(const MetricCoeffs& metric, double tol, int oversample) {
  validate_metric(metric, oversample);
  const double th = metric.theta.value();
  int pu = validation_size(metric.support_u(), oversample);
  int pv = validation_size(metric.support_v(), oversample);
  constexpr int kMaxSamples = 2048;

  std::vector<double> aH;
  for (;;) {
    aH.assign(static_cast<std::size_t>(pu) * pv, 0.0);
    for (int i = 0; i < pu; ++i)
      for (int j = 0; j < pv; ++j) {
        const auto [a, b, c] =
            eval_metric(metric, static_cast<double>(i) / pu, static_cast<double>(j) / pv);
        aH[static_cast<std::size_t>(i) * pv + j] =
            std::sqrt((a * c - b * b) / (a + 2.0 * b * th + c * th * th));
      }
    // The sampled field must be resolved: coefficients in the outer half of the
    // band are what aliasing would corrupt.
    const fourier::Coefficients2d co = fourier::analyze_real(aH, pu, pv);
    const double scale = std::abs(co.at(0, 0));
    double tail_u = 0.0;
    double tail_v = 0.0;
    for (int p = -co.half_u(); p <= co.half_u(); ++p)
      for (int r = -co.half_v(); r <= co.half_v(); ++r) {
        const double m = std::abs(co.at(p, r));
        if (2 * std::abs(p) > co.half_u()) tail_u = std::max(tail_u, m);
        if (2 * std::abs(r) > co.half_v()) tail_v = std::max(tail_v, m);
      }
    const double eps = std::max(1e-2 * tol, 1e-14 * scale);
    const bool grow_u = tail_u > eps && pu < kMaxSamples;
    const bool grow_v = tail_v > eps && pv < kMaxSamples;
    if (!grow_u && !grow_v) break;
    if (grow_u) pu *= 2;
    if (grow_v) pv *= 2;
  }

  const std::vector<double> d_u = fourier::derivative(aH, pu, pv, 0);
  const std::vector<double> d_v = fourier::derivative(aH, pu, pv, 1);
  BundleLikeReport r;
  r.tolerance = tol;
  r.samples_u = pu;
  r.samples_v = pv;
  r.theta_rational = metric.theta.is_rational();
  for (std::size_t k = 0; k < aH.size(); ++k)
    r.max_violation = std::max(r.max_violation, std::abs(d_u[k] + th * d_v[k]));
  const auto [lo, hi] = std::minmax_element(aH.begin(), aH.end());
  r.a_H_spread = *hi - *lo;
  r.a_H_constant = r.a_H_spread <= tol;
  r.bundle_like = r.max_violation <= tol && (r.theta_rational || r.a_H_constant);
  return r;
}

TransverseDerivatives transverse_derivatives(const GeometryCache& geometry, const GridField& f) {
  if (f.n_u != geometry.n_u || f.n_v != geometry.n_v ||
      f.values.size() != static_cast<std::size_t>(f.n_u) * f.n_v)
    throw GridMismatch("transverse_derivatives: field is not on the geometry grid");
  const std::vector<double> f_u = fourier::derivative(f.values, f.n_u, f.n_v, 0);
  const std::vector<double> f_v = fourier::derivative(f.values, f.n_u, f.n_v, 1);
  TransverseDerivatives out{GridField(f.n_u, f.n_v), GridField(f.n_u, f.n_v)};
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double eh = geometry.e_H_u.values[k] * f_u[k] + geometry.e_H_v.values[k] * f_v[k];
    out.e_H_f.values[k] = eh;
    out.e_H_star_f.values[k] = -eh + geometry.F.values[k] * f.values[k];
  }
  return out;
}

double weighted_inner(const GeometryCache& geometry, const GridField& f, const GridField& h) {
  if (f.n_u != geometry.n_u || f.n_v != geometry.n_v || h.n_u != geometry.n_u ||
      h.n_v != geometry.n_v)
    throw GridMismatch("weighted_inner: field is not on the geometry grid");
  double sum = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k)
    sum += f.values[k] * h.values[k] * std::sqrt(geometry.det_g.values[k]);
  return sum / (static_cast<double>(geometry.n_u) * geometry.n_v);
}

}  // namespace folix
