#pragma once

// Independent method-of-lines solver for the scalar symbol transport equation
//   ∂k/∂t = H_u ∂_u k + H_v ∂_v k + H_τ ∂_τ k + c k,
// with c = w + m·sign(p_v) a_H^{-2} ∂_v a_H. Coefficients come straight from
// eval_metric; derivatives of the coefficient fields by central differences.
// Second-order upwind in space, RK4 in time, zero inflow in τ.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "folix/geometry.hpp"

namespace folix::oracle {

struct PdeGrid {
  int n_u, n_v, n_tau;
  double T_max;
};

class TransportPde {
 public:
  using Initial = std::function<std::complex<double>(double u, double v, double s, double tau)>;

  TransportPde(const MetricCoeffs& metric, PdeGrid grid, int degree)
      : m_(metric), g_(grid), degree_(degree), th_(metric.theta.value()) {
    const std::size_t n = size();
    vu_.resize(n);
    vv_.resize(n);
    vt_.resize(n);
    c_.resize(n);
    for (int i = 0; i < g_.n_u; ++i)
      for (int j = 0; j < g_.n_v; ++j)
        for (int si = 0; si < 2; ++si)
          for (int k = 0; k < g_.n_tau; ++k) {
            const double u = double(i) / g_.n_u, v = double(j) / g_.n_v, tau = tau_of(k);
            const double s = si == 0 ? 1.0 : -1.0;
            const double us = u - tau, vs = v - th_ * tau;
            const double dur = du_dt(u, v, s), dus = du_dt(us, vs, s);
            const std::size_t p = idx(i, j, si, k);
            vu_[p] = dur;
            vv_[p] = s * aH(u, v) * (coef(u, v, 0) + th_ * coef(u, v, 1)) / det(u, v);
            vt_[p] = dur - dus;
            const double w = -0.5 * s * (F(u, v) + F(us, vs));
            const double eps = 1e-5;
            const double aHv = (aH(u, v + eps) - aH(u, v - eps)) / (2 * eps);
            c_[p] = w + degree_ * s * aHv / (aH(u, v) * aH(u, v));
          }
  }

  std::vector<std::complex<double>> solve(const Initial& k0, double t) const {
    std::vector<std::complex<double>> k(size());
    for (int i = 0; i < g_.n_u; ++i)
      for (int j = 0; j < g_.n_v; ++j)
        for (int si = 0; si < 2; ++si)
          for (int kk = 0; kk < g_.n_tau; ++kk)
            k[idx(i, j, si, kk)] =
                k0(double(i) / g_.n_u, double(j) / g_.n_v, si == 0 ? 1.0 : -1.0, tau_of(kk));
    double vmax = 1e-12;
    for (std::size_t p = 0; p < size(); ++p) {
      vmax = std::max(vmax, std::abs(vu_[p]) * g_.n_u);
      vmax = std::max(vmax, std::abs(vv_[p]) * g_.n_v);
      vmax = std::max(vmax, std::abs(vt_[p]) / h_tau());
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(t * vmax / 0.4)));
    const double dt = t / steps;
    std::vector<std::complex<double>> k1, k2, k3, k4, tmp(size());
    for (int n = 0; n < steps; ++n) {
      k1 = rhs(k);
      for (std::size_t p = 0; p < size(); ++p) tmp[p] = k[p] + 0.5 * dt * k1[p];
      k2 = rhs(tmp);
      for (std::size_t p = 0; p < size(); ++p) tmp[p] = k[p] + 0.5 * dt * k2[p];
      k3 = rhs(tmp);
      for (std::size_t p = 0; p < size(); ++p) tmp[p] = k[p] + dt * k3[p];
      k4 = rhs(tmp);
      for (std::size_t p = 0; p < size(); ++p)
        k[p] += dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
    }
    return k;
  }

  std::size_t size() const { return std::size_t(g_.n_u) * g_.n_v * 2 * g_.n_tau; }
  std::size_t idx(int i, int j, int si, int k) const {
    return ((std::size_t(i) * g_.n_v + j) * 2 + si) * g_.n_tau + k;
  }
  double tau_of(int k) const { return -g_.T_max + k * h_tau(); }
  double h_tau() const { return 2 * g_.T_max / g_.n_tau; }

 private:
  double coef(double u, double v, int which) const {
    const auto [a, b, c] = eval_metric(m_, u, v);
    return which == 0 ? a : which == 1 ? b : c;
  }
  double det(double u, double v) const {
    const auto [a, b, c] = eval_metric(m_, u, v);
    return a * c - b * b;
  }
  double gF(double u, double v) const {
    const auto [a, b, c] = eval_metric(m_, u, v);
    return a + 2 * b * th_ + c * th_ * th_;
  }
  double aH(double u, double v) const { return std::sqrt(det(u, v) / gF(u, v)); }
  double du_dt(double u, double v, double s) const {
    return -s * aH(u, v) * (coef(u, v, 1) + th_ * coef(u, v, 2)) / det(u, v);
  }
  double F(double u, double v) const {
    const double e = 1e-5;
    auto P = [&](double x, double y) { return (coef(x, y, 1) + th_ * coef(x, y, 2)) / std::sqrt(gF(x, y)); };
    auto Q = [&](double x, double y) { return (coef(x, y, 0) + th_ * coef(x, y, 1)) / std::sqrt(gF(x, y)); };
    return ((P(u + e, v) - P(u - e, v)) - (Q(u, v + e) - Q(u, v - e))) / (2 * e) / std::sqrt(det(u, v));
  }

  // Second-order one-sided difference in the upwind direction of ∂k/∂t = V ∂_x k
  // (information arrives from the +x side when V > 0).
  template <class Get>
  static std::complex<double> upwind(double V, double h, Get&& f) {
    if (V > 0) return V * (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2 * h);
    if (V < 0) return V * (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2 * h);
    return 0.0;
  }

  std::vector<std::complex<double>> rhs(const std::vector<std::complex<double>>& k) const {
    std::vector<std::complex<double>> out(size());
    const int nu = g_.n_u, nv = g_.n_v, nt = g_.n_tau;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j)
        for (int si = 0; si < 2; ++si)
          for (int kk = 0; kk < nt; ++kk) {
            const std::size_t p = idx(i, j, si, kk);
            std::complex<double> r = c_[p] * k[p];
            r += upwind(vu_[p], 1.0 / nu, [&](int o) { return k[idx(((i + o) % nu + nu) % nu, j, si, kk)]; });
            r += upwind(vv_[p], 1.0 / nv, [&](int o) { return k[idx(i, ((j + o) % nv + nv) % nv, si, kk)]; });
            r += upwind(vt_[p], h_tau(), [&](int o) {
              const int q = kk + o;
              return q < 0 || q >= nt ? std::complex<double>{} : k[idx(i, j, si, q)];
            });
            out[p] = r;
          }
    return out;
  }

  MetricCoeffs m_;
  PdeGrid g_;
  int degree_;
  double th_;
  std::vector<double> vu_, vv_, vt_, c_;
};

}  // namespace folix::oracle
