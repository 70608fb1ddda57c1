#pragma once

// Matrix-valued homogeneous symbols on the holonomy groupoid T² × ℝ × ℝ of the
// linearized foliation. A symbol of degree m is stored through its |p_v| = 1
// representatives, one slice per sign of p_v, on a uniform τ grid.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "folix/classical_flow.hpp"
#include "folix/geometry.hpp"

namespace folix {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix<cd, 2, 2, Eigen::RowMajor>;

class HomogeneousSymbol {
 public:
  HomogeneousSymbol() = default;
  // τ nodes are −T_max + k·(2T_max/n_tau), k < n_tau; n_tau must be even so
  // τ = 0 is a node.
  HomogeneousSymbol(int degree, int n_u, int n_v, int n_tau, double T_max);

  static HomogeneousSymbol from_function(int degree, int n_u, int n_v, int n_tau, double T_max,
                                         const std::function<Mat2(double u, double v, double s,
                                                                  double tau)>& f);

  int degree() const { return degree_; }
  void set_degree(int m) { degree_ = m; }
  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  int n_tau() const { return n_tau_; }
  double T_max() const { return T_max_; }
  double h_tau() const { return 2.0 * T_max_ / n_tau_; }
  double tau(int k) const { return -T_max_ + k * h_tau(); }
  double u(int i) const { return static_cast<double>(i) / n_u_; }
  double v(int j) const { return static_cast<double>(j) / n_v_; }

  // Slice index 0 is sign(p_v) = +1, 1 is −1.
  static double sign_of(int si) { return si == 0 ? 1.0 : -1.0; }
  static int slice_of(double s) { return s > 0 ? 0 : 1; }

  std::size_t index(int i, int j, int si, int k) const {
    return ((((static_cast<std::size_t>(i) * n_v_ + j) * 2 + si) * n_tau_ + k) * 4);
  }
  Eigen::Map<Mat2> at(int i, int j, int si, int k) { return Eigen::Map<Mat2>(&values_[index(i, j, si, k)]); }
  Eigen::Map<const Mat2> at(int i, int j, int si, int k) const {
    return Eigen::Map<const Mat2>(&values_[index(i, j, si, k)]);
  }
  std::vector<cd>& values() { return values_; }
  const std::vector<cd>& values() const { return values_; }

  bool same_grid(const HomogeneousSymbol& o) const;
  void require_same_grid(const HomogeneousSymbol& o, const char* who) const;

  // Bicubic periodic interpolation in (u, v), cubic in τ, zero off the τ grid.
  Mat2 sample(double u, double v, int si, double tau) const;

  // Largest pointwise spectral norm.
  double sup() const;
  // Smallest τ interval [lo, hi] (node values) outside which every node has
  // norm <= rel · sup(). Returns {0, 0} for the zero symbol.
  std::pair<double, double> support(double rel = 1e-12) const;
  // True if every node with |τ| > (1 − buffer)·T_max has norm <= rel · sup().
  bool vanishes_in_buffer(double buffer = 0.1, double rel = 1e-12) const;

  HomogeneousSymbol& operator+=(const HomogeneousSymbol& o);
  HomogeneousSymbol& operator-=(const HomogeneousSymbol& o);
  HomogeneousSymbol& operator*=(cd s);

 private:
  int degree_ = 0;
  int n_u_ = 0, n_v_ = 0, n_tau_ = 0;
  double T_max_ = 0.0;
  std::vector<cd> values_;
};

HomogeneousSymbol operator+(HomogeneousSymbol a, const HomogeneousSymbol& b);
HomogeneousSymbol operator-(HomogeneousSymbol a, const HomogeneousSymbol& b);
HomogeneousSymbol operator*(cd s, HomogeneousSymbol a);

// The leafwise volume density √det g_F; evaluated exactly from the metric.
class LeafVolume {
 public:
  explicit LeafVolume(const MetricCoeffs& metric) : metric_(metric) {}
  double sqrt_gF(double u, double v) const;
  double theta() const { return metric_.theta.value(); }

 private:
  MetricCoeffs metric_;
};

// (k1∗k2)(x,s,τ) = ∫ k1(x,s,τ₁) k2(x − τ₁ℓ, s, τ − τ₁) √g_F(x − τ₁ℓ) dτ₁,
// ℓ = (1, θ). Trapezoid rule on the τ grid; (u,v) shifts are exact for the
// trig interpolant. Throws SupportOverflow if the combined support leaves the
// grid, GridMismatch for different grids.
HomogeneousSymbol convolve(const HomogeneousSymbol& k1, const HomogeneousSymbol& k2,
                           const LeafVolume& vol);
HomogeneousSymbol convolve_serial(const HomogeneousSymbol& k1, const HomogeneousSymbol& k2,
                                  const LeafVolume& vol);

// k*(x,s,τ) = k(x − τℓ, s, −τ)^†.
HomogeneousSymbol involution(const HomogeneousSymbol& k, double theta);

// Solution at time t of ∂k/∂t = Hk + (w + m·sign(p_v) a_H^{-2} ∂_v a_H) k,
// w = −½ sign(p_v)(F(range) + F(source)), by characteristics along the
// groupoid flow. Throws CharacteristicEscape if k0 does not vanish in the
// outer 10% of the τ grid or a characteristic from an inner node leaves it.
HomogeneousSymbol transport(const HomogeneousSymbol& k0, const TransverseFlow& flow, double t,
                            double dt);
HomogeneousSymbol transport_serial(const HomogeneousSymbol& k0, const TransverseFlow& flow,
                                   double t, double dt);

double sup_norm(const HomogeneousSymbol& k);
double sup_distance(const HomogeneousSymbol& a, const HomogeneousSymbol& b);
// RMS of entrywise differences over all nodes.
double frobenius_distance(const HomogeneousSymbol& a, const HomogeneousSymbol& b);

// Spectral norm of a 2×2 complex matrix.
double norm2(const Mat2& m);

}  // namespace folix
