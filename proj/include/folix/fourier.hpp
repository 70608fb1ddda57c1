#pragma once

// Periodic Fourier utilities on the unit torus.
//
// Coefficient tables use the symmetric mode range |p| <= n/2. For even n the
// Nyquist coefficient is split evenly between +n/2 and -n/2, so the trig
// interpolant of real samples is real and shifts act consistently.

#include <complex>
#include <span>
#include <vector>

namespace folix::fourier {

using cd = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// In-place 2D DFT of an n0 x n1 row-major array. sign = -1 forward, +1 backward
// (unnormalized in both directions).
void dft_2d(std::vector<cd>& data, int n0, int n1, int sign);

// Symmetric-range Fourier coefficients of a sampled periodic field.
class Coefficients2d {
 public:
  Coefficients2d() = default;
  Coefficients2d(int half_u, int half_v)
      : half_u_(half_u), half_v_(half_v),
        c_(static_cast<std::size_t>((2 * half_u + 1) * (2 * half_v + 1))) {}

  int half_u() const { return half_u_; }
  int half_v() const { return half_v_; }
  cd& at(int p, int r) { return c_[index(p, r)]; }
  const cd& at(int p, int r) const { return c_[index(p, r)]; }
  cd get(int p, int r) const {
    if (p < -half_u_ || p > half_u_ || r < -half_v_ || r > half_v_) return {};
    return c_[index(p, r)];
  }
  std::span<const cd> raw() const { return c_; }
  std::span<cd> raw() { return c_; }

  cd evaluate(double u, double v) const;

 private:
  std::size_t index(int p, int r) const {
    return static_cast<std::size_t>((p + half_u_) * (2 * half_v_ + 1) + (r + half_v_));
  }
  int half_u_ = 0;
  int half_v_ = 0;
  std::vector<cd> c_;
};

// Coefficients of samples taken at nodes (i/n_u, j/n_v), row-major in i.
Coefficients2d analyze(std::span<const cd> samples, int n_u, int n_v);
Coefficients2d analyze_real(std::span<const double> samples, int n_u, int n_v);

// Evaluate the trig interpolant on an n_u x n_v node grid. The coefficient
// table may have any half widths; modes beyond the grid alias as sampling would.
std::vector<cd> synthesize(const Coefficients2d& coeffs, int n_u, int n_v);

// Samples of f(u - du, v - dv) on the same grid (exact for the trig interpolant).
std::vector<cd> shift(std::span<const cd> samples, int n_u, int n_v, double du, double dv);

// Spectral partial derivative of real samples: axis 0 = d/du, 1 = d/dv.
// The Nyquist mode (even n) is differentiated to zero.
std::vector<double> derivative(std::span<const double> samples, int n_u, int n_v, int axis);

}  // namespace folix::fourier
