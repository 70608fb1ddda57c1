#include "folix/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace folix::fourier {

namespace {

// FFTW planning is not thread safe; execution with the new-array interface is.
fftw_plan plan_for(int n0, int n1, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(n0, n1, sign);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  std::vector<cd> scratch(static_cast<std::size_t>(n0) * n1);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_2d(n0, n1, buf, buf, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("fftw planning failed");
  plans.emplace(key, plan);
  return plan;
}

int wrap(int p, int n) {
  int r = p % n;
  return r < 0 ? r + n : r;
}

}  // namespace

void dft_2d(std::vector<cd>& data, int n0, int n1, int sign) {
  if (data.size() != static_cast<std::size_t>(n0) * n1)
    throw std::invalid_argument("dft_2d: size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(n0, n1, sign), buf, buf);
}

cd Coefficients2d::evaluate(double u, double v) const {
  std::vector<cd> eu(2 * half_u_ + 1);
  std::vector<cd> ev(2 * half_v_ + 1);
  for (int p = -half_u_; p <= half_u_; ++p) eu[p + half_u_] = std::polar(1.0, kTwoPi * p * u);
  for (int r = -half_v_; r <= half_v_; ++r) ev[r + half_v_] = std::polar(1.0, kTwoPi * r * v);
  cd sum = 0.0;
  for (int p = -half_u_; p <= half_u_; ++p) {
    cd row = 0.0;
    for (int r = -half_v_; r <= half_v_; ++r) row += at(p, r) * ev[r + half_v_];
    sum += row * eu[p + half_u_];
  }
  return sum;
}

Coefficients2d analyze(std::span<const cd> samples, int n_u, int n_v) {
  std::vector<cd> data(samples.begin(), samples.end());
  dft_2d(data, n_u, n_v, -1);
  const double scale = 1.0 / (static_cast<double>(n_u) * n_v);
  const int hu = n_u / 2;
  const int hv = n_v / 2;
  Coefficients2d out(hu, hv);
  for (int p = -hu; p <= hu; ++p) {
    const double wu = (n_u % 2 == 0 && std::abs(p) == hu) ? 0.5 : 1.0;
    for (int r = -hv; r <= hv; ++r) {
      const double wv = (n_v % 2 == 0 && std::abs(r) == hv) ? 0.5 : 1.0;
      out.at(p, r) = data[wrap(p, n_u) * n_v + wrap(r, n_v)] * (scale * wu * wv);
    }
  }
  return out;
}

Coefficients2d analyze_real(std::span<const double> samples, int n_u, int n_v) {
  std::vector<cd> c(samples.begin(), samples.end());
  return analyze(c, n_u, n_v);
}

std::vector<cd> synthesize(const Coefficients2d& coeffs, int n_u, int n_v) {
  std::vector<cd> data(static_cast<std::size_t>(n_u) * n_v);
  for (int p = -coeffs.half_u(); p <= coeffs.half_u(); ++p)
    for (int r = -coeffs.half_v(); r <= coeffs.half_v(); ++r)
      data[wrap(p, n_u) * n_v + wrap(r, n_v)] += coeffs.at(p, r);
  dft_2d(data, n_u, n_v, +1);
  return data;
}

std::vector<cd> shift(std::span<const cd> samples, int n_u, int n_v, double du, double dv) {
  Coefficients2d c = analyze(samples, n_u, n_v);
  for (int p = -c.half_u(); p <= c.half_u(); ++p) {
    const cd pu = std::polar(1.0, -kTwoPi * p * du);
    for (int r = -c.half_v(); r <= c.half_v(); ++r)
      c.at(p, r) *= pu * std::polar(1.0, -kTwoPi * r * dv);
  }
  return synthesize(c, n_u, n_v);
}

std::vector<double> derivative(std::span<const double> samples, int n_u, int n_v, int axis) {
  std::vector<cd> data(samples.begin(), samples.end());
  dft_2d(data, n_u, n_v, -1);
  const double scale = 1.0 / (static_cast<double>(n_u) * n_v);
  for (int i = 0; i < n_u; ++i) {
    for (int j = 0; j < n_v; ++j) {
      int k = 0;
      int n = 0;
      if (axis == 0) {
        k = i <= n_u / 2 ? i : i - n_u;
        n = n_u;
      } else {
        k = j <= n_v / 2 ? j : j - n_v;
        n = n_v;
      }
      if (n % 2 == 0 && std::abs(k) == n / 2) k = 0;
      data[i * n_v + j] *= cd(0.0, kTwoPi * k) * scale;
    }
  }
  dft_2d(data, n_u, n_v, +1);
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
  return out;
}

}  // namespace folix::fourier
