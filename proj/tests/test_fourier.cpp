#include <doctest.h>

#include <cmath>
#include <random>

#include "folix/fourier.hpp"

using namespace folix::fourier;

TEST_CASE("analyze recovers a band-limited field") {
  const int nu = 8, nv = 12;
  std::vector<double> f(nu * nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = double(i) / nu, v = double(j) / nv;
      f[i * nv + j] = 1.5 + std::cos(kTwoPi * (u + 2 * v)) + 0.25 * std::sin(kTwoPi * 3 * v);
    }
  const Coefficients2d c = analyze_real(f, nu, nv);
  CHECK(std::abs(c.at(0, 0) - 1.5) < 1e-14);
  CHECK(std::abs(c.at(1, 2) - 0.5) < 1e-14);
  CHECK(std::abs(c.at(-1, -2) - 0.5) < 1e-14);
  CHECK(std::abs(c.at(0, 3) - cd(0, -0.125)) < 1e-14);
  CHECK(std::abs(c.evaluate(0.3, 0.7) - (1.5 + std::cos(kTwoPi * 1.7) + 0.25 * std::sin(kTwoPi * 2.1))) <
        1e-13);
}

TEST_CASE("synthesize inverts analyze, including the split Nyquist mode") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const int nu = 6, nv = 10;
  std::vector<cd> f(nu * nv);
  for (auto& x : f) x = {n01(rng), n01(rng)};
  const auto back = synthesize(analyze(f, nu, nv), nu, nv);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(back[k] - f[k]) < 1e-13);
}

TEST_CASE("shift by whole grid steps is a permutation") {
  const int nu = 4, nv = 8;
  std::vector<cd> f(nu * nv);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = double(k);
  const auto s = shift(f, nu, nv, 0.25, 2.0 / nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      CHECK(std::abs(s[i * nv + j] - f[((i + nu - 1) % nu) * nv + (j + nv - 2) % nv]) < 1e-12);
}

TEST_CASE("spectral derivative of a trig polynomial is exact") {
  const int nu = 16, nv = 16;
  std::vector<double> f(nu * nv), fu(nu * nv), fv(nu * nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = double(i) / nu, v = double(j) / nv;
      f[i * nv + j] = std::sin(kTwoPi * (2 * u - 3 * v));
      fu[i * nv + j] = 2 * kTwoPi * std::cos(kTwoPi * (2 * u - 3 * v));
      fv[i * nv + j] = -3 * kTwoPi * std::cos(kTwoPi * (2 * u - 3 * v));
    }
  const auto du = derivative(f, nu, nv, 0);
  const auto dv = derivative(f, nu, nv, 1);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(std::abs(du[k] - fu[k]) < 1e-11);
    CHECK(std::abs(dv[k] - fv[k]) < 1e-11);
  }
}
