#include <doctest.h>

#include <cmath>
#include <random>

#include "folix/errors.hpp"
#include "folix/fourier.hpp"
#include "folix/symbol.hpp"
#include "oracles/transport_pde.hpp"
#include "test_support.hpp"

using namespace folix;
using namespace folix::testing;
using folix::fourier::kTwoPi;

namespace {

TransverseFlow certified(const MetricCoeffs& m) { return TransverseFlow(m, is_bundle_like(m, 1e-10)); }

// Random symbol: low (u,v) modes times a τ bump inside [−0.35, 0.35]·T scale.
HomogeneousSymbol random_symbol(std::mt19937_64& rng, int nu, int nv, int nt, double T, double r,
                                double c = 0.0) {
  std::normal_distribution<double> N;
  std::array<Mat2, 9> coef;
  for (auto& m : coef)
    for (int e = 0; e < 4; ++e) m(e / 2, e % 2) = cd(N(rng), N(rng)) * 0.3;
  std::array<Mat2, 2> tslope;
  for (auto& m : tslope)
    for (int e = 0; e < 4; ++e) m(e / 2, e % 2) = cd(N(rng), N(rng)) * 0.3;
  return HomogeneousSymbol::from_function(0, nu, nv, nt, T, [&](double u, double v, double s, double tau) {
    Mat2 acc = Mat2::Zero();
    int q = 0;
    for (int p = -1; p <= 1; ++p)
      for (int w = -1; w <= 1; ++w) acc += coef[q++] * std::polar(1.0, kTwoPi * (p * u + w * v));
    acc += tslope[s > 0 ? 0 : 1] * (tau - c) / r;
    return Mat2(acc * bump(tau, c, r));
  });
}

}  // namespace

TEST_CASE("grid layout and interpolation") {
  HomogeneousSymbol k(0, 4, 6, 8, 1.0);
  CHECK(k.tau(4) == 0.0);
  CHECK(k.h_tau() == 0.25);
  CHECK_THROWS_AS(HomogeneousSymbol(0, 4, 4, 7, 1.0), std::invalid_argument);
  // cubic in τ and trig in (u,v) at nodes
  auto f = [](double u, double v, double s, double tau) {
    Mat2 m;
    m << cd(tau * tau * tau - tau, s), std::cos(kTwoPi * u), std::sin(kTwoPi * v), 1.0;
    return m;
  };
  k = HomogeneousSymbol::from_function(0, 8, 8, 16, 2.0, f);
  CHECK((k.sample(0.25, 0.5, 1, 0.5) - f(0.25, 0.5, -1, 0.5)).norm() < 1e-14);
  const Mat2 mid = k.sample(0.125, 0.375, 0, 0.3);
  CHECK(std::abs(mid(0, 0) - cd(0.027 - 0.3, 1.0)) < 1e-13);  // cubic in τ reproduced exactly
  CHECK(k.sample(0.1, 0.1, 0, 2.5).isZero());
}

TEST_CASE("norms and distances") {
  std::mt19937_64 rng(1);
  const auto k = random_symbol(rng, 4, 4, 16, 1.0, 0.5);
  CHECK(sup_distance(k, k) == 0.0);
  CHECK(frobenius_distance(k, k) == 0.0);
  CHECK(sup_distance(k, cd(-1.0) * k) == doctest::Approx(2 * sup_norm(k)).epsilon(1e-14));
  const auto k2 = random_symbol(rng, 4, 4, 16, 1.0, 0.5);
  double brute_sup = 0, brute_sq = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int si = 0; si < 2; ++si)
        for (int t = 0; t < 16; ++t) {
          const Mat2 d = k.at(i, j, si, t) - k2.at(i, j, si, t);
          brute_sup = std::max(brute_sup, Eigen::JacobiSVD<Mat2>(d).singularValues()(0));
          brute_sq += d.squaredNorm();
        }
  CHECK(sup_distance(k, k2) == doctest::Approx(brute_sup).epsilon(1e-12));
  CHECK(frobenius_distance(k, k2) == doctest::Approx(std::sqrt(brute_sq / (4 * 4 * 2 * 16 * 4))).epsilon(1e-12));
  CHECK_THROWS_AS(sup_distance(k, HomogeneousSymbol(0, 4, 4, 8, 1.0)), GridMismatch);
}

TEST_CASE("convolution of smoothed boxes, flat metric, irrational slope") {
  const double th = std::sqrt(2.0), eps = 0.15;
  auto box = [&](double t) { return smooth_step((0.5 - std::abs(t)) / eps); };
  const auto k = HomogeneousSymbol::from_function(0, 4, 4, 384, 1.5, [&](double, double, double, double t) {
    return Mat2(Mat2::Identity() * box(t));
  });
  const LeafVolume vol(flat_metric(Slope::real(th)));
  const auto kk = convolve(k, k, vol);
  CHECK(kk.degree() == 0);
  // independent 1D quadrature of the triangle value at τ = 0
  const int n = 200000;
  double tri = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = -0.5 + double(i) / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    tri += w * box(t) * box(-t) / n;
  }
  const Mat2 at0 = kk.at(1, 2, 0, 192);
  CHECK(std::abs(at0(0, 0) - std::sqrt(1 + th * th) * tri) < 1e-6);
  CHECK(std::abs(at0(0, 1)) < 1e-14);
  // degree bookkeeping
  auto k1 = k;
  k1.set_degree(1);
  CHECK(convolve(k, k1, vol).degree() == 1);
}

TEST_CASE("approximate identity: k1∗δ_ε → k1 at rate ε²") {
  const auto m = sin_v_metric();
  const LeafVolume vol(m);
  std::mt19937_64 rng(2);
  const auto k1 = random_symbol(rng, 4, 8, 512, 1.0, 0.6);
  auto delta = [&](double eps) {
    HomogeneousSymbol d(0, 4, 8, 512, 1.0);
    double mass = 0;
    for (int t = 0; t < 512; ++t) mass += d.h_tau() * bump(d.tau(t), 0, eps);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 8; ++j)
        for (int si = 0; si < 2; ++si)
          for (int t = 0; t < 512; ++t)
            d.at(i, j, si, t) = Mat2::Identity() * (bump(d.tau(t), 0, eps) / mass / vol.sqrt_gF(d.u(i), d.v(j)));
    return d;
  };
  const double e1 = sup_distance(convolve(k1, delta(0.04), vol), k1);
  const double e2 = sup_distance(convolve(k1, delta(0.02), vol), k1);
  CHECK(e2 < e1);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("convolution: parallel kernel matches serial reference") {
  std::mt19937_64 rng(3);
  const auto m = leafwise_constant_metric(rng, 1, 2);
  const LeafVolume vol(m);
  const auto k1 = random_symbol(rng, 8, 8, 32, 1.0, 0.3);
  const auto k2 = random_symbol(rng, 8, 8, 32, 1.0, 0.3);
  CHECK(sup_distance(convolve(k1, k2, vol), convolve_serial(k1, k2, vol)) < 1e-13);
}

TEST_CASE("convolution support overflow") {
  std::mt19937_64 rng(4);
  const auto k = random_symbol(rng, 4, 4, 32, 1.0, 0.3, 0.5);
  CHECK_THROWS_AS(convolve(k, k, LeafVolume(flat_metric())), SupportOverflow);
  const auto g = random_symbol(rng, 4, 4, 32, 1.0, 0.3);
  CHECK_THROWS_AS(convolve(g, HomogeneousSymbol(0, 4, 4, 16, 1.0), LeafVolume(flat_metric())), GridMismatch);
}

TEST_CASE("involution") {
  SUBCASE("fixed point") {
    const auto k = HomogeneousSymbol::from_function(0, 4, 4, 32, 1.0, [](double, double, double, double t) {
      Mat2 m;
      m << 2.0, cd(0.5, 1.0), cd(0.5, -1.0), -1.0;
      return Mat2(m * bump(t, 0, 0.6));
    });
    CHECK(sup_distance(involution(k, 0.7), k) < 1e-15);
  }
  SUBCASE("(k*)* = k") {
    std::mt19937_64 rng(5);
    const auto k = random_symbol(rng, 16, 16, 64, 1.0, 0.8);
    const double th = std::sqrt(3.0);
    CHECK(sup_distance(involution(involution(k, th), th), k) <= 1e-12);
  }
  SUBCASE("anti-automorphism") {
    std::mt19937_64 rng(6);
    const auto m = leafwise_constant_metric(rng, 1, 2);
    const LeafVolume vol(m);
    const auto k1 = random_symbol(rng, 32, 32, 64, 1.0, 0.4);
    const auto k2 = random_symbol(rng, 32, 32, 64, 1.0, 0.4);
    const double th = m.theta.value();
    const auto lhs = involution(convolve(k1, k2, vol), th);
    const auto rhs = convolve(involution(k2, th), involution(k1, th), vol);
    CHECK(sup_distance(lhs, rhs) <= 1e-6);
  }
}

TEST_CASE("associativity") {
  std::mt19937_64 rng(7);
  const auto m = leafwise_constant_metric(rng, 1, 2);
  const LeafVolume vol(m);
  auto residual = [&](int nt) {
    std::mt19937_64 r2(70);
    const auto a = random_symbol(r2, 32, 32, nt, 1.2, 0.3);
    const auto b = random_symbol(r2, 32, 32, nt, 1.2, 0.3);
    const auto c = random_symbol(r2, 32, 32, nt, 1.2, 0.3);
    return sup_distance(convolve(convolve(a, b, vol), c, vol), convolve(a, convolve(b, c, vol), vol));
  };
  const double r1 = residual(48), r2 = residual(96);
  MESSAGE("associativity residual " << r1 << " -> " << r2);
  // The τ sums are exactly associative on the grid; what remains is (u,v)
  // interpolation of products. The bound halves with the τ grid.
  CHECK(r1 <= 1e-6);
  CHECK(r2 <= 0.5e-6);
}

TEST_CASE("transport, flat metric") {
  const auto f = certified(flat_metric());
  const auto k0 = HomogeneousSymbol::from_function(0, 16, 16, 32, 1.0, [](double, double v, double, double t) {
    return Mat2(Mat2::Identity() * (std::cos(kTwoPi * v) * bump(t, 0, 0.5)));
  });
  CHECK(sup_distance(transport(k0, f, 0.0, 1e-2), k0) == 0.0);
  const double t = 0.3;
  const auto kt = transport(k0, f, t, 1e-2);
  const auto expect = HomogeneousSymbol::from_function(0, 16, 16, 32, 1.0, [&](double, double v, double s, double tau) {
    return Mat2(Mat2::Identity() * (std::cos(kTwoPi * (v + s * t)) * bump(tau, 0, 0.5)));
  });
  CHECK(sup_distance(kt, expect) < 2e-3);  // bicubic interpolation error at off-node shift
  // node-aligned shift: isometry up to rounding
  const auto k4 = transport(k0, f, 0.25, 1e-2);
  CHECK(std::abs(sup_norm(k4) - sup_norm(k0)) <= 1e-10);
}

TEST_CASE("transport: sign slices do not mix; parallel equals serial") {
  const auto m = sin_v_metric();
  const auto f = certified(m);
  std::mt19937_64 rng(8);
  auto k0 = random_symbol(rng, 8, 16, 32, 1.0, 0.5);
  auto k1 = k0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 16; ++j)
      for (int t = 0; t < 32; ++t) k1.at(i, j, 1, t) *= 3.0;
  const auto a = transport(k0, f, 0.4, 1e-2), b = transport(k1, f, 0.4, 1e-2);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 16; ++j)
      for (int t = 0; t < 32; ++t) CHECK((a.at(i, j, 0, t) - b.at(i, j, 0, t)).norm() == 0.0);
  CHECK(sup_distance(a, transport_serial(k0, f, 0.4, 1e-2)) == 0.0);
}

TEST_CASE("transport group law") {
  const auto m = sin_v_metric();
  const auto f = certified(m);
  const auto k0 = HomogeneousSymbol::from_function(0, 16, 64, 32, 1.0, [](double u, double v, double s, double t) {
    return Mat2(Mat2::Identity() * ((1.0 + 0.5 * s * std::sin(kTwoPi * v) + 0.3 * std::cos(kTwoPi * u)) * bump(t, 0, 0.5)));
  });
  const auto twice = transport(transport(k0, f, 0.25, 1e-2), f, 0.25, 1e-2);
  const auto once = transport(k0, f, 0.5, 1e-2);
  CHECK(sup_distance(twice, once) <= 1e-5);
}

TEST_CASE("transport guards the τ buffer") {
  const auto f = certified(flat_metric());
  const auto edge = HomogeneousSymbol::from_function(0, 4, 4, 32, 1.0, [](double, double, double, double t) {
    return Mat2(Mat2::Identity() * bump(t, 0.85, 0.1));
  });
  CHECK_THROWS_AS(transport(edge, f, 0.1, 1e-2), CharacteristicEscape);
}

TEST_CASE("transport vs finite-difference PDE oracle") {
  SUBCASE("a = 1 + ½ sin 2πv, 16×16×2×32, t = 0.5") {
    const auto m = sin_v_metric();
    const auto f = certified(m);
    auto g0 = [](double u, double v, double s, double t) {
      return cd(std::cos(kTwoPi * v) + 0.5 * s * std::sin(kTwoPi * (u + v)), 0.2) * bump(t, 0, 0.6);
    };
    const auto k0 = HomogeneousSymbol::from_function(0, 16, 16, 32, 1.0, [&](double u, double v, double s, double t) {
      return Mat2(Mat2::Identity() * g0(u, v, s, t));
    });
    const auto kt = transport(k0, f, 0.5, 1e-2);
    // Richardson extrapolation in v of the second-order oracle
    oracle::TransportPde coarse(m, {16, 128, 32, 1.0}, 0), fine(m, {16, 256, 32, 1.0}, 0);
    const auto a = coarse.solve(g0, 0.5), b = fine.solve(g0, 0.5);
    double worst = 0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        for (int si = 0; si < 2; ++si)
          for (int t = 0; t < 32; ++t) {
            const cd rich = (4.0 * b[fine.idx(i, 16 * j, si, t)] - a[coarse.idx(i, 8 * j, si, t)]) / 3.0;
            worst = std::max(worst, std::abs(kt.at(i, j, si, t)(0, 0) - rich));
          }
    MESSAGE("sin-v oracle discrepancy " << worst);
    CHECK(worst <= 1e-3);
  }
  SUBCASE("degree 1, c = 1 + 0.3 cos 2πv (a_H varies, momentum factor active)") {
    MetricCoeffs m{TrigPoly::constant(1), TrigPoly::constant(0),
                   TrigPoly::constant(1) + TrigPoly::cosine(0, 1, 0.3), Slope::rational(0, 1)};
    const auto f = certified(m);
    auto g0 = [](double, double v, double s, double t) {
      return cd(1.0 + 0.5 * std::cos(kTwoPi * v), 0.3 * s) * bump(t, 0.1, 0.5);
    };
    auto k0 = HomogeneousSymbol::from_function(1, 8, 32, 32, 1.0, [&](double u, double v, double s, double t) {
      return Mat2(Mat2::Identity() * g0(u, v, s, t));
    });
    const auto kt = transport(k0, f, 0.5, 1e-2);
    oracle::TransportPde coarse(m, {8, 128, 32, 1.0}, 1), fine(m, {8, 256, 32, 1.0}, 1);
    const auto a = coarse.solve(g0, 0.5), b = fine.solve(g0, 0.5);
    double worst = 0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 32; ++j)
        for (int si = 0; si < 2; ++si)
          for (int t = 0; t < 32; ++t) {
            const cd rich = (4.0 * b[fine.idx(i, 8 * j, si, t)] - a[coarse.idx(i, 4 * j, si, t)]) / 3.0;
            worst = std::max(worst, std::abs(kt.at(i, j, si, t)(0, 0) - rich));
          }
    MESSAGE("degree-1 oracle discrepancy " << worst);
    CHECK(worst <= 1e-3);
  }
}
