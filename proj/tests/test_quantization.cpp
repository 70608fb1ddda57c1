#include <doctest.h>

#include <cmath>
#include <random>

#include "folix/errors.hpp"
#include "folix/quantization.hpp"
#include "folix/spectral_data.hpp"
#include "test_support.hpp"

using namespace folix;
using namespace folix::testing;
using cd = std::complex<double>;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// τ-profile with h·Σρ(τ_k) = 1 on the grid.
std::vector<double> unit_profile(const HomogeneousSymbol& k, double r) {
  std::vector<double> rho(k.n_tau());
  double s = 0.0;
  for (int i = 0; i < k.n_tau(); ++i) s += (rho[i] = bump(k.tau(i), 0.0, r));
  for (auto& x : rho) x /= s * k.h_tau();
  return rho;
}

// g(v)·𝟙·ρ(τ) on the grid.
HomogeneousSymbol separable(int nu, int nv, int nt, double T, double r,
                            const std::function<double(double)>& g) {
  HomogeneousSymbol k(0, nu, nv, nt, T);
  const auto rho = unit_profile(k, r);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      for (int si = 0; si < 2; ++si)
        for (int t = 0; t < nt; ++t) k.at(i, j, si, t) = g(k.v(j)) * rho[t] * Mat2::Identity();
  return k;
}

HomogeneousSymbol random_symbol(std::mt19937_64& rng, int nu, int nv, int nt, double T, double r) {
  std::uniform_real_distribution<double> U(-1, 1);
  cd c[2][4][3];
  for (auto& a : c)
    for (auto& b : a)
      for (auto& x : b) x = cd(U(rng), U(rng));
  return HomogeneousSymbol::from_function(0, nu, nv, nt, T, [&](double u, double v, double s, double tau) {
    const int si = s > 0 ? 0 : 1;
    Mat2 m;
    for (int e = 0; e < 4; ++e)
      m(e / 2, e % 2) = (c[si][e][0] + c[si][e][1] * std::cos(kTwoPi * (u + v)) +
                         c[si][e][2] * std::sin(kTwoPi * v) * tau) *
                        bump(tau, 0.05, r);
    return m;
  });
}

// Independent envelope: φ̂ by the trapezoid rule on [0, R] (spectrally
// accurate for the flat-ended bump), η by the same
// trapezoid grid the quantizer uses.
double envelope_oracle(int si, int Q, double R, double eta0, double eta_max, int n_eta) {
  const int nw = 1000;
  const double hw = R / nw;
  auto phi_hat = [&](double xi) {
    double s = 0.5;  // φ(0)/2; φ vanishes to all orders at R
    for (int k = 1; k < nw; ++k) s += std::cos(k * hw * xi) * transverse_cutoff(k * hw, R);
    return 2.0 * s * hw;
  };
  const double de = 2 * eta_max / (n_eta - 1);
  double acc = 0.0;
  for (int i = 0; i < n_eta; ++i) {
    const double eta = -eta_max + i * de;
    if ((si == 0 && eta <= 0) || (si == 1 && eta >= 0)) continue;
    const double c = (i == 0 || i == n_eta - 1) ? 0.5 : 1.0;
    acc += c * frequency_cutoff(eta, eta0) * phi_hat(eta - kTwoPi * Q);
  }
  return acc * de / kTwoPi;
}

// Submatrix on the modes lo <= |n| <= hi.
Eigen::MatrixXcd band(const KernelOperator& K, int lo, int hi) {
  const auto& B = K.basis();
  std::vector<int> idx;
  for (int m = -B.half_u; m <= B.half_u; ++m)
    for (int n = -B.half_v; n <= B.half_v; ++n)
      if (std::abs(n) >= lo && std::abs(n) <= hi)
        for (int f = 0; f < 2; ++f) idx.push_back(B.index(m, n, f));
  const Eigen::MatrixXcd d = K.to_dense();
  Eigen::MatrixXcd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = d(idx[i], idx[j]);
  return out;
}
// Largest singular value.
double opnorm(const Eigen::MatrixXcd& m) {
  return Eigen::BDCSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

}  // namespace

TEST_CASE("cutoff profiles") {
  CHECK(transverse_cutoff(0.0, 0.4) == 1.0);
  CHECK(transverse_cutoff(0.4, 0.4) == 0.0);
  CHECK(transverse_cutoff(-0.5, 0.4) == 0.0);
  CHECK(transverse_cutoff(0.2, 0.4) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)));
  CHECK(frequency_cutoff(3.0, kTwoPi) == 0.0);
  CHECK(frequency_cutoff(-kTwoPi, kTwoPi) == 0.0);
  CHECK(frequency_cutoff(2 * kTwoPi, kTwoPi) == 1.0);
  CHECK(frequency_cutoff(-1.5 * kTwoPi, kTwoPi) == doctest::Approx(0.5));
}

TEST_CASE("mode basis layout") {
  const auto B = ModeBasis::for_grid(8, 6);
  CHECK(B.modes_u() == 9);
  CHECK(B.modes_v() == 7);
  CHECK(B.dim() == 2 * 9 * 7);
  CHECK(B.index(-4, -3, 0) == 0);
  CHECK(B.index(4, 3, 1) == B.dim() - 1);
  CHECK(B.index(0, 0, 1) == B.block_of(0) * B.block_dim() + B.in_block(0, 1));
}

TEST_CASE("operator algebra on blocks matches dense") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  const auto B = ModeBasis::for_grid(4, 4);
  auto rnd = [&] {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(B.dim(), B.dim());
    for (int i = 0; i < B.dim(); ++i)
      for (int j = 0; j < B.dim(); ++j)
        if ((i / B.block_dim() + j / B.block_dim()) % 3 != 1) m(i, j) = cd(U(rng), U(rng));
    return m;
  };
  const Eigen::MatrixXcd a = rnd(), b = rnd();
  const auto A = KernelOperator::from_dense(B, a), Bo = KernelOperator::from_dense(B, b);
  CHECK(((A * Bo).to_dense() - a * b).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(((A + Bo).to_dense() - (a + b)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((A.adjoint().to_dense() - a.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXcd x = Eigen::VectorXcd::Random(B.dim());
  CHECK((A.apply(x) - a * x).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((KernelOperator::identity(B).to_dense() - Eigen::MatrixXcd::Identity(B.dim(), B.dim()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK_THROWS_AS(A + KernelOperator(ModeBasis::for_grid(4, 6)), GridMismatch);
}

TEST_CASE("weight matrix and weighted adjoint") {
  const auto B = ModeBasis::for_grid(4, 6);
  const auto W0 = weight_matrix(flat_metric(), B);
  CHECK(W0.block_diagonal());
  CHECK((W0.to_dense() - Eigen::MatrixXcd::Identity(B.dim(), B.dim())).cwiseAbs().maxCoeff() < 1e-14);

  std::mt19937_64 rng(5);
  for (const auto& metric : {sin_v_metric(), random_metric(rng, Slope::rational(1, 2))}) {
    const auto W = weight_matrix(metric, B);
    CHECK(W.block_diagonal() == metric_u_independent(metric));
    const Eigen::MatrixXcd w = W.to_dense();
    CHECK((w - w.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Random(B.dim(), B.dim());
    const auto K = KernelOperator::from_dense(B, k);
    const auto Ks = weighted_adjoint(K, W);
    Eigen::VectorXcd f = Eigen::VectorXcd::Random(B.dim()), g = Eigen::VectorXcd::Random(B.dim());
    const cd lhs = f.dot(w * (k * g));
    const cd rhs = Ks.apply(f).dot(w * g);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
  }
}

TEST_CASE("zero symbol quantizes to the zero matrix") {
  KernelSymbol ks{HomogeneousSymbol(0, 8, 8, 16, 0.5)};
  const auto K = quantize(ks, flat_metric(), ModeBasis::for_grid(8, 8));
  CHECK(K.blocks().empty());
  CHECK(K.max_abs() == 0.0);
}

TEST_CASE("flat separable symbol: matrix elements are ĝ(n'-n)·envelope") {
  // g(v) = cos 2πv, ρ narrow; on mode (m,n) the operator multiplies by
  // ĝ(n'−n)·(E_+(n) + E_−(n))·ρ̂(m).
  const int nu = 8, nv = 32, nt = 32;
  const double T = 0.5;
  KernelSymbol ks{separable(nu, nv, nt, T, 0.3, [](double v) { return std::cos(kTwoPi * v); })};
  const auto B = ModeBasis::for_grid(nu, nv);
  QuantizationReport rep;
  const auto K = quantize(ks, flat_metric(), B, {0.0, 3201}, &rep);
  CHECK(rep.entry_change <= 1e-6);
  CHECK(K.block_diagonal());

  const auto rho = unit_profile(ks.base, 0.3);
  auto rho_hat = [&](int m) {
    cd s = 0.0;
    for (int k = 0; k < nt; ++k) s += rho[k] * std::polar(1.0, -kTwoPi * ks.base.tau(k) * m);
    return s * ks.base.h_tau();
  };
  std::vector<double> envs;
  for (int n = -B.half_v; n <= B.half_v; ++n)
    envs.push_back(envelope_oracle(0, n, ks.R, ks.eta0, rep.eta_max, rep.n_eta) +
                   envelope_oracle(1, n, ks.R, ks.eta0, rep.eta_max, rep.n_eta));
  double worst = 0.0, off = 0.0;
  for (int m : {-4, -1, 0, 2}) {
    for (int n = -B.half_v; n <= B.half_v; ++n) {
      const double env = envs[n + B.half_v];
      for (int np = -B.half_v; np <= B.half_v; ++np) {
        const cd e = K.entry(m, np, 0, m, n, 0);
        if (std::abs(np - n) == 1)
          worst = std::max(worst, std::abs(e - 0.5 * env * rho_hat(m)));
        else
          off = std::max(off, std::abs(e));
        off = std::max(off, std::abs(K.entry(m, np, 1, m, n, 0)));
      }
    }
  }
  CHECK(worst < 1e-8);
  CHECK(off < 1e-8);
  // High modes: the envelope tends to 1.
  CHECK(envelope_oracle(0, 12, ks.R, ks.eta0, rep.eta_max, rep.n_eta) ==
        doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(envelope_oracle(1, 12, ks.R, ks.eta0, rep.eta_max, rep.n_eta)) < 1e-3);
}

TEST_CASE("parallel assembly matches the column-by-column reference") {
  std::mt19937_64 rng(11);
  for (const auto& metric : {flat_metric(Slope::real(std::sqrt(2.0))),
                             random_metric(rng, Slope::rational(1, 2), 1), sin_v_metric()}) {
    KernelSymbol ks{random_symbol(rng, 8, 8, 16, 0.5, 0.3)};
    const auto B = ModeBasis::for_grid(8, 8);
    const auto K = quantize(ks, metric, B);
    const auto Kr = quantize_serial(ks, metric, B);
    CHECK(max_abs_diff(K, Kr) <= 1e-12 * Kr.max_abs());
  }
}

TEST_CASE("degree enters through |η|^d") {
  KernelSymbol ks{separable(4, 32, 16, 0.5, 0.3, [](double) { return 1.0; })};
  ks.base.set_degree(1);
  const auto B = ModeBasis::for_grid(4, 32);
  const auto K1 = quantize(ks, flat_metric(), B);
  // On high modes the multiplier approaches 2π|n|·ρ̂(m).
  const cd e = K1.entry(0, 7, 0, 0, 7, 0);
  CHECK(std::abs(e - kTwoPi * 7.0) < 1e-2 * kTwoPi * 7.0);
}

TEST_CASE("η-quadrature certification") {
  KernelSymbol ks{separable(4, 16, 16, 0.5, 0.3, [](double v) { return 1.0 + std::sin(kTwoPi * v); })};
  const auto B = ModeBasis::for_grid(4, 16);
  QuantizationReport rep;
  quantize(ks, sin_v_metric(), B, {}, &rep);
  CHECK(rep.entry_change <= 1e-6);
  MESSAGE("certified entry change " << rep.entry_change << std::string(rep.measured ? " (measured)" : " (bound)"));
  CHECK_THROWS_AS(quantize(ks, sin_v_metric(), B, {0.0, 41}), QuadratureUnderresolved);
  CHECK_THROWS_AS(quantize(ks, sin_v_metric(), B, {10.0, 0}), QuadratureUnderresolved);
  ks.R = 0.5;
  CHECK_THROWS_AS(quantize(ks, sin_v_metric(), B), SupportViolation);
  CHECK_THROWS_AS(principal_symbol(ks, 0.0), SupportViolation);
}

TEST_CASE("principal symbol round trip") {
  std::mt19937_64 rng(17);
  for (double theta : {0.0, 0.5, std::sqrt(2.0)}) {
    KernelSymbol ks{random_symbol(rng, 8, 8, 32, 0.5, 0.4)};
    const auto sigma = principal_symbol(ks, theta);
    CHECK(sup_distance(sigma, ks.base) <= 1e-12 * sup_norm(ks.base));
  }
  KernelSymbol zero{HomogeneousSymbol(0, 4, 4, 8, 0.5)};
  CHECK(sup_norm(principal_symbol(zero, 0.3)) == 0.0);

  // Lattice translate in the first argument.
  auto f = [](double u, double v, double, double tau) {
    return Mat2::Identity() * cd(std::cos(kTwoPi * (u - 2 * v)), tau) * bump(tau, 0.0, 0.3);
  };
  KernelSymbol a{HomogeneousSymbol::from_function(0, 8, 8, 16, 0.5, f)};
  KernelSymbol b{HomogeneousSymbol::from_function(
      0, 8, 8, 16, 0.5, [&](double u, double v, double s, double t) { return f(u + 1, v - 2, s, t); })};
  CHECK(sup_distance(principal_symbol(a, 0.5), principal_symbol(b, 0.5)) < 1e-13);
}

TEST_CASE("apply on section grids") {
  const int nu = 8, nv = 16;
  KernelSymbol ks{separable(nu, nv, 16, 0.5, 0.3, [](double) { return 1.0; })};
  const auto B = ModeBasis::for_grid(nu, nv);
  QuantizationReport rep;
  const auto K = quantize(ks, flat_metric(), B, {0.0, 1601}, &rep);

  SectionGrid f(nu, nv), g(nu, nv), zero(nu, nv);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      f.at(i, j, 0) = std::polar(1.0, kTwoPi * j / nv);
      for (int c = 0; c < 2; ++c) g.at(i, j, c) = cd(U(rng), U(rng));
    }
  // Identity-like operator on e^{2πiv}: multiplier E_+(1)·ρ̂(0) = E_+(1) + E_−(1).
  const double env = envelope_oracle(0, 1, ks.R, ks.eta0, rep.eta_max, rep.n_eta) +
                     envelope_oracle(1, 1, ks.R, ks.eta0, rep.eta_max, rep.n_eta);
  const auto Kf = apply(K, f);
  double err = 0.0;
  for (std::size_t p = 0; p < f.values.size(); ++p) err = std::max(err, std::abs(Kf.values[p] - env * f.values[p]));
  CHECK(err < 1e-8);

  const auto K0 = apply(K, zero);
  for (const auto& x : K0.values) CHECK(x == cd(0.0));

  SectionGrid fg(nu, nv);
  for (std::size_t p = 0; p < fg.values.size(); ++p) fg.values[p] = f.values[p] + g.values[p];
  const auto a = apply(K, fg), b = apply(K, g);
  double lin = 0.0;
  for (std::size_t p = 0; p < fg.values.size(); ++p)
    lin = std::max(lin, std::abs(a.values[p] - Kf.values[p] - b.values[p]));
  CHECK(lin < 1e-13);

  // Round trip through coefficients, and grid mismatch.
  const auto back = from_coefficients(to_coefficients(g, B), B, nu, nv);
  for (std::size_t p = 0; p < g.values.size(); ++p) CHECK(std::abs(back.values[p] - g.values[p]) < 1e-14);
  CHECK_THROWS_AS(apply(K, SectionGrid(nu, nv + 2)), GridMismatch);
}

TEST_CASE("self-adjoint symbols give nearly self-adjoint operators on high bands") {
  std::mt19937_64 rng(23);
  const int nu = 4, nv = 64;
  auto k = random_symbol(rng, nu, nv, 32, 0.5, 0.2);
  const auto ks = k + involution(k, 0.0);
  const auto B = ModeBasis::for_grid(nu, nv);
  const auto K = quantize(KernelSymbol{ks}, flat_metric(), B);
  double prev = 1.0;
  for (auto [lo, hi] : {std::pair{4, 8}, std::pair{8, 16}, std::pair{16, 32}}) {
    const auto P = band(K, lo, hi);
    const double rel = opnorm(P - P.adjoint()) / opnorm(P);
    MESSAGE("band [" << lo << "," << hi << "] relative anti-Hermitian part " << rel);
    CHECK(rel <= prev);
    prev = rel;
  }
  CHECK(prev <= 1e-3);
}
