#include "folix/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "folix/errors.hpp"
#include "folix/spectral_data.hpp"

namespace folix {

using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Hermitian eigendecomposition (ascending), overwriting a with eigenvectors.
Eigen::VectorXd zheevd(Eigen::MatrixXcd& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw EigSolverFailure("zheevd failed, info = " + std::to_string(info));
  return w;
}

Eigen::MatrixXcd gather(const KernelOperator& K, int b0, int nb) {
  const int bd = K.basis().block_dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nb * bd, nb * bd);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b)
      if (const auto* blk = K.block(b0 + a, b0 + b)) m.block(a * bd, b * bd, bd, bd) = *blk;
  return m;
}

void scatter(KernelOperator& K, int b0, int nb, const Eigen::MatrixXcd& m) {
  const int bd = K.basis().block_dim();
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) {
      auto blk = m.block(a * bd, b * bd, bd, bd);
      if (blk.cwiseAbs().maxCoeff() > 0.0) K.block_ref(b0 + a, b0 + b) = blk;
    }
}

struct SectorResult {
  DiracMatrix::Sector sector;
  double hermiticity = 0.0;
};

SectorResult solve_sector(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& W, int b0, int nb) {
  Eigen::LLT<Eigen::MatrixXcd> llt(W);
  if (llt.info() != Eigen::Success) throw EigSolverFailure("Gram matrix not positive definite");
  const Eigen::MatrixXcd X = llt.matrixL().solve(H);
  Eigen::MatrixXcd S = llt.matrixL().solve(X.adjoint()).adjoint();
  SectorResult r;
  r.hermiticity = (S - S.adjoint()).cwiseAbs().maxCoeff();
  S = 0.5 * (S + S.adjoint()).eval();
  r.sector.lambda = zheevd(S);
  r.sector.V = llt.matrixU().solve(S);
  r.sector.Vinv = S.adjoint() * llt.matrixU();
  r.sector.block0 = b0;
  r.sector.nblocks = nb;
  return r;
}

Eigen::MatrixXcd sector_function(const DiracMatrix::Sector& s, const std::function<cd(double)>& f) {
  Eigen::VectorXcd d(s.lambda.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(s.lambda(i));
  return s.V * d.asDiagonal() * s.Vinv;
}

}  // namespace

DiracMatrix assemble_dirac(const MetricCoeffs& metric, ModeBasis basis, bool allow_fast_path) {
  validate_metric(metric);
  const double th = metric.theta.value();
  // √det g · e_H = (−(b+cθ), a+bθ)/√g_F, and the weight √det g.
  auto fields = resolve_fields(metric, 3, [&](double u, double v, double* out) {
    const auto [a, b, c] = eval_metric(metric, u, v);
    const double sg = std::sqrt(a + 2 * b * th + c * th * th);
    out[0] = -(b + c * th) / sg;
    out[1] = (a + b * th) / sg;
    out[2] = std::sqrt(a * c - b * b);
  });
  const auto& al = fields.coeffs[0];
  const auto& be = fields.coeffs[1];
  const auto& w = fields.coeffs[2];

  DiracMatrix D;
  D.basis = basis;
  D.fast_path = allow_fast_path && metric_u_independent(metric);
  D.H = KernelOperator(basis);
  D.W = KernelOperator(basis);
  const int Hu = basis.half_u, Hv = basis.half_v;
  // Weighted form of e_H − ½F is skew: ⟨e_M, (e_H − ½F) e_m⟩ =
  // πi[(√det g e_H^u)^(M−m)(M+m) + (√det g e_H^v)^(M−m)(N+n)].
  for (int M = -Hu; M <= Hu; ++M)
    for (int m = -Hu; m <= Hu; ++m) {
      if (std::abs(M - m) > std::max(al.half_u(), w.half_u())) continue;
      auto& hb = D.H.block_ref(basis.block_of(M), basis.block_of(m));
      auto& wb = D.W.block_ref(basis.block_of(M), basis.block_of(m));
      for (int N = -Hv; N <= Hv; ++N)
        for (int n = -Hv; n <= Hv; ++n) {
          const cd Z = cd(0.0, kPi) * (al.get(M - m, N - n) * static_cast<double>(M + m) +
                                       be.get(M - m, N - n) * static_cast<double>(N + n));
          hb(basis.in_block(N, 0), basis.in_block(n, 1)) = -Z;
          hb(basis.in_block(N, 1), basis.in_block(n, 0)) = Z;
          const cd g = w.get(M - m, N - n);
          wb(basis.in_block(N, 0), basis.in_block(n, 0)) = g;
          wb(basis.in_block(N, 1), basis.in_block(n, 1)) = g;
        }
    }
  D.H.prune();
  D.W.prune();
  D.weighted_hermiticity = max_abs_diff(D.H, D.H.adjoint());

  if (D.fast_path) {
    const int nb = basis.modes_u();
    std::vector<SectorResult> res(nb);
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < nb; ++b) {
      try {
        const auto* hb = D.H.block(b, b);
        const auto* wb = D.W.block(b, b);
        const Eigen::MatrixXcd Hm = hb ? *hb : Eigen::MatrixXcd::Zero(basis.block_dim(), basis.block_dim());
        res[b] = solve_sector(Hm, *wb, b, 1);
      } catch (const std::exception& e) {
#pragma omp critical
        failure = e.what();
      }
    }
    if (!failure.empty()) throw EigSolverFailure(failure);
    for (auto& r : res) {
      D.hermiticity = std::max(D.hermiticity, r.hermiticity);
      D.sectors.push_back(std::move(r.sector));
    }
  } else {
    const int nb = basis.modes_u();
    auto r = solve_sector(gather(D.H, 0, nb), gather(D.W, 0, nb), 0, nb);
    D.hermiticity = r.hermiticity;
    D.sectors.push_back(std::move(r.sector));
  }
  const Eigen::VectorXd ev = D.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    D.spectral_symmetry = std::max(D.spectral_symmetry, std::abs(ev(i) + ev(ev.size() - 1 - i)));
  return D;
}

Eigen::VectorXd DiracMatrix::eigenvalues() const {
  std::vector<double> all;
  for (const auto& s : sectors) all.insert(all.end(), s.lambda.data(), s.lambda.data() + s.lambda.size());
  std::sort(all.begin(), all.end());
  return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

KernelOperator DiracMatrix::function(const std::function<cd(double)>& f) const {
  KernelOperator out(basis);
  for (const auto& s : sectors) scatter(out, s.block0, s.nblocks, sector_function(s, f));
  return out;
}

KernelOperator DiracMatrix::D() const {
  return function([](double l) { return cd(l); });
}

KernelOperator abs_dirac(const DiracMatrix& D) {
  return D.function([](double l) { return cd(std::sqrt(l * l + 1.0)); });
}

Propagator propagate(const DiracMatrix& D, double t) {
  return {t, D.function([t](double l) { return std::polar(1.0, t * std::sqrt(l * l + 1.0)); })};
}

KernelOperator heisenberg(const KernelOperator& K, const DiracMatrix& D, double t) {
  if (K.basis() != D.basis) throw GridMismatch("heisenberg: operator and Dirac bases differ");
  auto fwd = [t](double l) { return std::polar(1.0, t * std::sqrt(l * l + 1.0)); };
  auto bwd = [t](double l) { return std::polar(1.0, -t * std::sqrt(l * l + 1.0)); };
  KernelOperator out(D.basis);
  if (!D.fast_path) {
    const auto& s = D.sectors.front();
    const Eigen::MatrixXcd k = gather(K, 0, D.basis.modes_u());
    scatter(out, 0, s.nblocks, sector_function(s, fwd) * k * sector_function(s, bwd));
    return out;
  }
  const int nb = D.basis.modes_u();
  std::vector<Eigen::MatrixXcd> Uf(nb), Ub(nb);
  std::vector<char> needed(nb, 0);
  for (const auto& kv : K.blocks()) needed[kv.first.first] = needed[kv.first.second] = 1;
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < nb; ++b)
    if (needed[b]) {
      Uf[b] = sector_function(D.sectors[b], fwd);
      Ub[b] = sector_function(D.sectors[b], bwd);
    }
  std::vector<std::pair<std::pair<int, int>, const KernelOperator::Block*>> work;
  for (const auto& kv : K.blocks()) work.push_back({kv.first, &kv.second});
  std::vector<KernelOperator::Block> res(work.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < work.size(); ++i) {
    const auto [a, b] = work[i].first;
    res[i] = Uf[a] * *work[i].second * Ub[b];
  }
  for (std::size_t i = 0; i < work.size(); ++i) out.block_ref(work[i].first.first, work[i].first.second) = std::move(res[i]);
  return out;
}

}  // namespace folix
