#include "folix/egorov.hpp"

#include <cmath>
#include <random>

#include "folix/errors.hpp"
#include "folix/fourier.hpp"

namespace folix {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<char> band_mask(const ModeBasis& B, const BandSpec& band) {
  std::vector<char> mask(B.block_dim(), 0);
  for (int n = -B.half_v; n <= B.half_v; ++n)
    if (std::abs(n) >= band.n_lo && std::abs(n) <= band.n_hi)
      mask[B.in_block(n, 0)] = mask[B.in_block(n, 1)] = 1;
  return mask;
}

int mod(int a, int n) { return ((a % n) + n) % n; }

}  // namespace

void check_band(const BandSpec& band, const ModeBasis& basis) {
  if (band.n_lo < 1 || band.n_hi < band.n_lo || band.n_hi > basis.half_v)
    throw BandUnresolved("band [" + std::to_string(band.n_lo) + "," + std::to_string(band.n_hi) +
                         "] not resolved by |n| <= " + std::to_string(basis.half_v));
}

KernelOperator compress(const KernelOperator& K, const BandSpec& band) {
  const auto& B = K.basis();
  const auto mask = band_mask(B, band);
  KernelOperator out(B);
  for (const auto& [ab, blk] : K.blocks()) {
    KernelOperator::Block c = blk;
    for (int r = 0; r < c.rows(); ++r)
      for (int s = 0; s < c.cols(); ++s)
        if (!mask[r] || !mask[s]) c(r, s) = 0.0;
    out.block_ref(ab.first, ab.second) = std::move(c);
  }
  out.prune();
  return out;
}

double operator_norm(const KernelOperator& K, double tol, int max_iter) {
  if (K.blocks().empty()) return 0.0;
  const KernelOperator Kh = K.adjoint();
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXcd x(K.basis().dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cd(N(rng), N(rng));
  x.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXcd y = K.apply(x);
    const double s = y.norm();
    if (s == 0.0) return 0.0;
    const bool done = it > 0 && std::abs(s - sigma) <= tol * s;
    sigma = s;
    if (done) break;
    x = Kh.apply(y);
    const double nx = x.norm();
    if (nx == 0.0) break;
    x /= nx;
  }
  return sigma;
}

HomogeneousSymbol extract_band_symbol(const KernelOperator& K, const BandSpec& band,
                                      const MetricCoeffs& metric, const SymbolGrid& grid) {
  const auto& B = K.basis();
  check_band(band, B);
  if (grid.T_max > 0.5)
    throw BandUnresolved("extraction needs T_max <= 1/2, got " + std::to_string(grid.T_max));
  const double th = metric.theta.value();
  // The wave e_mn has leafwise frequency m + θn; the m range has to reach
  // −θn with room for the leafwise profile on either side.
  if (std::abs(th) * band.n_hi > 0.5 * B.half_u)
    throw BandUnresolved("leafwise frequencies θn reach " + std::to_string(std::abs(th) * band.n_hi) +
                         ", beyond half of |m| <= " + std::to_string(B.half_u));
  const int nu = grid.n_u, nv = grid.n_v, nt = grid.n_tau;
  HomogeneousSymbol out(0, nu, nv, nt, grid.T_max);
  const LeafVolume vol(metric);
  const int Mu = B.modes_u();
  const std::size_t npts = static_cast<std::size_t>(nu) * nv;

  // e^{−2πim(u_i − τ_k)}
  std::vector<cd> ph(static_cast<std::size_t>(nu) * nt * Mu);
  for (int i = 0; i < nu; ++i)
    for (int k = 0; k < nt; ++k)
      for (int m = -B.half_u; m <= B.half_u; ++m)
        ph[(static_cast<std::size_t>(i) * nt + k) * Mu + m + B.half_u] =
            std::polar(1.0, -kTwoPi * m * (out.u(i) - out.tau(k)));

  for (int si = 0; si < 2; ++si) {
    const int sgn = si == 0 ? 1 : -1;
    std::vector<cd> acc(npts * nt * 4, 0.0);
    int count = 0;
    for (int an = band.n_lo; an <= band.n_hi; ++an) {
      const int n = sgn * an;
      ++count;
      // Z[(m, β, α)] = (K e_{m,n,α})_β on the grid.
      std::vector<std::vector<cd>> Z(static_cast<std::size_t>(Mu) * 4);
#pragma omp parallel for schedule(static)
      for (int mi = 0; mi < Mu; ++mi) {
        const int m = mi - B.half_u;
        for (int be = 0; be < 2; ++be)
          for (int al = 0; al < 2; ++al) {
            auto& z = Z[(static_cast<std::size_t>(mi) * 2 + be) * 2 + al];
            z.assign(npts, 0.0);
            bool any = false;
            for (int Mb = 0; Mb < Mu; ++Mb) {
              const auto* blk = K.block(Mb, B.block_of(m));
              if (!blk) continue;
              const int M = Mb - B.half_u;
              for (int N = -B.half_v; N <= B.half_v; ++N) {
                const cd c = (*blk)(B.in_block(N, be), B.in_block(n, al));
                if (c == 0.0) continue;
                z[static_cast<std::size_t>(mod(M, nu)) * nv + mod(N, nv)] += c;
                any = true;
              }
            }
            if (any)
              fourier::dft_2d(z, nu, nv, +1);
            else
              z.clear();
          }
      }
#pragma omp parallel for schedule(static)
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
          const std::size_t p = static_cast<std::size_t>(i) * nv + j;
          for (int k = 0; k < nt; ++k) {
            const cd pre = std::polar(1.0, kTwoPi * (-n * out.v(j) + th * n * out.tau(k)));
            const cd* phk = &ph[(static_cast<std::size_t>(i) * nt + k) * Mu];
            for (int e = 0; e < 4; ++e) {
              cd s = 0.0;
              for (int mi = 0; mi < Mu; ++mi) {
                const auto& z = Z[static_cast<std::size_t>(mi) * 4 + e];
                if (!z.empty()) s += phk[mi] * z[p];
              }
              acc[(p * nt + k) * 4 + e] += pre * s;
            }
          }
        }
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j)
        for (int k = 0; k < nt; ++k) {
          const double tk = out.tau(k);
          const double w = vol.sqrt_gF(out.u(i) - tk, out.v(j) - th * tk);
          const std::size_t p = (static_cast<std::size_t>(i) * nv + j) * nt + k;
          auto m = out.at(i, j, si, k);
          for (int e = 0; e < 4; ++e) m(e / 2, e % 2) = acc[p * 4 + e] / (count * w);
        }
  }
  return out;
}

EgorovPair egorov_operators(const KernelSymbol& k0, const MetricCoeffs& metric,
                            const DiracMatrix& D, double t, const EgorovOptions& opts) {
  const TransverseFlow flow(metric, is_bundle_like(metric, opts.bundle_tol));
  EgorovPair p;
  p.t = t;
  const KernelOperator K0 = quantize(k0, metric, D.basis, opts.quad, &p.quant_initial);
  p.A = heisenberg(K0, D, t);
  const KernelSymbol kt{transport(k0.base, flow, t, opts.dt), k0.R, k0.eta0};
  p.B = quantize(kt, metric, D.basis, opts.quad, &p.quant_transported);
  return p;
}

namespace {

void fill_norms(const EgorovPair& pair, EgorovReport& r) {
  check_band(r.band, pair.A.basis());
  r.t = pair.t;
  r.residual_norm = operator_norm(compress(pair.A - pair.B, r.band));
  r.reference_norm = operator_norm(compress(pair.A, r.band));
  r.relative_residual = r.reference_norm > 0.0 ? r.residual_norm / r.reference_norm
                                               : (r.residual_norm > 0.0 ? INFINITY : 0.0);
}

}  // namespace

EgorovReport band_report(const EgorovPair& pair, const BandSpec& band) {
  EgorovReport r;
  r.band = band;
  fill_norms(pair, r);
  const BandSpec twice{2 * band.n_lo, 2 * band.n_hi};
  if (twice.n_hi <= pair.A.basis().half_v) {
    EgorovReport r2;
    r2.band = twice;
    fill_norms(pair, r2);
    r.decay_ratio = r2.relative_residual / r.relative_residual;
  }
  return r;
}

EgorovReport egorov_residual(const KernelSymbol& k0, const MetricCoeffs& metric,
                             const DiracMatrix& D, double t, const BandSpec& band,
                             const EgorovOptions& opts) {
  check_band(band, D.basis);
  return band_report(egorov_operators(k0, metric, D, t, opts), band);
}

DecayStudy decay_study(const EgorovPair& pair, const std::vector<BandSpec>& bands,
                       double threshold, const EgorovPair* refined, double refine_tol) {
  for (std::size_t i = 0; i < bands.size(); ++i) {
    check_band(bands[i], pair.A.basis());
    if (i > 0 && (bands[i].n_lo <= bands[i - 1].n_lo || bands[i].n_hi <= bands[i - 1].n_hi))
      throw BandUnresolved("decay study bands must be strictly increasing");
  }
  DecayStudy st;
  st.verdict.threshold = threshold;
  for (const auto& b : bands) {
    EgorovReport r;
    r.band = b;
    fill_norms(pair, r);
    if (refined) {
      EgorovReport rr;
      rr.band = b;
      fill_norms(*refined, rr);
      r.refined_relative = rr.relative_residual;
      r.resolved = std::abs(r.relative_residual - rr.relative_residual) <=
                       refine_tol * rr.relative_residual ||
                   (r.relative_residual <= kResidualFloor && rr.relative_residual <= kResidualFloor);
    }
    st.reports.push_back(r);
  }
  for (std::size_t i = 0; i + 1 < st.reports.size(); ++i) {
    auto& r = st.reports[i];
    const auto& nx = st.reports[i + 1];
    r.decay_ratio = nx.relative_residual / r.relative_residual;
    if (!r.resolved || !nx.resolved) continue;
    st.verdict.evaluated = true;
    ++st.verdict.pairs;
    if (r.relative_residual <= kResidualFloor && nx.relative_residual <= kResidualFloor) continue;
    st.verdict.worst_ratio = std::max(st.verdict.worst_ratio, r.decay_ratio);
    if (!(r.decay_ratio <= threshold)) st.verdict.pass = false;
  }
  return st;
}

DecayStudy decay_study(const KernelSymbol& k0, const MetricCoeffs& metric, const DiracMatrix& D,
                       double t, const std::vector<BandSpec>& bands, double threshold,
                       const EgorovOptions& opts) {
  for (const auto& b : bands) check_band(b, D.basis);
  const EgorovPair pair = egorov_operators(k0, metric, D, t, opts);
  if (!opts.certify_refinement) return decay_study(pair, bands, threshold);
  const ModeBasis fine{D.basis.half_u, 2 * D.basis.half_v};
  const EgorovPair refined = egorov_operators(k0, metric, assemble_dirac(metric, fine), t, opts);
  return decay_study(pair, bands, threshold, &refined, opts.refine_tol);
}

}  // namespace folix
