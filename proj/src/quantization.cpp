#include "folix/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "folix/errors.hpp"
#include "folix/fourier.hpp"
#include "folix/spectral_data.hpp"

namespace folix {

using fourier::kTwoPi;

// ---------------------------------------------------------------------------
// KernelOperator

KernelOperator KernelOperator::identity(ModeBasis basis) {
  KernelOperator k(basis);
  for (int a = 0; a < basis.modes_u(); ++a)
    k.block_ref(a, a) = Block::Identity(basis.block_dim(), basis.block_dim());
  return k;
}

KernelOperator KernelOperator::from_dense(ModeBasis basis, const Eigen::MatrixXcd& m) {
  if (m.rows() != basis.dim() || m.cols() != basis.dim())
    throw GridMismatch("from_dense: matrix size does not match basis");
  KernelOperator k(basis);
  const int bd = basis.block_dim();
  for (int a = 0; a < basis.modes_u(); ++a)
    for (int b = 0; b < basis.modes_u(); ++b) {
      auto blk = m.block(a * bd, b * bd, bd, bd);
      if (blk.cwiseAbs().maxCoeff() > 0.0) k.blocks_[{a, b}] = blk;
    }
  return k;
}

const KernelOperator::Block* KernelOperator::block(int a, int b) const {
  auto it = blocks_.find({a, b});
  return it == blocks_.end() ? nullptr : &it->second;
}

KernelOperator::Block& KernelOperator::block_ref(int a, int b) {
  auto [it, inserted] = blocks_.try_emplace({a, b});
  if (inserted) it->second = Block::Zero(basis_.block_dim(), basis_.block_dim());
  return it->second;
}

bool KernelOperator::block_diagonal() const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [](const auto& kv) { return kv.first.first == kv.first.second; });
}

std::complex<double> KernelOperator::entry(int M, int N, int beta, int m, int n, int alpha) const {
  const Block* blk = block(basis_.block_of(M), basis_.block_of(m));
  if (!blk) return 0.0;
  return (*blk)(basis_.in_block(N, beta), basis_.in_block(n, alpha));
}

Eigen::MatrixXcd KernelOperator::to_dense() const {
  const int bd = basis_.block_dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(basis_.dim(), basis_.dim());
  for (const auto& [key, blk] : blocks_) m.block(key.first * bd, key.second * bd, bd, bd) = blk;
  return m;
}

Eigen::VectorXcd KernelOperator::apply(const Eigen::VectorXcd& c) const {
  if (c.size() != basis_.dim()) throw GridMismatch("apply: vector size does not match basis");
  const int bd = basis_.block_dim();
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(c.size());
  for (const auto& [key, blk] : blocks_)
    y.segment(key.first * bd, bd).noalias() += blk * c.segment(key.second * bd, bd);
  return y;
}

KernelOperator KernelOperator::adjoint() const {
  KernelOperator k(basis_);
  for (const auto& [key, blk] : blocks_) k.blocks_[{key.second, key.first}] = blk.adjoint();
  return k;
}

double KernelOperator::max_abs() const {
  double m = 0.0;
  for (const auto& kv : blocks_) m = std::max(m, kv.second.cwiseAbs().maxCoeff());
  return m;
}

void KernelOperator::prune() {
  std::erase_if(blocks_, [](const auto& kv) { return kv.second.cwiseAbs().maxCoeff() == 0.0; });
}

KernelOperator& KernelOperator::operator+=(const KernelOperator& o) {
  if (o.basis_ != basis_) throw GridMismatch("operator sum on different bases");
  for (const auto& [key, blk] : o.blocks_) block_ref(key.first, key.second) += blk;
  return *this;
}

KernelOperator& KernelOperator::operator-=(const KernelOperator& o) {
  if (o.basis_ != basis_) throw GridMismatch("operator difference on different bases");
  for (const auto& [key, blk] : o.blocks_) block_ref(key.first, key.second) -= blk;
  return *this;
}

KernelOperator& KernelOperator::operator*=(std::complex<double> s) {
  for (auto& kv : blocks_) kv.second *= s;
  return *this;
}

KernelOperator operator+(KernelOperator a, const KernelOperator& b) { return a += b; }
KernelOperator operator-(KernelOperator a, const KernelOperator& b) { return a -= b; }
KernelOperator operator*(std::complex<double> s, KernelOperator a) { return a *= s; }

KernelOperator operator*(const KernelOperator& A, const KernelOperator& B) {
  if (A.basis() != B.basis()) throw GridMismatch("operator product on different bases");
  std::map<int, std::vector<std::pair<int, const KernelOperator::Block*>>> rows;
  for (const auto& [key, blk] : B.blocks()) rows[key.first].push_back({key.second, &blk});
  KernelOperator C(A.basis());
  for (const auto& [key, blk] : A.blocks()) {
    auto it = rows.find(key.second);
    if (it == rows.end()) continue;
    for (const auto& [c, bb] : it->second) C.block_ref(key.first, c).noalias() += blk * *bb;
  }
  return C;
}

double max_abs_diff(const KernelOperator& a, const KernelOperator& b) { return (a - b).max_abs(); }

KernelOperator weight_matrix(const MetricCoeffs& metric, ModeBasis basis) {
  validate_metric(metric);
  auto fields = resolve_fields(metric, 1, [&](double u, double v, double* out) {
    const auto [a, b, c] = eval_metric(metric, u, v);
    out[0] = std::sqrt(a * c - b * b);
  });
  const auto& w = fields.coeffs[0];
  KernelOperator W(basis);
  const int Hu = basis.half_u;
  for (int M = -Hu; M <= Hu; ++M)
    for (int m = -Hu; m <= Hu; ++m) {
      if (std::abs(M - m) > w.half_u()) continue;
      auto& blk = W.block_ref(basis.block_of(M), basis.block_of(m));
      for (int N = -basis.half_v; N <= basis.half_v; ++N)
        for (int n = -basis.half_v; n <= basis.half_v; ++n) {
          const cd c = w.get(M - m, N - n);
          for (int f = 0; f < 2; ++f) blk(basis.in_block(N, f), basis.in_block(n, f)) = c;
        }
    }
  W.prune();
  return W;
}

KernelOperator weighted_adjoint(const KernelOperator& K, const KernelOperator& W) {
  if (K.basis() != W.basis()) throw GridMismatch("weighted_adjoint: bases differ");
  KernelOperator X = K.adjoint() * W;
  if (W.block_diagonal()) {
    KernelOperator out(K.basis());
    std::map<int, Eigen::LLT<Eigen::MatrixXcd>> chol;
    for (const auto& [key, blk] : W.blocks()) chol.emplace(key.first, Eigen::LLT<Eigen::MatrixXcd>(blk));
    for (const auto& [key, blk] : X.blocks()) out.block_ref(key.first, key.second) = chol.at(key.first).solve(blk);
    return out;
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(W.to_dense());
  return KernelOperator::from_dense(K.basis(), llt.solve(X.to_dense()));
}

// ---------------------------------------------------------------------------
// Cutoffs

double transverse_cutoff(double w, double R) {
  const double y = w / R;
  if (std::abs(y) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

double frequency_cutoff(double eta, double eta0) {
  const double x = (std::abs(eta) - eta0) / eta0;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

Quadrature resolve_quadrature(const Quadrature& q, ModeBasis basis) {
  Quadrature r = q;
  const double top = kTwoPi * std::max(basis.half_v, 1);
  if (r.eta_max <= 0.0) r.eta_max = 4.0 * top;
  if (r.n_eta <= 0) {
    r.n_eta = static_cast<int>(std::ceil(2.0 * r.eta_max * 16.0)) + 1;
    if (r.n_eta % 2 == 0) ++r.n_eta;
  }
  if (r.eta_max < 2.0 * top)
    throw QuadratureUnderresolved("eta_max " + std::to_string(r.eta_max) +
                                  " below 4π times the highest resolved frequency");
  if (r.n_eta < 3) throw QuadratureUnderresolved("n_eta must be at least 3");
  return r;
}

namespace {

void check_cutoffs(const KernelSymbol& ks) {
  if (!(ks.R > 0.0 && ks.R < 0.5))
    throw SupportViolation("transverse cutoff radius R = " + std::to_string(ks.R) + " must lie in (0, 1/2)");
  if (!(ks.eta0 > 0.0)) throw SupportViolation("frequency cutoff eta0 must be positive");
}

// E_s(Q) = (2π)⁻¹ ∫_{sη>0} |η|^d ψ(η) φ̂(η − 2πQ) dη on the η trapezoid grid,
// with φ̂(ξ) = ∫ φ(w) e^{iwξ} dw. Swapping the two finite sums costs
// n_w·n_η + n_w·n_Q instead of their product.
struct Envelope {
  int q_lo = 0;
  std::vector<double> e[2];
  double at(int si, int Q) const { return e[si][Q - q_lo]; }
};

Envelope envelope(int degree, double R, double eta0, double eta_max, int n_eta, int q_lo, int q_hi) {
  const double d_eta = 2.0 * eta_max / (n_eta - 1);
  const double xi_max = eta_max + kTwoPi * std::max(std::abs(q_lo), std::abs(q_hi));
  // w-trapezoid is exact up to φ̂(2π/Δw − ξ); push that beyond φ̂'s decay.
  const int n_w = static_cast<int>(std::ceil(2.0 * R * (xi_max + 2000.0 / R) / kTwoPi)) + 1;
  const double d_w = 2.0 * R / n_w;

  std::vector<double> g(n_eta, 0.0);
  for (int i = 0; i < n_eta; ++i) {
    const double eta = -eta_max + i * d_eta;
    if (eta <= 0.0) continue;
    const double c = (i == n_eta - 1) ? 0.5 : 1.0;
    g[i] = c * std::pow(eta, degree) * frequency_cutoff(eta, eta0);
  }
  // G(w) = Σ_i g_i e^{iwη_i}; the minus slice is G(−w).
  std::vector<cd> G(n_w + 1);
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= n_w; ++k) {
    const double w = -R + k * d_w;
    const cd step = std::polar(1.0, w * d_eta);
    cd acc = 0.0, ph;
    for (int i = 0; i < n_eta; ++i) {
      if (i % 64 == 0) ph = std::polar(1.0, w * (-eta_max + i * d_eta));
      if (g[i] != 0.0) acc += g[i] * ph;
      ph *= step;
    }
    G[k] = acc;
  }
  Envelope env;
  env.q_lo = q_lo;
  for (int si = 0; si < 2; ++si) env.e[si].assign(q_hi - q_lo + 1, 0.0);
  for (int Q = q_lo; Q <= q_hi; ++Q)
    for (int si = 0; si < 2; ++si) {
      cd acc = 0.0;
      for (int k = 1; k < n_w; ++k) {
        const double w = -R + k * d_w;
        const cd Gk = si == 0 ? G[k] : G[n_w - k];
        acc += transverse_cutoff(w, R) * std::polar(1.0, -kTwoPi * Q * w) * Gk;
      }
      env.e[si][Q - q_lo] = (acc * (d_eta * d_w / kTwoPi)).real();
    }
  return env;
}

// (u,v)-Fourier coefficients of each τ node of a symbol, for the modes Δ
// that are not negligible: data[((d·2 + si)·n_tau + k)·4 + e].
struct SymbolSpectrum {
  int n_tau = 0;
  double h = 0.0;
  std::vector<double> tau;
  std::vector<std::pair<int, int>> modes;
  std::vector<cd> data;
  const cd* at(int d, int si, int k) const {
    return &data[((static_cast<std::size_t>(d) * 2 + si) * n_tau + k) * 4];
  }
  // h·Σ_k data·e^{−2πiτ_kξ} for all four entries.
  void transform(int d, int si, const std::vector<cd>& phase, cd* out) const {
    cd s[4] = {};
    for (int k = 0; k < n_tau; ++k) {
      const cd* x = at(d, si, k);
      for (int e = 0; e < 4; ++e) s[e] += x[e] * phase[k];
    }
    for (int e = 0; e < 4; ++e) out[e] = h * s[e];
  }
};

constexpr double kPrune = 1e-15;

SymbolSpectrum symbol_spectrum(const HomogeneousSymbol& k, bool prune) {
  const int nu = k.n_u(), nv = k.n_v(), nt = k.n_tau();
  const int hu = nu / 2, hv = nv / 2;
  std::vector<fourier::Coefficients2d> tables(static_cast<std::size_t>(2) * nt * 4);
#pragma omp parallel for schedule(static)
  for (int sk = 0; sk < 2 * nt; ++sk) {
    const int si = sk / nt, kk = sk % nt;
    std::vector<cd> samples(static_cast<std::size_t>(nu) * nv);
    for (int e = 0; e < 4; ++e) {
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) samples[static_cast<std::size_t>(i) * nv + j] = k.values()[k.index(i, j, si, kk) + e];
      tables[static_cast<std::size_t>(sk) * 4 + e] = fourier::analyze(samples, nu, nv);
    }
  }
  double scale = 0.0;
  for (const auto& t : tables)
    for (const cd& c : t.raw()) scale = std::max(scale, std::abs(c));

  SymbolSpectrum s;
  s.n_tau = nt;
  s.h = k.h_tau();
  for (int kk = 0; kk < nt; ++kk) s.tau.push_back(k.tau(kk));
  for (int p = -hu; p <= hu; ++p)
    for (int r = -hv; r <= hv; ++r) {
      double mx = 0.0;
      for (const auto& t : tables) mx = std::max(mx, std::abs(t.at(p, r)));
      if (mx == 0.0 || (prune && mx <= kPrune * scale)) continue;
      s.modes.push_back({p, r});
      for (int si = 0; si < 2; ++si)
        for (int kk = 0; kk < nt; ++kk)
          for (int e = 0; e < 4; ++e)
            s.data.push_back(tables[(static_cast<std::size_t>(si) * nt + kk) * 4 + e].at(p, r));
    }
  return s;
}

struct Gamma {
  int j, l;
  cd value;
};

// Fourier coefficients of √det g_F, negligible ones dropped.
std::vector<Gamma> sqrt_gF_coefficients(const MetricCoeffs& metric) {
  const double th = metric.theta.value();
  auto fields = resolve_fields(metric, 1, [&](double u, double v, double* out) {
    const auto [a, b, c] = eval_metric(metric, u, v);
    out[0] = std::sqrt(a + 2 * b * th + c * th * th);
  });
  const auto& t = fields.coeffs[0];
  double scale = 0.0;
  for (const cd& c : t.raw()) scale = std::max(scale, std::abs(c));
  std::vector<Gamma> out;
  for (int j = -t.half_u(); j <= t.half_u(); ++j)
    for (int l = -t.half_v(); l <= t.half_v(); ++l)
      if (std::abs(t.at(j, l)) > kPrune * scale) out.push_back({j, l, t.at(j, l)});
  return out;
}

struct Ingredients {
  ModeBasis basis;
  double theta = 0.0;
  SymbolSpectrum spectrum;
  std::vector<Gamma> gamma;
  int q_lo = 0, q_hi = 0;
};

Ingredients prepare(const KernelSymbol& ks, const MetricCoeffs& metric, ModeBasis basis, bool prune) {
  check_cutoffs(ks);
  validate_metric(metric);
  Ingredients in;
  in.basis = basis;
  in.theta = metric.theta.value();
  in.spectrum = symbol_spectrum(ks.base, prune);
  in.gamma = sqrt_gF_coefficients(metric);
  int l_lo = 0, l_hi = 0;
  for (const auto& g : in.gamma) {
    l_lo = std::min(l_lo, g.l);
    l_hi = std::max(l_hi, g.l);
  }
  in.q_lo = -basis.half_v + l_lo;
  in.q_hi = basis.half_v + l_hi;
  return in;
}

std::vector<cd> tau_phases(const SymbolSpectrum& s, double xi) {
  std::vector<cd> ph(s.n_tau);
  for (int k = 0; k < s.n_tau; ++k) ph[k] = std::polar(1.0, -kTwoPi * s.tau[k] * xi);
  return ph;
}

// K[(M,N,β),(m,n,α)] = Σ_s Σ_{jl} γ_jl E_s(n+l) κ̌_s(M−m−j, N−n−l; ξ)_{βα},
// ξ = (m+j) + θ(n+l): the mode e_{mn}√g_F splits into plane waves e_{PQ},
// each of which K multiplies by Σ_s E_s(Q) κ̂_s(x; P + θQ).
KernelOperator assemble(const Ingredients& in, const Envelope& env) {
  const ModeBasis& B = in.basis;
  const auto& S = in.spectrum;
  const int nd = static_cast<int>(S.modes.size());

  std::vector<int> js;
  for (const auto& g : in.gamma) js.push_back(g.j);
  std::sort(js.begin(), js.end());
  js.erase(std::unique(js.begin(), js.end()), js.end());
  auto j_index = [&](int j) { return static_cast<int>(std::lower_bound(js.begin(), js.end(), j) - js.begin()); };

  std::set<int> offsets;
  for (int j : js)
    for (const auto& d : S.modes) offsets.insert(j + d.first);

  KernelOperator K(B);
  const int Mu = B.modes_u();
  std::vector<std::vector<KernelOperator::Block*>> col_blocks(Mu, std::vector<KernelOperator::Block*>(Mu, nullptr));
  for (int b = 0; b < Mu; ++b)
    for (int off : offsets)
      if (b + off >= 0 && b + off < Mu) col_blocks[b][b + off] = &K.block_ref(b + off, b);

  const int nq = in.q_hi - in.q_lo + 1;
  const int nj = static_cast<int>(js.size());

#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < Mu; ++b) {
    const int m = b - B.half_u;
    // κ̌ for every (P = m + j, Q) this column block touches.
    std::vector<cd> cache(static_cast<std::size_t>(nj) * nq * nd * 8);
    auto slot = [&](int ji, int Q, int d, int si) {
      return &cache[(((static_cast<std::size_t>(ji) * nq + (Q - in.q_lo)) * nd + d) * 2 + si) * 4];
    };
    for (int ji = 0; ji < nj; ++ji)
      for (int Q = in.q_lo; Q <= in.q_hi; ++Q) {
        const auto ph = tau_phases(S, (m + js[ji]) + in.theta * Q);
        for (int d = 0; d < nd; ++d)
          for (int si = 0; si < 2; ++si) S.transform(d, si, ph, slot(ji, Q, d, si));
      }
    for (int n = -B.half_v; n <= B.half_v; ++n)
      for (const auto& g : in.gamma) {
        const int P = m + g.j, Q = n + g.l;
        const int ji = j_index(g.j);
        for (int si = 0; si < 2; ++si) {
          const double E = env.at(si, Q);
          if (E == 0.0) continue;
          const cd coef = g.value * E;
          for (int d = 0; d < nd; ++d) {
            const int M = P + S.modes[d].first, N = Q + S.modes[d].second;
            if (!B.contains(M, N)) continue;
            auto& blk = *col_blocks[b][B.block_of(M)];
            const cd* kv = slot(ji, Q, d, si);
            for (int beta = 0; beta < 2; ++beta)
              for (int alpha = 0; alpha < 2; ++alpha)
                blk(B.in_block(N, beta), B.in_block(n, alpha)) += coef * kv[beta * 2 + alpha];
          }
        }
      }
  }
  K.prune();
  return K;
}

}  // namespace

KernelOperator quantize(const KernelSymbol& ks, const MetricCoeffs& metric, ModeBasis basis,
                        const Quadrature& quad, QuantizationReport* report) {
  const Quadrature q = resolve_quadrature(quad, basis);
  const Ingredients in = prepare(ks, metric, basis, true);
  const int d = ks.degree();
  const Envelope env = envelope(d, ks.R, ks.eta0, q.eta_max, q.n_eta, in.q_lo, in.q_hi);
  const Envelope env2 = envelope(d, ks.R, ks.eta0, q.eta_max, 2 * q.n_eta - 1, in.q_lo, in.q_hi);
  KernelOperator K = assemble(in, env);

  // |ΔK| <= Σ_s Σ_jl |γ_jl| max_n |ΔE_s(n+l)| · max_{Δ,entry} h Σ_k |κ̃|
  const auto& S = in.spectrum;
  double bound = 0.0;
  for (int si = 0; si < 2; ++si) {
    double kmax = 0.0;
    for (std::size_t dd = 0; dd < S.modes.size(); ++dd)
      for (int e = 0; e < 4; ++e) {
        double s = 0.0;
        for (int k = 0; k < S.n_tau; ++k) s += std::abs(S.at(static_cast<int>(dd), si, k)[e]);
        kmax = std::max(kmax, S.h * s);
      }
    for (const auto& g : in.gamma) {
      double dE = 0.0;
      for (int n = -basis.half_v; n <= basis.half_v; ++n)
        dE = std::max(dE, std::abs(env2.at(si, n + g.l) - env.at(si, n + g.l)));
      bound += std::abs(g.value) * dE * kmax;
    }
  }
  QuantizationReport rep{q.eta_max, q.n_eta, bound, false};
  if (bound > q.tol) {
    rep.entry_change = max_abs_diff(assemble(in, env2), K);
    rep.measured = true;
    if (rep.entry_change > q.tol)
      throw QuadratureUnderresolved("doubling n_eta from " + std::to_string(q.n_eta) +
                                    " changes matrix entries by " + std::to_string(rep.entry_change));
  }
  if (report) *report = rep;
  return K;
}

KernelOperator quantize_serial(const KernelSymbol& ks, const MetricCoeffs& metric, ModeBasis basis,
                               const Quadrature& quad) {
  const Quadrature q = resolve_quadrature(quad, basis);
  const Ingredients in = prepare(ks, metric, basis, false);
  const Envelope env = envelope(ks.degree(), ks.R, ks.eta0, q.eta_max, q.n_eta, in.q_lo, in.q_hi);
  const auto& S = in.spectrum;
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
  cd kv[4];
  for (int m = -basis.half_u; m <= basis.half_u; ++m)
    for (int n = -basis.half_v; n <= basis.half_v; ++n)
      for (const auto& g : in.gamma) {
        const int P = m + g.j, Q = n + g.l;
        const auto ph = tau_phases(S, P + in.theta * Q);
        for (int si = 0; si < 2; ++si)
          for (std::size_t d = 0; d < S.modes.size(); ++d) {
            const int M = P + S.modes[d].first, N = Q + S.modes[d].second;
            if (!basis.contains(M, N)) continue;
            S.transform(static_cast<int>(d), si, ph, kv);
            for (int beta = 0; beta < 2; ++beta)
              for (int alpha = 0; alpha < 2; ++alpha)
                K(basis.index(M, N, beta), basis.index(m, n, alpha)) +=
                    g.value * env.at(si, Q) * kv[beta * 2 + alpha];
          }
      }
  return KernelOperator::from_dense(basis, K);
}

HomogeneousSymbol principal_symbol(const KernelSymbol& ks, double theta) {
  check_cutoffs(ks);
  const auto& k = ks.base;
  HomogeneousSymbol out(k.degree(), k.n_u(), k.n_v(), k.n_tau(), k.T_max());
  const int L = static_cast<int>(std::ceil(ks.R + k.T_max())) + 1;
  for (int i = 0; i < k.n_u(); ++i)
    for (int j = 0; j < k.n_v(); ++j)
      for (int si = 0; si < 2; ++si)
        for (int kk = 0; kk < k.n_tau(); ++kk) {
          Mat2 acc = Mat2::Zero();
          // Lattice translate (m,n): leafwise offset τ + m, transverse offset n − θm.
          for (int m = -L; m <= L; ++m)
            for (int n = -L; n <= L; ++n) {
              const double phi = transverse_cutoff(n - theta * m, ks.R);
              if (phi == 0.0) continue;
              if (m == 0)
                acc += phi * k.at(i, j, si, kk);
              else
                acc += phi * k.sample(k.u(i), k.v(j), si, k.tau(kk) + m);
            }
          out.at(i, j, si, kk) = acc;
        }
  return out;
}

Eigen::VectorXcd to_coefficients(const SectionGrid& f, ModeBasis basis) {
  if (f.n_u / 2 != basis.half_u || f.n_v / 2 != basis.half_v)
    throw GridMismatch("section grid " + std::to_string(f.n_u) + "x" + std::to_string(f.n_v) +
                       " does not match the operator basis");
  Eigen::VectorXcd c(basis.dim());
  std::vector<cd> s(static_cast<std::size_t>(f.n_u) * f.n_v);
  for (int fib = 0; fib < 2; ++fib) {
    for (std::size_t p = 0; p < s.size(); ++p) s[p] = f.values[p * 2 + fib];
    const auto t = fourier::analyze(s, f.n_u, f.n_v);
    for (int m = -basis.half_u; m <= basis.half_u; ++m)
      for (int n = -basis.half_v; n <= basis.half_v; ++n) c(basis.index(m, n, fib)) = t.at(m, n);
  }
  return c;
}

SectionGrid from_coefficients(const Eigen::VectorXcd& c, ModeBasis basis, int n_u, int n_v) {
  if (c.size() != basis.dim()) throw GridMismatch("coefficient vector does not match basis");
  SectionGrid f(n_u, n_v);
  for (int fib = 0; fib < 2; ++fib) {
    fourier::Coefficients2d t(basis.half_u, basis.half_v);
    for (int m = -basis.half_u; m <= basis.half_u; ++m)
      for (int n = -basis.half_v; n <= basis.half_v; ++n) t.at(m, n) = c(basis.index(m, n, fib));
    const auto s = fourier::synthesize(t, n_u, n_v);
    for (std::size_t p = 0; p < s.size(); ++p) f.values[p * 2 + fib] = s[p];
  }
  return f;
}

SectionGrid apply(const KernelOperator& K, const SectionGrid& f) {
  return from_coefficients(K.apply(to_coefficients(f, K.basis())), K.basis(), f.n_u, f.n_v);
}

}  // namespace folix
