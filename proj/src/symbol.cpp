#include "folix/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "folix/errors.hpp"
#include "folix/fourier.hpp"

namespace folix {

using fourier::kTwoPi;

HomogeneousSymbol::HomogeneousSymbol(int degree, int n_u, int n_v, int n_tau, double T_max)
    : degree_(degree), n_u_(n_u), n_v_(n_v), n_tau_(n_tau), T_max_(T_max) {
  if (n_u <= 0 || n_v <= 0 || n_tau <= 0 || n_tau % 2 != 0)
    throw std::invalid_argument("symbol grid: sizes must be positive and n_tau even");
  if (!(T_max > 0.0)) throw std::invalid_argument("symbol grid: T_max must be positive");
  values_.assign(static_cast<std::size_t>(n_u) * n_v * 2 * n_tau * 4, cd{});
}

HomogeneousSymbol HomogeneousSymbol::from_function(
    int degree, int n_u, int n_v, int n_tau, double T_max,
    const std::function<Mat2(double, double, double, double)>& f) {
  HomogeneousSymbol k(degree, n_u, n_v, n_tau, T_max);
  for (int i = 0; i < n_u; ++i)
    for (int j = 0; j < n_v; ++j)
      for (int si = 0; si < 2; ++si)
        for (int t = 0; t < n_tau; ++t) k.at(i, j, si, t) = f(k.u(i), k.v(j), sign_of(si), k.tau(t));
  return k;
}

bool HomogeneousSymbol::same_grid(const HomogeneousSymbol& o) const {
  return n_u_ == o.n_u_ && n_v_ == o.n_v_ && n_tau_ == o.n_tau_ && T_max_ == o.T_max_;
}

void HomogeneousSymbol::require_same_grid(const HomogeneousSymbol& o, const char* who) const {
  if (!same_grid(o)) throw GridMismatch(std::string(who) + ": symbols live on different grids");
}

namespace {

// 4-point Lagrange weights for nodes −1, 0, 1, 2 at fractional offset f.
std::array<double, 4> cubic_weights(double f) {
  return {-f * (f - 1) * (f - 2) / 6.0, (f + 1) * (f - 1) * (f - 2) / 2.0,
          -(f + 1) * f * (f - 2) / 2.0, (f + 1) * f * (f - 1) / 6.0};
}

int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Mat2 HomogeneousSymbol::sample(double u, double v, int si, double tau) const {
  const double xu = (u - std::floor(u)) * n_u_;
  const double xv = (v - std::floor(v)) * n_v_;
  const double xt = (tau + T_max_) / h_tau();
  const int iu = static_cast<int>(std::floor(xu));
  const int iv = static_cast<int>(std::floor(xv));
  const int it = static_cast<int>(std::floor(xt));
  const auto wu = cubic_weights(xu - iu);
  const auto wv = cubic_weights(xv - iv);
  const auto wt = cubic_weights(xt - it);
  Mat2 out = Mat2::Zero();
  for (int c = 0; c < 4; ++c) {
    const int k = it - 1 + c;
    if (k < 0 || k >= n_tau_ || wt[c] == 0.0) continue;
    Mat2 acc = Mat2::Zero();
    for (int a = 0; a < 4; ++a) {
      const int i = wrap(iu - 1 + a, n_u_);
      Mat2 row = Mat2::Zero();
      for (int b = 0; b < 4; ++b) row += wv[b] * at(i, wrap(iv - 1 + b, n_v_), si, k);
      acc += wu[a] * row;
    }
    out += wt[c] * acc;
  }
  return out;
}

double norm2(const Mat2& m) {
  const Eigen::Matrix2cd a = m.adjoint() * m;
  const double tr = a.trace().real();
  const double det = a.determinant().real();
  const double disc = std::max(0.0, 0.25 * tr * tr - det);
  return std::sqrt(std::max(0.0, 0.5 * tr + std::sqrt(disc)));
}

double HomogeneousSymbol::sup() const {
  double s = 0.0;
  for (std::size_t p = 0; p < values_.size(); p += 4)
    s = std::max(s, norm2(Eigen::Map<const Mat2>(&values_[p])));
  return s;
}

std::pair<double, double> HomogeneousSymbol::support(double rel) const {
  const double cut = rel * sup();
  int lo = n_tau_, hi = -1;
  for (int i = 0; i < n_u_; ++i)
    for (int j = 0; j < n_v_; ++j)
      for (int si = 0; si < 2; ++si)
        for (int k = 0; k < n_tau_; ++k)
          if (norm2(at(i, j, si, k)) > cut) {
            lo = std::min(lo, k);
            hi = std::max(hi, k);
          }
  if (hi < 0) return {0.0, 0.0};
  return {tau(lo), tau(hi)};
}

bool HomogeneousSymbol::vanishes_in_buffer(double buffer, double rel) const {
  const double cut = rel * sup();
  const double edge = (1.0 - buffer) * T_max_;
  for (int i = 0; i < n_u_; ++i)
    for (int j = 0; j < n_v_; ++j)
      for (int si = 0; si < 2; ++si)
        for (int k = 0; k < n_tau_; ++k)
          if (std::abs(tau(k)) > edge && norm2(at(i, j, si, k)) > cut) return false;
  return true;
}

HomogeneousSymbol& HomogeneousSymbol::operator+=(const HomogeneousSymbol& o) {
  require_same_grid(o, "symbol +");
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += o.values_[p];
  return *this;
}

HomogeneousSymbol& HomogeneousSymbol::operator-=(const HomogeneousSymbol& o) {
  require_same_grid(o, "symbol -");
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] -= o.values_[p];
  return *this;
}

HomogeneousSymbol& HomogeneousSymbol::operator*=(cd s) {
  for (auto& x : values_) x *= s;
  return *this;
}

HomogeneousSymbol operator+(HomogeneousSymbol a, const HomogeneousSymbol& b) { return a += b; }
HomogeneousSymbol operator-(HomogeneousSymbol a, const HomogeneousSymbol& b) { return a -= b; }
HomogeneousSymbol operator*(cd s, HomogeneousSymbol a) { return a *= s; }

double LeafVolume::sqrt_gF(double u, double v) const {
  const auto [a, b, c] = eval_metric(metric_, u, v);
  const double th = metric_.theta.value();
  return std::sqrt(a + 2 * b * th + c * th * th);
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

// Per-(sign, τ-node) slices of one matrix entry as (u,v) fields.
struct SliceSpectra {
  int n_u, n_v, n_tau;
  // [(si·n_tau + k)·4 + e] → DFT of the (u,v) field (unnormalized forward)
  std::vector<std::vector<cd>> hat;
  std::vector<char> nonzero;  // per (si, k)
};

SliceSpectra slice_spectra(const HomogeneousSymbol& k) {
  const int nu = k.n_u(), nv = k.n_v(), nt = k.n_tau();
  SliceSpectra s{nu, nv, nt, std::vector<std::vector<cd>>(2 * nt * 4), std::vector<char>(2 * nt)};
  const long total = 2L * nt;
#pragma omp parallel for schedule(static)
  for (long q = 0; q < total; ++q) {
    const int si = static_cast<int>(q / nt), t = static_cast<int>(q % nt);
    bool any = false;
    for (int e = 0; e < 4; ++e) {
      std::vector<cd> f(static_cast<std::size_t>(nu) * nv);
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
          f[i * nv + j] = k.values()[k.index(i, j, si, t) + e];
          any = any || f[i * nv + j] != cd{};
        }
      fourier::dft_2d(f, nu, nv, -1);
      s.hat[q * 4 + e] = std::move(f);
    }
    s.nonzero[q] = any;
  }
  return s;
}

// Multiplier taking an unnormalized spectrum to samples of f(x − d), using the
// symmetric mode range with the Nyquist mode split in half.
std::vector<cd> shift_multiplier(int nu, int nv, double du, double dv) {
  auto axis = [](int n, double d) {
    std::vector<cd> m(n);
    for (int i = 0; i < n; ++i) {
      const int p = i <= n / 2 ? i : i - n;
      if (n % 2 == 0 && i == n / 2)
        m[i] = std::cos(kTwoPi * (n / 2) * d);  // average of ±n/2 phases
      else
        m[i] = std::polar(1.0, -kTwoPi * p * d);
    }
    return m;
  };
  const auto mu = axis(nu, du);
  const auto mv = axis(nv, dv);
  std::vector<cd> m(static_cast<std::size_t>(nu) * nv);
  const double scale = 1.0 / (static_cast<double>(nu) * nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) m[i * nv + j] = mu[i] * mv[j] * scale;
  return m;
}

void check_convolution_support(const HomogeneousSymbol& k1, const HomogeneousSymbol& k2) {
  const auto [lo1, hi1] = k1.support();
  const auto [lo2, hi2] = k2.support();
  const double eps = 1e-9 * k1.h_tau();
  if (lo1 + lo2 < -k1.T_max() - eps || hi1 + hi2 > k1.T_max() - k1.h_tau() + eps)
    throw SupportOverflow("convolution: combined τ-support [" + std::to_string(lo1 + lo2) + "," +
                          std::to_string(hi1 + hi2) + "] exceeds the grid");
}

}  // namespace

HomogeneousSymbol convolve(const HomogeneousSymbol& k1, const HomogeneousSymbol& k2,
                           const LeafVolume& vol) {
  k1.require_same_grid(k2, "convolve");
  check_convolution_support(k1, k2);
  const int nu = k1.n_u(), nv = k1.n_v(), nt = k1.n_tau();
  const double h = k1.h_tau(), th = vol.theta();
  HomogeneousSymbol out(k1.degree() + k2.degree(), nu, nv, nt, k1.T_max());
  const SliceSpectra s2 = slice_spectra(k2);
  const std::size_t npts = static_cast<std::size_t>(nu) * nv;

  for (int j = 0; j < nt; ++j) {
    const double tj = k1.tau(j);
    bool k1_live = false;
    for (int i = 0; i < nu && !k1_live; ++i)
      for (int jj = 0; jj < nv && !k1_live; ++jj)
        for (int si = 0; si < 2; ++si) k1_live = k1_live || !k1.at(i, jj, si, j).isZero(0.0);
    if (!k1_live) continue;
    const auto mult = shift_multiplier(nu, nv, tj, th * tj);
    std::vector<double> weight(npts);
    for (int i = 0; i < nu; ++i)
      for (int jj = 0; jj < nv; ++jj)
        weight[i * nv + jj] = h * vol.sqrt_gF(k1.u(i) - tj, k1.v(jj) - th * tj);

    // output τ_k = τ_j + τ_l  ⇔  k = j + l − nt/2
    const long total = 2L * nt;
#pragma omp parallel for schedule(dynamic)
    for (long q = 0; q < total; ++q) {
      const int si = static_cast<int>(q / nt), l = static_cast<int>(q % nt);
      const int k = j + l - nt / 2;
      if (k < 0 || k >= nt || !s2.nonzero[si * nt + l]) continue;
      std::array<std::vector<cd>, 4> sh;
      for (int e = 0; e < 4; ++e) {
        sh[e] = s2.hat[(si * nt + l) * 4 + e];
        for (std::size_t p = 0; p < npts; ++p) sh[e][p] *= mult[p];
        fourier::dft_2d(sh[e], nu, nv, +1);
      }
      for (int i = 0; i < nu; ++i)
        for (int jj = 0; jj < nv; ++jj) {
          const std::size_t p = static_cast<std::size_t>(i) * nv + jj;
          Mat2 b;
          b << sh[0][p], sh[1][p], sh[2][p], sh[3][p];
          out.at(i, jj, si, k) += weight[p] * (k1.at(i, jj, si, j) * b);
        }
    }
  }
  return out;
}

HomogeneousSymbol convolve_serial(const HomogeneousSymbol& k1, const HomogeneousSymbol& k2,
                                  const LeafVolume& vol) {
  k1.require_same_grid(k2, "convolve");
  check_convolution_support(k1, k2);
  const int nu = k1.n_u(), nv = k1.n_v(), nt = k1.n_tau();
  const double h = k1.h_tau(), th = vol.theta();
  HomogeneousSymbol out(k1.degree() + k2.degree(), nu, nv, nt, k1.T_max());
  std::vector<cd> field(static_cast<std::size_t>(nu) * nv);
  for (int j = 0; j < nt; ++j) {
    const double tj = k1.tau(j);
    for (int si = 0; si < 2; ++si)
      for (int l = 0; l < nt; ++l) {
        const int k = j + l - nt / 2;
        if (k < 0 || k >= nt) continue;
        std::array<std::vector<cd>, 4> sh;
        for (int e = 0; e < 4; ++e) {
          for (int i = 0; i < nu; ++i)
            for (int jj = 0; jj < nv; ++jj) field[i * nv + jj] = k2.values()[k2.index(i, jj, si, l) + e];
          sh[e] = fourier::shift(field, nu, nv, tj, th * tj);
        }
        for (int i = 0; i < nu; ++i)
          for (int jj = 0; jj < nv; ++jj) {
            const std::size_t p = static_cast<std::size_t>(i) * nv + jj;
            Mat2 b;
            b << sh[0][p], sh[1][p], sh[2][p], sh[3][p];
            out.at(i, jj, si, k) +=
                h * vol.sqrt_gF(k1.u(i) - tj, k1.v(jj) - th * tj) * (k1.at(i, jj, si, j) * b);
          }
      }
  }
  return out;
}

HomogeneousSymbol involution(const HomogeneousSymbol& k, double theta) {
  const int nu = k.n_u(), nv = k.n_v(), nt = k.n_tau();
  HomogeneousSymbol out(k.degree(), nu, nv, nt, k.T_max());
  std::vector<cd> field(static_cast<std::size_t>(nu) * nv);
  for (int si = 0; si < 2; ++si)
    for (int t = 1; t < nt; ++t) {  // τ_0 = −T has no mirror node; it lies in the buffer
      const int src = nt - t;
      const double tt = k.tau(t);
      std::array<std::vector<cd>, 4> sh;
      for (int e = 0; e < 4; ++e) {
        for (int i = 0; i < nu; ++i)
          for (int j = 0; j < nv; ++j) field[i * nv + j] = k.values()[k.index(i, j, si, src) + e];
        sh[e] = fourier::shift(field, nu, nv, tt, theta * tt);
      }
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
          const std::size_t p = static_cast<std::size_t>(i) * nv + j;
          Mat2 b;
          b << sh[0][p], sh[1][p], sh[2][p], sh[3][p];
          out.at(i, j, si, t) = b.adjoint();
        }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Transport

namespace {

void check_transport_input(const HomogeneousSymbol& k0) {
  if (!k0.vanishes_in_buffer())
    throw CharacteristicEscape("transport: symbol does not vanish in the outer 10% of the τ grid");
}

Mat2 transport_node(const HomogeneousSymbol& k0, const TransverseFlow& flow, double t, double dt,
                    int i, int j, int si, int k) {
  const double edge = 0.9 * k0.T_max();
  const GroupoidPoint z{k0.u(i), k0.v(j), HomogeneousSymbol::sign_of(si), k0.tau(k)};
  const auto ch = flow.characteristic(z, t, dt);
  if (std::abs(z.tau) <= edge && (ch.end.tau < -k0.T_max() || ch.end.tau > k0.T_max()))
    throw CharacteristicEscape("transport: characteristic from τ=" + std::to_string(z.tau) +
                               " reaches τ=" + std::to_string(ch.end.tau) + " off the grid");
  const double factor = std::exp(ch.weight + k0.degree() * ch.log_momentum);
  return factor * k0.sample(ch.end.u, ch.end.v, si, ch.end.tau);
}

}  // namespace

HomogeneousSymbol transport(const HomogeneousSymbol& k0, const TransverseFlow& flow, double t,
                            double dt) {
  check_transport_input(k0);
  if (t == 0.0) return k0;
  HomogeneousSymbol out(k0.degree(), k0.n_u(), k0.n_v(), k0.n_tau(), k0.T_max());
  const int nu = k0.n_u(), nv = k0.n_v(), nt = k0.n_tau();
  const long total = static_cast<long>(nu) * nv * 2 * nt;
  bool escaped = false;
  std::string message;
#pragma omp parallel for schedule(dynamic, 64)
  for (long q = 0; q < total; ++q) {
    const int k = static_cast<int>(q % nt);
    const int si = static_cast<int>((q / nt) % 2);
    const int j = static_cast<int>((q / (2L * nt)) % nv);
    const int i = static_cast<int>(q / (2L * nt * nv));
    try {
      out.at(i, j, si, k) = transport_node(k0, flow, t, dt, i, j, si, k);
    } catch (const CharacteristicEscape& e) {
#pragma omp critical
      {
        escaped = true;
        message = e.what();
      }
    }
  }
  if (escaped) throw CharacteristicEscape(message);
  return out;
}

HomogeneousSymbol transport_serial(const HomogeneousSymbol& k0, const TransverseFlow& flow,
                                   double t, double dt) {
  check_transport_input(k0);
  if (t == 0.0) return k0;
  HomogeneousSymbol out(k0.degree(), k0.n_u(), k0.n_v(), k0.n_tau(), k0.T_max());
  for (int i = 0; i < k0.n_u(); ++i)
    for (int j = 0; j < k0.n_v(); ++j)
      for (int si = 0; si < 2; ++si)
        for (int k = 0; k < k0.n_tau(); ++k) out.at(i, j, si, k) = transport_node(k0, flow, t, dt, i, j, si, k);
  return out;
}

double sup_norm(const HomogeneousSymbol& k) { return k.sup(); }

double sup_distance(const HomogeneousSymbol& a, const HomogeneousSymbol& b) {
  a.require_same_grid(b, "sup_distance");
  double s = 0.0;
  for (std::size_t p = 0; p < a.values().size(); p += 4) {
    const Mat2 d = Eigen::Map<const Mat2>(&a.values()[p]) - Eigen::Map<const Mat2>(&b.values()[p]);
    s = std::max(s, norm2(d));
  }
  return s;
}

double frobenius_distance(const HomogeneousSymbol& a, const HomogeneousSymbol& b) {
  a.require_same_grid(b, "frobenius_distance");
  double s = 0.0;
  for (std::size_t p = 0; p < a.values().size(); ++p) s += std::norm(a.values()[p] - b.values()[p]);
  return std::sqrt(s / static_cast<double>(a.values().size()));
}

}  // namespace folix
