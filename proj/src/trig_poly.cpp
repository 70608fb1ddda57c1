#include "folix/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "folix/fourier.hpp"

namespace folix {

using fourier::kTwoPi;
using cd = std::complex<double>;

PhaseTable::PhaseTable(double u, double v, int half_u, int half_v) : hu_(half_u), hv_(half_v) {
  if (hu_ > kInline) heap_u_.resize(2 * hu_ + 1);
  if (hv_ > kInline) heap_v_.resize(2 * hv_ + 1);
  eu_ = hu_ > kInline ? heap_u_.data() : bu_.data();
  ev_ = hv_ > kInline ? heap_v_.data() : bv_.data();
  const cd zu = std::polar(1.0, kTwoPi * u);
  const cd zv = std::polar(1.0, kTwoPi * v);
  eu_[hu_] = 1.0;
  ev_[hv_] = 1.0;
  for (int k = 1; k <= hu_; ++k) {
    eu_[hu_ + k] = eu_[hu_ + k - 1] * zu;
    eu_[hu_ - k] = std::conj(eu_[hu_ + k]);
  }
  for (int k = 1; k <= hv_; ++k) {
    ev_[hv_ + k] = ev_[hv_ + k - 1] * zv;
    ev_[hv_ - k] = std::conj(ev_[hv_ + k]);
  }
}

TrigPoly::TrigPoly(std::vector<TrigTerm> terms) {
  std::map<std::pair<int, int>, cd> merged;
  for (const auto& t : terms) merged[{t.m, t.n}] += t.c;
  double scale = 0.0;
  for (const auto& [mn, c] : merged) scale = std::max(scale, std::abs(c));
  for (const auto& [mn, c] : merged) {
    auto it = merged.find({-mn.first, -mn.second});
    const cd partner = it == merged.end() ? cd{} : it->second;
    if (std::abs(partner - std::conj(c)) > 1e-12 * std::max(1.0, scale))
      throw std::invalid_argument("TrigPoly: coefficients are not Hermitian at (" +
                                  std::to_string(mn.first) + "," + std::to_string(mn.second) + ")");
    if (c != cd{}) terms_.push_back({mn.first, mn.second, c});
  }
}

TrigPoly TrigPoly::constant(double value) { return TrigPoly({{0, 0, value}}); }

TrigPoly TrigPoly::cosine(int m, int n, double amp) {
  if (m == 0 && n == 0) return constant(amp);
  return TrigPoly({{m, n, 0.5 * amp}, {-m, -n, 0.5 * amp}});
}

TrigPoly TrigPoly::sine(int m, int n, double amp) {
  if (m == 0 && n == 0) return {};
  return TrigPoly({{m, n, cd(0.0, -0.5 * amp)}, {-m, -n, cd(0.0, 0.5 * amp)}});
}

int TrigPoly::max_m() const {
  int r = 0;
  for (const auto& t : terms_) r = std::max(r, std::abs(t.m));
  return r;
}

int TrigPoly::max_n() const {
  int r = 0;
  for (const auto& t : terms_) r = std::max(r, std::abs(t.n));
  return r;
}

double TrigPoly::operator()(double u, double v) const { return eval_grad(u, v).value; }

ValueGrad TrigPoly::eval_grad(double u, double v) const {
  return eval_grad(PhaseTable(u, v, max_m(), max_n()));
}

ValueGrad TrigPoly::eval_grad(const PhaseTable& phases) const {
  cd f = 0.0;
  cd fu = 0.0;
  cd fv = 0.0;
  for (const auto& t : terms_) {
    const cd e = t.c * phases.eu(t.m) * phases.ev(t.n);
    f += e;
    fu += static_cast<double>(t.m) * e;
    fv += static_cast<double>(t.n) * e;
  }
  // d/du e^{2πimu} = 2πim e^{...}; the real part of i·z is -imag(z).
  return {f.real(), -kTwoPi * fu.imag(), -kTwoPi * fv.imag()};
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
  std::vector<TrigTerm> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return TrigPoly(std::move(all));
}

TrigPoly TrigPoly::operator*(double s) const {
  std::vector<TrigTerm> all = terms_;
  for (auto& t : all) t.c *= s;
  return TrigPoly(std::move(all));
}

}  // namespace folix
