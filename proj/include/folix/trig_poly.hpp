#pragma once

#include <array>
#include <complex>
#include <vector>

namespace folix {

struct TrigTerm {
  int m = 0;
  int n = 0;
  std::complex<double> c;
};

struct ValueGrad {
  double value = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

// Powers e^{2πiku}, e^{2πikv} for |k| <= half, shared by the evaluation of
// several polynomials at one point.
class PhaseTable {
 public:
  PhaseTable(double u, double v, int half_u, int half_v);
  PhaseTable(const PhaseTable&) = delete;
  PhaseTable& operator=(const PhaseTable&) = delete;
  std::complex<double> eu(int k) const { return eu_[k + hu_]; }
  std::complex<double> ev(int k) const { return ev_[k + hv_]; }

 private:
  // Inline storage covers the usual low-order metrics without allocating.
  static constexpr int kInline = 16;
  int hu_;
  int hv_;
  std::array<std::complex<double>, 2 * kInline + 1> bu_, bv_;
  std::vector<std::complex<double>> heap_u_, heap_v_;
  std::complex<double>* eu_;
  std::complex<double>* ev_;
};

// Real-valued trigonometric polynomial sum c_{mn} e^{2πi(mu+nv)} on the unit
// torus. Coefficients must be Hermitian: c_{-m,-n} = conj(c_{mn}).
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(std::vector<TrigTerm> terms);

  static TrigPoly constant(double value);
  // amp·cos(2π(mu+nv)) and amp·sin(2π(mu+nv)).
  static TrigPoly cosine(int m, int n, double amp);
  static TrigPoly sine(int m, int n, double amp);

  double operator()(double u, double v) const;
  ValueGrad eval_grad(double u, double v) const;
  ValueGrad eval_grad(const PhaseTable& phases) const;

  TrigPoly operator+(const TrigPoly& other) const;
  TrigPoly operator*(double s) const;

  const std::vector<TrigTerm>& terms() const { return terms_; }
  int max_m() const;
  int max_n() const;

 private:
  std::vector<TrigTerm> terms_;
};

}  // namespace folix
