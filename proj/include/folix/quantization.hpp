#pragma once

// Transverse pseudodifferential operators on T² with values in ℂ², built from
// groupoid symbols by the oscillatory-integral quantizer, and stored as
// matrices on the truncated Fourier basis e^{2πi(mu+nv)} ⊗ {fiber}.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "folix/geometry.hpp"
#include "folix/symbol.hpp"

namespace folix {

// Modes |m| <= half_u, |n| <= half_v, two fiber components each. Basis index
// is ((m + half_u)·modes_v + n + half_v)·2 + fiber, so each fixed m is a
// contiguous block of size 2·modes_v.
struct ModeBasis {
  int half_u = 0;
  int half_v = 0;

  static ModeBasis for_grid(int n_u, int n_v) { return {n_u / 2, n_v / 2}; }

  int modes_u() const { return 2 * half_u + 1; }
  int modes_v() const { return 2 * half_v + 1; }
  int block_dim() const { return 2 * modes_v(); }
  int dim() const { return modes_u() * block_dim(); }
  bool contains(int m, int n) const {
    return m >= -half_u && m <= half_u && n >= -half_v && n <= half_v;
  }
  int block_of(int m) const { return m + half_u; }
  int in_block(int n, int fiber) const { return (n + half_v) * 2 + fiber; }
  int index(int m, int n, int fiber) const {
    return block_of(m) * block_dim() + in_block(n, fiber);
  }
  bool operator==(const ModeBasis& o) const { return half_u == o.half_u && half_v == o.half_v; }
  bool operator!=(const ModeBasis& o) const { return !(*this == o); }
};

// Matrix on a ModeBasis, stored by (row m-block, column m-block). Absent
// blocks are zero. Operators with u-independent data stay block diagonal.
class KernelOperator {
 public:
  using Block = Eigen::MatrixXcd;
  using BlockMap = std::map<std::pair<int, int>, Block>;

  KernelOperator() = default;
  explicit KernelOperator(ModeBasis basis) : basis_(basis) {}

  static KernelOperator identity(ModeBasis basis);
  // Blocks whose entries are all exactly zero are dropped.
  static KernelOperator from_dense(ModeBasis basis, const Eigen::MatrixXcd& m);

  const ModeBasis& basis() const { return basis_; }
  const BlockMap& blocks() const { return blocks_; }
  const Block* block(int a, int b) const;
  // Creates a zero block if absent.
  Block& block_ref(int a, int b);
  bool block_diagonal() const;

  std::complex<double> entry(int M, int N, int beta, int m, int n, int alpha) const;
  Eigen::MatrixXcd to_dense() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& c) const;

  // Plain conjugate transpose (the Fourier basis is orthonormal for du dv).
  KernelOperator adjoint() const;
  double max_abs() const;
  void prune();  // drop all-zero blocks

  KernelOperator& operator+=(const KernelOperator& o);
  KernelOperator& operator-=(const KernelOperator& o);
  KernelOperator& operator*=(std::complex<double> s);

 private:
  ModeBasis basis_;
  BlockMap blocks_;
};

KernelOperator operator+(KernelOperator a, const KernelOperator& b);
KernelOperator operator-(KernelOperator a, const KernelOperator& b);
KernelOperator operator*(std::complex<double> s, KernelOperator a);
KernelOperator operator*(const KernelOperator& a, const KernelOperator& b);
double max_abs_diff(const KernelOperator& a, const KernelOperator& b);

// Gram matrix of the weighted inner product ⟨f,g⟩ = ∬ f̄ g √(ac − b²) du dv
// on the basis. Fourier data of √det g is resolved by grid doubling; throws
// AliasingDetected if it does not settle to 1e-6.
KernelOperator weight_matrix(const MetricCoeffs& metric, ModeBasis basis);
// W⁻¹ K^† W.
KernelOperator weighted_adjoint(const KernelOperator& K, const KernelOperator& W);

// ---------------------------------------------------------------------------

// φ: C∞ bump on |w| < R with φ(0) = 1.
double transverse_cutoff(double w, double R);
// ψ: 0 for |η| <= η₀, 1 for |η| >= 2η₀, smooth in between.
double frequency_cutoff(double eta, double eta0);

struct KernelSymbol {
  HomogeneousSymbol base;
  double R = 0.4;
  double eta0 = 6.283185307179586476925286766559;

  int degree() const { return base.degree(); }
};

struct Quadrature {
  double eta_max = 0.0;  // 0: 4·2π·half_v
  int n_eta = 0;         // 0: spacing about 1/16 on [−η_max, η_max]
  double tol = 1e-6;     // certification threshold on entry changes
};

struct QuantizationReport {
  double eta_max = 0.0;
  int n_eta = 0;
  double entry_change = 0.0;  // bound or measured change under n_eta doubling
  bool measured = false;      // true if the doubled operator was assembled
};

// Resolves defaults against the basis; throws QuadratureUnderresolved if
// η_max < 4π·half_v.
Quadrature resolve_quadrature(const Quadrature& q, ModeBasis basis);

// Kf(x) = (2π)⁻¹∫ e^{i(v−v′−θ(u−u′))η} k̃(x, sign η, u−u′)|η|^d φ(v−v′−θ(u−u′)) ψ(η)
//          · f(x′) √det g_F(x′) dx′ dη
// assembled on the basis (parallel over column blocks). Certified by doubling
// n_η: QuadratureUnderresolved if an entry moves by more than tol.
// SupportViolation if R >= ½.
KernelOperator quantize(const KernelSymbol& ks, const MetricCoeffs& metric, ModeBasis basis,
                        const Quadrature& quad = {}, QuantizationReport* report = nullptr);
// Column-by-column reference, no certification.
KernelOperator quantize_serial(const KernelSymbol& ks, const MetricCoeffs& metric,
                               ModeBasis basis, const Quadrature& quad = {});

// Σ_{(m,n)∈ℤ²} k_d(u+m, v+n, u−τ, v−θτ, p_v) on the grid of ks.base, truncated
// to |m|,|n| <= ceil(R + T_max) + 1. SupportViolation if R >= ½.
HomogeneousSymbol principal_symbol(const KernelSymbol& ks, double theta);

// ℂ²-valued field sampled at (i/n_u, j/n_v); value index (i·n_v + j)·2 + fiber.
struct SectionGrid {
  int n_u = 0;
  int n_v = 0;
  std::vector<std::complex<double>> values;

  SectionGrid() = default;
  SectionGrid(int nu, int nv) : n_u(nu), n_v(nv), values(static_cast<std::size_t>(nu) * nv * 2) {}
  std::complex<double>& at(int i, int j, int fiber) {
    return values[(static_cast<std::size_t>(i) * n_v + j) * 2 + fiber];
  }
  std::complex<double> at(int i, int j, int fiber) const {
    return values[(static_cast<std::size_t>(i) * n_v + j) * 2 + fiber];
  }
};

// GridMismatch unless the grid's half widths equal the basis's.
Eigen::VectorXcd to_coefficients(const SectionGrid& f, ModeBasis basis);
SectionGrid from_coefficients(const Eigen::VectorXcd& c, ModeBasis basis, int n_u, int n_v);
SectionGrid apply(const KernelOperator& K, const SectionGrid& f);

}  // namespace folix
