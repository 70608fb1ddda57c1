#pragma once

// The transverse Dirac operator D = [[0, −e_H + ½F], [e_H − ½F, 0]] on the
// Fourier⊗ℂ² basis, its functional calculus ⟨D⟩ = (D² + I)^{1/2},
// e^{it⟨D⟩}, and the Heisenberg evolution Φ_t(K) = e^{it⟨D⟩} K e^{−it⟨D⟩}.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "folix/geometry.hpp"
#include "folix/quantization.hpp"

namespace folix {

// Galerkin form: H_ij = ⟨e_i, D e_j⟩ in the weighted inner product, W the Gram
// matrix, so D = W⁻¹H. With W = LL^† and L⁻¹HL^{−†} = QΛQ^†, D = VΛV⁻¹ where
// V = L^{−†}Q and V⁻¹ = Q^†L^†. u-independent metrics split into one sector
// per m; otherwise there is a single sector.
struct DiracMatrix {
  struct Sector {
    int block0 = 0;
    int nblocks = 1;
    Eigen::VectorXd lambda;  // ascending
    Eigen::MatrixXcd V, Vinv;
  };

  ModeBasis basis;
  KernelOperator H, W;
  std::vector<Sector> sectors;
  bool fast_path = false;
  double hermiticity = 0.0;           // max |S − S^†| of the symmetrized form
  double weighted_hermiticity = 0.0;  // max |H − H^†|
  double spectral_symmetry = 0.0;     // max |λ_i + λ_{N−1−i}|

  Eigen::VectorXd eigenvalues() const;  // all λ, ascending
  KernelOperator D() const;             // W⁻¹H
  // V f(λ) V⁻¹.
  KernelOperator function(const std::function<std::complex<double>(double)>& f) const;
};

// Throws NonPositiveMetric, AliasingDetected (metric-derived coefficient
// tables not resolved at 4× support), EigSolverFailure.
DiracMatrix assemble_dirac(const MetricCoeffs& metric, ModeBasis basis, bool allow_fast_path = true);

// ⟨D⟩ = V diag(√(λ² + 1)) V⁻¹.
KernelOperator abs_dirac(const DiracMatrix& D);

struct Propagator {
  double t = 0.0;
  KernelOperator U;
};
Propagator propagate(const DiracMatrix& D, double t);

// GridMismatch if K lives on another basis.
KernelOperator heisenberg(const KernelOperator& K, const DiracMatrix& D, double t);

}  // namespace folix
