#pragma once

// Quantum evolution Φ_t(Op(k)) against Op(transported k), compared on
// transverse frequency bands lo <= |n| <= hi.

#include <limits>
#include <vector>

#include "folix/dirac.hpp"
#include "folix/quantization.hpp"
#include "folix/symbol.hpp"

namespace folix {

struct BandSpec {
  int n_lo = 1;
  int n_hi = 1;
  double center() const { return 0.5 * (n_lo + n_hi); }
};

// BandUnresolved unless 1 <= n_lo <= n_hi <= half_v.
void check_band(const BandSpec& band, const ModeBasis& basis);

// P K P, P the projection onto the band (all m, both fibers).
KernelOperator compress(const KernelOperator& K, const BandSpec& band);

// Largest singular value in the coefficient norm, by power iteration on K^†K
// from a fixed pseudo-random start.
double operator_norm(const KernelOperator& K, double tol = 1e-8, int max_iter = 500);

// Grid of the symbol produced by extraction.
struct SymbolGrid {
  int n_u = 32;
  int n_v = 32;
  int n_tau = 32;
  double T_max = 0.5;
};

// Degree-0 symbol read off from the matrix elements on the band. For column
// (m, n) the field q_mn(x) = Σ K_{(M,N),(m,n)} e_{M−m,N−n}(x) is the response to
// the wave e_{mn}, which oscillates like e^{2πin(v−θu)} across the leaves and
// with leafwise frequency m + θn along them. To leading order q_mn(x) is the
// leafwise Fourier transform of τ ↦ k(x,s,τ)√g_F(x−τℓ) at m + θn, so summing
// over m inverts it; the result is averaged over the band n of each sign.
// BandUnresolved if the band does not fit the basis, |θ|·n_hi > half_u/2
// (the m range misses the leafwise frequencies), or T_max > ½ (offsets
// beyond ½ alias under the leafwise Fourier sum).
HomogeneousSymbol extract_band_symbol(const KernelOperator& K, const BandSpec& band,
                                      const MetricCoeffs& metric, const SymbolGrid& grid);

struct EgorovOptions {
  Quadrature quad;
  double dt = 1e-2;           // transport step
  double bundle_tol = 1e-10;  // bundle-like certificate
  // Decay studies: repeat on the basis with half_v doubled and count a band
  // as resolved only if its relative residual moves by at most refine_tol
  // (relative). The top of a truncated basis is polluted by the Galerkin
  // cutoff once the flow moves frequencies past Nyquist.
  bool certify_refinement = false;
  double refine_tol = 0.1;
};

// A = Φ_t(Op(k0)), B = Op(transport(k0, t)), both on the Dirac basis.
struct EgorovPair {
  double t = 0.0;
  KernelOperator A, B;
  QuantizationReport quant_initial, quant_transported;
};
EgorovPair egorov_operators(const KernelSymbol& k0, const MetricCoeffs& metric,
                            const DiracMatrix& D, double t, const EgorovOptions& opts = {});

struct EgorovReport {
  double t = 0.0;
  BandSpec band;
  double residual_norm = 0.0;   // ‖P(A − B)P‖
  double reference_norm = 0.0;  // ‖PAP‖
  double relative_residual = 0.0;
  // relative(next band) / relative(this band); NaN when there is none
  double decay_ratio = std::numeric_limits<double>::quiet_NaN();
  bool resolved = true;
  double refined_relative = std::numeric_limits<double>::quiet_NaN();
};

// Report on one band; decay_ratio uses the doubled band when it fits.
EgorovReport band_report(const EgorovPair& pair, const BandSpec& band);
EgorovReport egorov_residual(const KernelSymbol& k0, const MetricCoeffs& metric,
                             const DiracMatrix& D, double t, const BandSpec& band,
                             const EgorovOptions& opts = {});

// Below this the residual is roundoff and a doubling says nothing about decay.
inline constexpr double kResidualFloor = 1e-10;

struct DecayVerdict {
  bool evaluated = false;  // false unless some consecutive pair is resolved
  bool pass = true;
  double threshold = 0.6;
  double worst_ratio = 0.0;
  int pairs = 0;           // consecutive resolved pairs that entered the verdict
};

struct DecayStudy {
  std::vector<EgorovReport> reports;
  DecayVerdict verdict;
};

// Bands must be strictly increasing (BandUnresolved otherwise). Each
// report's decay_ratio compares it with the next band; the verdict requires
// every ratio between resolved bands to be <= threshold unless the residual is
// already at the floor. `refined`, if given, is the same pair on a finer basis.
DecayStudy decay_study(const EgorovPair& pair, const std::vector<BandSpec>& bands,
                       double threshold = 0.6, const EgorovPair* refined = nullptr,
                       double refine_tol = 0.1);
DecayStudy decay_study(const KernelSymbol& k0, const MetricCoeffs& metric, const DiracMatrix& D,
                       double t, const std::vector<BandSpec>& bands, double threshold = 0.6,
                       const EgorovOptions& opts = {});

}  // namespace folix
