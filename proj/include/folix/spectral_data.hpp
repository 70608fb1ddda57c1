#pragma once

// Fourier tables of smooth fields derived from a metric (square roots,
// quotients), resolved by grid doubling.

#include <functional>
#include <vector>

#include "folix/fourier.hpp"
#include "folix/geometry.hpp"

namespace folix {

// True if a, b, c carry no u-dependence.
bool metric_u_independent(const MetricCoeffs& metric);

struct ResolvedFields {
  std::vector<fourier::Coefficients2d> coeffs;  // one table per field
  int samples_u = 0;
  int samples_v = 0;
  double first_change = 0.0;  // change from the 4×-support grid to its double
  double final_change = 0.0;
};

// f(u, v, out) writes n_fields real values. Sampling starts at
// 4·(2S+1) points per axis (rounded up to a power of two, at least 16; one
// point in u for u-independent metrics) and doubles until coefficient tables
// change by <= 1e-14·scale. Throws AliasingDetected if the first doubling
// changes any coefficient by more than 1e-6.
ResolvedFields resolve_fields(const MetricCoeffs& metric, int n_fields,
                              const std::function<void(double, double, double*)>& f);

}  // namespace folix
