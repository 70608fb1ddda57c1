#include "folix/spectral_data.hpp"

#include <algorithm>
#include <cmath>

#include "folix/errors.hpp"

namespace folix {

bool metric_u_independent(const MetricCoeffs& metric) {
  for (const TrigPoly* p : {&metric.a, &metric.b, &metric.c})
    for (const auto& t : p->terms())
      if (t.m != 0 && t.c != 0.0) return false;
  return true;
}

namespace {

int start_size(int support) {
  int n = 16;
  while (n < 4 * (2 * support + 1)) n *= 2;
  return n;
}

std::vector<fourier::Coefficients2d> sample(int n_fields, int nu, int nv,
                                            const std::function<void(double, double, double*)>& f) {
  std::vector<std::vector<double>> vals(n_fields, std::vector<double>(static_cast<std::size_t>(nu) * nv));
  std::vector<double> out(n_fields);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      f(static_cast<double>(i) / nu, static_cast<double>(j) / nv, out.data());
      for (int k = 0; k < n_fields; ++k) vals[k][static_cast<std::size_t>(i) * nv + j] = out[k];
    }
  std::vector<fourier::Coefficients2d> c;
  for (auto& v : vals) c.push_back(fourier::analyze_real(v, nu, nv));
  return c;
}

// Largest coefficient change between a coarse and a fine table, with the
// coarse table's split Nyquist modes compared against the fine table as is.
double change(const std::vector<fourier::Coefficients2d>& coarse,
              const std::vector<fourier::Coefficients2d>& fine) {
  double d = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    const auto& f = fine[k];
    for (int p = -f.half_u(); p <= f.half_u(); ++p)
      for (int r = -f.half_v(); r <= f.half_v(); ++r)
        d = std::max(d, std::abs(f.at(p, r) - coarse[k].get(p, r)));
  }
  return d;
}

}  // namespace

ResolvedFields resolve_fields(const MetricCoeffs& metric, int n_fields,
                              const std::function<void(double, double, double*)>& f) {
  const bool u_free = metric_u_independent(metric);
  int nu = u_free ? 1 : start_size(metric.support_u());
  int nv = start_size(metric.support_v());
  auto coarse = sample(n_fields, nu, nv, f);
  double scale = 0.0;
  for (const auto& c : coarse) scale = std::max(scale, std::abs(c.get(0, 0)));
  scale = std::max(scale, 1e-300);

  ResolvedFields r;
  bool first = true;
  constexpr std::size_t kMaxSamples = std::size_t{1} << 22;
  for (;;) {
    const int nu2 = u_free ? 1 : 2 * nu;
    const int nv2 = 2 * nv;
    auto fine = sample(n_fields, nu2, nv2, f);
    const double d = change(coarse, fine);
    if (first) {
      r.first_change = d;
      if (d > 1e-6)
        throw AliasingDetected("metric-derived field not resolved at 4x support: coefficient change " +
                               std::to_string(d) + " under grid doubling");
      first = false;
    }
    coarse = std::move(fine);
    nu = nu2;
    nv = nv2;
    r.final_change = d;
    if (d <= 1e-14 * scale || static_cast<std::size_t>(4) * nu * nv > kMaxSamples) break;
  }
  r.coeffs = std::move(coarse);
  r.samples_u = nu;
  r.samples_v = nv;
  return r;
}

}  // namespace folix
