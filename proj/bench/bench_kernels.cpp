// Parallel kernels against their serial references. Thread count from
// FOLIX_THREADS / OMP_NUM_THREADS as usual.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "folix/classical_flow.hpp"
#include "folix/quantization.hpp"
#include "folix/symbol.hpp"

using namespace folix;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double bump(double x, double r) {
  const double y = x / r;
  return std::abs(y) >= 1 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - y * y));
}

MetricCoeffs flat() {
  return {TrigPoly::constant(1.0), TrigPoly::constant(0.0), TrigPoly::constant(1.0), Slope::rational(1, 2)};
}

// a = 1 + ½ sin 2πv: bundle-like, non-trivial flow.
MetricCoeffs sin_v() {
  return {TrigPoly::constant(1.0) + TrigPoly::sine(0, 1, 0.5), TrigPoly::constant(0.0), TrigPoly::constant(1.0),
          Slope::rational(0, 1)};
}

HomogeneousSymbol symbol(int n, int nt) {
  return HomogeneousSymbol::from_function(0, n, n, nt, 0.5, [](double u, double v, double s, double tau) {
    Mat2 m = Mat2::Identity() * (1.0 + 0.4 * std::cos(kTwoPi * (u + v)) + 0.2 * s * std::sin(kTwoPi * v));
    m(0, 1) = std::complex<double>(0.1, 0.3 * tau);
    return Mat2(m * bump(tau, 0.2));
  });
}

template <bool Parallel>
void BM_convolve(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto a = symbol(n, 32), b = symbol(n, 32);
  const LeafVolume vol(flat());
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? convolve(a, b, vol) : convolve_serial(a, b, vol));
}

template <bool Parallel>
void BM_transport(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto k = symbol(n, 32);
  const MetricCoeffs m = sin_v();
  const TransverseFlow f(m, is_bundle_like(m, 1e-10));
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? transport(k, f, 0.5, 1e-2) : transport_serial(k, f, 0.5, 1e-2));
}

template <bool Parallel>
void BM_quantize(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const KernelSymbol ks{symbol(n, 32)};
  const auto B = ModeBasis::for_grid(n, n);
  const MetricCoeffs m = sin_v();
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? quantize(ks, m, B) : quantize_serial(ks, m, B));
}

template <bool Parallel>
void BM_flow_ensemble(benchmark::State& st) {
  const MetricCoeffs m = sin_v();
  const TransverseFlow f(m, is_bundle_like(m, 1e-10));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<CovectorPoint> starts(static_cast<std::size_t>(st.range(0)));
  for (auto& p : starts) p = {U(rng), U(rng), U(rng) - 0.5};
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? flow_ensemble(f, starts, 1.0, 1e-3) : flow_ensemble_serial(f, starts, 1.0, 1e-3));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_convolve, false)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_convolve, true)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_transport, false)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_transport, true)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_quantize, false)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_quantize, true)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_flow_ensemble, false)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_flow_ensemble, true)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
