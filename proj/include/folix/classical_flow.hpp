#pragma once

// Geodesic flow on T*T², its restriction to the conormal bundle of F_θ, the
// lifted flow on the holonomy groupoid of the linearized foliation, and the
// reduced flow on T*S¹ for rational slopes. All integrators are classical RK4
// with a fixed step.

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "folix/geometry.hpp"

namespace folix {

struct FullCovector {
  double u = 0.0, v = 0.0, p_u = 0.0, p_v = 0.0;
};

// (u, v, −θ p_v, p_v) on N*F_θ.
struct CovectorPoint {
  double u = 0.0, v = 0.0, p_v = 0.0;
};

// Range (u, v, p_v), source (u − τ, v − θτ, p_v).
struct GroupoidPoint {
  double u = 0.0, v = 0.0, p_v = 0.0, tau = 0.0;
};

struct ReducedState {
  double y = 0.0, eta = 0.0;
};

// Number of RK4 steps used to cover |t| with steps no longer than dt.
int step_count(double t, double dt);

// h = G(p)^{1/2}, G the inverse metric.
double full_hamiltonian(const MetricCoeffs& metric, const FullCovector& x);
FullCovector full_vector_field(const MetricCoeffs& metric, const FullCovector& x);
// Throws ZeroCovector if G(p) = 0.
FullCovector full_geodesic_step(const MetricCoeffs& metric, const FullCovector& x, double dt);
FullCovector full_geodesic_flow(const MetricCoeffs& metric, const FullCovector& x, double t,
                                double dt);

// Flow on N*F_θ and its groupoid lift. Constructing one requires a bundle-like
// certificate (NotBundleLike otherwise).
class TransverseFlow {
 public:
  TransverseFlow(MetricCoeffs metric, const BundleLikeReport& certificate);

  const MetricCoeffs& metric() const { return metric_; }
  double theta() const { return metric_.theta.value(); }

  // |p_v| / a_H(u, v)
  double hamiltonian(const CovectorPoint& x) const;
  CovectorPoint vector_field(const CovectorPoint& x) const;
  // Trajectory sampled at every step, starting with x itself. Throws
  // ZeroMomentum for p_v = 0.
  std::vector<CovectorPoint> trajectory(const CovectorPoint& x, double t, double dt) const;
  CovectorPoint flow(const CovectorPoint& x, double t, double dt) const;

  GroupoidPoint groupoid_vector_field(const GroupoidPoint& z) const;
  GroupoidPoint groupoid_flow(const GroupoidPoint& z, double t, double dt) const;

  // Groupoid flow together with the path integrals needed for symbol
  // transport: ∫ of −½ sign(p_v)(F(range) + F(source)) and of
  // sign(p_v) a_H^{-2} ∂_v a_H (the log of the homogeneity factor per unit degree).
  struct Characteristic {
    GroupoidPoint end;
    double weight = 0.0;
    double log_momentum = 0.0;
  };
  Characteristic characteristic(const GroupoidPoint& z, double t, double dt) const;

 private:
  MetricCoeffs metric_;
};

GroupoidPoint range_of(const GroupoidPoint& z);
GroupoidPoint source_of(const GroupoidPoint& z, double theta);

// a_H as a function of the reduced coordinate Y ∈ [0,1).
struct Profile1D {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  // Real trig polynomial in one variable, given as a TrigPoly in v.
  static Profile1D from_trig(TrigPoly p);
  // a_H restricted to u = 0, reparametrized by Y = q v (θ = p/q).
  static Profile1D from_metric(const MetricCoeffs& metric);
};

// dY/dt = q sign(η)/a(Y), dη/dt = q a'(Y)/a(Y)² |η|; Y reduced mod 1.
// `q` is the slope denominator (1 for θ = 0).
class ReducedFlow {
 public:
  ReducedFlow(Profile1D profile, std::int64_t q = 1);
  double hamiltonian(const ReducedState& x) const;
  ReducedState vector_field(const ReducedState& x) const;
  std::vector<ReducedState> trajectory(const ReducedState& x, double t, double dt) const;
  ReducedState flow(const ReducedState& x, double t, double dt) const;

 private:
  Profile1D profile_;
  double q_;
};

// Y = q (v − θu) mod 1 for θ = p/q.
double reduced_coordinate(const Slope& theta, double u, double v);

// Endpoints for a batch of initial conditions; OpenMP over trajectories, and
// the serial reference.
std::vector<CovectorPoint> flow_ensemble(const TransverseFlow& flow,
                                         const std::vector<CovectorPoint>& starts, double t,
                                         double dt);
std::vector<CovectorPoint> flow_ensemble_serial(const TransverseFlow& flow,
                                                const std::vector<CovectorPoint>& starts, double t,
                                                double dt);

}  // namespace folix
