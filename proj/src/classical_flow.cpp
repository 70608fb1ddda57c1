#include "folix/classical_flow.hpp"

#include <cmath>
#include <stdexcept>

#include "folix/errors.hpp"

namespace folix {

namespace {

double sgn(double x) { return x > 0 ? 1.0 : -1.0; }

double wrap01(double x) { return x - std::floor(x); }

template <class State, class Field>
State rk4(const State& x, double h, Field&& f) {
  const State k1 = f(x);
  const State k2 = f(x + k1 * (0.5 * h));
  const State k3 = f(x + k2 * (0.5 * h));
  const State k4 = f(x + k3 * h);
  return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

// Small fixed-size vector so the RK4 template works on every state type.
template <int N>
struct V {
  std::array<double, N> x{};
  V operator+(const V& o) const {
    V r;
    for (int i = 0; i < N; ++i) r.x[i] = x[i] + o.x[i];
    return r;
  }
  V operator*(double s) const {
    V r;
    for (int i = 0; i < N; ++i) r.x[i] = x[i] * s;
    return r;
  }
};

V<4> pack(const FullCovector& c) { return {{c.u, c.v, c.p_u, c.p_v}}; }
FullCovector unpack4(const V<4>& s) { return {s.x[0], s.x[1], s.x[2], s.x[3]}; }

}  // namespace

int step_count(double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double r = std::abs(t) / dt;
  return std::max(1, static_cast<int>(std::ceil(r - 1e-9)));
}

double full_hamiltonian(const MetricCoeffs& metric, const FullCovector& x) {
  const auto [a, b, c] = eval_metric(metric, x.u, x.v);
  const double G = (c * x.p_u * x.p_u - 2 * b * x.p_u * x.p_v + a * x.p_v * x.p_v) / (a * c - b * b);
  return std::sqrt(G);
}

FullCovector full_vector_field(const MetricCoeffs& metric, const FullCovector& x) {
  const LocalGeometry g = local_geometry(metric, x.u, x.v);
  const double a = g.a.value, b = g.b.value, c = g.c.value, det = g.det_g;
  const double pu = x.p_u, pv = x.p_v;
  const double N = c * pu * pu - 2 * b * pu * pv + a * pv * pv;
  const double G = N / det;
  if (!(G > 0.0)) throw ZeroCovector("geodesic flow at the zero section");
  const double h = std::sqrt(G);
  const double det_u = g.a.du * c + a * g.c.du - 2 * b * g.b.du;
  const double det_v = g.a.dv * c + a * g.c.dv - 2 * b * g.b.dv;
  const double N_u = g.c.du * pu * pu - 2 * g.b.du * pu * pv + g.a.du * pv * pv;
  const double N_v = g.c.dv * pu * pu - 2 * g.b.dv * pu * pv + g.a.dv * pv * pv;
  const double G_u = (N_u * det - N * det_u) / (det * det);
  const double G_v = (N_v * det - N * det_v) / (det * det);
  return {(c * pu - b * pv) / (det * h), (a * pv - b * pu) / (det * h), -G_u / (2 * h),
          -G_v / (2 * h)};
}

FullCovector full_geodesic_step(const MetricCoeffs& metric, const FullCovector& x, double dt) {
  return unpack4(rk4(pack(x), dt, [&](const V<4>& s) { return pack(full_vector_field(metric, unpack4(s))); }));
}

FullCovector full_geodesic_flow(const MetricCoeffs& metric, const FullCovector& x, double t,
                                double dt) {
  const int n = step_count(t, dt);
  const double h = t / n;
  FullCovector y = x;
  for (int k = 0; k < n; ++k) y = full_geodesic_step(metric, y, h);
  return y;
}

TransverseFlow::TransverseFlow(MetricCoeffs metric, const BundleLikeReport& certificate)
    : metric_(std::move(metric)) {
  if (!certificate.bundle_like)
    throw NotBundleLike("transverse flow needs a bundle-like metric (max violation " +
                        std::to_string(certificate.max_violation) + ")");
}

double TransverseFlow::hamiltonian(const CovectorPoint& x) const {
  return std::abs(x.p_v) / local_geometry(metric_, x.u, x.v).a_H;
}

CovectorPoint TransverseFlow::vector_field(const CovectorPoint& x) const {
  const LocalGeometry g = local_geometry(metric_, x.u, x.v);
  const double th = theta();
  const double s = sgn(x.p_v);
  const double k = g.a_H * s / g.det_g;
  return {-k * (g.b.value + g.c.value * th), k * (g.a.value + g.b.value * th),
          g.a_H_v / (g.a_H * g.a_H) * std::abs(x.p_v)};
}

std::vector<CovectorPoint> TransverseFlow::trajectory(const CovectorPoint& x, double t,
                                                      double dt) const {
  if (x.p_v == 0.0) throw ZeroMomentum("restricted flow needs p_v != 0");
  const int n = step_count(t, dt);
  const double h = t / n;
  auto field = [&](const V<3>& s) {
    const CovectorPoint d = vector_field({s.x[0], s.x[1], s.x[2]});
    return V<3>{{d.u, d.v, d.p_v}};
  };
  std::vector<CovectorPoint> out;
  out.reserve(n + 1);
  out.push_back(x);
  V<3> s{{x.u, x.v, x.p_v}};
  for (int k = 0; k < n; ++k) {
    s = rk4(s, h, field);
    out.push_back({s.x[0], s.x[1], s.x[2]});
  }
  return out;
}

CovectorPoint TransverseFlow::flow(const CovectorPoint& x, double t, double dt) const {
  if (x.p_v == 0.0) throw ZeroMomentum("restricted flow needs p_v != 0");
  const int n = step_count(t, dt);
  const double h = t / n;
  V<3> s{{x.u, x.v, x.p_v}};
  for (int k = 0; k < n; ++k)
    s = rk4(s, h, [&](const V<3>& y) {
      const CovectorPoint d = vector_field({y.x[0], y.x[1], y.x[2]});
      return V<3>{{d.u, d.v, d.p_v}};
    });
  return {s.x[0], s.x[1], s.x[2]};
}

GroupoidPoint range_of(const GroupoidPoint& z) { return {z.u, z.v, z.p_v, 0.0}; }
GroupoidPoint source_of(const GroupoidPoint& z, double theta) {
  return {z.u - z.tau, z.v - theta * z.tau, z.p_v, 0.0};
}

namespace {

struct GroupoidRates {
  GroupoidPoint d;
  double weight = 0.0;
};

GroupoidRates groupoid_rates(const MetricCoeffs& metric, const GroupoidPoint& z) {
  const double th = metric.theta.value();
  const double s = sgn(z.p_v);
  const LocalGeometry r = local_geometry(metric, z.u, z.v);
  const LocalGeometry o = local_geometry(metric, z.u - z.tau, z.v - th * z.tau);
  const double kr = r.a_H * s / r.det_g;
  const double ko = o.a_H * s / o.det_g;
  const double du_r = -kr * (r.b.value + r.c.value * th);
  const double du_o = -ko * (o.b.value + o.c.value * th);
  GroupoidRates out;
  out.d = {du_r, kr * (r.a.value + r.b.value * th), r.a_H_v / (r.a_H * r.a_H) * std::abs(z.p_v),
           du_r - du_o};
  out.weight = -0.5 * s * (r.F + o.F);
  return out;
}

}  // namespace

GroupoidPoint TransverseFlow::groupoid_vector_field(const GroupoidPoint& z) const {
  return groupoid_rates(metric_, z).d;
}

TransverseFlow::Characteristic TransverseFlow::characteristic(const GroupoidPoint& z, double t,
                                                              double dt) const {
  if (z.p_v == 0.0) throw ZeroMomentum("groupoid flow needs p_v != 0");
  Characteristic out;
  if (t == 0.0) {
    out.end = z;
    return out;
  }
  const int n = step_count(t, dt);
  const double h = t / n;
  auto field = [&](const V<5>& y) {
    const GroupoidRates r = groupoid_rates(metric_, {y.x[0], y.x[1], y.x[2], y.x[3]});
    return V<5>{{r.d.u, r.d.v, r.d.p_v, r.d.tau, r.weight}};
  };
  V<5> s{{z.u, z.v, z.p_v, z.tau, 0.0}};
  for (int k = 0; k < n; ++k) s = rk4(s, h, field);
  out.end = {s.x[0], s.x[1], s.x[2], s.x[3]};
  out.weight = s.x[4];
  out.log_momentum = std::log(std::abs(out.end.p_v) / std::abs(z.p_v));
  return out;
}

GroupoidPoint TransverseFlow::groupoid_flow(const GroupoidPoint& z, double t, double dt) const {
  return characteristic(z, t, dt).end;
}

Profile1D Profile1D::from_trig(TrigPoly p) {
  auto shared = std::make_shared<TrigPoly>(std::move(p));
  return {[shared](double y) { return (*shared)(0.0, y); },
          [shared](double y) { return shared->eval_grad(0.0, y).dv; }};
}

Profile1D Profile1D::from_metric(const MetricCoeffs& metric) {
  const double q = metric.theta.is_rational() ? static_cast<double>(metric.theta.q()) : 1.0;
  if (!metric.theta.is_rational())
    throw std::invalid_argument("reduced profile needs a rational slope");
  auto m = std::make_shared<MetricCoeffs>(metric);
  return {[m, q](double y) { return local_geometry(*m, 0.0, y / q).a_H; },
          [m, q](double y) { return local_geometry(*m, 0.0, y / q).a_H_v / q; }};
}

double reduced_coordinate(const Slope& theta, double u, double v) {
  if (!theta.is_rational()) throw std::invalid_argument("reduced coordinate needs a rational slope");
  const double q = static_cast<double>(theta.q());
  const double p = static_cast<double>(theta.p());
  // q(v − θu) = qv − pu, exact for integer p, q
  return wrap01(q * v - p * u);
}

ReducedFlow::ReducedFlow(Profile1D profile, std::int64_t q)
    : profile_(std::move(profile)), q_(static_cast<double>(q)) {
  if (q <= 0) throw std::invalid_argument("reduced flow: q must be positive");
}

double ReducedFlow::hamiltonian(const ReducedState& x) const {
  return std::abs(x.eta) / profile_.value(x.y);
}

ReducedState ReducedFlow::vector_field(const ReducedState& x) const {
  const double a = profile_.value(x.y);
  if (!(a > 0.0)) throw std::domain_error("reduced profile must be positive");
  return {q_ * sgn(x.eta) / a, q_ * profile_.derivative(x.y) / (a * a) * std::abs(x.eta)};
}

std::vector<ReducedState> ReducedFlow::trajectory(const ReducedState& x, double t,
                                                  double dt) const {
  if (x.eta == 0.0) throw ZeroMomentum("reduced flow needs eta != 0");
  const int n = step_count(t, dt);
  const double h = t / n;
  auto field = [&](const V<2>& s) {
    const ReducedState d = vector_field({s.x[0], s.x[1]});
    return V<2>{{d.y, d.eta}};
  };
  std::vector<ReducedState> out;
  out.reserve(n + 1);
  out.push_back({wrap01(x.y), x.eta});
  V<2> s{{x.y, x.eta}};
  for (int k = 0; k < n; ++k) {
    s = rk4(s, h, field);
    out.push_back({wrap01(s.x[0]), s.x[1]});
  }
  return out;
}

ReducedState ReducedFlow::flow(const ReducedState& x, double t, double dt) const {
  return trajectory(x, t, dt).back();
}

std::vector<CovectorPoint> flow_ensemble(const TransverseFlow& flow,
                                         const std::vector<CovectorPoint>& starts, double t,
                                         double dt) {
  std::vector<CovectorPoint> out(starts.size());
  const long n = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) out[k] = flow.flow(starts[k], t, dt);
  return out;
}

std::vector<CovectorPoint> flow_ensemble_serial(const TransverseFlow& flow,
                                                const std::vector<CovectorPoint>& starts, double t,
                                                double dt) {
  std::vector<CovectorPoint> out;
  out.reserve(starts.size());
  for (const auto& s : starts) out.push_back(flow.flow(s, t, dt));
  return out;
}

}  // namespace folix
