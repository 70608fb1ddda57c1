#include "folix/runner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "folix/classical_flow.hpp"
#include "folix/dirac.hpp"
#include "folix/egorov.hpp"
#include "folix/errors.hpp"
#include "folix/geometry.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace folix {

using nlohmann::json;

namespace {

std::string pad3(std::size_t i) {
  std::ostringstream s;
  s << std::setw(3) << std::setfill('0') << i;
  return s.str();
}

// Rows of `width` numbers from an inline list, or the named columns of a CSV.
std::vector<std::vector<double>> load_points(const json& spec, const std::vector<std::string>& cols,
                                             const std::string& pointer) {
  std::vector<std::vector<double>> out;
  if (spec.is_string()) {
    CsvTable t;
    try {
      t = read_csv(spec.get<std::string>());
    } catch (const UnknownArtifact& e) {
      throw ConfigError(pointer, e.what());
    }
    std::vector<std::size_t> idx;
    for (const auto& c : cols) {
      const auto it = std::find(t.columns.begin(), t.columns.end(), c);
      if (it == t.columns.end()) throw ConfigError(pointer, "points CSV lacks column '" + c + "'");
      idx.push_back(static_cast<std::size_t>(it - t.columns.begin()));
    }
    for (const auto& r : t.rows) {
      std::vector<double> p;
      for (auto i : idx) p.push_back(r[i]);
      out.push_back(p);
    }
  } else {
    for (const auto& p : spec) out.push_back(p.get<std::vector<double>>());
  }
  if (out.empty()) throw ConfigError(pointer, "no initial conditions");
  return out;
}

TransverseFlow make_flow(const ScenarioConfig& c) {
  return TransverseFlow(c.metric, is_bundle_like(c.metric, 1e-10));
}

struct Ctx {
  const ScenarioConfig& c;
  fs::path dir;
  RunResult r;

  fs::path add(const std::string& name) {
    const fs::path p = dir / name;
    r.artifacts.push_back(p);
    return p;
  }
  void json_artifact(const std::string& name, const json& j) { write_json(add(name), j); }
  void csv_artifact(const std::string& name, const CsvTable& t) { write_csv(add(name), t); }
  void plot(const std::string& csv, PlotKind kind) { r.artifacts.push_back(emit_plotdata(dir / csv, kind)); }
  void binary_symbol(const std::string& name, const HomogeneousSymbol& k) {
    write_symbol(add(name), k);
    r.artifacts.push_back(dir / (name + ".json"));
  }
  void binary_operator(const std::string& name, const KernelOperator& K, const json& info) {
    write_operator(add(name), K, info);
    r.artifacts.push_back(dir / (name + ".json"));
  }
};

json quad_json(const QuantizationReport& q) {
  return {{"eta_max", q.eta_max}, {"n_eta", q.n_eta}, {"entry_change", q.entry_change}, {"measured", q.measured}};
}

void geometry_check(Ctx& x) {
  const auto& c = x.c;
  const auto g = build_geometry(c.metric, c.n_u, c.n_v);
  const auto bl = is_bundle_like(c.metric, 1e-10);
  const json rep = {{"a_H_min", g.a_H.min()},
                    {"a_H_max", g.a_H.max()},
                    {"bundle_like", bl.bundle_like},
                    {"max_violation", bl.max_violation},
                    {"tolerance", bl.tolerance},
                    {"theta", c.metric.theta.value()},
                    {"theta_rational", bl.theta_rational},
                    {"F_min", g.F.min()},
                    {"F_max", g.F.max()},
                    {"det_g_min", g.det_g.min()}};
  x.json_artifact("geometry.json", rep);
  CsvTable f{{"u", "v", "value"}, {}};
  for (int i = 0; i < c.n_u; ++i)
    for (int j = 0; j < c.n_v; ++j)
      f.rows.push_back({static_cast<double>(i) / c.n_u, static_cast<double>(j) / c.n_v, g.F(i, j)});
  x.csv_artifact("mean_curvature.csv", f);
  x.plot("mean_curvature.csv", PlotKind::FieldSlice);
  x.r.summary = rep;
}

void flow(Ctx& x) {
  const auto& c = x.c;
  const auto fl = make_flow(c);
  const auto pts = load_points(c.points, {"u", "v", "p_v"}, "/points");
  double drift = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const CovectorPoint x0{pts[k][0], pts[k][1], pts[k][2]};
    const auto traj = fl.trajectory(x0, c.t_end, c.flow_dt);
    const double h0 = fl.hamiltonian(x0);
    const double step = traj.size() > 1 ? c.t_end / static_cast<double>(traj.size() - 1) : 0.0;
    CsvTable t{{"t", "u", "v", "p_v", "hamiltonian"}, {}};
    for (std::size_t s = 0; s < traj.size(); ++s) {
      const double h = fl.hamiltonian(traj[s]);
      drift = std::max(drift, std::abs(h - h0));
      t.rows.push_back({s * step, traj[s].u, traj[s].v, traj[s].p_v, h});
    }
    const std::string name = "trajectory_" + pad3(k) + ".csv";
    x.csv_artifact(name, t);
    x.plot(name, PlotKind::Trajectory);
  }
  const json rep = {{"trajectories", pts.size()}, {"t", c.t_end}, {"dt", c.flow_dt}, {"max_hamiltonian_drift", drift}};
  x.json_artifact("flow.json", rep);
  x.r.summary = rep;
}

void reduced_flow(Ctx& x) {
  const auto& c = x.c;
  if (!c.metric.theta.is_rational()) throw ConfigError("/metric/theta", "the reduced flow needs a rational slope");
  const auto bl = is_bundle_like(c.metric, 1e-10);
  if (!bl.bundle_like) throw NotBundleLike("metric is not bundle-like (violation " + format_double(bl.max_violation) + ")");
  const ReducedFlow fl(Profile1D::from_metric(c.metric), c.metric.theta.q());
  const auto pts = load_points(c.reduced_points, {"y", "eta"}, "/reduced_points");
  double drift = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const ReducedState x0{pts[k][0], pts[k][1]};
    if (x0.eta == 0.0) throw ConfigError("/reduced_points/" + std::to_string(k) + "/1", "eta must be nonzero");
    const auto traj = fl.trajectory(x0, c.t_end, c.flow_dt);
    const double h0 = fl.hamiltonian(x0);
    const double step = traj.size() > 1 ? c.t_end / static_cast<double>(traj.size() - 1) : 0.0;
    CsvTable t{{"t", "y", "eta", "h"}, {}};
    for (std::size_t s = 0; s < traj.size(); ++s) {
      const double h = fl.hamiltonian(traj[s]);
      drift = std::max(drift, std::abs(h - h0));
      t.rows.push_back({s * step, traj[s].y, traj[s].eta, h});
    }
    x.csv_artifact("reduced_" + pad3(k) + ".csv", t);
  }
  const json rep = {{"trajectories", pts.size()}, {"t", c.t_end}, {"dt", c.flow_dt}, {"max_hamiltonian_drift", drift}};
  x.json_artifact("reduced_flow.json", rep);
  x.r.summary = rep;
}

void spectrum(Ctx& x) {
  const auto& c = x.c;
  const auto B = ModeBasis::for_grid(c.n_u, c.n_v);
  const auto D = assemble_dirac(c.metric, B);
  const auto ev = D.eigenvalues();
  CsvTable t{{"index", "lambda", "abs_lambda"}, {}};
  std::vector<double> absd(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    absd[i] = std::sqrt(ev(i) * ev(i) + 1.0);
    t.rows.push_back({static_cast<double>(i), ev(i), absd[i]});
  }
  x.csv_artifact("spectrum.csv", t);
  // ⟨D⟩ eigenvalues grouped within 1e-8 (relative for large values).
  std::sort(absd.begin(), absd.end());
  CsvTable g{{"abs_lambda", "multiplicity"}, {}};
  for (std::size_t i = 0; i < absd.size();) {
    std::size_t j = i + 1;
    while (j < absd.size() && absd[j] - absd[i] <= 1e-8 * std::max(1.0, absd[i])) ++j;
    g.rows.push_back({absd[i], static_cast<double>(j - i)});
    i = j;
  }
  x.csv_artifact("spectrum_groups.csv", g);
  const json rep = {{"dim", B.dim()},
                    {"fast_path", D.fast_path},
                    {"hermiticity", D.hermiticity},
                    {"weighted_hermiticity", D.weighted_hermiticity},
                    {"spectral_symmetry", D.spectral_symmetry},
                    {"smallest_abs_D", absd.front()},
                    {"smallest_abs_D_multiplicity", g.rows.front()[1]}};
  x.json_artifact("dirac.json", rep);
  if (c.write_operators) {
    const json info = {{"metric", metric_to_json(c.metric)}};
    x.binary_operator("dirac.bin", D.D(), info);
    x.binary_operator("abs_dirac.bin", abs_dirac(D), info);
    json pinfo = info;
    pinfo["t"] = c.t_end;
    x.binary_operator("propagator.bin", propagate(D, c.t_end).U, pinfo);
  }
  x.r.summary = rep;
}

CsvTable symbol_slice(const HomogeneousSymbol& k) {
  // ∫ ½ tr k(x, +, τ) dτ, real part
  CsvTable t{{"u", "v", "value"}, {}};
  for (int i = 0; i < k.n_u(); ++i)
    for (int j = 0; j < k.n_v(); ++j) {
      double s = 0.0;
      for (int q = 0; q < k.n_tau(); ++q) s += 0.5 * k.at(i, j, 0, q).trace().real();
      t.rows.push_back({k.u(i), k.v(j), s * k.h_tau()});
    }
  return t;
}

void transport_cmd(Ctx& x) {
  const auto& c = x.c;
  const auto fl = make_flow(c);
  const auto k0 = build_symbol(c);
  const auto kt = transport(k0, fl, c.t_end, c.transport_dt);
  x.binary_symbol("symbol_initial.bin", k0);
  x.binary_symbol("symbol_final.bin", kt);
  x.csv_artifact("symbol_initial_slice.csv", symbol_slice(k0));
  x.csv_artifact("symbol_final_slice.csv", symbol_slice(kt));
  x.plot("symbol_initial_slice.csv", PlotKind::FieldSlice);
  x.plot("symbol_final_slice.csv", PlotKind::FieldSlice);
  const auto [lo, hi] = kt.support();
  const json rep = {{"t", c.t_end},
                    {"dt", c.transport_dt},
                    {"sup_initial", sup_norm(k0)},
                    {"sup_final", sup_norm(kt)},
                    {"support_final", {lo, hi}}};
  x.json_artifact("transport.json", rep);
  x.r.summary = rep;
}

void egorov_cmd(Ctx& x) {
  const auto& c = x.c;
  const auto B = ModeBasis::for_grid(c.n_u, c.n_v);
  const auto D = assemble_dirac(c.metric, B);
  const KernelSymbol k0 = build_kernel_symbol(c);
  EgorovOptions opts;
  opts.quad = c.quad;
  opts.dt = c.transport_dt;
  const EgorovPair pair = egorov_operators(k0, c.metric, D, c.t_end, opts);
  std::optional<EgorovPair> fine;
  if (c.certify_refinement)
    fine = egorov_operators(k0, c.metric, assemble_dirac(c.metric, {B.half_u, 2 * B.half_v}), c.t_end, opts);
  const DecayStudy st = decay_study(pair, c.bands, c.decay_threshold, fine ? &*fine : nullptr, c.refine_tol);

  CsvTable t{{"t", "n_lo", "n_hi", "residual", "reference", "relative", "decay_ratio", "resolved"}, {}};
  double worst_rel = 0.0;
  for (const auto& r : st.reports) {
    t.rows.push_back({r.t, double(r.band.n_lo), double(r.band.n_hi), r.residual_norm, r.reference_norm,
                      r.relative_residual, r.decay_ratio, r.resolved ? 1.0 : 0.0});
    worst_rel = std::max(worst_rel, r.relative_residual);
  }
  x.csv_artifact("egorov.csv", t);
  x.plot("egorov.csv", PlotKind::ResidualCurve);

  json criteria = json::array();
  bool pass = true;
  if (c.t_end == 0.0) {
    const bool ok = worst_rel <= kResidualFloor;
    criteria.push_back({{"name", "t0_relative_residual"}, {"value", worst_rel}, {"threshold", kResidualFloor}, {"pass", ok}});
    pass = pass && ok;
  }
  {
    const auto& v = st.verdict;
    const bool ok = v.pass;
    criteria.push_back({{"name", "band_decay"},
                        {"evaluated", v.evaluated},
                        {"pairs", v.pairs},
                        {"worst_ratio", v.worst_ratio},
                        {"threshold", v.threshold},
                        {"pass", ok}});
    pass = pass && ok;
  }
  criteria.push_back({{"name", "quantization_certified"},
                      {"initial", quad_json(pair.quant_initial)},
                      {"transported", quad_json(pair.quant_transported)},
                      {"tolerance", c.quad.tol},
                      {"pass", true}});
  const json verdict = {{"pass", pass}, {"criteria", criteria}};
  x.json_artifact("verdict.json", verdict);
  x.r.summary = verdict;
  if (!pass) x.r.status = kExitVerdict;
}

}  // namespace

std::vector<BandSpec> parse_band_list(const std::string& s) {
  json arr = json::array();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    int lo = 0, hi = 0;
    try {
      if (colon == std::string::npos) throw std::invalid_argument("");
      std::size_t a = 0, b = 0;
      lo = std::stoi(item.substr(0, colon), &a);
      hi = std::stoi(item.substr(colon + 1), &b);
      if (a != colon || b != item.size() - colon - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("/bands", "expected lo:hi[,lo:hi...], got '" + s + "'");
    }
    arr.push_back({lo, hi});
  }
  if (arr.empty()) throw ConfigError("/bands", "empty band list");
  json wrapper = {{"bands", arr}};
  return parse_config(wrapper).bands;
}

ScenarioConfig resolve(const RunRequest& req) {
  ScenarioConfig c = load_config(req.config_path);
  if (req.t) {
    if (!std::isfinite(*req.t) || *req.t < 0) throw ConfigError("/flow/t_end", "--t must be a finite value >= 0");
    c.t_end = *req.t;
  }
  if (req.points) {
    if (req.command == "reduced-flow")
      c.reduced_points = *req.points;
    else
      c.points = *req.points;
  }
  if (req.bands) c.bands = parse_band_list(*req.bands);
  if (req.out) c.out = *req.out;
  validate(c, req.command == "egorov");
  return c;
}

RunResult execute(const std::string& command, const ScenarioConfig& config) {
  Ctx x{config, fs::path(config.out), {}};
  fs::create_directories(x.dir);
  if (command == "geometry-check")
    geometry_check(x);
  else if (command == "flow")
    flow(x);
  else if (command == "reduced-flow")
    reduced_flow(x);
  else if (command == "spectrum")
    spectrum(x);
  else if (command == "transport")
    transport_cmd(x);
  else if (command == "egorov")
    egorov_cmd(x);
  else
    throw ConfigError("", "unknown command '" + command + "'");
  x.r.manifest = write_manifest(x.dir, command, to_json(config), x.r.artifacts);
  return x.r;
}

int run(const RunRequest& req, std::ostream& log, std::ostream& err) {
  try {
    const ScenarioConfig c = resolve(req);
#ifdef _OPENMP
    if (c.deterministic) omp_set_dynamic(0);
#endif
    const RunResult r = execute(req.command, c);
    log << r.summary.dump() << '\n';
    log << "manifest: " << (fs::path(c.out) / "manifest.json").string() << '\n';
    return r.status;
  } catch (const ConfigError& e) {
    err << json{{"error", "config"}, {"pointer", e.pointer()}, {"message", e.what()}}.dump() << '\n';
    return kExitConfig;
  } catch (const CertificationError& e) {
    err << json{{"error", "certification"}, {"message", e.what()}}.dump() << '\n';
    return kExitCertification;
  } catch (const std::exception& e) {
    err << json{{"error", "runtime"}, {"message", e.what()}}.dump() << '\n';
    return kExitError;
  }
}

}  // namespace folix
