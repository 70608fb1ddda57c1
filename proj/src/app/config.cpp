#include "folix/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "folix/errors.hpp"

namespace folix {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void fail(const std::string& ptr, const std::string& what) { throw ConfigError(ptr, what); }

void allow_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(ptr, "expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(ptr + "/" + k, "unknown key");
}

double get_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(ptr, "not finite");
  return x;
}

int get_int(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) fail(ptr, "expected an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& ptr) {
  if (!j.is_boolean()) fail(ptr, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) fail(ptr, "expected a string");
  return j.get<std::string>();
}

int positive_int(const json& j, const std::string& ptr) {
  const int v = get_int(j, ptr);
  if (v <= 0) fail(ptr, "must be positive");
  return v;
}

double positive(const json& j, const std::string& ptr) {
  const double v = get_number(j, ptr);
  if (v <= 0) fail(ptr, "must be positive");
  return v;
}

std::vector<TrigTerm> parse_terms(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected [[m,n,re,im],...]");
  std::vector<TrigTerm> terms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    const auto& t = j[i];
    if (!t.is_array() || (t.size() != 4 && t.size() != 3)) fail(p, "expected [m,n,re,im]");
    terms.push_back({get_int(t[0], p + "/0"), get_int(t[1], p + "/1"),
                     {get_number(t[2], p + "/2"), t.size() == 4 ? get_number(t[3], p + "/3") : 0.0}});
  }
  return terms;
}

TrigPoly parse_poly(const json& j, const std::string& ptr) {
  auto terms = parse_terms(j, ptr);
  try {
    return TrigPoly(std::move(terms));
  } catch (const std::invalid_argument& e) {
    fail(ptr, e.what());
  }
}

json poly_to_json(const TrigPoly& p) {
  json a = json::array();
  for (const auto& t : p.terms()) a.push_back({t.m, t.n, t.c.real(), t.c.imag()});
  return a;
}

// Explicit pairs of [a, b] with 1 <= a <= b.
std::vector<BandSpec> parse_bands(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected [[n_lo,n_hi],...]");
  std::vector<BandSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != 2) fail(p, "expected [n_lo,n_hi]");
    const BandSpec b{get_int(j[i][0], p + "/0"), get_int(j[i][1], p + "/1")};
    if (b.n_lo < 1) fail(p + "/0", "n_lo must be >= 1");
    if (b.n_hi < b.n_lo) fail(p + "/1", "n_hi must be >= n_lo");
    if (!out.empty() && (b.n_lo <= out.back().n_lo || b.n_hi <= out.back().n_hi))
      fail(p, "bands must be strictly increasing");
    out.push_back(b);
  }
  return out;
}

json points_json(const json& j, const std::string& ptr, std::size_t width) {
  if (j.is_string()) return j;
  if (!j.is_array()) fail(ptr, "expected a list of points or a CSV path");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != width)
      fail(p, "expected " + std::to_string(width) + " numbers");
    for (std::size_t k = 0; k < width; ++k) get_number(j[i][k], p + "/" + std::to_string(k));
  }
  return j;
}

cd eval_complex(const std::vector<TrigTerm>& terms, double u, double v) {
  cd s = 0.0;
  for (const auto& t : terms) s += t.c * std::polar(1.0, kTwoPi * (t.m * u + t.n * v));
  return s;
}

double bump(double x, double r) {
  const double y = x / r;
  if (std::abs(y) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

}  // namespace

MetricCoeffs metric_preset(const std::string& name) {
  const TrigPoly one = TrigPoly::constant(1.0), zero = TrigPoly::constant(0.0);
  if (name == "flat") return {one, zero, one, Slope::rational(0, 1)};
  if (name == "flat_golden") return {one, zero, one, Slope::real((std::sqrt(5.0) - 1.0) / 2.0)};
  if (name == "sin_v") return {one + TrigPoly::sine(0, 1, 0.5), zero, one, Slope::rational(0, 1)};
  // c depends on v − u/2 only, θ = 1/2.
  if (name == "leafwise")
    return {one, zero, one + TrigPoly::cosine(-1, 2, 0.3), Slope::rational(1, 2)};
  throw std::invalid_argument("unknown metric preset '" + name + "'");
}

MetricCoeffs parse_metric(const json& j, const std::string& ptr) {
  if (j.is_string()) {
    try {
      return metric_preset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(ptr, e.what());
    }
  }
  allow_keys(j, ptr, {"theta", "a", "b", "c"});
  for (const char* k : {"theta", "a", "b", "c"})
    if (!j.contains(k)) fail(ptr + "/" + k, "missing");
  const auto& th = j["theta"];
  const std::string tp = ptr + "/theta";
  Slope slope = Slope::rational(0, 1);
  if (th.is_object() && th.contains("rational") && th.size() == 1) {
    const auto& pq = th["rational"];
    if (!pq.is_array() || pq.size() != 2) fail(tp + "/rational", "expected [p,q]");
    const int p = get_int(pq[0], tp + "/rational/0");
    const int q = get_int(pq[1], tp + "/rational/1");
    if (q <= 0) fail(tp + "/rational/1", "q must be positive");
    slope = Slope::rational(p, q);
  } else if (th.is_object() && th.contains("real") && th.size() == 1) {
    slope = Slope::real(get_number(th["real"], tp + "/real"));
  } else {
    fail(tp, "expected {\"rational\":[p,q]} or {\"real\":x}");
  }
  MetricCoeffs m{parse_poly(j["a"], ptr + "/a"), parse_poly(j["b"], ptr + "/b"),
                 parse_poly(j["c"], ptr + "/c"), slope};
  try {
    validate_metric(m);
  } catch (const NonPositiveMetric& e) {
    fail(ptr, e.what());
  }
  return m;
}

json metric_to_json(const MetricCoeffs& m) {
  json th;
  if (m.theta.is_rational())
    th["rational"] = {m.theta.p(), m.theta.q()};
  else
    th["real"] = m.theta.value();
  return {{"theta", th}, {"a", poly_to_json(m.a)}, {"b", poly_to_json(m.b)}, {"c", poly_to_json(m.c)}};
}

ScenarioConfig parse_config(const json& root) {
  if (root.is_object() && root.contains("manifest_version")) {
    if (!root.contains("config")) fail("/config", "manifest without config");
    return parse_config(root["config"]);
  }
  allow_keys(root, "", {"metric", "grid", "flow", "transport", "quantization", "symbol", "bands",
                        "egorov", "points", "reduced_points", "write_operators", "out", "seed",
                        "deterministic"});
  ScenarioConfig c;
  if (root.contains("metric")) c.metric = parse_metric(root["metric"], "/metric");
  if (root.contains("grid")) {
    const auto& g = root["grid"];
    allow_keys(g, "/grid", {"n_u", "n_v", "n_tau", "T_max"});
    if (g.contains("n_u")) c.n_u = positive_int(g["n_u"], "/grid/n_u");
    if (g.contains("n_v")) c.n_v = positive_int(g["n_v"], "/grid/n_v");
    if (g.contains("n_tau")) c.n_tau = positive_int(g["n_tau"], "/grid/n_tau");
    if (g.contains("T_max")) c.T_max = positive(g["T_max"], "/grid/T_max");
    if (c.n_tau % 2) fail("/grid/n_tau", "must be even");
  }
  if (root.contains("flow")) {
    const auto& f = root["flow"];
    allow_keys(f, "/flow", {"dt", "t_end"});
    if (f.contains("dt")) c.flow_dt = positive(f["dt"], "/flow/dt");
    if (f.contains("t_end")) {
      c.t_end = get_number(f["t_end"], "/flow/t_end");
      if (c.t_end < 0) fail("/flow/t_end", "must be >= 0");
    }
  }
  if (root.contains("transport")) {
    const auto& t = root["transport"];
    allow_keys(t, "/transport", {"dt"});
    if (t.contains("dt")) c.transport_dt = positive(t["dt"], "/transport/dt");
  }
  if (root.contains("quantization")) {
    const auto& q = root["quantization"];
    allow_keys(q, "/quantization", {"eta_max", "n_eta", "R", "eta0", "tol"});
    if (q.contains("eta_max")) {
      c.quad.eta_max = get_number(q["eta_max"], "/quantization/eta_max");
      if (c.quad.eta_max < 0) fail("/quantization/eta_max", "must be >= 0 (0 selects the default)");
    }
    if (q.contains("n_eta")) {
      c.quad.n_eta = get_int(q["n_eta"], "/quantization/n_eta");
      if (c.quad.n_eta < 0) fail("/quantization/n_eta", "must be >= 0 (0 selects the default)");
    }
    if (q.contains("tol")) c.quad.tol = positive(q["tol"], "/quantization/tol");
    if (q.contains("R")) {
      c.R = positive(q["R"], "/quantization/R");
      if (c.R >= 0.5) fail("/quantization/R", "must be < 1/2");
    }
    if (q.contains("eta0")) c.eta0 = positive(q["eta0"], "/quantization/eta0");
  }
  if (root.contains("symbol")) {
    const auto& s = root["symbol"];
    allow_keys(s, "/symbol", {"preset", "degree", "width", "fields"});
    if (s.contains("preset")) c.symbol.preset = get_string(s["preset"], "/symbol/preset");
    if (s.contains("degree")) c.symbol.degree = get_int(s["degree"], "/symbol/degree");
    if (s.contains("width")) c.symbol.width = positive(s["width"], "/symbol/width");
    if (s.contains("fields")) c.symbol.fields = s["fields"];
    const auto& p = c.symbol.preset;
    if (p != "cos_v" && p != "constant" && p != "random" && p != "fields")
      fail("/symbol/preset", "unknown preset '" + p + "'");
    if (p == "fields" && c.symbol.fields.is_null()) fail("/symbol/fields", "missing");
  }
  if (root.contains("bands")) c.bands = parse_bands(root["bands"], "/bands");
  if (root.contains("egorov")) {
    const auto& e = root["egorov"];
    allow_keys(e, "/egorov", {"decay_threshold", "certify_refinement", "refine_tol"});
    if (e.contains("decay_threshold")) c.decay_threshold = positive(e["decay_threshold"], "/egorov/decay_threshold");
    if (e.contains("certify_refinement"))
      c.certify_refinement = get_bool(e["certify_refinement"], "/egorov/certify_refinement");
    if (e.contains("refine_tol")) c.refine_tol = positive(e["refine_tol"], "/egorov/refine_tol");
  }
  if (root.contains("points")) c.points = points_json(root["points"], "/points", 3);
  if (root.contains("reduced_points")) c.reduced_points = points_json(root["reduced_points"], "/reduced_points", 2);
  if (root.contains("write_operators")) c.write_operators = get_bool(root["write_operators"], "/write_operators");
  if (root.contains("out")) c.out = get_string(root["out"], "/out");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer() || root["seed"].get<std::int64_t>() < 0)
      fail("/seed", "expected a non-negative integer");
    c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("deterministic")) c.deterministic = get_bool(root["deterministic"], "/deterministic");
  validate(c, false);  // bands are checked by the command that uses them
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

void validate(const ScenarioConfig& c, bool check_bands) {
  for (std::size_t i = 0; check_bands && i < c.bands.size(); ++i)
    if (c.bands[i].n_hi > c.n_v / 2)
      fail("/bands/" + std::to_string(i) + "/1", "exceeds the grid Nyquist n_v/2 = " + std::to_string(c.n_v / 2));
  if (c.symbol.preset != "fields" && c.symbol.width > 0.9 * c.T_max)
    fail("/symbol/width", "τ support must stay inside the inner 90% of [−T_max, T_max]");
  if (c.symbol.preset == "fields") {
    const auto& f = c.symbol.fields;
    allow_keys(f, "/symbol/fields", {"plus", "minus"});
    if (!f.contains("plus")) fail("/symbol/fields/plus", "missing");
    for (const char* side : {"plus", "minus"}) {
      if (!f.contains(side)) continue;
      const std::string p = std::string("/symbol/fields/") + side;
      const auto& nodes = f[side];
      if (!nodes.is_array() || static_cast<int>(nodes.size()) != c.n_tau)
        fail(p, "expected one entry per τ node (" + std::to_string(c.n_tau) + ")");
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string pk = p + "/" + std::to_string(k);
        allow_keys(nodes[k], pk, {"00", "01", "10", "11"});
        for (const auto& [e, terms] : nodes[k].items()) parse_terms(terms, pk + "/" + e);
      }
    }
  }
}

json to_json(const ScenarioConfig& c) {
  json bands = json::array();
  for (const auto& b : c.bands) bands.push_back({b.n_lo, b.n_hi});
  json sym = {{"preset", c.symbol.preset}, {"degree", c.symbol.degree}, {"width", c.symbol.width}};
  if (c.symbol.preset == "fields") sym["fields"] = c.symbol.fields;
  return {
      {"metric", metric_to_json(c.metric)},
      {"grid", {{"n_u", c.n_u}, {"n_v", c.n_v}, {"n_tau", c.n_tau}, {"T_max", c.T_max}}},
      {"flow", {{"dt", c.flow_dt}, {"t_end", c.t_end}}},
      {"transport", {{"dt", c.transport_dt}}},
      {"quantization",
       {{"eta_max", c.quad.eta_max}, {"n_eta", c.quad.n_eta}, {"tol", c.quad.tol}, {"R", c.R}, {"eta0", c.eta0}}},
      {"symbol", sym},
      {"bands", bands},
      {"egorov",
       {{"decay_threshold", c.decay_threshold},
        {"certify_refinement", c.certify_refinement},
        {"refine_tol", c.refine_tol}}},
      {"points", c.points},
      {"reduced_points", c.reduced_points},
      {"write_operators", c.write_operators},
      {"out", c.out},
      {"seed", c.seed},
      {"deterministic", c.deterministic},
  };
}

HomogeneousSymbol build_symbol(const ScenarioConfig& c) {
  const auto& s = c.symbol;
  HomogeneousSymbol k(s.degree, c.n_u, c.n_v, c.n_tau, c.T_max);
  if (s.preset == "fields") {
    for (int si = 0; si < 2; ++si) {
      const char* side = (si == 1 && s.fields.contains("minus")) ? "minus" : "plus";
      for (int t = 0; t < c.n_tau; ++t) {
        const auto& node = s.fields[side][t];
        std::vector<TrigTerm> terms[4];
        for (int e = 0; e < 4; ++e) {
          const std::string key{char('0' + e / 2), char('0' + e % 2)};
          if (node.contains(key)) terms[e] = parse_terms(node[key], "");
        }
        for (int i = 0; i < c.n_u; ++i)
          for (int j = 0; j < c.n_v; ++j) {
            auto m = k.at(i, j, si, t);
            for (int e = 0; e < 4; ++e) m(e / 2, e % 2) = eval_complex(terms[e], k.u(i), k.v(j));
          }
      }
    }
    return k;
  }
  std::vector<double> rho(c.n_tau);
  double mass = 0.0;
  for (int t = 0; t < c.n_tau; ++t) mass += (rho[t] = bump(k.tau(t), s.width));
  for (auto& r : rho) r /= mass * k.h_tau();
  if (s.preset == "random") {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    cd coef[2][4][3];
    for (auto& a : coef)
      for (auto& b : a)
        for (auto& x : b) x = cd(U(rng), U(rng));
    for (int i = 0; i < c.n_u; ++i)
      for (int j = 0; j < c.n_v; ++j)
        for (int si = 0; si < 2; ++si)
          for (int t = 0; t < c.n_tau; ++t) {
            auto m = k.at(i, j, si, t);
            for (int e = 0; e < 4; ++e)
              m(e / 2, e % 2) = rho[t] * (coef[si][e][0] + 0.5 * coef[si][e][1] * std::cos(kTwoPi * (k.u(i) + k.v(j))) +
                                          0.5 * coef[si][e][2] * std::sin(kTwoPi * k.v(j)));
          }
    return k;
  }
  const bool cosv = s.preset == "cos_v";
  for (int i = 0; i < c.n_u; ++i)
    for (int j = 0; j < c.n_v; ++j)
      for (int si = 0; si < 2; ++si)
        for (int t = 0; t < c.n_tau; ++t)
          k.at(i, j, si, t) = (cosv ? std::cos(kTwoPi * k.v(j)) : 1.0) * rho[t] * Mat2::Identity();
  return k;
}

KernelSymbol build_kernel_symbol(const ScenarioConfig& c) {
  return KernelSymbol{build_symbol(c), c.R, c.eta0};
}

}  // namespace folix
