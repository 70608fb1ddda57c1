#pragma once

// Scenario configuration: JSON in, validated struct out, and back to the
// fully resolved JSON that goes into every manifest. Validation failures throw
// ConfigError carrying a JSON pointer to the offending field.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "folix/egorov.hpp"
#include "folix/geometry.hpp"
#include "folix/quantization.hpp"

namespace folix {

// Geometry JSON: {"theta": {"rational":[p,q]} | {"real":x},
//                 "a": [[m,n,re,im],...], "b": [...], "c": [...]}
// or one of the preset names "flat", "flat_golden", "sin_v", "leafwise".
MetricCoeffs parse_metric(const nlohmann::json& j, const std::string& pointer = "/metric");
nlohmann::json metric_to_json(const MetricCoeffs& m);
MetricCoeffs metric_preset(const std::string& name);

struct SymbolSpec {
  // "cos_v": cos(2πv)·𝟙·ρ(τ); "constant": 𝟙·ρ(τ); "random": seeded smooth
  // symbol; "fields": one complex trig polynomial per entry and τ node.
  std::string preset = "cos_v";
  int degree = 0;
  double width = 0.3;  // support radius of ρ in τ
  nlohmann::json fields;  // for "fields": {"plus": [node...], "minus": [node...]}
};

struct ScenarioConfig {
  MetricCoeffs metric = metric_preset("flat");
  int n_u = 32, n_v = 32, n_tau = 32;
  double T_max = 0.5;
  double flow_dt = 1e-3;
  double t_end = 1.0;
  double transport_dt = 1e-2;
  Quadrature quad;
  double R = 0.4;
  double eta0 = 6.283185307179586476925286766559;
  SymbolSpec symbol;
  std::vector<BandSpec> bands{{4, 8}, {8, 16}, {16, 32}};
  double decay_threshold = 0.6;
  bool certify_refinement = false;
  double refine_tol = 0.1;
  nlohmann::json points = nlohmann::json::array();  // [[u,v,p_v],...] or a CSV path
  nlohmann::json reduced_points = nlohmann::json::array();  // [[y,eta],...] or a CSV path
  bool write_operators = false;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool deterministic = true;
};

// Unknown keys are errors. A manifest (has "manifest_version") is accepted
// and its embedded config used.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

// Checks that need the whole config (bands against the grid, τ support).
// Only egorov reads the bands, so other commands skip that check.
void validate(const ScenarioConfig& c, bool check_bands = true);

// The configured symbol, sampled on the config grid.
HomogeneousSymbol build_symbol(const ScenarioConfig& c);
KernelSymbol build_kernel_symbol(const ScenarioConfig& c);

}  // namespace folix
