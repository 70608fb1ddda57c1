// folix: command-line front end. See README for the commands.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "folix/runner.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

// FOLIX_THREADS: positive integer; anything else is a config error.
int apply_thread_env() {
  const char* env = std::getenv("FOLIX_THREADS");
  if (!env) return 0;
  const std::string s(env);
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || n < 1) {
    std::cerr << nlohmann::json{{"error", "config"}, {"pointer", "FOLIX_THREADS"},
                                {"message", "FOLIX_THREADS must be a positive integer, got '" + s + "'"}}
                     .dump()
              << '\n';
    return folix::kExitConfig;
  }
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"folix: transverse flows, symbols and Egorov residuals on the foliated torus"};
  app.require_subcommand(1);

  folix::RunRequest req;
  double t = 0.0;
  std::string points, bands, out;

  struct Cmd {
    const char* name;
    const char* help;
    bool t, t_required, points, bands;
  };
  const Cmd cmds[] = {
      {"geometry-check", "metric positivity, bundle-like test, mean curvature", false, false, false, false},
      {"flow", "transverse geodesic trajectories", true, true, true, false},
      {"reduced-flow", "reduced flow on T*S^1 (rational slope)", true, true, true, false},
      {"spectrum", "discretized Dirac spectrum", false, false, false, false},
      {"transport", "symbol transport along the groupoid flow", true, true, false, false},
      {"egorov", "band-limited Egorov residuals and decay verdict", true, true, false, true},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("CONFIG", req.config_path, "scenario JSON (or a manifest)")->required();
    CLI::Option *ot = nullptr, *op = nullptr, *ob = nullptr;
    auto* oo = sub->add_option("--out", out, "output directory (overrides config)");
    if (c.t) {
      ot = sub->add_option("--t", t, "time");
      if (c.t_required) ot->required();
    }
    if (c.points) op = sub->add_option("--points", points, "initial conditions CSV");
    if (c.bands) ob = sub->add_option("--bands", bands, "frequency bands, e.g. 4:8,8:16,16:32");
    sub->callback([&req, &t, &points, &bands, &out, sub, ot, op, ob, oo] {
      req.command = sub->get_name();
      if (ot && ot->count()) req.t = t;
      if (op && op->count()) req.points = points;
      if (ob && ob->count()) req.bands = bands;
      if (oo->count()) req.out = out;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : folix::kExitConfig;
  }
  if (const int rc = apply_thread_env()) return rc;
  return folix::run(req, std::cout, std::cerr);
}
