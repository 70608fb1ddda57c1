#include "folix/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "folix/errors.hpp"

namespace folix {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary artifacts assume a little-endian host");

namespace {

void put_i64(std::ostream& o, std::int64_t v) { o.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ostream& o, double v) { o.write(reinterpret_cast<const char*>(&v), 8); }

std::int64_t get_i64(std::istream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

std::ofstream open_out(const fs::path& p, bool binary) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, binary ? std::ios::binary : std::ios::out);
  if (!o) throw Error("cannot write " + p.string());
  return o;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UnknownArtifact("cannot read " + p.string());
  return in;
}

fs::path sidecar(const fs::path& p) { return fs::path(p.string() + ".json"); }

}  // namespace

void write_json(const fs::path& path, const json& j) {
  auto o = open_out(path, false);
  o << j.dump(2) << '\n';
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_symbol(const fs::path& path, const HomogeneousSymbol& k, const json& extra) {
  {
    auto o = open_out(path, true);
    put_i64(o, k.degree());
    put_i64(o, k.n_u());
    put_i64(o, k.n_v());
    put_i64(o, k.n_tau());
    put_f64(o, k.T_max());
    o.write(reinterpret_cast<const char*>(k.values().data()),
            static_cast<std::streamsize>(k.values().size() * sizeof(cd)));
  }
  json side = {{"kind", "symbol"},
               {"degree", k.degree()},
               {"n_u", k.n_u()},
               {"n_v", k.n_v()},
               {"n_tau", k.n_tau()},
               {"T_max", k.T_max()},
               {"tau_nodes", "-T_max + k*2*T_max/n_tau, k < n_tau"},
               {"layout", "int64 degree,n_u,n_v,n_tau; float64 T_max; complex128[i][j][slice][k][row][col]"},
               {"slices", {"p_v > 0", "p_v < 0"}}};
  if (!extra.is_null()) side["info"] = extra;
  write_json(sidecar(path), side);
}

HomogeneousSymbol read_symbol(const fs::path& path) {
  auto in = open_in(path);
  const auto deg = get_i64(in), nu = get_i64(in), nv = get_i64(in), nt = get_i64(in);
  const double T = get_f64(in);
  if (!in || nu <= 0 || nv <= 0 || nt <= 0 || nt % 2) throw UnknownArtifact(path.string() + ": bad symbol header");
  HomogeneousSymbol k(static_cast<int>(deg), static_cast<int>(nu), static_cast<int>(nv), static_cast<int>(nt), T);
  in.read(reinterpret_cast<char*>(k.values().data()), static_cast<std::streamsize>(k.values().size() * sizeof(cd)));
  if (!in) throw UnknownArtifact(path.string() + ": truncated symbol");
  return k;
}

void write_operator(const fs::path& path, const KernelOperator& K, const json& extra) {
  const auto& B = K.basis();
  {
    auto o = open_out(path, true);
    put_i64(o, B.half_u);
    put_i64(o, B.half_v);
    put_i64(o, B.dim());
    const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> d = K.to_dense();
    o.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(cd)));
  }
  json side = {{"kind", "operator"},
               {"half_u", B.half_u},
               {"half_v", B.half_v},
               {"dim", B.dim()},
               {"basis_index", "((m + half_u)*(2*half_v+1) + n + half_v)*2 + fiber"},
               {"layout", "int64 half_u,half_v,dim; complex128[dim][dim] row-major"}};
  if (!extra.is_null()) side["info"] = extra;
  write_json(sidecar(path), side);
}

KernelOperator read_operator(const fs::path& path) {
  auto in = open_in(path);
  const auto hu = get_i64(in), hv = get_i64(in), dim = get_i64(in);
  const ModeBasis B{static_cast<int>(hu), static_cast<int>(hv)};
  if (!in || hu < 0 || hv < 0 || dim != B.dim()) throw UnknownArtifact(path.string() + ": bad operator header");
  Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> d(dim, dim);
  in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(cd)));
  if (!in) throw UnknownArtifact(path.string() + ": truncated operator");
  return KernelOperator::from_dense(B, d);
}

void write_csv(const fs::path& path, const CsvTable& t) {
  auto o = open_out(path, false);
  for (std::size_t c = 0; c < t.columns.size(); ++c) o << (c ? "," : "") << t.columns[c];
  o << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) o << (c ? "," : "") << format_double(r[c]);
    o << '\n';
  }
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UnknownArtifact("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw UnknownArtifact(path.string() + ": empty CSV");
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) t.columns.push_back(col);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
        // from_chars rejects the nan/inf spellings it writes itself
        char* end = nullptr;
        v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || *end != '\0') throw UnknownArtifact(path.string() + ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) throw UnknownArtifact(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

PlotKind plot_kind(const std::string& name) {
  if (name == "trajectory") return PlotKind::Trajectory;
  if (name == "field-slice") return PlotKind::FieldSlice;
  if (name == "residual-curve") return PlotKind::ResidualCurve;
  throw UnknownArtifact("unknown plot kind '" + name + "'");
}

fs::path emit_plotdata(const fs::path& artifact, PlotKind kind) {
  if (!fs::exists(artifact)) throw UnknownArtifact("no artifact at " + artifact.string());
  const CsvTable t = read_csv(artifact);
  auto col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw UnknownArtifact(artifact.string() + ": no column '" + name + "'");
    return static_cast<std::size_t>(it - t.columns.begin());
  };
  std::vector<std::string> header;
  std::vector<std::function<double(const std::vector<double>&)>> cols;
  auto pass = [&](const std::string& from, const std::string& to) {
    const std::size_t c = col(from);
    header.push_back(to);
    cols.push_back([c](const std::vector<double>& r) { return r[c]; });
  };
  switch (kind) {
    case PlotKind::Trajectory:
      pass("t", "t");
      pass("u", "u");
      pass("v", "v");
      pass("p_v", "p_v");
      pass("hamiltonian", "h");
      break;
    case PlotKind::FieldSlice:
      pass("u", "u");
      pass("v", "v");
      pass("value", "value");
      break;
    case PlotKind::ResidualCurve: {
      const std::size_t lo = col("n_lo"), hi = col("n_hi");
      header.push_back("band_center");
      cols.push_back([lo, hi](const std::vector<double>& r) { return 0.5 * (r[lo] + r[hi]); });
      pass("relative", "relative_residual");
      break;
    }
  }
  fs::path out = artifact;
  out.replace_extension(".dat");
  auto o = open_out(out, false);
  o << '#';
  for (const auto& h : header) o << ' ' << h;
  o << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) o << (c ? " " : "") << format_double(cols[c](r));
    o << '\n';
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw Error("SHA-256 failed");
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnknownArtifact("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return sha256_hex(s.str());
}

json write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<fs::path>& artifacts) {
  std::map<std::string, json> entries;
  for (const auto& a : artifacts) {
    const std::string rel = fs::relative(a, dir).generic_string();
    entries[rel] = {{"path", rel}, {"bytes", fs::file_size(a)}, {"sha256", sha256_file(a)}};
  }
  json list = json::array();
  std::string digest_input;
  for (const auto& [rel, e] : entries) {
    list.push_back(e);
    digest_input += rel + '\0' + e["sha256"].get<std::string>() + '\n';
  }
  // The output directory is where the run went, not what it computed.
  json hashed = config;
  if (hashed.is_object()) hashed.erase("out");
  digest_input += hashed.dump();
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  json m = {{"manifest_version", 1},
            {"command", command},
            {"config", config},
            {"artifacts", list},
            {"content_hash", sha256_hex(digest_input)},
            {"timestamp", ts.str()}};
  write_json(dir / "manifest.json", m);
  return m;
}

}  // namespace folix
