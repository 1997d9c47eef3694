// m3s command-line front end.
//
// Exit codes: 0 success, 1 check failure (or internal error), 2 usage,
// 3 I/O or file-format error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "m3s/check.hpp"
#include "m3s/fieldio.hpp"
#include "m3s/polyalg.hpp"
#include "m3s/radial.hpp"
#include "m3s/so3rep.hpp"
#include "m3s/spherical.hpp"
#include "m3s/transform.hpp"

using namespace m3s;
using json = nlohmann::json;

namespace {

constexpr int kExitCheck = 1, kExitUsage = 2, kExitIo = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool g_json = false;

void report(const std::string& level, const std::string& kind, const std::string& msg) {
  if (g_json)
    std::cerr << json{{"level", level}, {"kind", kind}, {"message", msg}}.dump() << "\n";
  else
    std::cerr << "m3s: " << level << ": " << msg << "\n";
}

void warn(const std::string& msg) { report("warning", "warning", msg); }
void warn_all(const std::vector<std::string>& ws) {
  for (const auto& w : ws) warn(w);
}

// Everything on stdout goes out in one write.
void emit(const std::string& text) {
  std::fwrite(text.data(), 1, text.size(), stdout);
  std::fflush(stdout);
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") return emit(text);
  const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << text;
    if (!os) throw IoError("cannot write '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

Vec3 parse_point(const std::string& text) {
  std::string t = text;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::istringstream is(t);
  Vec3 x;
  if (!(is >> x[0] >> x[1] >> x[2])) throw UsageError("expected a point x,y,z, got '" + text + "'");
  std::string rest;
  if (is >> rest) throw UsageError("expected a point x,y,z, got '" + text + "'");
  return x;
}

std::vector<Vec3> read_points(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open points file '" + path + "'");
  std::vector<Vec3> out;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_point(line));
  }
  return out;
}

json matrix_json(const Mat& a) {
  json rows = json::array();
  for (int i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back({a(i, j).real(), a(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

json vec_json(const Vec3& x) { return {x[0], x[1], x[2]}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_m(int m) {
  if (m < 0) throw UsageError("--m must be non-negative");
}

void check_j(int m, int j) {
  if (j < -m || j > m) throw UsageError("--j must lie in [-m, m] = [" + std::to_string(-m) + ", " + std::to_string(m) + "]");
}

Exec exec_policy(const Config& cfg) { return cfg.threads == 1 ? Exec::Serial : Exec::Parallel; }

// ---------------------------------------------------------------- rep
struct RepArgs {
  int m = 0;
  std::string dtau_at;
};

int cmd_rep(const RepArgs& a) {
  check_m(a.m);
  const auto rep = build_irrep(a.m);
  json out = irrep_to_json(rep);
  if (!a.dtau_at.empty()) out["dtau"] = matrix_json(dtau(rep, parse_point(a.dtau_at)));
  emit(out.dump(1) + "\n");
  return 0;
}

// ---------------------------------------------------------------- qpoly
struct QpolyArgs {
  int m = 0;
  bool emit_json = false;
  std::vector<int> js;
};

int cmd_qpoly(const QpolyArgs& a) {
  check_m(a.m);
  if (a.m > kExactMaxM) throw UsageError("qpoly: exact construction is limited to m <= " + std::to_string(kExactMaxM));
  const auto rep = exact_generators(a.m);
  const auto q = build_Q(rep);
  const auto table = coeff_table(a.m);
  json out;
  out["m"] = a.m;
  out["c"] = table.c.get_str();
  json coeffs = json::array();
  for (const auto& v : table.a) coeffs.push_back(exact::Rational(v).get_str());
  out["a"] = coeffs;
  std::vector<int> js = a.js;
  if (js.empty())
    for (int j = 0; j <= 2 * a.m; ++j) js.push_back(j);
  json polys = json::array();
  for (int j : js) {
    if (j < 0 || j > 2 * a.m) throw UsageError("qpoly: --j must lie in [0, 2m]");
    const auto& qj = q[static_cast<size_t>(j)];
    json e{{"j", j}, {"terms", qj.terms().size()}, {"harmonic", laplacian(qj).is_zero()}};
    if (a.emit_json) e["poly"] = matpoly_to_json(qj);
    polys.push_back(e);
  }
  out["Q"] = polys;
  emit(out.dump(1) + "\n");
  return 0;
}

// ---------------------------------------------------------------- radial
struct RadialArgs {
  bool table = false;
  int m = 0;
  int jmax = -1;
  double s = 1.0;
  double rmax = 20.0;
  int n = 201;
};

int cmd_radial(const RadialArgs& a) {
  check_m(a.m);
  if (!a.table) throw UsageError("radial: only --table output is available");
  if (a.n < 2 || !(a.rmax > 0.0) || !(a.s > 0.0)) throw UsageError("radial: need --n >= 2, --rmax > 0, --s > 0");
  const int jmax = a.jmax >= 0 ? a.jmax : 2 * a.m;
  std::ostringstream os;
  os << "r";
  for (int j = 0; j <= jmax; ++j) os << ",f_" << j;
  os << "\n";
  for (int i = 0; i < a.n; ++i) {
    const double r = a.rmax * i / (a.n - 1);
    os << fmt(r);
    const auto v = f_all(jmax, a.s * r);
    for (double x : v) os << "," << fmt(x);
    os << "\n";
  }
  emit(os.str());
  return 0;
}

// ---------------------------------------------------------------- phi
struct PhiArgs {
  std::string action = "eval";
  int m = 0;
  double s = 1.0;
  int j = 0;
  std::string method = "1";
  std::vector<std::string> at;
  std::string points;
  std::string dir = "1,0,0";
  double rmax = 10.0;
  int n = 101;
  std::uint64_t seed = 1;
};

Mat eval_method(const PhiArgs& a, int method, const Vec3& x, const Config& cfg) {
  if (method == 1) return eval_phi(phi_method1(a.m, a.s, a.j), x);
  if (method == 3) return eval_phi(phi_method3(a.m, a.s, a.j), x);
  const auto r = phi_method2_checked(a.m, a.s, a.j, x, cfg.sphere_degree, cfg.quad_tol);
  if (r.under_resolved)
    warn("method 2 under-resolved at x = (" + fmt(x[0]) + ", " + fmt(x[1]) + ", " + fmt(x[2]) +
         "): doubling changed the result by " + fmt(r.residual_estimate));
  return r.value;
}

int cmd_phi(PhiArgs a, const Config& cfg) {
  check_m(a.m);
  if (a.action == "check") {
    const auto r = run_check({a.m}, a.seed, CheckProfile::Quick);
    json out = r.to_json();
    emit(out.dump(1) + "\n");
    return r.pass() ? 0 : kExitCheck;
  }
  check_j(a.m, a.j);
  if (!(a.s > 0.0)) throw UsageError("--s must be positive");
  if (a.method == "compare") a.action = a.action == "eval" ? "compare" : a.action;
  if (a.action == "compare") a.method = "compare";
  if (a.method != "1" && a.method != "2" && a.method != "3" && a.method != "compare")
    throw UsageError("--method must be 1, 2, 3 or compare");

  if (a.action == "table") {
    const Vec3 dir = parse_point(a.dir);
    if (dir.norm() == 0.0) throw UsageError("--dir must be non-zero");
    if (a.n < 2) throw UsageError("--n must be at least 2");
    const int method = a.method == "compare" ? 1 : std::stoi(a.method);
    const int d = type_dim(a.m);
    std::ostringstream os;
    os << "r";
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) os << ",re_" << p << "_" << q << ",im_" << p << "_" << q;
    os << "\n";
    for (int i = 0; i < a.n; ++i) {
      const double r = a.rmax * i / (a.n - 1);
      const Mat v = eval_method(a, method, r * dir.normalized(), cfg);
      os << fmt(r);
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) os << "," << fmt(v(p, q).real()) << "," << fmt(v(p, q).imag());
      os << "\n";
    }
    emit(os.str());
    return 0;
  }

  std::vector<Vec3> xs;
  for (const auto& t : a.at) xs.push_back(parse_point(t));
  if (!a.points.empty())
    for (const auto& x : read_points(a.points)) xs.push_back(x);
  if (xs.empty()) throw UsageError("phi: give --at x,y,z or --points FILE");

  json results = json::array();
  for (const auto& x : xs) {
    json e{{"m", a.m}, {"s", a.s}, {"j", a.j}, {"x", vec_json(x)}};
    if (a.method == "compare") {
      const Mat v1 = eval_method(a, 1, x, cfg), v2 = eval_method(a, 2, x, cfg), v3 = eval_method(a, 3, x, cfg);
      e["matrix"] = matrix_json(v1);
      e["methods"] = {{"1", matrix_json(v1)}, {"2", matrix_json(v2)}, {"3", matrix_json(v3)}};
      e["deviation"] = {{"1-2", max_abs(v1 - v2)}, {"1-3", max_abs(v1 - v3)}, {"2-3", max_abs(v2 - v3)}};
      e["max_deviation"] = std::max({max_abs(v1 - v2), max_abs(v1 - v3), max_abs(v2 - v3)});
    } else {
      e["method"] = std::stoi(a.method);
      e["matrix"] = matrix_json(eval_method(a, std::stoi(a.method), x, cfg));
    }
    results.push_back(e);
  }
  emit((results.size() == 1 ? results[0] : results).dump(1) + "\n");
  return 0;
}

// ---------------------------------------------------------------- synth
struct SynthArgs {
  std::string kind = "gaussian";
  int m = 0;
  std::string out;
  double sigma = 1.0;
  int k = -1;
  double s0 = 2.0;
  double width = 0.5;
  int j = 1 << 30;  // unset
  int grid_n = 0;
  double grid_h = 0.5;
};

int cmd_synth(const SynthArgs& a, const Config& cfg) {
  check_m(a.m);
  SynthParams p;
  p.sigma = a.sigma;
  if (a.k >= 0) p.k = a.k;
  p.s0 = a.s0;
  p.width = a.width;
  if (a.j != (1 << 30)) p.j = a.j;
  RadialField f;
  try {
    f = synthesize(a.kind, a.m, p);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (a.grid_n > 0) {
    if (!(a.grid_h > 0.0)) throw UsageError("--spacing must be positive");
    write_field(sample(f, GridGeometry::centred(a.grid_n, a.grid_h), exec_policy(cfg)), a.out);
  } else {
    write_field(f, a.out);
  }
  return 0;
}

// ---------------------------------------------------------------- transform / filter
struct TransformArgs {
  std::string direction;
  std::string in, out;
  double smax = -1.0;
  int nr = -1;
  std::string multiplier = "identity";
  std::string table;
};

TransformOptions options_from(const TransformArgs& a, const Config& cfg) {
  auto opt = cfg.transform_options();
  if (a.smax >= 0.0) opt.smax = a.smax;
  if (a.nr > 0) opt.nr = a.nr;
  return opt;
}

std::vector<std::vector<double>> read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open multiplier table '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        // a header line of column names is allowed first
        if (rows.empty() && lineno == 1) {
          row.clear();
          break;
        }
        throw FormatError("multiplier table line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(row);
  }
  return rows;
}

Multiplier make_multiplier(const TransformArgs& a, int m) {
  if (a.multiplier == "laplacian") return laplacian_multiplier();
  if (a.multiplier == "dtau") return dtau_multiplier();
  if (a.multiplier == "identity") return identity_multiplier();
  if (a.multiplier == "table") {
    if (a.table.empty()) throw UsageError("--multiplier table needs --table FILE");
    try {
      return table_multiplier(m, read_table(a.table));
    } catch (const DomainError& e) {
      throw FormatError(e.what());
    }
  }
  throw UsageError("unknown multiplier '" + a.multiplier + "' (laplacian, dtau, identity, table)");
}

SphericalCoefficients spectrum_of(const StoredField& f, const TransformOptions& opt, Exec exec) {
  if (const auto* c = std::get_if<SphericalCoefficients>(&f)) return *c;
  Diagnostics diag;
  MatrixField mf = std::holds_alternative<GridField>(f) ? MatrixField(std::get<GridField>(f))
                                                        : MatrixField(std::get<RadialField>(f));
  auto c = forward(mf, opt, &diag, exec);
  warn_all(diag.warnings);
  return c;
}

int cmd_transform(const TransformArgs& a, const Config& cfg) {
  if (a.in.empty() || a.out.empty()) throw UsageError("--in and --out are required");
  const auto loaded = read_field(a.in, cfg.equivariance_tol);
  warn_all(loaded.warnings);
  const auto opt = options_from(a, cfg);
  const Exec exec = exec_policy(cfg);
  const int m = stored_m(loaded.field);

  if (a.direction == "forward") {
    if (std::holds_alternative<SphericalCoefficients>(loaded.field))
      throw UsageError("forward: input is already a spectrum");
    write_field(spectrum_of(loaded.field, opt, exec), a.out);
    return 0;
  }
  if (a.direction == "inverse") {
    const auto* c = std::get_if<SphericalCoefficients>(&loaded.field);
    if (c == nullptr) throw UsageError("inverse: input must be a spectrum file");
    Diagnostics diag;
    auto r = to_radial(*c, &diag);
    warn_all(diag.warnings);
    write_field(r, a.out);
    return 0;
  }
  if (a.direction == "filter") {
    const auto mu = make_multiplier(a, m);
    const auto filtered = apply_multiplier(spectrum_of(loaded.field, opt, exec), mu);
    // the output keeps the form of the input
    if (const auto* g = std::get_if<GridField>(&loaded.field)) {
      write_field(inverse_on_grid(filtered, g->geom, exec), a.out);
    } else if (std::holds_alternative<RadialField>(loaded.field)) {
      Diagnostics diag;
      auto r = to_radial(filtered, &diag);
      warn_all(diag.warnings);
      r.r_grid = std::get<RadialField>(loaded.field).r_grid;
      write_field(r, a.out);
    } else {
      write_field(filtered, a.out);
    }
    return 0;
  }
  throw UsageError("transform direction must be forward, inverse or filter");
}

// ---------------------------------------------------------------- eval / info
struct EvalArgs {
  std::string in;
  std::vector<std::string> at;
  std::string points;
};

int cmd_eval(const EvalArgs& a, const Config& cfg) {
  const auto loaded = read_field(a.in, cfg.equivariance_tol);
  warn_all(loaded.warnings);
  std::vector<Vec3> xs;
  for (const auto& t : a.at) xs.push_back(parse_point(t));
  if (!a.points.empty())
    for (const auto& x : read_points(a.points)) xs.push_back(x);
  if (xs.empty()) throw UsageError("eval: give --at x,y,z or --points FILE");
  json results = json::array();
  for (const auto& x : xs) {
    Mat v;
    if (const auto* r = std::get_if<RadialField>(&loaded.field)) {
      v = eval_field(*r, x);
    } else if (const auto* c = std::get_if<SphericalCoefficients>(&loaded.field)) {
      v = inverse(*c, x);
    } else {
      const auto& g = std::get<GridField>(loaded.field);
      const Vec3 u = (x - g.geom.origin) / g.geom.spacing;
      std::array<int, 3> idx{};
      for (int i = 0; i < 3; ++i) {
        idx[i] = static_cast<int>(std::lround(u[i]));
        if (std::abs(u[i] - idx[i]) > 1e-9 || idx[i] < 0 || idx[i] >= g.geom.n[i])
          throw UsageError("eval: grid fields can only be evaluated at lattice nodes");
      }
      v = g.at(g.geom.index(idx[0], idx[1], idx[2]));
    }
    results.push_back({{"x", vec_json(x)}, {"matrix", matrix_json(v)}});
  }
  emit((results.size() == 1 ? results[0] : results).dump(1) + "\n");
  return 0;
}

int cmd_info(const std::string& in, const Config& cfg) {
  const auto loaded = read_field(in, cfg.equivariance_tol);
  const auto& h = loaded.header;
  char sum[17];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(h.checksum));
  json out{{"magic", h.magic},       {"version", h.version}, {"m", h.m},
           {"form", form_name(h.form)}, {"endianness", h.endianness}, {"checksum", sum},
           {"entries", loaded.payload.size()}};
  if (loaded.equivariance) out["equivariance_defect"] = *loaded.equivariance;
  out["warnings"] = loaded.warnings;
  emit(out.dump(1) + "\n");
  return 0;
}

// ---------------------------------------------------------------- check
struct CheckArgs {
  std::vector<int> ms{0, 1};
  std::uint64_t seed = 1;
  std::string profile = "quick";
  std::string out;
};

int cmd_check(const CheckArgs& a) {
  for (int m : a.ms) check_m(m);
  const auto prof = a.profile == "full" ? CheckProfile::Full : CheckProfile::Quick;
  const auto r = run_check(a.ms, a.seed, prof);
  write_text(r.to_json().dump(1) + "\n", a.out);
  for (const auto& s : r.suites)
    if (!s.pass) report("error", "check", "suite " + s.suite + " failed: residual " + fmt(s.max_residual));
  return r.pass() ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix spherical analysis on the motion group of R^3"};
  app.require_subcommand(1);
  std::string config_path;
  int threads = -1;
  app.add_flag("--json", g_json, "Structured JSON diagnostics on standard error");
  app.add_option("--config", config_path, "key=value configuration file (default: $M3S_CONFIG)");
  app.add_option("--threads", threads, "Worker threads (1 = serial reference kernels)")->check(CLI::NonNegativeNumber);

  RepArgs rep;
  auto* c_rep = app.add_subcommand("rep", "Irreducible representation of dimension 2m+1 as JSON");
  c_rep->add_option("--m", rep.m)->required();
  c_rep->add_option("--dtau", rep.dtau_at, "Also print dtau(x) at x,y,z");

  QpolyArgs qp;
  auto* c_qp = app.add_subcommand("qpoly", "Exact invariant matrix polynomials Q_j");
  c_qp->add_option("--m", qp.m)->required();
  c_qp->add_option("--j", qp.js, "Degrees to report (default all)");
  c_qp->add_flag("--emit", qp.emit_json, "Emit the polynomials themselves");

  RadialArgs rad;
  auto* c_rad = app.add_subcommand("radial", "Radial kernels f_j as CSV");
  c_rad->add_flag("--table", rad.table)->required();
  c_rad->add_option("--m", rad.m, "Columns f_0..f_2m");
  c_rad->add_option("--jmax", rad.jmax, "Override the last column index");
  c_rad->add_option("--s", rad.s, "Scale: columns are f_j(s r)");
  c_rad->add_option("--rmax", rad.rmax);
  c_rad->add_option("--n", rad.n, "Number of rows");

  PhiArgs phi;
  auto* c_phi = app.add_subcommand("phi", "Evaluate, compare or tabulate spherical functions");
  c_phi->add_option("action", phi.action, "eval | compare | table | check")
      ->check(CLI::IsMember({"eval", "compare", "table", "check"}));
  c_phi->add_option("--m", phi.m)->required();
  c_phi->add_option("--s", phi.s);
  c_phi->add_option("--j", phi.j);
  c_phi->add_option("--method", phi.method, "1 | 2 | 3 | compare");
  c_phi->add_option("--at", phi.at, "Point x,y,z (repeatable)");
  c_phi->add_option("--points", phi.points, "File with one point per line");
  c_phi->add_option("--dir", phi.dir, "table: direction of the ray");
  c_phi->add_option("--rmax", phi.rmax, "table: ray length");
  c_phi->add_option("--n", phi.n, "table: number of rows");
  c_phi->add_option("--seed", phi.seed, "check: random seed");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Write a synthetic test field");
  c_syn->add_option("--kind", syn.kind, "gaussian | bump | plane-wave-packet");
  c_syn->add_option("--m", syn.m)->required();
  c_syn->add_option("--out", syn.out)->required();
  c_syn->add_option("--sigma", syn.sigma);
  c_syn->add_option("--k", syn.k, "gaussian: carry the envelope on g_k");
  c_syn->add_option("--s0", syn.s0);
  c_syn->add_option("--width", syn.width);
  c_syn->add_option("--j", syn.j);
  c_syn->add_option("--grid", syn.grid_n, "Sample onto an n^3 lattice instead of writing the radial form");
  c_syn->add_option("--spacing", syn.grid_h, "Lattice spacing for --grid");

  TransformArgs tr;
  auto* c_tr = app.add_subcommand("transform", "Spherical Fourier transform of a field file");
  c_tr->add_option("direction", tr.direction, "forward | inverse | filter")
      ->required()
      ->check(CLI::IsMember({"forward", "inverse", "filter"}));
  TransformArgs fl;
  fl.direction = "filter";
  auto* c_fl = app.add_subcommand("filter", "Apply a spectral multiplier to a field file");
  for (auto [c, t] : {std::pair<CLI::App*, TransformArgs*>{c_tr, &tr}, {c_fl, &fl}}) {
    c->add_option("--in", t->in)->required();
    c->add_option("--out", t->out)->required();
    c->add_option("--smax", t->smax, "Upper end of the s grid (default: estimated)");
    c->add_option("--nr", t->nr, "Number of s nodes");
    c->add_option("--multiplier", t->multiplier, "laplacian | dtau | identity | table");
    c->add_option("--table", t->table, "Rows s, mu_-m, ..., mu_m");
  }

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Evaluate a stored field at points");
  c_ev->add_option("--in", ev.in)->required();
  c_ev->add_option("--at", ev.at);
  c_ev->add_option("--points", ev.points);

  std::string info_in;
  auto* c_info = app.add_subcommand("info", "Show the header and diagnostics of a field file");
  c_info->add_option("--in", info_in)->required();

  CheckArgs ck;
  auto* c_ck = app.add_subcommand("check", "Run the invariant suites and print a JSON report");
  c_ck->add_option("--m", ck.ms, "Comma-separated list of m")->delimiter(',');
  c_ck->add_option("--seed", ck.seed);
  c_ck->add_option("--profile", ck.profile)->check(CLI::IsMember({"quick", "full"}));
  c_ck->add_option("--out", ck.out, "Write the report here instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("error", "usage", e.what());
    return kExitUsage;
  }

  try {
    Config cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (threads >= 0) cfg.threads = threads;
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    if (c_rep->parsed()) return cmd_rep(rep);
    if (c_qp->parsed()) return cmd_qpoly(qp);
    if (c_rad->parsed()) return cmd_radial(rad);
    if (c_phi->parsed()) return cmd_phi(phi, cfg);
    if (c_syn->parsed()) return cmd_synth(syn, cfg);
    if (c_tr->parsed()) return cmd_transform(tr, cfg);
    if (c_fl->parsed()) return cmd_transform(fl, cfg);
    if (c_ev->parsed()) return cmd_eval(ev, cfg);
    if (c_info->parsed()) return cmd_info(info_in, cfg);
    if (c_ck->parsed()) return cmd_check(ck);
  } catch (const UsageError& e) {
    report("error", "usage", e.what());
    return kExitUsage;
  } catch (const DomainError& e) {
    report("error", "usage", e.what());
    return kExitUsage;
  } catch (const FormatError& e) {
    report("error", "format", e.what());
    return kExitIo;
  } catch (const IoError& e) {
    report("error", "io", e.what());
    return kExitIo;
  } catch (const ConfigError& e) {
    report("error", "config", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    report("error", "internal", e.what());
    return 1;
  }
  return kExitUsage;
}
