#include "m3s/fieldio.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace m3s {

namespace {

using nlohmann::json;

void put_double(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double get_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[v & 0xfu];
    v >>= 4;
  }
  return s;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw HeaderError("checksum must be 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw HeaderError("checksum must be lowercase hex");
  }
  return v;
}

// Per-node diagonal payload shared by the radial and spectrum forms.
void put_diag(std::vector<cplx>& payload, int d, const std::vector<cplx>& diag) {
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) payload.push_back(a == b ? diag[static_cast<size_t>(a)] : cplx(0.0));
}

struct Encoded {
  json geometry;
  std::vector<cplx> payload;
};

Encoded encode_payload(const StoredField& f) {
  Encoded e;
  if (const auto* g = std::get_if<GridField>(&f)) {
    e.geometry = {{"n", {g->geom.n[0], g->geom.n[1], g->geom.n[2]}},
                  {"spacing", g->geom.spacing},
                  {"origin", {g->geom.origin[0], g->geom.origin[1], g->geom.origin[2]}}};
    e.payload = g->data;
  } else if (const auto* r = std::get_if<RadialField>(&f)) {
    const auto grid = r->r_grid.empty() ? default_r_grid(*r) : r->r_grid;
    e.geometry = {{"r_grid", grid}, {"support", r->support}, {"bandwidth", r->bandwidth}};
    for (double x : grid) put_diag(e.payload, r->dim(), radial_values(*r, x));
  } else {
    const auto& c = std::get<SphericalCoefficients>(f);
    e.geometry = {{"s_grid", c.s}, {"s_weights", c.weights}, {"smax", c.smax}};
    for (size_t a = 0; a < c.s.size(); ++a) {
      std::vector<cplx> diag;
      for (const auto& row : c.values) diag.push_back(row[a]);
      put_diag(e.payload, type_dim(c.m), diag);
    }
  }
  return e;
}

std::vector<double> get_vec(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw HeaderError(std::string("geometry lacks ") + key);
  return j.at(key).get<std::vector<double>>();
}

size_t expected_nodes(FieldForm form, const json& geo) {
  switch (form) {
    case FieldForm::Grid: {
      const auto n = geo.at("n").get<std::vector<long long>>();
      if (n.size() != 3 || n[0] < 1 || n[1] < 1 || n[2] < 1) throw HeaderError("grid n must be three positive sizes");
      if (!(geo.at("spacing").get<double>() > 0.0)) throw HeaderError("grid spacing must be positive");
      if (geo.at("origin").size() != 3) throw HeaderError("grid origin must have three entries");
      return static_cast<size_t>(n[0] * n[1] * n[2]);
    }
    case FieldForm::Radial: return get_vec(geo, "r_grid").size();
    case FieldForm::Spectrum: {
      const auto s = get_vec(geo, "s_grid");
      if (get_vec(geo, "s_weights").size() != s.size()) throw HeaderError("s_weights and s_grid differ in length");
      return s.size();
    }
  }
  return 0;
}

StoredField build_field(const FieldHeader& h, const std::vector<cplx>& payload) {
  const int d = type_dim(h.m);
  const auto dd = static_cast<size_t>(d * d);
  const json& geo = h.geometry;
  switch (h.form) {
    case FieldForm::Grid: {
      GridGeometry g;
      const auto n = geo.at("n").get<std::vector<int>>();
      g.n = {n[0], n[1], n[2]};
      g.spacing = geo.at("spacing").get<double>();
      const auto o = geo.at("origin").get<std::vector<double>>();
      g.origin = Vec3(o[0], o[1], o[2]);
      GridField f;
      f.m = h.m;
      f.geom = g;
      f.data = payload;
      return f;
    }
    case FieldForm::Radial: {
      RadialField f;
      f.m = h.m;
      f.r_grid = get_vec(geo, "r_grid");
      f.support = geo.value("support", f.r_grid.empty() ? 0.0 : f.r_grid.back());
      f.bandwidth = geo.value("bandwidth", 0.0);
      for (int k = 0; k < d; ++k) {
        std::vector<cplx> v;
        for (size_t a = 0; a < f.r_grid.size(); ++a) v.push_back(payload[a * dd + static_cast<size_t>(k * d + k)]);
        f.g.push_back(sampled_profile(f.r_grid, std::move(v), "g_" + std::to_string(k)));
      }
      return f;
    }
    case FieldForm::Spectrum: {
      SphericalCoefficients c;
      c.m = h.m;
      c.s = get_vec(geo, "s_grid");
      c.weights = get_vec(geo, "s_weights");
      c.smax = geo.value("smax", c.s.empty() ? 0.0 : c.s.back());
      c.values.assign(static_cast<size_t>(d), std::vector<cplx>(c.s.size()));
      for (size_t a = 0; a < c.s.size(); ++a)
        for (int k = 0; k < d; ++k) c.values[static_cast<size_t>(k)][a] = payload[a * dd + static_cast<size_t>(k * d + k)];
      return c;
    }
  }
  throw HeaderError("unknown form");
}

FieldForm parse_form(const std::string& s) {
  if (s == "grid") return FieldForm::Grid;
  if (s == "radial") return FieldForm::Radial;
  if (s == "spectrum") return FieldForm::Spectrum;
  throw HeaderError("unknown form '" + s + "'");
}

}  // namespace

std::string form_name(FieldForm f) {
  switch (f) {
    case FieldForm::Grid: return "grid";
    case FieldForm::Radial: return "radial";
    case FieldForm::Spectrum: return "spectrum";
  }
  return "?";
}

FieldForm form_of(const StoredField& f) {
  if (std::holds_alternative<GridField>(f)) return FieldForm::Grid;
  if (std::holds_alternative<RadialField>(f)) return FieldForm::Radial;
  return FieldForm::Spectrum;
}

int stored_m(const StoredField& f) {
  return std::visit([](const auto& v) { return v.m; }, f);
}

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<double> default_r_grid(const RadialField& f) {
  std::vector<double> r;
  const int n = 512;
  for (int i = 0; i <= n; ++i) r.push_back(f.support * i / n);
  return r;
}

std::string encode_field(const StoredField& f) {
  const Encoded e = encode_payload(f);
  std::string payload;
  payload.reserve(e.payload.size() * 16);
  for (const auto& c : e.payload) {
    put_double(payload, c.real());
    put_double(payload, c.imag());
  }
  const auto sum = fnv1a64(reinterpret_cast<const unsigned char*>(payload.data()), payload.size());
  // nlohmann::json keeps keys sorted, so the header bytes are deterministic.
  const json header = {{"magic", "M3SF"},
                       {"version", kFormatVersion},
                       {"m", stored_m(f)},
                       {"form", form_name(form_of(f))},
                       {form_name(form_of(f)), e.geometry},
                       {"endianness", "little"},
                       {"checksum", hex64(sum)}};
  return header.dump() + "\n" + payload;
}

LoadedField decode_field(const std::string& bytes, double equivariance_tol) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw HeaderError("missing header line");
  json header;
  try {
    header = json::parse(bytes.substr(0, nl));
  } catch (const json::exception& e) {
    throw HeaderError(std::string("header is not valid JSON: ") + e.what());
  }
  LoadedField out;
  auto& h = out.header;
  size_t nodes = 0;
  try {
    if (!header.is_object()) throw HeaderError("header must be a JSON object");
    h.magic = header.at("magic").get<std::string>();
    if (h.magic != "M3SF") throw HeaderError("bad magic '" + h.magic + "'");
    h.version = header.at("version").get<int>();
    if (h.version != kFormatVersion) throw VersionError("unsupported format version " + std::to_string(h.version));
    h.m = header.at("m").get<int>();
    if (h.m < 0 || h.m > 64) throw HeaderError("m out of range");
    h.form = parse_form(header.at("form").get<std::string>());
    h.geometry = header.at(form_name(h.form));
    h.endianness = header.at("endianness").get<std::string>();
    if (h.endianness != "little") throw HeaderError("only little-endian payloads are supported");
    h.checksum = parse_hex64(header.at("checksum").get<std::string>());
    nodes = expected_nodes(h.form, h.geometry);
  } catch (const json::exception& e) {
    throw HeaderError(std::string("malformed header: ") + e.what());
  }
  const size_t d = static_cast<size_t>(type_dim(h.m));
  const size_t want = nodes * d * d * 16;
  const size_t have = bytes.size() - nl - 1;
  if (have != want)
    throw PayloadLengthError("payload has " + std::to_string(have) + " bytes, header implies " + std::to_string(want));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + nl + 1;
  if (fnv1a64(p, have) != h.checksum) throw ChecksumError("payload checksum mismatch");
  out.payload.resize(nodes * d * d);
  for (size_t i = 0; i < out.payload.size(); ++i) out.payload[i] = {get_double(p + 16 * i), get_double(p + 16 * i + 8)};
  out.field = build_field(h, out.payload);
  if (const auto* g = std::get_if<GridField>(&out.field)) {
    out.equivariance = grid_equivariance_defect(*g);
    if (*out.equivariance > equivariance_tol)
      out.warnings.push_back("grid field is not equivariant within tolerance (defect " +
                             std::to_string(*out.equivariance) + ")");
  }
  return out;
}

void write_field(const StoredField& f, const std::string& path) {
  const std::string bytes = encode_field(f);
  const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + tmp + "' for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

LoadedField read_field(const std::string& path, double equivariance_tol) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError("read from '" + path + "' failed");
  return decode_field(ss.str(), equivariance_tol);
}

double bump_profile(const SynthParams& p, double s) {
  const double t = (s - p.s0) / p.width;
  return std::exp(-0.5 * t * t);
}

RadialField synthesize(const std::string& kind, int m, const SynthParams& p) {
  if (m < 0) throw DomainError("synthesize: m must be non-negative");
  if (kind == "gaussian") {
    if (!(p.sigma > 0.0)) throw DomainError("synthesize: sigma must be positive");
    const int k = p.k.value_or(0);
    if (k < 0 || k > 2 * m) throw DomainError("synthesize: k must lie in [0, 2m]");
    RadialField f = RadialField::zeros(m);
    const double sigma = p.sigma;
    f.g[static_cast<size_t>(k)] = {[sigma](double r) { return cplx(std::exp(-0.5 * r * r / (sigma * sigma))); },
                                   "gaussian"};
    f.support = 9.0 * sigma;
    return f;
  }
  if (kind == "bump") {
    if (!(p.width > 0.0) || !(p.s0 > 0.0)) throw DomainError("synthesize: bump needs s0 > 0 and width > 0");
    if (p.j && (*p.j < -m || *p.j > m)) throw DomainError("synthesize: j must lie in [-m, m]");
    const double smax = p.s0 + 8.0 * p.width;
    auto c = SphericalCoefficients::zeros(m, smax, p.nr);
    for (int j = -m; j <= m; ++j) {
      if (p.j && *p.j != j) continue;
      for (size_t a = 0; a < c.s.size(); ++a) c.values[static_cast<size_t>(j + m)][a] = bump_profile(p, c.s[a]);
    }
    RadialField f = to_radial(c);
    f.support = std::max(f.support, 9.0 / p.width);
    f.bandwidth = p.s0;
    return f;
  }
  if (kind == "plane-wave-packet") {
    if (!(p.sigma > 0.0) || !(p.s0 > 0.0)) throw DomainError("synthesize: packet needs sigma > 0 and s0 > 0");
    const int j = p.j.value_or(0);
    const auto spec = phi_method1(m, p.s0, j);
    RadialField f;
    f.m = m;
    const double sigma = p.sigma, s0 = p.s0;
    for (int l = 0; l <= 2 * m; ++l) {
      const cplx u = spec.coeffs[l];
      f.g.push_back({[u, l, s0, sigma](double r) { return u * f_scaled(l, s0, r) * std::exp(-0.5 * r * r / (sigma * sigma)); },
                     "packet_" + std::to_string(l)});
    }
    f.support = 9.0 * sigma;
    f.bandwidth = s0;
    return f;
  }
  throw DomainError("synthesize: unknown kind '" + kind + "'");
}

void Config::validate() const {
  if (nr < 1) throw ConfigError("nr must be positive");
  if (per_panel < 2 || per_panel > 64) throw ConfigError("per_panel must lie in [2, 64]");
  if (smax < 0.0) throw ConfigError("smax must be non-negative");
  if (sphere_degree < 0) throw ConfigError("sphere_degree must be non-negative");
  for (double t : {quad_tol, truncation_tol, equivariance_tol, decomposition_tol})
    if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

TransformOptions Config::transform_options() const {
  TransformOptions o;
  o.nr = nr;
  o.per_panel = per_panel;
  o.smax = smax;
  o.truncation_tol = truncation_tol;
  return o;
}

Config parse_config(const std::string& text, Config base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    try {
      size_t used = 0;
      auto as_int = [&] { const int v = std::stoi(val, &used); if (used != val.size()) throw std::invalid_argument(val); return v; };
      auto as_double = [&] { const double v = std::stod(val, &used); if (used != val.size()) throw std::invalid_argument(val); return v; };
      if (key == "nr") base.nr = as_int();
      else if (key == "per_panel") base.per_panel = as_int();
      else if (key == "smax") base.smax = as_double();
      else if (key == "sphere_degree") base.sphere_degree = as_int();
      else if (key == "quad_tol") base.quad_tol = as_double();
      else if (key == "truncation_tol") base.truncation_tol = as_double();
      else if (key == "equivariance_tol") base.equivariance_tol = as_double();
      else if (key == "decomposition_tol") base.decomposition_tol = as_double();
      else if (key == "threads") base.threads = as_int();
      else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  base.validate();
  return base;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), base);
}

Config default_config() {
  if (const char* p = std::getenv("M3S_CONFIG"); p != nullptr && *p != '\0') return load_config(p);
  return {};
}

}  // namespace m3s
