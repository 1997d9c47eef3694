#include "m3s/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "m3s/parallel.hpp"
#include "m3s/quadrature.hpp"

namespace m3s {

namespace {

constexpr std::size_t kChunk = 2048;

// Gauss-Legendre panels on [0, radius] fine enough for an integrand
// oscillating at frequency `freq`.
GaussRule radial_rule(double radius, double freq) {
  const int panels = std::max(4, static_cast<int>(std::ceil(radius * (freq + 1.0) / 2.0)) + 4);
  return gauss_legendre_panels(panels, 16, 0.0, radius);
}

// Tr[A B^*] = sum_ab A_ab conj(B_ab)
cplx trace_adj(const Mat& a, const Mat& b) {
  cplx t = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) t += a.data()[i] * std::conj(b.data()[i]);
  return t;
}

// Plane sums S(i) = sum_{j,k} F(i, j, k): everything needed for F^(s e_1).
struct AxisSums {
  std::vector<double> x1;
  std::vector<Mat> s;
};

AxisSums axis_sums(const GridField& f) {
  const auto& g = f.geom;
  const int d = f.dim();
  AxisSums out;
  for (int i = 0; i < g.n[0]; ++i) {
    out.x1.push_back(g.origin[0] + g.spacing * i);
    Mat acc = Mat::Zero(d, d);
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j) acc += f.at(g.index(i, j, k));
    out.s.push_back(std::move(acc));
  }
  return out;
}

Mat axis_ft(const AxisSums& a, double spacing, double s) {
  Mat acc = Mat::Zero(a.s.front().rows(), a.s.front().cols());
  for (size_t i = 0; i < a.x1.size(); ++i) {
    const double ph = -s * a.x1[i];
    acc += cplx(std::cos(ph), std::sin(ph)) * a.s[i];
  }
  return spacing * spacing * spacing * acc;
}

// Profile values g_k at the nodes of a radial rule.
struct RadialSamples {
  GaussRule rule;
  std::vector<std::vector<cplx>> g;  // [node][k]
};

RadialSamples sample_radial(const RadialField& f, double freq, Exec exec = Exec::Serial) {
  RadialSamples out;
  out.rule = radial_rule(f.support, freq + f.bandwidth);
  out.g.resize(out.rule.size());
  parallel_for(out.rule.size(), exec, [&](size_t a) {
    std::vector<cplx> v;
    for (const auto& p : f.g) v.push_back(p(out.rule.nodes[a]));
    out.g[a] = std::move(v);
  });
  return out;
}

// F^(y) = sum_k 4 pi (-i)^k / (2k+1)!! Q_k(y) int g_k(r) f_k(r|y|) r^(2k+2) dr
Mat radial_ft(int m, const RadialSamples& smp, const Vec3& y) {
  const int n = 2 * m + 1;
  const double rho = y.norm();
  std::vector<cplx> integral(static_cast<size_t>(n), 0.0);
  std::vector<double> fk(static_cast<size_t>(n));
  for (size_t a = 0; a < smp.rule.size(); ++a) {
    const double r = smp.rule.nodes[a];
    f_all(n - 1, r * rho, fk);
    double rp = r * r;  // r^(2k+2)
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<size_t>(k);
      const cplx gk = smp.g[a][uk];
      if (gk != 0.0) integral[uk] += smp.rule.weights[a] * gk * fk[uk] * rp;
      rp *= r * r;
    }
  }
  std::vector<Mat> q;
  eval_q(type_context(m), y, q);
  const int d = type_dim(m);
  Mat out = Mat::Zero(d, d);
  cplx phase(1.0, 0.0);  // (-i)^k
  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<size_t>(k);
    out += (4.0 * kPi * phase / odd_double_factorial(k) * integral[uk]) * q[uk];
    phase *= cplx(0.0, -1.0);
  }
  return out;
}

Mat radial_ft(const RadialField& f, const Vec3& y) {
  return radial_ft(f.m, sample_radial(f, y.norm()), y);
}

Mat grid_ft(const GridField& f, const Vec3& y, Exec exec) {
  const int d = f.dim();
  const double h3 = std::pow(f.geom.spacing, 3);
  const Mat total = chunked_sum(f.geom.nodes(), kChunk, exec, Mat(Mat::Zero(d, d)), [&](size_t b, size_t e) {
    Mat acc = Mat::Zero(d, d);
    for (size_t n = b; n < e; ++n) {
      const double ph = -y.dot(f.geom.point(n));
      acc += cplx(std::cos(ph), std::sin(ph)) * f.at(n);
    }
    return acc;
  });
  return h3 * total;
}

double frob(const Mat& a) { return a.norm(); }

// Scalar data behind to_radial: g_l(rho) = sum_n G[l][n] f_l(s_n rho).
struct RadialSynth {
  int m = 0;
  std::vector<double> s;
  std::vector<std::vector<cplx>> G;  // [l][node]

  std::vector<cplx> values(double rho) const {
    const int n = 2 * m + 1;
    std::vector<cplx> out(static_cast<size_t>(n), 0.0);
    std::vector<double> fv(static_cast<size_t>(n));
    for (size_t a = 0; a < s.size(); ++a) {
      f_all(n - 1, s[a] * rho, fv);
      for (int l = 0; l < n; ++l) {
        const auto ul = static_cast<size_t>(l);
        out[ul] += G[ul][a] * fv[ul];
      }
    }
    return out;
  }
};

std::shared_ptr<const RadialSynth> make_synth(const SphericalCoefficients& c) {
  auto syn = std::make_shared<RadialSynth>();
  const int m = c.m, n = 2 * m + 1;
  syn->m = m;
  syn->s = c.s;
  std::vector<CVec> u;
  for (int j = -m; j <= m; ++j) u.push_back(phi_method1(m, 1.0, j).coeffs);
  const double cst = inversion_constant(m);
  syn->G.assign(static_cast<size_t>(n), std::vector<cplx>(c.s.size(), 0.0));
  for (size_t a = 0; a < c.s.size(); ++a) {
    double sp = c.s[a] * c.s[a];  // s^(2+l)
    for (int l = 0; l < n; ++l) {
      cplx acc = 0.0;
      for (int j = -m; j <= m; ++j) {
        const auto uj = static_cast<size_t>(j + m);
        acc += c.values[uj][a] * u[uj][l];
      }
      syn->G[static_cast<size_t>(l)][a] = cst * c.weights[a] * sp * acc;
      sp *= c.s[a];
    }
  }
  return syn;
}

Mat combine(int m, const Vec3& x, const std::vector<cplx>& g) {
  std::vector<Mat> q;
  eval_q(type_context(m), x, q);
  const int d = type_dim(m);
  Mat out = Mat::Zero(d, d);
  for (size_t l = 0; l < g.size(); ++l)
    if (g[l] != 0.0) out += g[l] * q[l];
  return out;
}

}  // namespace

Vec3 GridGeometry::point(size_t idx) const {
  const size_t n0 = static_cast<size_t>(n[0]), n1 = static_cast<size_t>(n[1]);
  const auto i = static_cast<double>(idx % n0);
  const auto j = static_cast<double>((idx / n0) % n1);
  const auto k = static_cast<double>(idx / (n0 * n1));
  return origin + spacing * Vec3(i, j, k);
}

GridGeometry GridGeometry::centred(int per_axis, double spacing) {
  GridGeometry g;
  g.n = {per_axis, per_axis, per_axis};
  g.spacing = spacing;
  const double o = -0.5 * spacing * (per_axis - 1);
  g.origin = Vec3(o, o, o);
  return g;
}

Mat GridField::at(size_t node) const {
  const int d = dim();
  Mat v(d, d);
  const cplx* p = data.data() + node * static_cast<size_t>(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) v(a, b) = p[a * d + b];
  return v;
}

void GridField::set(size_t node, const Mat& v) {
  const int d = dim();
  cplx* p = data.data() + node * static_cast<size_t>(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) p[a * d + b] = v(a, b);
}

GridField GridField::zeros(int m, const GridGeometry& g) {
  GridField f;
  f.m = m;
  f.geom = g;
  f.data.assign(g.nodes() * static_cast<size_t>(type_dim(m) * type_dim(m)), 0.0);
  return f;
}

RadialField RadialField::zeros(int m) {
  RadialField f;
  f.m = m;
  for (int k = 0; k <= 2 * m; ++k) f.g.push_back(zero_profile());
  return f;
}

int field_m(const MatrixField& f) {
  return std::visit([](const auto& v) { return v.m; }, f);
}

std::vector<cplx> radial_values(const RadialField& f, double r) {
  std::vector<cplx> out;
  out.reserve(f.g.size());
  for (const auto& p : f.g) out.push_back(p(r));
  return out;
}

Mat eval_field(const RadialField& f, const Vec3& x) {
  return combine(f.m, x, radial_values(f, x.norm()));
}

GridField sample(const RadialField& f, const GridGeometry& g, Exec exec) {
  type_context(f.m);
  GridField out = GridField::zeros(f.m, g);
  parallel_for(g.nodes(), exec, [&](size_t n) { out.set(n, eval_field(f, g.point(n))); });
  return out;
}

Mat classical_ft(const MatrixField& f, const Vec3& y) {
  if (const auto* r = std::get_if<RadialField>(&f)) return radial_ft(*r, y);
  return grid_ft(std::get<GridField>(f), y, Exec::Parallel);
}

Mat classical_ft_axis(const MatrixField& f, double s) {
  if (const auto* r = std::get_if<RadialField>(&f)) return radial_ft(*r, s * Vec3::UnitX());
  const auto& g = std::get<GridField>(f);
  return axis_ft(axis_sums(g), g.geom.spacing, s);
}

Mat classical_ft_3d(const RadialField& f, const Vec3& y, int radial_nodes, int sphere_degree) {
  const double rho = y.norm();
  GaussRule rule = radial_rule(f.support, rho + f.bandwidth);
  if (radial_nodes > 0) rule = gauss_legendre_panels((radial_nodes + 15) / 16, 16, 0.0, f.support);
  std::map<int, SphereRule> rules;
  const int d = f.dim();
  Mat out = Mat::Zero(d, d);
  for (size_t a = 0; a < rule.size(); ++a) {
    const double r = rule.nodes[a];
    const int deg = sphere_degree > 0 ? sphere_degree : band_limit_degree(f.m, rho, r);
    auto it = rules.find(deg);
    if (it == rules.end()) it = rules.emplace(deg, sphere_rule(deg)).first;
    const auto& sr = it->second;
    const auto g = radial_values(f, r);
    Mat shell = Mat::Zero(d, d);
    for (size_t b = 0; b < sr.size(); ++b) {
      const Vec3 x = r * sr.nodes[b];
      const double ph = -x.dot(y);
      shell += (sr.weights[b] * cplx(std::cos(ph), std::sin(ph))) * combine(f.m, x, g);
    }
    out += (4.0 * kPi * rule.weights[a] * r * r) * shell;
  }
  return out;
}

std::vector<cplx> h_decompose(const MatrixField& f, double s) {
  if (!(s > 0.0)) throw DomainError("h_decompose: s must be positive");
  const int m = field_m(f);
  const Mat ft = classical_ft_axis(f, s);
  const auto p = projections(m, Vec3::UnitX());
  std::vector<cplx> h;
  for (int j = -m; j <= m; ++j) h.push_back((ft * p(j)).trace());
  return h;
}

namespace {

cplx direct_sft(const MatrixField& f, const SphericalFunctionSpec& spec, bool mirrored, Exec exec) {
  const int m = field_m(f);
  const int d = type_dim(m);
  auto phi_at = [&](const Vec3& x) { return mirrored ? eval_phi(spec, -x) : eval_phi(spec, x); };
  if (const auto* g = std::get_if<GridField>(&f)) {
    const double h3 = std::pow(g->geom.spacing, 3);
    const cplx total = chunked_sum(g->geom.nodes(), kChunk, exec, cplx(0.0), [&](size_t b, size_t e) {
      cplx acc = 0.0;
      for (size_t n = b; n < e; ++n) {
        const Vec3 x = g->geom.point(n);
        acc += trace_adj(g->at(n), phi_at(x));
      }
      return acc;
    });
    return h3 * total / static_cast<double>(d);
  }
  const auto& rf = std::get<RadialField>(f);
  // Both factors are polynomials of degree <= 2m on each sphere, so a rule of
  // degree 4m integrates the angular part exactly.
  const auto sr = sphere_rule(4 * m);
  const auto rule = radial_rule(rf.support, spec.s + rf.bandwidth);
  const cplx total = chunked_sum(rule.size(), 8, exec, cplx(0.0), [&](size_t b, size_t e) {
    cplx acc = 0.0;
    for (size_t a = b; a < e; ++a) {
      const double r = rule.nodes[a];
      const auto g = radial_values(rf, r);
      cplx shell = 0.0;
      for (size_t k = 0; k < sr.size(); ++k) {
        const Vec3 x = r * sr.nodes[k];
        shell += sr.weights[k] * trace_adj(combine(m, x, g), phi_at(x));
      }
      acc += rule.weights[a] * r * r * shell;
    }
    return acc;
  });
  return 4.0 * kPi * total / static_cast<double>(d);
}

}  // namespace

cplx spherical_ft(const MatrixField& f, double s, int j, SftMode mode, Exec exec) {
  const int m = field_m(f);
  if (!(s > 0.0)) throw DomainError("spherical_ft: s must be positive");
  if (j < -m || j > m) throw DomainError("spherical_ft: j must lie in [-m, m]");
  if (mode == SftMode::Fast) return h_decompose(f, s)[static_cast<size_t>(m - j)];
  return direct_sft(f, phi_method1(m, s, j), false, exec);
}

cplx spherical_ft_parity(const MatrixField& f, double s, int j, Exec exec) {
  const int m = field_m(f);
  if (!(s > 0.0)) throw DomainError("spherical_ft: s must be positive");
  if (j < -m || j > m) throw DomainError("spherical_ft: j must lie in [-m, m]");
  return direct_sft(f, phi_method1(m, s, -j), true, exec);
}

RadialProfile SphericalCoefficients::profile(int j) const {
  return sampled_profile(s, (*this)(j), "spectrum j=" + std::to_string(j));
}

SphericalCoefficients SphericalCoefficients::zeros(int m, double smax, int nr, int per_panel) {
  if (!(smax > 0.0)) throw DomainError("SphericalCoefficients: smax must be positive");
  if (nr < 1 || per_panel < 1) throw DomainError("SphericalCoefficients: need at least one node");
  const int panels = (nr + per_panel - 1) / per_panel;
  const auto rule = gauss_legendre_panels(panels, per_panel, 0.0, smax);
  SphericalCoefficients c;
  c.m = m;
  c.smax = smax;
  c.s = rule.nodes;
  c.weights = rule.weights;
  c.values.assign(static_cast<size_t>(type_dim(m)), std::vector<cplx>(rule.size(), 0.0));
  return c;
}

double width_estimate(const MatrixField& f) {
  double num = 0.0, den = 0.0;
  if (const auto* g = std::get_if<GridField>(&f)) {
    for (size_t n = 0; n < g->geom.nodes(); ++n) {
      const double w = frob(g->at(n));
      num += g->geom.point(n).squaredNorm() * w;
      den += w;
    }
  } else {
    const auto& rf = std::get<RadialField>(f);
    const auto rule = radial_rule(rf.support, rf.bandwidth);
    for (size_t a = 0; a < rule.size(); ++a) {
      const double r = rule.nodes[a];
      const double w = rule.weights[a] * r * r * frob(eval_field(rf, r * Vec3::UnitX()));
      num += r * r * w;
      den += w;
    }
  }
  if (!(den > 0.0)) return 1.0;
  return std::sqrt(num / (3.0 * den));
}

SphericalCoefficients forward(const MatrixField& f, const TransformOptions& opt, Diagnostics* diag,
                              Exec exec) {
  const int m = field_m(f);
  double smax = opt.smax > 0.0 ? opt.smax : 12.0 / width_estimate(f);
  // A lattice sum is periodic in s with period 2 pi / spacing.
  if (const auto* g = std::get_if<GridField>(&f); g && opt.smax <= 0.0)
    smax = std::min(smax, kPi / g->geom.spacing);
  auto c = SphericalCoefficients::zeros(m, smax, opt.nr, opt.per_panel);
  const auto p = projections(m, Vec3::UnitX());
  std::optional<AxisSums> sums;
  const auto* grid = std::get_if<GridField>(&f);
  if (grid) sums = axis_sums(*grid);
  const auto* radial = std::get_if<RadialField>(&f);
  type_context(m);
  std::optional<RadialSamples> smp;
  if (radial) smp = sample_radial(*radial, smax, exec);
  parallel_for(c.s.size(), exec, [&](size_t a) {
    const double s = c.s[a];
    const Mat ft = grid ? axis_ft(*sums, grid->geom.spacing, s) : radial_ft(m, *smp, s * Vec3::UnitX());
    for (int j = -m; j <= m; ++j)
      c.values[static_cast<size_t>(j + m)][a] = (ft * p(-j)).trace();
  });
  // Tail check: magnitude over the last panel relative to the peak.
  double peak = 0.0, tail = 0.0;
  const size_t last = c.s.size() - static_cast<size_t>(std::min<int>(opt.per_panel, static_cast<int>(c.s.size())));
  for (const auto& row : c.values)
    for (size_t a = 0; a < row.size(); ++a) {
      peak = std::max(peak, std::abs(row[a]));
      if (a >= last) tail = std::max(tail, std::abs(row[a]));
    }
  const double rel = peak > 0.0 ? tail / peak : 0.0;
  if (diag) {
    diag->truncation_estimate = rel;
    if (rel > opt.truncation_tol)
      diag->warnings.push_back("spectrum not negligible at smax = " + std::to_string(smax) +
                               " (relative tail " + std::to_string(rel) + ")");
    if (grid && smax > kPi / grid->geom.spacing)
      diag->warnings.push_back("smax exceeds the lattice Nyquist frequency pi/spacing");
  }
  return c;
}

double inversion_constant(int m) { return 1.0 / (2.0 * kPi * kPi * type_dim(m)); }

RadialField to_radial(const SphericalCoefficients& c, Diagnostics* diag) {
  auto syn = make_synth(c);
  RadialField out;
  out.m = c.m;
  out.support = 120.0 / c.smax;
  double peak = 0.0;
  for (const auto& row : c.values)
    for (size_t a = 0; a < row.size(); ++a)
      if (std::abs(row[a]) > peak) {
        peak = std::abs(row[a]);
        out.bandwidth = c.s[a];
      }
  for (int l = 0; l <= 2 * c.m; ++l)
    out.g.push_back({[syn, l](double r) { return syn->values(r)[static_cast<size_t>(l)]; },
                     "g_" + std::to_string(l)});
  (void)diag;
  return out;
}

Mat inverse(const SphericalCoefficients& c, const Vec3& x) {
  const auto syn = make_synth(c);
  return combine(c.m, x, syn->values(x.norm()));
}

Mat inverse_direct(const SphericalCoefficients& c, const Vec3& x) {
  const int m = c.m, d = type_dim(m);
  Mat out = Mat::Zero(d, d);
  for (size_t a = 0; a < c.s.size(); ++a)
    for (int j = -m; j <= m; ++j) {
      const cplx v = c.values[static_cast<size_t>(j + m)][a];
      if (v == 0.0) continue;
      out += (c.weights[a] * c.s[a] * c.s[a] * v) * eval_phi(phi_method1(m, c.s[a], j), x);
    }
  return inversion_constant(m) * out;
}

std::vector<Mat> inverse_batch(const SphericalCoefficients& c, const std::vector<Vec3>& xs, Exec exec) {
  const auto syn = make_synth(c);
  type_context(c.m);
  std::vector<Mat> out(xs.size());
  parallel_for(xs.size(), exec, [&](size_t i) { out[i] = combine(c.m, xs[i], syn->values(xs[i].norm())); });
  return out;
}

GridField inverse_on_grid(const SphericalCoefficients& c, const GridGeometry& g, Exec exec) {
  const auto syn = make_synth(c);
  type_context(c.m);
  // Lattices centred at the origin repeat each radius many times.
  std::vector<double> radii(g.nodes());
  for (size_t n = 0; n < radii.size(); ++n) radii[n] = g.point(n).norm();
  std::vector<double> uniq = radii;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<std::vector<cplx>> gv(uniq.size());
  parallel_for(uniq.size(), exec, [&](size_t i) { gv[i] = syn->values(uniq[i]); });
  GridField out = GridField::zeros(c.m, g);
  parallel_for(g.nodes(), exec, [&](size_t n) {
    const size_t i = static_cast<size_t>(std::lower_bound(uniq.begin(), uniq.end(), radii[n]) - uniq.begin());
    out.set(n, combine(c.m, g.point(n), gv[i]));
  });
  return out;
}

Decomposition schwartz_decompose(const GridField& f, const TransformOptions& opt, double tolerance,
                                 Exec exec) {
  Decomposition out;
  const auto coeffs = forward(f, opt, &out.diagnostics, exec);
  out.field = to_radial(coeffs, &out.diagnostics);
  const GridField rec = inverse_on_grid(coeffs, f.geom, exec);
  double err = 0.0, scale = 0.0;
  for (size_t i = 0; i < f.data.size(); ++i) {
    err = std::max(err, std::abs(rec.data[i] - f.data[i]));
    scale = std::max(scale, std::abs(f.data[i]));
  }
  out.residual = scale > 0.0 ? err / scale : err;
  if (out.residual > tolerance)
    throw DecompositionError("schwartz_decompose: reconstruction residual " + std::to_string(out.residual) +
                                 " exceeds tolerance " + std::to_string(tolerance),
                             out.residual);
  return out;
}

SphericalCoefficients apply_multiplier(const SphericalCoefficients& c, const Multiplier& mu) {
  SphericalCoefficients out = c;
  for (int j = -c.m; j <= c.m; ++j)
    for (size_t a = 0; a < c.s.size(); ++a) out.values[static_cast<size_t>(j + c.m)][a] *= mu(c.s[a], j);
  return out;
}

Multiplier laplacian_multiplier() {
  return [](double s, int) { return cplx(-s * s); };
}

Multiplier dtau_multiplier() {
  return [](double s, int j) { return cplx(s * j); };
}

Multiplier identity_multiplier() {
  return [](double, int) { return cplx(1.0); };
}

Multiplier table_multiplier(int m, const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DomainError("table_multiplier: empty table");
  for (const auto& r : rows)
    if (r.size() != static_cast<size_t>(type_dim(m) + 1))
      throw DomainError("table_multiplier: each row needs s followed by 2m+1 values");
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return [m, sorted](double s, int j) {
    const auto col = static_cast<size_t>(j + m + 1);
    if (s <= sorted.front()[0]) return cplx(sorted.front()[col]);
    if (s >= sorted.back()[0]) return cplx(sorted.back()[col]);
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), s,
                                     [](double v, const auto& row) { return v < row[0]; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (s - lo[0]) / (hi[0] - lo[0]);
    return cplx((1.0 - t) * lo[col] + t * hi[col]);
  };
}

double grid_equivariance_defect(const GridField& f) {
  const auto& rep = type_context(f.m).rep;
  double defect = 0.0, scale = 0.0;
  for (size_t n = 0; n < f.geom.nodes(); ++n) {
    const Mat v = f.at(n);
    scale = std::max(scale, max_abs(v));
    const Vec3 x = f.geom.point(n);
    const double r = x.norm();
    if (r == 0.0) continue;
    const Mat a = dtau(rep, x / r);
    defect = std::max(defect, max_abs(a * v - v * a));
  }
  return scale > 0.0 ? defect / scale : 0.0;
}

GridField convolve(const GridField& a, const GridField& b, Exec exec) {
  if (a.m != b.m || a.geom.n != b.geom.n || a.geom.spacing != b.geom.spacing || a.geom.origin != b.geom.origin)
    throw DomainError("convolve: fields must share m and lattice");
  const auto& g = a.geom;
  // x_p - y_q = h (p - q) is the node p - q + o, o = -origin / h, which must be integral.
  std::array<int, 3> o{};
  for (int i = 0; i < 3; ++i) {
    const double v = -g.origin[i] / g.spacing;
    o[static_cast<size_t>(i)] = static_cast<int>(std::lround(v));
    if (std::abs(v - o[static_cast<size_t>(i)]) > 1e-9)
      throw DomainError("convolve: lattice origin must be a multiple of the spacing");
  }
  const int d = a.dim();
  const double h3 = std::pow(g.spacing, 3);
  std::vector<Mat> av(g.nodes()), bv(g.nodes());
  for (size_t n = 0; n < g.nodes(); ++n) {
    av[n] = a.at(n);
    bv[n] = b.at(n);
  }
  GridField out = GridField::zeros(a.m, g);
  parallel_for(g.nodes(), exec, [&](size_t p) {
    const int pi = static_cast<int>(p % static_cast<size_t>(g.n[0]));
    const int pj = static_cast<int>((p / static_cast<size_t>(g.n[0])) % static_cast<size_t>(g.n[1]));
    const int pk = static_cast<int>(p / (static_cast<size_t>(g.n[0]) * g.n[1]));
    Mat acc = Mat::Zero(d, d);
    for (int qk = 0; qk < g.n[2]; ++qk) {
      const int rk = pk - qk + o[2];
      if (rk < 0 || rk >= g.n[2]) continue;
      for (int qj = 0; qj < g.n[1]; ++qj) {
        const int rj = pj - qj + o[1];
        if (rj < 0 || rj >= g.n[1]) continue;
        for (int qi = 0; qi < g.n[0]; ++qi) {
          const int ri = pi - qi + o[0];
          if (ri < 0 || ri >= g.n[0]) continue;
          acc.noalias() += av[g.index(qi, qj, qk)] * bv[g.index(ri, rj, rk)];
        }
      }
    }
    out.set(p, h3 * acc);
  });
  return out;
}

}  // namespace m3s
