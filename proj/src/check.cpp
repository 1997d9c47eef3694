#include "m3s/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>

#include "m3s/fieldio.hpp"
#include "m3s/polyalg.hpp"
#include "m3s/radial.hpp"
#include "m3s/so3rep.hpp"
#include "m3s/spherical.hpp"
#include "m3s/transform.hpp"

namespace m3s {

namespace {

using Rng = std::mt19937_64;

Vec3 ball(Rng& g, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec3 v(u(g), u(g), u(g));
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

CVec gaussian_vec(Rng& g, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVec v(d);
  for (int i = 0; i < d; ++i) v[i] = cplx(n(g), n(g));
  return v;
}

// Collects residuals per suite, in first-use order.
class Recorder {
 public:
  void add(const std::string& suite, double residual, double tol) {
    auto it = index_.find(suite);
    if (it == index_.end()) {
      index_[suite] = results_.size();
      results_.push_back({suite, 0, 0.0, tol, true});
      it = index_.find(suite);
    }
    auto& r = results_[it->second];
    ++r.cases;
    // NaN must fail, so compare the negation.
    if (!(residual <= tol)) r.pass = false;
    if (std::isnan(residual) || residual > r.max_residual) r.max_residual = residual;
  }
  std::vector<SuiteResult> take() { return std::move(results_); }

 private:
  std::map<std::string, size_t> index_;
  std::vector<SuiteResult> results_;
};

struct Sweep {
  std::vector<double> s;
  int points;
  int rotations;
  int gram;
  int radial_j;
  double radial_rmax;
  bool convolution;
};

void check_so3rep(Recorder& rec, int m, Rng& g, const Sweep& sw) {
  const auto rep = build_irrep(m);
  const Mat id = Mat::Identity(rep.dim, rep.dim);
  auto comm = [](const Mat& a, const Mat& b) { return Mat(a * b - b * a); };
  rec.add("so3rep.commutators",
          std::max({max_abs(comm(rep[0], rep[1]) + rep[2]), max_abs(comm(rep[1], rep[2]) + rep[0]),
                    max_abs(comm(rep[2], rep[0]) + rep[1])}),
          1e-14 * (1 + m));
  rec.add("so3rep.casimir",
          max_abs(rep[0] * rep[0] + rep[1] * rep[1] + rep[2] * rep[2] + double(m * (m + 1)) * id), 1e-13);
  for (int t = 0; t < sw.rotations; ++t) {
    const auto k = Rotation::random(g);
    const Mat tk = tau(rep, k);
    rec.add("so3rep.unitarity", max_abs(tk * tk.adjoint() - id), 1e-12);
    const Vec3 x = ball(g, 2.0);
    rec.add("so3rep.covariance", max_abs(tk * dtau(rep, x) * tk.adjoint() - dtau(rep, k.apply(x))), 1e-10);
    const Vec3 xi = x.normalized();
    Eigen::SelfAdjointEigenSolver<Mat> es(cplx(0.0, -1.0) * dtau(rep, xi), Eigen::EigenvaluesOnly);
    double err = 0.0;
    for (int a = 0; a < rep.dim; ++a) err = std::max(err, std::abs(es.eigenvalues()[a] - (a - m)));
    rec.add("so3rep.spectrum", err, 1e-12);
  }
}

void check_polyalg(Recorder& rec, int m, Rng& g, const Sweep& sw) {
  const auto rep = exact_generators(m);
  const auto q = build_Q(rep);
  const auto table = coeff_table(m);
  for (int j = 0; j <= 2 * m; ++j) {
    const auto& qj = q[static_cast<size_t>(j)];
    rec.add("polyalg.harmonic", laplacian(qj).is_zero() && qj.is_homogeneous(j) ? 0.0 : 1.0, 0.0);
    if (j >= 1) {
      const auto lhs = apply_dtau_op(rep, qj);
      rec.add("polyalg.dtau_lowering",
              (lhs - q[static_cast<size_t>(j - 1)] * exact::Scalar::rational(table(j))).is_zero() ? 0.0 : 1.0, 0.0);
    }
    bool eq = true;
    for (int i = 0; i < 3; ++i) eq = eq && equivariance_defect(rep, qj, i).is_zero();
    rec.add("polyalg.equivariance", eq ? 0.0 : 1.0, 0.0);
  }
  rec.add("polyalg.top_closure", top_closure_defect(rep, q).is_zero() ? 0.0 : 1.0, 0.0);
  const auto num = build_irrep(m);
  for (int t = 0; t < sw.rotations; ++t) {
    const auto k = Rotation::random(g);
    const Vec3 x = ball(g, 2.0);
    const Mat tk = tau(num, k);
    for (int j = 0; j <= 2 * m; ++j) {
      const Mat qx = eval(q[static_cast<size_t>(j)], x);
      rec.add("polyalg.rotation_equivariance",
              max_abs(eval(q[static_cast<size_t>(j)], k.apply(x)) - tk * qx * tk.adjoint()) / (1.0 + max_abs(qx)), 1e-10);
    }
  }
  if (m <= 3) {
    const auto predicted = q1_expansion_from_recursion(table);
    for (int j = 0; j <= 2 * m; ++j) {
      double bad = 0.0;
      try {
        bad = recover_q1_expansion(q, j).b == predicted[static_cast<size_t>(j)].b ? 0.0 : 1.0;
      } catch (const ConsistencyError&) {
        bad = 1.0;
      }
      rec.add("polyalg.q1_expansion", bad, 0.0);
    }
  }
}

void check_radial(Recorder& rec, const Sweep& sw) {
  for (int j = 0; j <= sw.radial_j; ++j)
    for (double r = 0.05; r <= sw.radial_rmax; r += 0.05 * (1.0 + std::floor(r / 5.0))) {
      const auto v = f_all(j + 1, r);
      if (j >= 1)
        rec.add("radial.recurrence",
                std::abs(v[static_cast<size_t>(j)] - v[static_cast<size_t>(j) - 1] -
                         r * r / ((2.0 * j + 1) * (2.0 * j + 3)) * v[static_cast<size_t>(j) + 1]),
                1e-12);
      rec.add("radial.differential", std::abs(f_derivative(j, r) / r + v[static_cast<size_t>(j) + 1] / (2.0 * j + 3)),
              1e-10);
      rec.add("radial.bounded", std::max(0.0, std::abs(v[static_cast<size_t>(j)]) - 1.0), 1e-12);
    }
  for (int j = 0; j <= sw.radial_j; ++j)
    for (double s : sw.s)
      for (double r = 0.1; r <= sw.radial_rmax / s; r += 0.3) {
        const double lhs = s * f_derivative(j, s * r) / (s * s * r);
        rec.add("radial.scaled_differential", std::abs(lhs + f_scaled(j + 1, s, r) / (2.0 * j + 3)), 1e-10);
      }
  for (int j = 0; j <= sw.radial_j; ++j) {
    double worst = 0.0;
    for (double r = 0.0; r <= 100.0; r += 0.01) worst = std::max(worst, std::abs(f(j, r)));
    rec.add("radial.bounded_0_100", std::max(0.0, worst - 1.0), 1e-12);
  }
  for (double r = 0.05; r <= sw.radial_rmax; r += 0.37) rec.add("radial.f0_closed_form", std::abs(f(0, r) - std::sin(r) / r), 1e-14);
  rec.add("radial.ode", std::abs(check_ode(0, 1.0, 2.0, 1e-4)), 1e-6);
  rec.add("radial.ode", std::abs(check_ode(3, 2.0, 0.5, 1e-4)), 1e-6);
}

void check_spherical(Recorder& rec, int m, Rng& g, const Sweep& sw) {
  const auto rep = build_irrep(m);
  const int d = rep.dim;
  const Mat id = Mat::Identity(d, d);
  for (double s : sw.s) {
    const auto ev = build_tridiagonal(m, s).eigenvalues();
    double err = 0.0;
    for (int j = -m; j <= m; ++j) err = std::max(err, std::abs(ev[static_cast<size_t>(j + m)] - s * j));
    rec.add("spherical.spectrum", err / s, 1e-10);
    for (int j = -m; j <= m; ++j) {
      const auto p1 = phi_method1(m, s, j), p3 = phi_method3(m, s, j), mirror = phi_method1(m, s, -j);
      rec.add("spherical.identity_at_origin", max_abs(eval_phi(p1, Vec3::Zero()) - id), 1e-12);
      for (int t = 0; t < sw.points; ++t) {
        const Vec3 x = ball(g, 5.0);
        const Mat phi = eval_phi(p1, x);
        rec.add("spherical.method1_vs_method3", max_abs(phi - eval_phi(p3, x)), 1e-10);
        const auto m2 = phi_method2_checked(m, s, j, x);
        rec.add("spherical.method1_vs_method2", max_abs(phi - m2.value), 1e-6);
        rec.add("spherical.laplacian_eigen", max_abs(laplacian_phi_fd(p1, x) + s * s * phi) / (1 + s * s), 1e-5);
        rec.add("spherical.dtau_eigen", max_abs(dtau_phi(p1, x) - s * j * phi) / (1 + s), 1e-6);
        rec.add("spherical.parity", max_abs(eval_phi(mirror, x) - eval_phi(p1, -x)), 1e-10);
        rec.add("spherical.conjugate", max_abs(phi.adjoint() - eval_phi(p1, -x)), 1e-10);
        const auto k = Rotation::random(g);
        const Mat tk = tau(rep, k);
        rec.add("spherical.equivariance", max_abs(tk * eval_phi(p1, k.inverse().apply(x)) * tk.adjoint() - phi), 1e-8);
      }
      for (int t = 0; t < sw.gram; ++t) {
        std::vector<Vec3> pts;
        std::vector<CVec> vs;
        for (int a = 0; a < 6; ++a) {
          pts.push_back(ball(g, 3.0));
          vs.push_back(gaussian_vec(g, d));
        }
        rec.add("spherical.positive_type", std::max(0.0, -check_positive_type(p1, pts, vs)), 1e-8);
      }
    }
  }
  for (int t = 0; t < sw.rotations; ++t) {
    const Vec3 xi = ball(g, 2.0) + Vec3(0.01, 0.0, 0.0);
    const auto fam = projections(m, xi);
    Mat sum = Mat::Zero(d, d);
    double err = 0.0;
    for (int j = -m; j <= m; ++j) {
      sum += fam(j);
      err = std::max(err, max_abs(fam(j) * fam(j) - fam(j)));
      for (int l = -m; l <= m; ++l)
        if (l != j) err = std::max(err, max_abs(fam(j) * fam(l)));
    }
    err = std::max(err, max_abs(sum - id));
    rec.add("spherical.projections", err, 1e-12);
    const auto k = Rotation::random(g);
    const Mat tk = tau(rep, k);
    const auto rot = projections(m, k.apply(xi));
    double cov = 0.0;
    for (int j = -m; j <= m; ++j) cov = std::max(cov, max_abs(rot(j) - tk * fam(j) * tk.adjoint()));
    rec.add("spherical.projection_covariance", cov, 1e-10);
  }
}

void check_transform(Recorder& rec, int m, Rng& g, const Sweep& sw) {
  const double norm = std::pow(2.0 * kPi, 1.5);
  const MatrixField gauss = synthesize("gaussian", m);
  const auto c = forward(gauss, {}, nullptr, Exec::Serial);
  for (size_t a = 0; a < c.s.size(); ++a)
    if (c.s[a] >= 0.1 && c.s[a] <= 4.0)
      for (int j = -m; j <= m; ++j)
        rec.add("transform.gaussian_spectrum", std::abs(c(j)[a] - norm * std::exp(-0.5 * c.s[a] * c.s[a])), 1e-4);
  const Mat id = Mat::Identity(type_dim(m), type_dim(m));
  for (int t = 0; t < sw.points; ++t) {
    const Vec3 x = ball(g, 3.0);
    rec.add("transform.inverse_roundtrip", max_abs(inverse(c, x) - std::exp(-0.5 * x.squaredNorm()) * id), 1e-3);
  }
  SynthParams pk;
  pk.s0 = 1.2;
  pk.j = m > 0 ? 1 : 0;
  const MatrixField packet = synthesize("plane-wave-packet", m, pk);
  std::uniform_real_distribution<double> us(0.2, 3.0);
  for (int t = 0; t < std::max(1, sw.points / 3); ++t) {
    const double s = us(g);
    const int j = std::uniform_int_distribution<int>(-m, m)(g);
    for (const auto* f : {&gauss, &packet}) {
      const cplx fast = spherical_ft(*f, s, j, SftMode::Fast);
      const cplx direct = spherical_ft(*f, s, j, SftMode::Direct, Exec::Serial);
      rec.add("transform.direct_vs_fast", std::abs(fast - direct) / (1.0 + std::abs(fast)), 1e-4);
      rec.add("transform.parity", std::abs(fast - spherical_ft_parity(*f, s, j, Exec::Serial)) / (1.0 + std::abs(fast)), 1e-4);
    }
  }
  if (sw.convolution && m <= 1) {
    const auto geom = GridGeometry::centred(21, 0.6);
    SynthParams p;
    p.sigma = 0.7;
    const auto a = sample(synthesize("gaussian", m, p), geom, Exec::Serial);
    p.k = m;
    const auto b = sample(synthesize("gaussian", m, p), geom, Exec::Serial);
    const MatrixField conv = convolve(a, b, Exec::Serial);
    for (double s : {0.5, 1.2, 2.0})
      for (int j = -m; j <= m; ++j) {
        const cplx lhs = spherical_ft(conv, s, j, SftMode::Direct, Exec::Serial);
        const cplx rhs = spherical_ft(MatrixField(a), s, j, SftMode::Fast) * spherical_ft(MatrixField(b), s, j, SftMode::Fast);
        rec.add("transform.convolution_homomorphism", std::abs(lhs - rhs) / (1.0 + std::abs(rhs)), 1e-3);
      }
  }
  // Multipliers against finite differences of the packet field.
  const auto& rf = std::get<RadialField>(packet);
  const auto pc = forward(packet, {}, nullptr, Exec::Serial);
  const auto lap = apply_multiplier(pc, laplacian_multiplier());
  const auto dt = apply_multiplier(pc, dtau_multiplier());
  const auto& rep = type_context(m).rep;
  for (int t = 0; t < std::max(1, sw.points / 3); ++t) {
    const Vec3 x = ball(g, 3.0);
    Mat fl = -6.0 * eval_field(rf, x), fdt = Mat::Zero(type_dim(m), type_dim(m));
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = 1e-3;
      const Mat plus = eval_field(rf, x + e), minus = eval_field(rf, x - e);
      fl += plus + minus;
      fdt += rep[i] * (plus - minus) / 2e-3;
    }
    fl /= 1e-6;
    rec.add("transform.laplacian_multiplier", max_abs(inverse(lap, x) - fl) / (1.0 + max_abs(fl)), 1e-3);
    rec.add("transform.dtau_multiplier", max_abs(inverse(dt, x) - fdt) / (1.0 + max_abs(fdt)), 1e-3);
  }
}

void check_fieldio(Recorder& rec, int m) {
  const auto geom = GridGeometry::centred(5, 0.5);
  const StoredField grid = sample(synthesize("gaussian", m), geom, Exec::Serial);
  const std::string bytes = encode_field(grid);
  const auto back = decode_field(bytes);
  rec.add("fieldio.roundtrip", back.payload == std::get<GridField>(grid).data && encode_field(back.field) == bytes ? 0.0 : 1.0, 0.0);
  std::string corrupt = bytes;
  corrupt[corrupt.size() / 2 + corrupt.find('\n') / 2] ^= 0x10;
  double detected = 1.0;
  try {
    decode_field(corrupt);
  } catch (const ChecksumError&) {
    detected = 0.0;
  }
  rec.add("fieldio.checksum", detected, 0.0);
}

}  // namespace

bool CheckReport::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass; });
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["profile"] = profile;
  j["m"] = ms;
  auto arr = nlohmann::json::array();
  for (const auto& s : suites) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", s.max_residual);
    arr.push_back({{"suite", s.suite}, {"cases", s.cases}, {"max-residual", buf}, {"tolerance", s.tolerance}, {"pass", s.pass}});
  }
  j["suites"] = arr;
  j["pass"] = pass();
  return j;
}

CheckReport run_check(const std::vector<int>& ms, std::uint64_t seed, CheckProfile profile) {
  const bool full = profile == CheckProfile::Full;
  const Sweep sw = full ? Sweep{{0.5, 1.0, 2.0}, 10, 20, 10, 8, 50.0, true} : Sweep{{1.0}, 3, 5, 2, 4, 20.0, false};
  CheckReport report;
  report.seed = seed;
  report.profile = full ? "full" : "quick";
  report.ms = ms;
  Recorder rec;
  Rng g(seed);
  check_radial(rec, sw);
  std::vector<int> exact_ms = ms;
  if (full)
    for (int m = 0; m <= kExactMaxM; ++m)
      if (std::find(exact_ms.begin(), exact_ms.end(), m) == exact_ms.end()) exact_ms.push_back(m);
  std::sort(exact_ms.begin(), exact_ms.end());
  for (int m : exact_ms)
    if (m <= kExactMaxM) check_polyalg(rec, m, g, sw);
  for (int m : ms)
    if (m < 0) throw DomainError("check: m must be non-negative");
  // the representation identities are cheap, so the full profile sweeps m <= 8
  std::vector<int> rep_ms = ms;
  if (full)
    for (int m = 0; m <= 8; ++m)
      if (std::find(rep_ms.begin(), rep_ms.end(), m) == rep_ms.end()) rep_ms.push_back(m);
  std::sort(rep_ms.begin(), rep_ms.end());
  for (int m : rep_ms) check_so3rep(rec, m, g, sw);
  for (int m : ms) {
    check_spherical(rec, m, g, sw);
    if (full || m <= 2) check_transform(rec, m, g, sw);
    check_fieldio(rec, m);
  }
  report.suites = rec.take();
  return report;
}

}  // namespace m3s
