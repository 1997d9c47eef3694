#include <doctest.h>

#include <cmath>

#include "m3s/fieldio.hpp"
#include "m3s/transform.hpp"
#include "support.hpp"

using namespace m3s;

namespace {

const double kGaussNorm = std::pow(2.0 * kPi, 1.5);

Mat gaussian_ft(int m, const Vec3& y) {
  return kGaussNorm * std::exp(-0.5 * y.squaredNorm()) * Mat::Identity(type_dim(m), type_dim(m));
}

SynthParams with_k(int k) {
  SynthParams p;
  p.k = k;
  return p;
}

Mat fd_laplacian(const RadialField& f, const Vec3& x, double h) {
  Mat out = -6.0 * eval_field(f, x);
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = h;
    out += eval_field(f, x + e) + eval_field(f, x - e);
  }
  return out / (h * h);
}

Mat fd_dtau(const RadialField& f, const Vec3& x, double h) {
  const auto& rep = type_context(f.m).rep;
  Mat out = Mat::Zero(f.dim(), f.dim());
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = h;
    out += rep[i] * (eval_field(f, x + e) - eval_field(f, x - e)) / (2.0 * h);
  }
  return out;
}

}  // namespace

TEST_SUITE("transform") {

TEST_CASE("gaussian classical transform") {
  auto g = test::rng(51);
  for (int m = 0; m <= 2; ++m) {
    const MatrixField f = synthesize("gaussian", m);
    for (int t = 0; t < 5; ++t) {
      const Vec3 y = test::random_point(g, 4.0);
      CHECK(max_abs(classical_ft(f, y) - gaussian_ft(m, y)) <= 1e-10);
    }
    CHECK(max_abs(classical_ft(MatrixField(RadialField::zeros(m)), Vec3(1, 2, 3))) == 0.0);
  }
}

TEST_CASE("radial fast path equals 3D quadrature") {
  auto g = test::rng(53);
  SynthParams pk;
  pk.s0 = 1.5;
  pk.j = 1;
  const std::vector<RadialField> fields{synthesize("gaussian", 1, with_k(1)), synthesize("gaussian", 2, with_k(2)),
                                        synthesize("plane-wave-packet", 2, pk)};
  for (const auto& f : fields)
    for (int t = 0; t < 3; ++t) {
      const Vec3 y = test::random_point(g, 3.0);
      const Mat fast = classical_ft(f, y);
      const Mat slow = classical_ft_3d(f, y);
      CHECK(max_abs(fast - slow) <= 1e-8 * (1.0 + max_abs(fast)));
    }
}

TEST_CASE("classical transform is equivariant") {
  auto g = test::rng(55);
  SynthParams pk;
  pk.j = -1;
  const MatrixField f = synthesize("plane-wave-packet", 2, pk);
  const auto& rep = type_context(2).rep;
  for (int t = 0; t < 5; ++t) {
    const auto k = Rotation::random(g);
    const Vec3 y = test::random_point(g, 3.0);
    const Mat tk = tau(rep, k);
    const Mat lhs = classical_ft(f, k.apply(y));
    CHECK(max_abs(lhs - tk * classical_ft(f, y) * tk.adjoint()) <= 1e-10 * (1.0 + max_abs(lhs)));
  }
}

TEST_CASE("h decomposition") {
  for (int m = 0; m <= 2; ++m) {
    const MatrixField f = synthesize("gaussian", m);
    for (double s : {0.3, 1.0, 2.5})
      for (const auto& h : h_decompose(f, s)) CHECK(std::abs(h - kGaussNorm * std::exp(-0.5 * s * s)) <= 1e-10);
    for (const auto& h : h_decompose(MatrixField(RadialField::zeros(m)), 1.0)) CHECK(h == cplx(0.0));
  }
  SynthParams pk;
  pk.j = 1;
  pk.s0 = 1.2;
  const MatrixField f = synthesize("plane-wave-packet", 2, pk);
  const auto p = projections(2, Vec3::UnitX());
  for (double s : {0.5, 1.2, 2.0}) {
    const auto h = h_decompose(f, s);
    Mat sum = Mat::Zero(5, 5);
    for (int j = -2; j <= 2; ++j) sum += h[static_cast<size_t>(j + 2)] * p(j);
    CHECK(max_abs(sum - classical_ft_axis(f, s)) <= 1e-8);
  }
  CHECK_THROWS_AS(h_decompose(f, 0.0), DomainError);
}

TEST_CASE("direct and fast spherical transforms agree") {
  auto g = test::rng(57);
  std::uniform_real_distribution<double> us(0.2, 3.0);
  for (int m = 0; m <= 2; ++m) {
    SynthParams pk;
    pk.s0 = 1.3;
    pk.j = m > 0 ? 1 : 0;
    std::vector<MatrixField> fields{synthesize("gaussian", m), synthesize("plane-wave-packet", m, pk)};
    if (m > 0) fields.emplace_back(synthesize("gaussian", m, with_k(1)));
    for (const auto& f : fields)
      for (int t = 0; t < 3; ++t) {
        const double s = us(g);
        const int j = std::uniform_int_distribution<int>(-m, m)(g);
        const cplx fast = spherical_ft(f, s, j, SftMode::Fast);
        const cplx direct = spherical_ft(f, s, j, SftMode::Direct);
        CHECK(std::abs(fast - direct) <= 1e-4 * (1.0 + std::abs(fast)));
        CHECK(std::abs(spherical_ft_parity(f, s, j) - fast) <= 1e-4 * (1.0 + std::abs(fast)));
      }
  }
  const MatrixField f = synthesize("gaussian", 1);
  CHECK_THROWS_AS(spherical_ft(f, 1.0, 2, SftMode::Fast), DomainError);
  CHECK_THROWS_AS(spherical_ft(f, -1.0, 0, SftMode::Direct), DomainError);
}

TEST_CASE("lattice transforms") {
  const auto geom = GridGeometry::centred(33, 0.5);
  const auto grid = sample(synthesize("gaussian", 1, with_k(1)), geom);
  const MatrixField gf = grid, rf = synthesize("gaussian", 1, with_k(1));
  for (double s : {0.5, 1.5}) {
    for (int j = -1; j <= 1; ++j) {
      const cplx ref = spherical_ft(rf, s, j, SftMode::Fast);
      CHECK(std::abs(spherical_ft(gf, s, j, SftMode::Fast) - ref) <= 1e-8);
      CHECK(std::abs(spherical_ft(gf, s, j, SftMode::Direct) - ref) <= 1e-8);
    }
  }
  const Vec3 y(0.3, -0.7, 1.1);
  CHECK(max_abs(classical_ft(gf, y) - classical_ft(rf, y)) <= 1e-8);
}

TEST_CASE("gaussian roundtrip through the inversion formula") {
  auto g = test::rng(59);
  for (int m = 0; m <= 2; ++m) {
    const MatrixField f = synthesize("gaussian", m);
    Diagnostics diag;
    const auto c = forward(f, {}, &diag);
    CHECK(diag.warnings.empty());
    for (size_t a = 0; a < c.s.size(); ++a)
      for (int j = -m; j <= m; ++j) CHECK(std::abs(c(j)[a] - kGaussNorm * std::exp(-0.5 * c.s[a] * c.s[a])) <= 1e-10);
    const Mat id = Mat::Identity(type_dim(m), type_dim(m));
    CHECK(max_abs(inverse(c, Vec3::Zero()) - id) <= 1e-3);
    for (int t = 0; t < 10; ++t) {
      const Vec3 x = test::random_point(g, 3.0);
      const Mat want = std::exp(-0.5 * x.squaredNorm()) * id;
      CHECK(max_abs(inverse(c, x) - want) <= 1e-3);
      if (t < 2) CHECK(max_abs(inverse_direct(c, x) - want) <= 1e-3);
    }
  }
  CHECK(std::abs(inversion_constant(1) - 1.0 / (6.0 * kPi * kPi)) < 1e-17);
  const auto z = SphericalCoefficients::zeros(1, 5.0, 32);
  CHECK(max_abs(inverse(z, Vec3(1, 0, 0))) == 0.0);
}

TEST_CASE("truncated spectrum is reported") {
  TransformOptions opt;
  opt.smax = 2.0;
  Diagnostics diag;
  forward(MatrixField(synthesize("gaussian", 0)), opt, &diag);
  CHECK(diag.truncation_estimate > 1e-3);
  CHECK_FALSE(diag.warnings.empty());
}

TEST_CASE("schwartz decomposition") {
  const auto geom = GridGeometry::centred(41, 0.4);
  {
    const auto dec = schwartz_decompose(sample(synthesize("gaussian", 1), geom));
    CHECK(dec.residual <= 1e-6);
    for (double r : {0.0, 0.5, 1.7, 3.0}) {
      const auto g = radial_values(dec.field, r);
      CHECK(std::abs(g[0] - std::exp(-0.5 * r * r)) <= 1e-6);
      CHECK(std::abs(g[1]) <= 1e-6);
      CHECK(std::abs(g[2]) <= 1e-6);
    }
  }
  {
    const auto dec = schwartz_decompose(sample(synthesize("gaussian", 1, with_k(1)), geom));
    for (double r : {0.3, 1.0, 2.2}) {
      const auto g = radial_values(dec.field, r);
      CHECK(std::abs(g[1] - std::exp(-0.5 * r * r)) <= 1e-6);
      CHECK(std::abs(g[0]) <= 1e-6);
      CHECK(std::abs(g[2]) <= 1e-6);
    }
  }
  {
    const auto dec = schwartz_decompose(GridField::zeros(2, GridGeometry::centred(9, 0.5)));
    CHECK(dec.residual == 0.0);
    for (const auto& v : radial_values(dec.field, 0.7)) CHECK(v == cplx(0.0));
  }
  {
    // A constant off-diagonal matrix times a Gaussian is not equivariant.
    auto bad = sample(synthesize("gaussian", 1), geom);
    for (size_t n = 0; n < geom.nodes(); ++n) {
      Mat v = bad.at(n);
      v(0, 2) = v(0, 0);
      bad.set(n, v);
    }
    CHECK(grid_equivariance_defect(bad) > 0.1);
    bool thrown = false;
    try {
      schwartz_decompose(bad);
    } catch (const DecompositionError& e) {
      thrown = true;
      CHECK(e.residual() > 0.1);
    }
    CHECK(thrown);
  }
}

TEST_CASE("multipliers") {
  auto g = test::rng(61);
  SynthParams pk;
  pk.s0 = 1.0;
  pk.j = 1;
  const RadialField f = synthesize("plane-wave-packet", 1, pk);
  const auto c = forward(f);
  const auto same = apply_multiplier(c, identity_multiplier());
  CHECK(same.values == c.values);
  const auto lap = apply_multiplier(c, laplacian_multiplier());
  const auto dt = apply_multiplier(c, dtau_multiplier());
  for (int t = 0; t < 5; ++t) {
    const Vec3 x = test::random_point(g, 3.0);
    const Mat want_lap = fd_laplacian(f, x, 1e-3), want_dt = fd_dtau(f, x, 1e-4);
    CHECK(max_abs(inverse(lap, x) - want_lap) <= 1e-3 * (1.0 + max_abs(want_lap)));
    CHECK(max_abs(inverse(dt, x) - want_dt) <= 1e-3 * (1.0 + max_abs(want_dt)));
    CHECK(max_abs(inverse(same, x) - eval_field(f, x)) <= 1e-6);
  }
  const auto table = table_multiplier(1, {{0.0, 1.0, 2.0, 3.0}, {2.0, 3.0, 4.0, 5.0}});
  CHECK(table(1.0, -1) == cplx(2.0));
  CHECK(table(1.0, 1) == cplx(4.0));
  CHECK(table(5.0, 0) == cplx(4.0));
  CHECK_THROWS_AS(table_multiplier(1, {{0.0, 1.0}}), DomainError);
}

TEST_CASE("transform of a convolution is the product of transforms") {
  const auto geom = GridGeometry::centred(21, 0.6);
  SynthParams p;
  p.sigma = 0.7;
  const auto a = sample(synthesize("gaussian", 1, p), geom);
  p.k = 1;
  const auto b = sample(synthesize("gaussian", 1, p), geom);
  const MatrixField conv = convolve(a, b);
  for (double s : {0.5, 1.2, 2.0})
    for (int j = -1; j <= 1; ++j) {
      const cplx lhs = spherical_ft(conv, s, j, SftMode::Direct);
      const cplx rhs = spherical_ft(MatrixField(a), s, j, SftMode::Fast) * spherical_ft(MatrixField(b), s, j, SftMode::Fast);
      CHECK(std::abs(lhs - rhs) <= 1e-3 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("bump spectrum roundtrip and peak") {
  SynthParams p;
  p.s0 = 2.0;
  p.width = 0.4;
  const MatrixField f = synthesize("bump", 0, p);
  TransformOptions opt;
  opt.smax = 6.0;
  const auto c = forward(f, opt);
  double err = 0.0, peak_s = 0.0, peak = 0.0;
  for (size_t a = 0; a < c.s.size(); ++a) {
    err = std::max(err, std::abs(c(0)[a] - bump_profile(p, c.s[a])));
    if (std::abs(c(0)[a]) > peak) {
      peak = std::abs(c(0)[a]);
      peak_s = c.s[a];
    }
  }
  CHECK(err <= 1e-3);
  CHECK(std::abs(peak_s - 2.0) < 0.1);
  // selecting a single j in the bump concentrates the spectrum there
  p.j = 1;
  const MatrixField f1 = synthesize("bump", 1, p);
  CHECK(std::abs(spherical_ft(f1, 2.0, 1, SftMode::Fast) - 1.0) <= 1e-3);
  CHECK(std::abs(spherical_ft(f1, 2.0, 0, SftMode::Fast)) <= 1e-3);
}

}
