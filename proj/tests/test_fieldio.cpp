#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "m3s/fieldio.hpp"
#include "support.hpp"

using namespace m3s;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("m3s_test_" + name)).string();
}

// Random (non-equivariant is fine for the format) grid field.
GridField random_grid(int m, int n, std::uint64_t seed) {
  auto g = test::rng(seed);
  std::normal_distribution<double> nd;
  GridField f = GridField::zeros(m, GridGeometry{{n, n + 1, n + 2}, 0.3, Vec3(-1.0, -1.5, 0.25)});
  for (auto& v : f.data) v = {nd(g), nd(g)};
  return f;
}

std::vector<cplx> payload_of(const StoredField& f) { return decode_field(encode_field(f)).payload; }

bool bit_equal(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

}  // namespace

TEST_SUITE("fieldio") {

TEST_CASE("grid roundtrip through a file is bit-exact") {
  for (int m = 0; m <= 8; ++m) {
    const auto f = random_grid(m, m <= 2 ? 4 : 2, 100 + m);
    const auto path = temp_path("grid.m3sf");
    write_field(f, path);
    const auto back = read_field(path, 1e300);
    CHECK(form_of(back.field) == FieldForm::Grid);
    CHECK(bit_equal(back.payload, f.data));
    const auto& g = std::get<GridField>(back.field);
    CHECK(g.geom.n == f.geom.n);
    CHECK(g.geom.spacing == f.geom.spacing);
    CHECK(g.geom.origin == f.geom.origin);
    CHECK(bit_equal(g.data, f.data));
    // re-encoding the loaded field gives the same bytes
    CHECK(encode_field(back.field) == encode_field(f));
    std::filesystem::remove(path);
  }
}

TEST_CASE("radial and spectrum roundtrips are bit-exact") {
  for (int m = 0; m <= 2; ++m) {
    SynthParams p;
    p.k = m;
    const StoredField rf = synthesize("gaussian", m, p);
    const auto once = decode_field(encode_field(rf));
    CHECK(form_of(once.field) == FieldForm::Radial);
    CHECK(encode_field(once.field) == encode_field(rf));
    // g_m was the gaussian; the stored diagonal must hold it exactly
    const auto& r = std::get<RadialField>(once.field);
    CHECK(r.r_grid.size() == default_r_grid(std::get<RadialField>(rf)).size());
    const double rr = r.r_grid[10];
    CHECK(r.g[static_cast<size_t>(m)](rr) == cplx(std::exp(-0.5 * rr * rr)));

    const StoredField spec = forward(std::get<RadialField>(rf), {}, nullptr, Exec::Serial);
    const auto sb = decode_field(encode_field(spec));
    CHECK(form_of(sb.field) == FieldForm::Spectrum);
    const auto& c0 = std::get<SphericalCoefficients>(spec);
    const auto& c1 = std::get<SphericalCoefficients>(sb.field);
    CHECK(c1.s == c0.s);
    CHECK(c1.weights == c0.weights);
    CHECK(c1.values == c0.values);
    CHECK(c1.smax == c0.smax);
  }
}

TEST_CASE("m = 1 grid of 16^3 nodes") {
  GridField f = GridField::zeros(1, GridGeometry::centred(16, 0.5));
  const auto bytes = encode_field(f);
  const auto nl = bytes.find('\n');
  CHECK(bytes.size() - nl - 1 == 16u * 16 * 16 * 9 * 16);
  const auto back = decode_field(bytes);
  CHECK(back.header.m == 1);
  CHECK(back.payload.size() == 16u * 16 * 16 * 9);
  const auto& g = std::get<GridField>(back.field);
  CHECK(g.geom.nodes() == 4096);
  CHECK(g.at(0).rows() == 3);
  CHECK(g.at(4095).cols() == 3);
  const auto header = nlohmann::json::parse(bytes.substr(0, nl));
  CHECK(header["magic"] == "M3SF");
  CHECK(header["version"] == 1);
  CHECK(header["form"] == "grid");
  CHECK(header["grid"]["n"] == nlohmann::json({16, 16, 16}));
  CHECK(header["endianness"] == "little");
}

TEST_CASE("payload is little-endian re/im pairs, node-major then row-major") {
  GridField f = GridField::zeros(1, GridGeometry{{2, 1, 1}, 1.0, Vec3::Zero()});
  Mat a = Mat::Zero(3, 3);
  a(0, 1) = cplx(1.5, -2.0);
  f.set(1, a);
  const auto bytes = encode_field(f);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + bytes.find('\n') + 1);
  // node 1, entry (0,1) -> complex index 9 + 1
  const size_t off = 16 * 10;
  std::uint64_t re = 0, im = 0;
  for (int b = 7; b >= 0; --b) {
    re = (re << 8) | p[off + b];
    im = (im << 8) | p[off + 8 + b];
  }
  double dre, dim;
  std::memcpy(&dre, &re, 8);
  std::memcpy(&dim, &im, 8);
  CHECK(dre == 1.5);
  CHECK(dim == -2.0);
}

TEST_CASE("distinct error classes") {
  const auto bytes = encode_field(random_grid(1, 3, 7));
  const auto nl = bytes.find('\n');
  CHECK_THROWS_AS(decode_field(bytes.substr(0, bytes.size() - 16)), PayloadLengthError);
  CHECK_THROWS_AS(decode_field(bytes + "x"), PayloadLengthError);
  CHECK_THROWS_AS(decode_field("not json\n"), HeaderError);
  CHECK_THROWS_AS(decode_field("no newline at all"), HeaderError);

  auto header = nlohmann::json::parse(bytes.substr(0, nl));
  const std::string payload = bytes.substr(nl + 1);
  auto with = [&](const nlohmann::json& h) { return h.dump() + "\n" + payload; };
  auto h = header;
  h["version"] = 2;
  CHECK_THROWS_AS(decode_field(with(h)), VersionError);
  h = header;
  h["magic"] = "XXXX";
  CHECK_THROWS_AS(decode_field(with(h)), HeaderError);
  h = header;
  h.erase("grid");
  CHECK_THROWS_AS(decode_field(with(h)), HeaderError);
  h = header;
  h["endianness"] = "big";
  CHECK_THROWS_AS(decode_field(with(h)), HeaderError);
  h = header;
  h["m"] = 2;
  CHECK_THROWS_AS(decode_field(with(h)), PayloadLengthError);
  CHECK_THROWS_AS(read_field(temp_path("does_not_exist.m3sf")), IoError);
  CHECK_THROWS_AS(write_field(random_grid(0, 2, 1), "/nonexistent-dir/x.m3sf"), IoError);
}

TEST_CASE("single-bit corruption of the payload is detected") {
  auto g = test::rng(2024);
  for (int m = 0; m <= 2; ++m) {
    const auto bytes = encode_field(random_grid(m, 3, 40 + m));
    const size_t start = bytes.find('\n') + 1;
    std::uniform_int_distribution<size_t> pos(start, bytes.size() - 1);
    std::uniform_int_distribution<int> bit(0, 7);
    for (int t = 0; t < 200; ++t) {
      auto bad = bytes;
      bad[pos(g)] ^= static_cast<char>(1 << bit(g));
      CHECK_THROWS_AS(decode_field(bad), ChecksumError);
    }
  }
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64(nullptr, 0) == 0xcbf29ce484222325ull);
  const unsigned char a[] = {'a'};
  CHECK(fnv1a64(a, 1) == 0xaf63dc4c8601ec8cull);
  const char* foo = "foobar";
  CHECK(fnv1a64(reinterpret_cast<const unsigned char*>(foo), 6) == 0x85944171f73967e8ull);
}

TEST_CASE("equivariance diagnostic on ingest") {
  const auto geom = GridGeometry::centred(7, 0.5);
  const auto good = sample(synthesize("gaussian", 1), geom);
  const auto ok = decode_field(encode_field(good));
  REQUIRE(ok.equivariance.has_value());
  CHECK(*ok.equivariance <= 1e-12);
  CHECK(ok.warnings.empty());
  const auto bad = decode_field(encode_field(random_grid(1, 4, 3)));
  CHECK(*bad.equivariance > 1e-2);
  CHECK(bad.warnings.size() == 1);
}

TEST_CASE("synthesize") {
  const auto g = synthesize("gaussian", 2);
  for (const Vec3& x : {Vec3(0, 0, 0), Vec3(0.3, -1.0, 0.7), Vec3(2, 1, 0)})
    CHECK(max_abs(eval_field(g, x) - std::exp(-0.5 * x.squaredNorm()) * Mat::Identity(5, 5)) <= 1e-15);

  SynthParams p;
  p.k = 1;
  const auto q = synthesize("gaussian", 1, p);
  const Vec3 x(0.4, 0.2, -0.9);
  CHECK(std::abs(q.g[0](1.0)) == 0.0);
  CHECK(std::abs(q.g[2](1.0)) == 0.0);
  const Mat want = std::exp(-0.5 * x.squaredNorm()) * dtau(type_context(1).rep, x);
  CHECK(max_abs(eval_field(q, x) - want) <= 1e-14);

  CHECK_THROWS_AS(synthesize("square", 1), DomainError);
  p.k = 3;
  CHECK_THROWS_AS(synthesize("gaussian", 1, p), DomainError);
  SynthParams bad;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(synthesize("gaussian", 0, bad), DomainError);
}

TEST_CASE("bump field roundtrips through the transform") {
  SynthParams p;
  p.s0 = 1.5;
  p.width = 0.3;
  const auto f = synthesize("bump", 0, p);
  TransformOptions opt;
  opt.smax = 5.0;
  const auto c = forward(f, opt);
  double err = 0.0;
  for (size_t a = 0; a < c.s.size(); ++a) err = std::max(err, std::abs(c(0)[a] - bump_profile(p, c.s[a])));
  CHECK(err <= 1e-3);
}

TEST_CASE("config parsing") {
  const auto c = parse_config("# comment\nnr = 64\n smax=7.5 # trailing\n\nthreads=2\nequivariance_tol=1e-4\n");
  CHECK(c.nr == 64);
  CHECK(c.smax == 7.5);
  CHECK(c.threads == 2);
  CHECK(c.equivariance_tol == 1e-4);
  CHECK(c.per_panel == 16);
  CHECK(c.transform_options().nr == 64);
  CHECK_THROWS_AS(parse_config("bogus=1"), ConfigError);
  CHECK_THROWS_AS(parse_config("nr"), ConfigError);
  CHECK_THROWS_AS(parse_config("nr=abc"), ConfigError);
  CHECK_THROWS_AS(parse_config("nr=12x"), ConfigError);
  CHECK_THROWS_AS(parse_config("quad_tol=0"), ConfigError);
  CHECK_THROWS_AS(parse_config("truncation_tol=-1"), ConfigError);
  CHECK_THROWS_AS(parse_config("per_panel=1"), ConfigError);

  // later files override earlier ones; the environment names the default
  const auto path = temp_path("config.txt");
  {
    std::ofstream os(path);
    os << "per_panel=8\nquad_tol=1e-10\n";
  }
  ::setenv("M3S_CONFIG", path.c_str(), 1);
  const auto d = default_config();
  CHECK(d.per_panel == 8);
  CHECK(d.quad_tol == 1e-10);
  ::unsetenv("M3S_CONFIG");
  CHECK(default_config().per_panel == 16);
  CHECK_THROWS_AS(load_config(temp_path("missing.cfg")), IoError);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
