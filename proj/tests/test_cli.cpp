// Drives the m3s executable end to end.
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string workdir() {
  static const std::string dir = [] {
    auto p = std::filesystem::temp_directory_path() / ("m3s_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p.string();
  }();
  return dir;
}

std::string path(const std::string& name) { return workdir() + "/" + name; }

Run run(const std::string& args) {
  const std::string cmd = std::string(M3S_BINARY) + " " + args + " 2>" + path("stderr.txt");
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string last_stderr() {
  std::ifstream is(path("stderr.txt"));
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string slurp(const std::string& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::complex<double> entry(const json& m, int i, int j) { return {m[i][j][0].get<double>(), m[i][j][1].get<double>()}; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("phi at the origin is the identity for every method") {
  const auto r = run("phi --m 1 --s 1 --j 0 --at 0,0,0 --method compare");
  REQUIRE(r.code == 0);
  const auto d = json::parse(r.out);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(entry(d["matrix"], i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
  CHECK(d["max_deviation"].get<double>() <= 1e-6);
}

TEST_CASE("scalar case reduces to the classical spherical function") {
  const auto r = run("phi --m 0 --s 2 --j 0 --at 1,0,0");
  REQUIRE(r.code == 0);
  const auto d = json::parse(r.out);
  CHECK(std::abs(entry(d["matrix"], 0, 0) - std::sin(2.0) / 2.0) <= 1e-14);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("phi --m 1 --s 1 --j 5 --at 1,0,0").code == 2);
  CHECK(run("phi --m 1 --s -1 --j 0 --at 1,0,0").code == 2);
  CHECK(run("phi --m 1 --s 1 --j 0 --method 7 --at 1,0,0").code == 2);
  CHECK(run("phi --m 1 --s 1 --j 0 --at 1,0").code == 2);
  CHECK(run("phi --m 1 --unknown-flag").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("synth --kind nonsense --m 1 --out " + path("x.m3sf")).code == 2);
  // structured diagnostics
  CHECK(run("--json phi --m 1 --s 1 --j 5 --at 1,0,0").code == 2);
  const auto e = json::parse(last_stderr());
  CHECK(e["level"] == "error");
  CHECK(e["kind"] == "usage");
}

TEST_CASE("I/O and format errors exit with 3") {
  CHECK(run("info --in " + path("missing.m3sf")).code == 3);
  {
    std::ofstream os(path("garbage.m3sf"));
    os << "{\"magic\":\"nope\"}\n";
  }
  CHECK(run("info --in " + path("garbage.m3sf")).code == 3);
  REQUIRE(run("synth --kind gaussian --m 1 --out " + path("t.m3sf")).code == 0);
  auto bytes = slurp(path("t.m3sf"));
  bytes.resize(bytes.size() - 8);
  {
    std::ofstream os(path("trunc.m3sf"), std::ios::binary);
    os << bytes;
  }
  CHECK(run("transform forward --in " + path("trunc.m3sf") + " --out " + path("o.m3sf")).code == 3);
  CHECK(run("--config " + path("missing.cfg") + " rep --m 1").code == 3);
}

TEST_CASE("check reports are reproducible and pass") {
  const auto a = run("check --m 0,1 --seed 11 --profile quick");
  const auto b = run("check --m 0,1 --seed 11 --profile quick");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto d = json::parse(a.out);
  CHECK(d["pass"] == true);
  for (const auto& s : d["suites"]) {
    CHECK(s.contains("suite"));
    CHECK(s.contains("cases"));
    CHECK(s.contains("max-residual"));
  }
  // report file output is identical to stdout
  REQUIRE(run("check --m 0,1 --seed 11 --out " + path("report.json")).code == 0);
  CHECK(slurp(path("report.json")) == a.out);
  CHECK(run("phi check --m 1 --seed 2").code == 0);
}

TEST_CASE("gaussian forward then inverse") {
  REQUIRE(run("synth --kind gaussian --m 1 --out " + path("g.m3sf")).code == 0);
  REQUIRE(run("transform forward --in " + path("g.m3sf") + " --out " + path("g.spec")).code == 0);
  REQUIRE(run("transform inverse --in " + path("g.spec") + " --out " + path("g.back")).code == 0);
  for (const char* x : {"0,0,0", "0.5,0.2,-0.3", "1,1,1", "-2,0.5,0"}) {
    const auto r = run("eval --in " + path("g.back") + " --at " + x);
    REQUIRE(r.code == 0);
    const auto d = json::parse(r.out);
    double r2 = 0.0;
    for (const auto& c : d["x"]) r2 += c.get<double>() * c.get<double>();
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(entry(d["matrix"], i, j) - (i == j ? std::exp(-0.5 * r2) : 0.0)));
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("filters") {
  REQUIRE(run("synth --kind gaussian --m 1 --grid 15 --spacing 0.6 --out " + path("grid.m3sf")).code == 0);
  REQUIRE(run("filter --in " + path("grid.m3sf") + " --out " + path("id.m3sf") + " --multiplier identity").code == 0);
  const auto a = json::parse(run("eval --in " + path("grid.m3sf") + " --at 0.6,-1.2,0").out);
  const auto b = json::parse(run("eval --in " + path("id.m3sf") + " --at 0.6,-1.2,0").out);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(entry(a["matrix"], i, j) - entry(b["matrix"], i, j)) <= 1e-3);

  // the Laplacian of e^{-r^2/2} is (r^2 - 3) e^{-r^2/2}
  REQUIRE(run("synth --kind gaussian --m 0 --out " + path("g0.m3sf")).code == 0);
  REQUIRE(run("filter --in " + path("g0.m3sf") + " --out " + path("lap.m3sf") + " --multiplier laplacian").code == 0);
  const auto l = json::parse(run("eval --in " + path("lap.m3sf") + " --at 0.7,0,0.3").out);
  const double r2 = 0.58;
  CHECK(std::abs(entry(l["matrix"], 0, 0) - (r2 - 3.0) * std::exp(-0.5 * r2)) <= 1e-3);

  // a table equal to -s^2 reproduces the named Laplacian
  {
    std::ofstream os(path("table.csv"));
    os << "s,mu\n";
    for (int i = 0; i <= 400; ++i) os << 0.02 * i << "," << -(0.02 * i) * (0.02 * i) << "\n";
  }
  REQUIRE(run("filter --in " + path("g0.m3sf") + " --out " + path("tab.m3sf") + " --multiplier table --table " +
              path("table.csv")).code == 0);
  const auto t = json::parse(run("eval --in " + path("tab.m3sf") + " --at 0.7,0,0.3").out);
  CHECK(std::abs(entry(t["matrix"], 0, 0) - entry(l["matrix"], 0, 0)) <= 1e-3);
  CHECK(run("filter --in " + path("g0.m3sf") + " --out " + path("x.m3sf") + " --multiplier table").code == 2);
  CHECK(run("filter --in " + path("g0.m3sf") + " --out " + path("x.m3sf") + " --multiplier cubic").code == 2);
}

TEST_CASE("tables and emitted objects") {
  const auto r = run("radial --table --m 1 --rmax 10 --n 11");
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string header, line;
  std::getline(is, header);
  CHECK(header == "r,f_0,f_1,f_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 11);

  const auto q = run("qpoly --m 1 --emit");
  REQUIRE(q.code == 0);
  const auto d = json::parse(q.out);
  CHECK(d["Q"].size() == 3);
  CHECK(d["a"][0] == "-2");
  CHECK(run("qpoly --m 5").code == 2);

  const auto rep = json::parse(run("rep --m 2").out);
  CHECK(rep["dim"] == 5);
  CHECK(rep["generators"].size() == 3);

  const auto tab = run("phi table --m 1 --s 1 --j 1 --rmax 4 --n 5");
  REQUIRE(tab.code == 0);
  CHECK(tab.out.rfind("r,re_0_0,im_0_0", 0) == 0);
}

TEST_CASE("points file and config file") {
  {
    std::ofstream os(path("pts.txt"));
    os << "# points\n0 0 0\n1,0,0\n0.2 0.3 0.4\n";
  }
  const auto r = run("phi --m 1 --s 1.5 --j -1 --method 3 --points " + path("pts.txt"));
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).size() == 3);
  {
    std::ofstream os(path("cfg.txt"));
    os << "threads=1\nquad_tol=1e-9\n";
  }
  CHECK(run("--config " + path("cfg.txt") + " phi --m 1 --s 1 --j 0 --at 1,2,0 --method 2").code == 0);
  {
    std::ofstream os(path("bad.cfg"));
    os << "unknown=3\n";
  }
  CHECK(run("--config " + path("bad.cfg") + " rep --m 1").code == 3);
}

}  // TEST_SUITE
