#include <catch_amalgamated.hpp>

#include <filesystem>
#include <random>
#include <sstream>

#include "roughwall/commands.hpp"
#include "roughwall/config.hpp"
#include "roughwall/io.hpp"
#include "test_support.hpp"

using namespace roughwall;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

// Fresh directory removed at scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("roughwall_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  return {code, o.str(), e.str()};
}

std::vector<double> csv_row(const std::string& line) {
  std::vector<double> v;
  std::stringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

std::string first_line(const std::string& path) {
  const std::string s = read_text(path);
  return s.substr(0, s.find('\n'));
}

const char* kSinusoid =
    R"({"modes": [{"k": [0, 0], "re": -0.5, "im": 0}, {"k": [1, 0], "re": 0.05, "im": 0},
                  {"k": [-1, 0], "re": 0.05, "im": 0}], "grid": 64})";

}  // namespace

TEST_CASE("boundary files round-trip", "[io]") {
  TempDir dir;
  const auto g = rwtest::random_profile(3);
  write_boundary_file(dir / "b.json", g);
  const auto h = read_boundary_file(dir / "b.json");
  CHECK(h.hash() == g.hash());
  CHECK(h.samples() == g.samples());

  write_boundary_grid_csv(dir / "g.csv", g);
  CHECK(first_line(dir / "g.csv") == "y1,y2,gamma");
  const std::string csv = read_text(dir / "g.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 64 * 64);

  CHECK_THROWS_AS(boundary_from_json(json::parse(R"({"modes": []})")), Error);
  CHECK_THROWS_AS(boundary_from_json(json::parse(R"({"modes": [{"k": [0], "re": -0.5}], "grid": 8})")), Error);
  try {
    boundary_from_json(json::parse(R"({"modes": [{"k": [0, 0], "re": -0.5}, {"k": [1, 0], "re": 0.1}], "grid": 8})"));
    FAIL("expected a conjugacy error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConjugacyViolation);
  }
  try {
    boundary_from_json(json::parse(R"({"modes": [{"k": [0, 0], "re": 0.5}], "grid": 8})"));
    FAIL("expected a range error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RangeViolation);
  }
}

TEST_CASE("trace files round-trip", "[io]") {
  TempDir dir;
  SpectralTrace t(2, 1);
  t.at(1, 0) = {cplx(0.3, 0.1), cplx(0.0, 0.2), cplx(-0.1, 0.0)};
  t.at(-1, 0) = {std::conj(t.at(1, 0)[0]), std::conj(t.at(1, 0)[1]), std::conj(t.at(1, 0)[2])};
  t.at(0, 0) = {cplx(1.0), cplx(0.5), cplx(0.0)};
  write_trace_file(dir / "t.json", t);
  const auto r = read_trace_file(dir / "t.json");
  CHECK(r.kmax() == 2);
  for (int k1 = -1; k1 <= 1; ++k1)
    for (int c = 0; c < 3; ++c) CHECK(r.at(k1, 0)[c] == t.at(k1, 0)[c]);
  CHECK(r.at(2, 1)[0] == cplx(0.0));

  const auto bad = json::parse(R"({"Kmax": 1, "modes": [{"k": [1, 0], "v": [[1, 0], [0, 0], [0, 0]]}]})");
  CHECK_THROWS_AS(trace_from_json(bad), Error);
  const auto wide = json::parse(R"({"Kmax": 1, "modes": [{"k": [2, 0], "v": [[1, 0], [0, 0], [0, 0]]}]})");
  CHECK_THROWS_AS(trace_from_json(wide), Error);

  write_field_csv(dir / "f.csv", {{0.0, 1.0, 0.5, {1.0, 2.0, 3.0}, 4.0}});
  CHECK(first_line(dir / "f.csv") == "y1,y2,y3,u1,u2,u3,p");
}

TEST_CASE("corrector and channel dumps match their sidecars", "[io]") {
  TempDir dir;
  const auto c = solve_corrector(rwtest::sinusoid(), 1, {32, 1, 16, 0.0});
  write_corrector_dump(dir / "c", c, {"abc"});
  const auto raw = read_binary(dir / "c.bin");
  REQUIRE(raw.size() == c.v.size() + c.q.size());
  CHECK(std::equal(c.v.begin(), c.v.end(), raw.begin()));
  CHECK(std::equal(c.q.begin(), c.q.end(), raw.begin() + c.v.size()));
  const auto side = json::parse(read_text(dir / "c.json"));
  for (const char* key : {"N", "Nz", "gamma_hash", "j", "alpha", "diagnostics", "config_hash", "version"})
    CHECK(side.contains(key));
  CHECK(side["Nz"] == 16);
  CHECK(side["j"] == 1);
  CHECK(side["alpha"][0].get<double>() == c.alpha[0]);
  CHECK(side["config_hash"] == "abc");
  CHECK(raw.size() == static_cast<size_t>(3 * 17 * 32 + 16 * 32));

  const auto s = solve_channel(rwtest::sinusoid(), 0.125, 2, {1.0, 0.5}, true, {16, 1, 16, 1.5});
  write_channel_dump(dir / "ch", s, {"def"});
  const auto cs = json::parse(read_text(dir / "ch.json"));
  CHECK(cs["epsilon"] == 0.125);
  CHECK(cs["U_top"][1] == 0.5);
  CHECK(cs["nonlinear"] == true);
  CHECK(read_binary(dir / "ch.bin").size() == s.u.size() + s.p.size());
}

TEST_CASE("scale report artifacts", "[io]") {
  TempDir dir;
  ScaleReport rep;
  rep.epsilon = 0.0625;
  for (double r : {0.5, 0.25, 0.125}) {
    ScaleRow row;
    row.r = r;
    row.avg_l2 = r;
    row.res_plain = r * r;
    rep.rows.push_back(row);
  }
  rep.slopes["res_plain"] = rate_fit({0.5, 0.25, 0.125}, {0.25, 0.0625, 0.015625});
  write_scale_report(dir / "rep", rep, {"h"});
  CHECK(first_line(dir / "rep.csv") ==
        "r,avg_l2,lipschitz_ratio,c1_grad,c2_grad,c1_lsq,c2_lsq,res_plain,res_corrector,res_navier");
  const auto j = json::parse(read_text(dir / "rep.json"));
  CHECK(j["epsilon"] == 0.0625);
  CHECK(j["config_hash"] == "h");
  CHECK(j["slopes"]["res_plain"]["slope"].get<double>() == Approx(2.0).margin(1e-12));
}

TEST_CASE("run configs expand, hash and validate", "[config]") {
  const RunConfig def;
  const json e = expanded_config(def);
  CHECK(e["channel"]["nper"] == 2);
  CHECK(e["cell"]["nz"] == 64);
  CHECK_FALSE(e.contains("out"));

  RunConfig a = config_from_json(json::parse(R"({"channel": {"epsilon": 0.125}})"));
  CHECK(a.epsilons == std::vector<double>{0.125});
  RunConfig b = a;
  b.out = "elsewhere";
  b.threads = 4;
  CHECK(config_hash(a) == config_hash(b));
  b.tol = 1e-9;
  CHECK(config_hash(a) != config_hash(b));

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"chanel": {}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"channel": {"nper": "two"}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"threads": 0})")), Error);

  const auto r1 = random_boundary(7, 2, 0.2, -0.5, 32), r2 = random_boundary(7, 2, 0.2, -0.5, 32);
  CHECK(r1.hash() == r2.hash());
  CHECK(random_boundary(8, 2, 0.2, -0.5, 32).hash() != r1.hash());
  RunConfig rc = config_from_json(json::parse(R"({"boundary": {"random": {"kmax": 1}}, "seed": 7})"));
  CHECK(resolve_boundary(rc).hash() == random_boundary(7, 1, 0.2, -0.5, 64).hash());
  CHECK(effective_cell(config_from_json(json{{"boundary", json::parse(kSinusoid)}}), rwtest::sinusoid()).n2 == 1);
}

TEST_CASE("corrector command", "[cli]") {
  TempDir dir;
  write_text(dir / "flat.json", R"({"boundary": {"modes": [{"k": [0, 0], "re": -0.5}], "grid": 16},
                                    "cell": {"n1": 16, "nz": 16}})");
  auto r = cli({"corrector", "--config", dir / "flat.json", "--out", dir / "flat"});
  CHECK(r.code == 0);
  CHECK(r.out.find("alpha_1 = (0.5, 0, 0)") != std::string::npos);
  CHECK(r.out.find("alpha_2 = (0, 0.5, 0)") != std::string::npos);
  for (const char* f : {"config.json", "corrector_j1.bin", "corrector_j1.json", "corrector_j2.bin", "corrector_summary.json"})
    CHECK(fs::exists(dir.path / "flat" / f));
  const auto cfg = json::parse(read_text(dir / "flat/config.json"));
  CHECK(cfg.contains("config_hash"));
  CHECK(cfg["version"] == kVersion);
  CHECK(json::parse(read_text(dir / "flat/corrector_j1.json"))["config_hash"] == cfg["config_hash"]);

  write_text(dir / "sin.json", std::string(R"({"cell": {"n1": 32, "nz": 16}, "boundary": )") + kSinusoid + "}");
  r = cli({"corrector", "--config", dir / "sin.json", "--refine", "--out", dir / "sin"});
  CHECK(r.code == 0);
  CHECK(r.out.find("± n/a") == std::string::npos);
  const auto sum = json::parse(read_text(dir / "sin/corrector_summary.json"));
  const double delta = sum["correctors"][0]["refinement_delta"].get<double>();
  CHECK(delta > 0.0);
  CHECK(delta < 1e-5);

  write_text(dir / "bad.json", R"({"boundary": {"modes": [{"k": [0, 0], "re": 0.5}], "grid": 16}})");
  r = cli({"corrector", "--config", dir / "bad.json", "--out", dir / "bad"});
  CHECK(r.code == 1);
  CHECK(r.err.find("RangeViolation") != std::string::npos);
}

TEST_CASE("slip-matrix command", "[cli]") {
  TempDir dir;
  write_text(dir / "flat.json", R"({"boundary": {"modes": [{"k": [0, 0], "re": -0.5}], "grid": 16},
                                    "cell": {"n1": 16, "nz": 16}})");
  auto r = cli({"slip-matrix", "--config", dir / "flat.json", "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  const auto m = json::parse(read_text(dir / "slip_matrix.json"));
  CHECK(m["M"][0][0].get<double>() == Approx(0.5).margin(1e-8));
  CHECK(std::abs(m["M"][0][1].get<double>()) < 1e-8);
  CHECK(m["M"][1][1].get<double>() == Approx(0.5).margin(1e-8));
  for (const char* key : {"asymmetry", "eigenvalues", "config_hash", "version"}) CHECK(m.contains(key));
}

TEST_CASE("channel command and failure reporting", "[cli]") {
  TempDir dir;
  write_text(dir / "c.json", std::string(R"({"channel": {"n1": 32, "nz": 24}, "boundary": )") + kSinusoid + "}");
  auto r = cli({"channel", "--config", dir / "c.json", "--epsilon", "0.125", "--stokes", "--out", dir / "ok"});
  CHECK(r.code == 0);
  const auto side = json::parse(read_text(dir / "ok/channel_0.json"));
  CHECK(side["nonlinear"] == false);
  CHECK(side["diagnostics"]["weak_residual"].get<double>() <= 1e-8);

  r = cli({"channel", "--config", dir / "c.json", "--epsilon", "0.25", "--utop", "4", "0", "--max-picard", "2",
           "--out", dir / "fail"});
  CHECK(r.code == 2);
  const auto f = json::parse(read_text(dir / "fail/failure.json"));
  CHECK(f["error"] == "PicardDiverged");
  CHECK(f["history"].size() == 2);

  CHECK(cli({"channel", "--stokes", "--navier-stokes"}).code == 1);
  CHECK(cli({"nonsense"}).code == 1);
  CHECK(cli({"channel", "--config", dir / "missing.json"}).code == 1);
}

TEST_CASE("walllaw-report command", "[cli]") {
  TempDir dir;
  const std::string base = std::string(R"({"cell": {"n1": 128, "nz": 48}, "channel": {"n1": 32, "nz": 32},
      "analysis": {"r_values": [0.5, 0.25, 0.125, 0.0625]}, "boundary": )") + kSinusoid + "}";
  write_text(dir / "w.json", base);
  auto r = cli({"walllaw-report", "--config", dir / "w.json", "--manufactured", "--epsilon", "0.03125", "--out",
                dir / "m"});
  REQUIRE(r.code == 0);
  const auto s = json::parse(read_text(dir / "m/report_0.json"));
  CHECK(s["slopes"]["res_navier"]["slope"].get<double>() == Approx(-0.5).margin(0.15));
  CHECK(first_line(dir / "m/report_0.csv") ==
        "r,avg_l2,lipschitz_ratio,c1_grad,c2_grad,c1_lsq,c2_lsq,res_plain,res_corrector,res_navier");

  write_text(dir / "flat.json", R"({"boundary": {"modes": [{"k": [0, 0], "re": -0.5}], "grid": 16},
      "cell": {"n1": 16, "nz": 16}, "channel": {"n1": 16, "nz": 32, "epsilon": [0.125, 0.0625, 0.03125]},
      "analysis": {"r_values": [0.5, 0.25]}})");
  r = cli({"walllaw-report", "--config", dir / "flat.json", "--stokes", "--out", dir / "flat"});
  REQUIRE(r.code == 0);
  for (int i = 0; i < 3; ++i) {
    const std::string csv = read_text(dir / ("flat/report_" + std::to_string(i) + ".csv"));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto v = csv_row(line);
      REQUIRE(v.size() == 10);
      CHECK(v[8] < 1e-10);  // res_corrector
      CHECK(v[9] < 1e-10);  // res_navier
    }
  }
  const auto sum = json::parse(read_text(dir / "flat/walllaw_summary.json"));
  CHECK(sum["members"].size() == 3);
  CHECK(sum["members"][0]["status"] == "ok");
}

TEST_CASE("identical configs give byte-identical artifacts", "[cli]") {
  TempDir dir;
  write_text(dir / "w.json", std::string(R"({"cell": {"n1": 64, "nz": 32}, "channel": {"n1": 32, "nz": 24,
      "epsilon": [0.125, 0.0625, 0.03125]}, "analysis": {"r_values": [0.5, 0.25, 0.125]}, "seed": 5, "boundary": )") +
                               kSinusoid + "}");
  REQUIRE(cli({"walllaw-report", "--config", dir / "w.json", "--out", dir / "a"}).code == 0);
  REQUIRE(cli({"walllaw-report", "--config", dir / "w.json", "--threads", "2", "--out", dir / "b"}).code == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "a")) {
    const auto other = dir.path / "b" / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(read_text(e.path().string()) == read_text(other.string()));
    ++files;
  }
  CHECK(files == 8);
}

TEST_CASE("halfspace-eval and selftest commands", "[cli]") {
  TempDir dir;
  write_text(dir / "h.json", R"({"halfspace": {"trace": {"Kmax": 1, "modes": [
      {"k": [1, 0], "v": [[0.5, 0], [0, 0], [0, 0]]}, {"k": [-1, 0], "v": [[0.5, 0], [0, 0], [0, 0]]}]},
      "points": [[0, 0, 0.5], [1, 2, 1.0]]}})");
  auto r = cli({"halfspace-eval", "--config", dir / "h.json", "--out", dir / "h"});
  REQUIRE(r.code == 0);
  const std::string csv = read_text(dir / "h/field.csv");
  CHECK(first_line(dir / "h/field.csv") == "y1,y2,y3,u1,u2,u3,p");
  // u1 = (1 - |k| y3) exp(-|k| y3) cos y1 for a tangential datum along k.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(csv_row(line)[3] == Approx(0.5 * std::exp(-0.5)).epsilon(1e-12));

  write_text(dir / "below.json", R"({"halfspace": {"trace": {"Kmax": 0, "modes": []}, "points": [[0, 0, -1]]}})");
  CHECK(cli({"halfspace-eval", "--config", dir / "below.json", "--out", dir / "x"}).code == 1);

  r = cli({"selftest", "--out", dir / "s"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(json::parse(read_text(dir / "s/selftest.json"))["pass"] == true);
}
