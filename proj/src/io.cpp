#include "roughwall/io.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughwall/error.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

const json& member(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::ConfigError, std::string(what) + " lacks \"" + key + "\"");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::ConfigError, std::string(what) + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw Error(ErrorKind::ConfigError, std::string(what) + " must be an integer");
  return j.get<int>();
}

std::array<int, 2> wavevector(const json& j, const char* what) {
  const json& k = member(j, "k", what);
  if (!k.is_array() || k.size() != 2) throw Error(ErrorKind::ConfigError, std::string(what) + " \"k\" must be [k1, k2]");
  return {integer(k[0], "k1"), integer(k[1], "k2")};
}

void write_doubles(std::ofstream& out, const double* x, size_t n) {
  static_assert(std::endian::native == std::endian::little, "dumps assume a little-endian host");
  out.write(reinterpret_cast<const char*>(x), static_cast<std::streamsize>(n * sizeof(double)));
}

void write_fields(const std::string& path, const std::vector<double>& vel, const std::vector<double>& pres) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot open " + path + " for writing");
  write_doubles(out, vel.data(), vel.size());
  write_doubles(out, pres.data(), pres.size());
  if (!out) throw Error(ErrorKind::ConfigError, "write to " + path + " failed");
}

json vec3(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

json boundary_to_json(const BoundaryFunction& gamma) {
  json modes = json::array();
  for (const auto& m : gamma.modes())
    modes.push_back({{"k", {m.k1, m.k2}}, {"re", m.c.real()}, {"im", m.c.imag()}});
  return {{"modes", modes}, {"grid", gamma.grid()}};
}

BoundaryFunction boundary_from_json(const json& j) {
  const json& modes = member(j, "modes", "boundary");
  if (!modes.is_array()) throw Error(ErrorKind::ConfigError, "boundary \"modes\" must be an array");
  std::vector<FourierMode> fm;
  for (const auto& m : modes) {
    const auto k = wavevector(m, "boundary mode");
    const double re = number(member(m, "re", "boundary mode"), "re");
    const double im = m.contains("im") ? number(m.at("im"), "im") : 0.0;
    fm.push_back({k[0], k[1], cplx(re, im)});
  }
  return BoundaryFunction::from_modes(fm, integer(member(j, "grid", "boundary"), "grid"));
}

BoundaryFunction read_boundary_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return boundary_from_json(j);
}

void write_boundary_file(const std::string& path, const BoundaryFunction& gamma) {
  write_json(path, boundary_to_json(gamma));
}

void write_boundary_grid_csv(const std::string& path, const BoundaryFunction& gamma) {
  const int n = gamma.grid();
  std::string s = "y1,y2,gamma\n";
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1)
      s += fmt17(kTwoPi * i1 / n) + "," + fmt17(kTwoPi * i2 / n) + "," + fmt17(gamma.samples()[i2 * n + i1]) + "\n";
  write_text(path, s);
}

json trace_to_json(const SpectralTrace& trace) {
  json modes = json::array();
  for (int k2 = -trace.kmax2; k2 <= trace.kmax2; ++k2)
    for (int k1 = -trace.kmax1; k1 <= trace.kmax1; ++k1) {
      const CVec3& v = trace.at(k1, k2);
      if (v[0] == cplx(0.0) && v[1] == cplx(0.0) && v[2] == cplx(0.0)) continue;
      json vv = json::array();
      for (const cplx& c : v) vv.push_back({c.real(), c.imag()});
      modes.push_back({{"k", {k1, k2}}, {"v", vv}});
    }
  json j{{"Kmax", trace.kmax()}, {"modes", modes}};
  if (trace.period != kTwoPi) j["period"] = trace.period;
  return j;
}

SpectralTrace trace_from_json(const json& j) {
  const int kmax = integer(member(j, "Kmax", "trace"), "Kmax");
  if (kmax < 0) throw Error(ErrorKind::ConfigError, "trace Kmax must be nonnegative");
  const double period = j.contains("period") ? number(j.at("period"), "period") : kTwoPi;
  if (!(period > 0.0)) throw Error(ErrorKind::ConfigError, "trace period must be positive");
  SpectralTrace t(kmax, kmax, period);
  const json& modes = member(j, "modes", "trace");
  if (!modes.is_array()) throw Error(ErrorKind::ConfigError, "trace \"modes\" must be an array");
  for (const auto& m : modes) {
    const auto k = wavevector(m, "trace mode");
    if (std::abs(k[0]) > kmax || std::abs(k[1]) > kmax)
      throw Error(ErrorKind::ConfigError, "trace mode beyond Kmax");
    const json& v = member(m, "v", "trace mode");
    if (!v.is_array() || v.size() != 3) throw Error(ErrorKind::ConfigError, "trace mode \"v\" needs three entries");
    for (int c = 0; c < 3; ++c) {
      if (!v[c].is_array() || v[c].size() != 2) throw Error(ErrorKind::ConfigError, "trace entries are [re, im]");
      t.at(k[0], k[1])[c] += cplx(number(v[c][0], "re"), number(v[c][1], "im"));
    }
  }
  if (!t.hermitian(1e-12)) throw Error(ErrorKind::ConjugacyViolation, "trace coefficients are not Hermitian");
  return t;
}

SpectralTrace read_trace_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return trace_from_json(j);
}

void write_trace_file(const std::string& path, const SpectralTrace& trace) { write_json(path, trace_to_json(trace)); }

void write_field_csv(const std::string& path, const std::vector<FieldRow>& rows) {
  std::string s = "y1,y2,y3,u1,u2,u3,p\n";
  for (const auto& r : rows)
    s += fmt17(r.y1) + "," + fmt17(r.y2) + "," + fmt17(r.y3) + "," + fmt17(r.u[0]) + "," + fmt17(r.u[1]) + "," +
         fmt17(r.u[2]) + "," + fmt17(r.p) + "\n";
  write_text(path, s);
}

json corrector_sidecar(const CorrectorSolution& c, const ArtifactTag& tag) {
  const auto& d = c.diagnostics;
  return {{"N", {c.grid.n1, c.grid.n2}},
          {"Nz", c.grid.nz},
          {"stretch", c.grid.stretch},
          {"gamma_hash", c.boundary.hash()},
          {"j", c.j},
          {"alpha", vec3(c.alpha)},
          {"diagnostics",
           {{"divergence_residual", d.divergence_residual},
            {"momentum_residual", d.momentum_residual},
            {"dn_residual", d.dn_residual},
            {"noslip_residual", d.noslip_residual},
            {"iterations", d.iterations}}},
          {"layout", "v1,v2,v3 over (level,y2,y1) then q over (cell,y2,y1); float64 little-endian"},
          {"config_hash", tag.config_hash},
          {"version", tag.version}};
}

void write_corrector_dump(const std::string& stem, const CorrectorSolution& c, const ArtifactTag& tag) {
  write_fields(stem + ".bin", c.v, c.q);
  write_json(stem + ".json", corrector_sidecar(c, tag));
}

json channel_sidecar(const ChannelSolution& sol, const ArtifactTag& tag) {
  const auto& r = sol.residuals;
  return {{"N", {sol.grid.n1, sol.grid.n2}},
          {"Nz", sol.grid.nz},
          {"stretch", sol.grid.stretch},
          {"gamma_hash", sol.boundary.hash()},
          {"epsilon", sol.epsilon},
          {"nper", sol.nper},
          {"period", sol.period()},
          {"U_top", {sol.u_top[0], sol.u_top[1]}},
          {"nonlinear", sol.nonlinear},
          {"diagnostics",
           {{"weak_residual", r.weak_residual},
            {"divergence_residual", r.divergence_residual},
            {"energy_mismatch", r.energy_mismatch},
            {"picard_iterations", r.picard_iterations},
            {"stokes_iterations", r.stokes_iterations},
            {"picard_history", r.picard_history}}},
          {"layout", "u1,u2,u3 over (level,x2,x1) then p over (cell,x2,x1); float64 little-endian"},
          {"config_hash", tag.config_hash},
          {"version", tag.version}};
}

void write_channel_dump(const std::string& stem, const ChannelSolution& sol, const ArtifactTag& tag) {
  write_fields(stem + ".bin", sol.u, sol.p);
  write_json(stem + ".json", channel_sidecar(sol, tag));
}

std::vector<double> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  const auto bytes = static_cast<size_t>(in.tellg());
  if (bytes % sizeof(double) != 0) throw Error(ErrorKind::ConfigError, path + " is not a float64 dump");
  std::vector<double> x(bytes / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(bytes));
  return x;
}

std::string scale_report_csv(const ScaleReport& report) {
  std::string s = "r,avg_l2,lipschitz_ratio,c1_grad,c2_grad,c1_lsq,c2_lsq,res_plain,res_corrector,res_navier\n";
  for (const auto& r : report.rows)
    s += fmt17(r.r) + "," + fmt17(r.avg_l2) + "," + fmt17(r.lipschitz_ratio) + "," + fmt17(r.c_grad[0]) + "," +
         fmt17(r.c_grad[1]) + "," + fmt17(r.c_lsq[0]) + "," + fmt17(r.c_lsq[1]) + "," + fmt17(r.res_plain) + "," +
         fmt17(r.res_corrector) + "," + fmt17(r.res_navier) + "\n";
  return s;
}

json rate_fit_json(const RateFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"half_width", fit.half_width}, {"points", fit.points}};
}

json scale_report_json(const ScaleReport& report, const ArtifactTag& tag) {
  json slopes = json::object();
  for (const auto& [name, fit] : report.slopes) slopes[name] = rate_fit_json(fit);
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(r.r);
  return {{"slopes", slopes},
          {"epsilon", report.epsilon},
          {"r_values", rows},
          {"config_hash", tag.config_hash},
          {"version", tag.version}};
}

void write_scale_report(const std::string& stem, const ScaleReport& report, const ArtifactTag& tag) {
  write_text(stem + ".csv", scale_report_csv(report));
  write_json(stem + ".json", scale_report_json(report, tag));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::ConfigError, "write to " + path + " failed");
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace roughwall
