#include "roughwall/config.hpp"

#include <filesystem>
#include <random>
#include <set>

#include "roughwall/error.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

void check_keys(const json& j, const char* where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error(ErrorKind::ConfigError, "unknown key \"" + key + "\" in " + where);
}

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::ConfigError, std::string("bad value for \"") + key + "\"");
  }
}

std::string resolve_path(const std::string& p, const std::string& base) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base) / p).string();
}

json load_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
}

}  // namespace

BoundaryFunction random_boundary(std::uint64_t seed, int kmax, double amplitude, double mean, int grid) {
  if (kmax < 1) throw Error(ErrorKind::ConfigError, "random boundary needs kmax >= 1");
  if (!(amplitude > 0.0)) throw Error(ErrorKind::ConfigError, "random boundary amplitude must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // One representative of each +-k pair.
  std::vector<std::array<int, 2>> ks;
  for (int k2 = 0; k2 <= kmax; ++k2)
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      if (k2 > 0 || k1 > 0) ks.push_back({k1, k2});
  std::vector<cplx> cs;
  double total = 0.0;
  for (size_t i = 0; i < ks.size(); ++i) {
    const double re = u(rng), im = u(rng);
    cs.emplace_back(re, im);
    total += 2.0 * std::abs(cs.back());
  }
  std::vector<FourierMode> modes{{0, 0, cplx(mean, 0.0)}};
  for (size_t i = 0; i < ks.size(); ++i) {
    const cplx c = cs[i] * (amplitude / total);
    modes.push_back({ks[i][0], ks[i][1], c});
    modes.push_back({-ks[i][0], -ks[i][1], std::conj(c)});
  }
  return BoundaryFunction::from_modes(modes, grid);
}

RunConfig config_from_json(const json& j, const std::string& base_dir) {
  check_keys(j, "config",
             {"command", "boundary", "boundary_file", "cell", "channel", "analysis", "halfspace", "refine", "seed",
              "threads", "out"});
  RunConfig c;
  read(j, "command", c.command);
  read(j, "refine", c.refine);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  read(j, "out", c.out);
  if (j.contains("boundary") && j.contains("boundary_file"))
    throw Error(ErrorKind::ConfigError, "give either \"boundary\" or \"boundary_file\"");
  if (j.contains("boundary")) c.boundary = j.at("boundary");
  if (j.contains("boundary_file")) c.boundary = load_json_file(resolve_path(j.at("boundary_file").get<std::string>(), base_dir));

  if (j.contains("cell")) {
    const json& s = j.at("cell");
    check_keys(s, "cell", {"n1", "n2", "nz", "stretch", "groove_fast_path", "tol", "max_iterations"});
    read(s, "n1", c.cell.n1);
    read(s, "n2", c.cell.n2);
    read(s, "nz", c.cell.nz);
    read(s, "stretch", c.cell.stretch);
    read(s, "groove_fast_path", c.groove_fast_path);
    read(s, "tol", c.corrector_tol);
    read(s, "max_iterations", c.corrector_max_iterations);
  }
  if (j.contains("channel")) {
    const json& s = j.at("channel");
    check_keys(s, "channel",
               {"n1", "n2", "nz", "stretch", "epsilon", "nper", "u_top", "nonlinear", "tol", "max_picard", "relaxation",
                "max_krylov"});
    read(s, "n1", c.channel.n1);
    read(s, "n2", c.channel.n2);
    read(s, "nz", c.channel.nz);
    read(s, "stretch", c.channel.stretch);
    if (s.contains("epsilon")) {
      if (s.at("epsilon").is_number())
        c.epsilons = {s.at("epsilon").get<double>()};
      else
        read(s, "epsilon", c.epsilons);
    }
    read(s, "nper", c.nper);
    read(s, "u_top", c.u_top);
    read(s, "nonlinear", c.nonlinear);
    read(s, "tol", c.tol);
    read(s, "max_picard", c.max_picard);
    read(s, "relaxation", c.relaxation);
    read(s, "max_krylov", c.max_krylov);
  }
  if (j.contains("analysis")) {
    const json& s = j.at("analysis");
    check_keys(s, "analysis", {"r_values", "manufactured", "amplitude", "j", "improvement_r"});
    read(s, "r_values", c.r_values);
    read(s, "manufactured", c.manufactured);
    read(s, "amplitude", c.amplitude);
    read(s, "j", c.manufactured_j);
    read(s, "improvement_r", c.improvement_r);
  }
  if (j.contains("halfspace")) {
    const json& s = j.at("halfspace");
    check_keys(s, "halfspace", {"trace", "trace_file", "points", "cutoff"});
    if (s.contains("trace")) c.trace = s.at("trace");
    if (s.contains("trace_file")) c.trace = load_json_file(resolve_path(s.at("trace_file").get<std::string>(), base_dir));
    std::vector<std::array<double, 3>> pts;
    read(s, "points", pts);
    c.points.assign(pts.begin(), pts.end());
    read(s, "cutoff", c.cutoff);
  }
  if (c.threads < 1) throw Error(ErrorKind::ConfigError, "threads must be at least 1");
  if (c.epsilons.empty()) throw Error(ErrorKind::ConfigError, "epsilon list is empty");
  return c;
}

RunConfig load_config(const std::string& path) {
  return config_from_json(load_json_file(path), std::filesystem::path(path).parent_path().string());
}

BoundaryFunction resolve_boundary(const RunConfig& cfg) {
  const json& b = cfg.boundary;
  if (b.is_object() && b.contains("random")) {
    check_keys(b, "boundary", {"random"});
    const json& r = b.at("random");
    check_keys(r, "boundary.random", {"kmax", "amplitude", "mean", "grid"});
    int kmax = 2, grid = 64;
    double amplitude = 0.2, mean = -0.5;
    read(r, "kmax", kmax);
    read(r, "amplitude", amplitude);
    read(r, "mean", mean);
    read(r, "grid", grid);
    return random_boundary(cfg.seed, kmax, amplitude, mean, grid);
  }
  if (b.is_object()) check_keys(b, "boundary", {"modes", "grid"});
  return boundary_from_json(b);
}

json expanded_config(const RunConfig& cfg) {
  json pts = json::array();
  for (const auto& p : cfg.points) pts.push_back({p[0], p[1], p[2]});
  json boundary;
  try {
    boundary = boundary_to_json(resolve_boundary(cfg));
  } catch (const Error&) {
    boundary = cfg.boundary;
  }
  return {{"command", cfg.command},
          {"boundary", boundary},
          {"cell",
           {{"n1", cfg.cell.n1},
            {"n2", cfg.cell.n2},
            {"nz", cfg.cell.nz},
            {"stretch", cfg.cell.stretch},
            {"groove_fast_path", cfg.groove_fast_path},
            {"tol", cfg.corrector_tol},
            {"max_iterations", cfg.corrector_max_iterations}}},
          {"channel",
           {{"n1", cfg.channel.n1},
            {"n2", cfg.channel.n2},
            {"nz", cfg.channel.nz},
            {"stretch", cfg.channel.stretch},
            {"epsilon", cfg.epsilons},
            {"nper", cfg.nper},
            {"u_top", cfg.u_top},
            {"nonlinear", cfg.nonlinear},
            {"tol", cfg.tol},
            {"max_picard", cfg.max_picard},
            {"relaxation", cfg.relaxation},
            {"max_krylov", cfg.max_krylov}}},
          {"analysis",
           {{"r_values", cfg.r_values},
            {"manufactured", cfg.manufactured},
            {"amplitude", cfg.amplitude},
            {"j", cfg.manufactured_j},
            {"improvement_r", cfg.improvement_r}}},
          {"halfspace", {{"trace", cfg.trace}, {"points", pts}, {"cutoff", cfg.cutoff}}},
          {"refine", cfg.refine},
          {"seed", cfg.seed}};
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a(expanded_config(cfg).dump())); }

CellResolution effective_cell(const RunConfig& cfg, const BoundaryFunction& gamma) {
  CellResolution r = cfg.cell;
  if (cfg.groove_fast_path && gamma.is_groove()) r.n2 = 1;
  return r;
}

ChannelResolution effective_channel(const RunConfig& cfg, const BoundaryFunction& gamma) {
  ChannelResolution r = cfg.channel;
  if (cfg.groove_fast_path && gamma.is_groove()) r.n2 = 1;
  return r;
}

}  // namespace roughwall
