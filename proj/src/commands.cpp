#include "roughwall/commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "roughwall/analysis.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

// Runs fn(0..n-1) on up to `threads` workers. Results are stored by index by the caller, so the
// output order does not depend on completion order. The first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string num(double x) {
  if (std::abs(x) < 5e-13) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

ArtifactTag tag_of(const RunConfig& cfg) { return {config_hash(cfg), kVersion}; }

std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

void write_config(const RunConfig& cfg) {
  json j = expanded_config(cfg);
  j["config_hash"] = config_hash(cfg);
  j["version"] = kVersion;
  write_json(path_in(cfg, "config.json"), j);
}

json vec3(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

ChannelOptions channel_options(const RunConfig& cfg) {
  ChannelOptions o;
  o.tol = cfg.tol;
  o.max_picard = cfg.max_picard;
  o.relaxation = cfg.relaxation;
  o.max_krylov = cfg.max_krylov;
  return o;
}

using CorrectorPair = std::array<std::shared_ptr<const CorrectorSolution>, 2>;

CorrectorPair solve_pair(const RunConfig& cfg, const BoundaryFunction& gamma, const CellResolution& res) {
  CorrectorPair c;
  parallel_for(2, cfg.threads, [&](int q) {
    c[q] = std::make_shared<const CorrectorSolution>(
        solve_corrector(gamma, q + 1, res, cfg.corrector_tol, cfg.corrector_max_iterations));
  });
  return c;
}

CellResolution refined(CellResolution r) {
  r.n1 *= 2;
  if (r.n2 > 1) r.n2 *= 2;
  r.nz *= 2;
  return r;
}

json slip_json(const SlipMatrix& m, const ArtifactTag& tag) {
  return {{"M", {{m.m[0][0], m.m[0][1]}, {m.m[1][0], m.m[1][1]}}},
          {"asymmetry", m.asymmetry},
          {"eigenvalues", {m.eigenvalues[0], m.eigenvalues[1]}},
          {"alpha1", vec3(m.alpha1)},
          {"alpha2", vec3(m.alpha2)},
          {"config_hash", tag.config_hash},
          {"version", tag.version}};
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SolverDiverged:
    case ErrorKind::PicardDiverged:
    case ErrorKind::SingularFit:
    case ErrorKind::NonPositiveData:
      return kExitSolver;
    default:
      return kExitConfig;
  }
}

std::string alpha_summary(int j, const Vec3& alpha, double refinement_delta) {
  std::string s = "alpha_" + std::to_string(j) + " = (" + num(alpha[0]) + ", " + num(alpha[1]) + ", " +
                  num(alpha[2]) + ") ± ";
  if (std::isnan(refinement_delta)) return s + "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", refinement_delta);
  return s + buf;
}

int cmd_corrector(const RunConfig& cfg, std::ostream& out) {
  const auto tag = tag_of(cfg);
  const BoundaryFunction gamma = resolve_boundary(cfg);
  const CellResolution res = effective_cell(cfg, gamma);
  write_config(cfg);
  const CorrectorPair c = solve_pair(cfg, gamma, res);
  std::array<double, 2> delta{NAN, NAN};
  json fine = nullptr;
  if (cfg.refine) {
    const CellResolution rf = refined(res);
    const CorrectorPair f = solve_pair(cfg, gamma, rf);
    fine = {{"N", {rf.n1, rf.n2}}, {"Nz", rf.nz}, {"alpha1", vec3(f[0]->alpha)}, {"alpha2", vec3(f[1]->alpha)}};
    for (int q = 0; q < 2; ++q) {
      delta[q] = 0.0;
      for (int i = 0; i < 3; ++i) delta[q] = std::max(delta[q], std::abs(f[q]->alpha[i] - c[q]->alpha[i]));
    }
  }
  json summary{{"gamma_hash", gamma.hash()}, {"config_hash", tag.config_hash}, {"version", tag.version}};
  json per = json::array();
  for (int q = 0; q < 2; ++q) {
    write_corrector_dump(path_in(cfg, "corrector_j" + std::to_string(q + 1)), *c[q], tag);
    const EnergySlip e = energy_slip_identity(*c[q]);
    per.push_back({{"j", q + 1},
                   {"alpha", vec3(c[q]->alpha)},
                   {"refinement_delta", std::isnan(delta[q]) ? json(nullptr) : json(delta[q])},
                   {"energy_mismatch", e.mismatch}});
    out << alpha_summary(q + 1, c[q]->alpha, delta[q]) << "\n";
  }
  summary["correctors"] = per;
  summary["refined"] = fine;
  write_json(path_in(cfg, "corrector_summary.json"), summary);
  return kExitOk;
}

int cmd_slip_matrix(const RunConfig& cfg, std::ostream& out) {
  const auto tag = tag_of(cfg);
  const BoundaryFunction gamma = resolve_boundary(cfg);
  write_config(cfg);
  const CorrectorPair c = solve_pair(cfg, gamma, effective_cell(cfg, gamma));
  const SlipMatrix m = slip_matrix(*c[0], *c[1]);
  write_json(path_in(cfg, "slip_matrix.json"), slip_json(m, tag));
  out << "M = [[" << num(m.m[0][0]) << ", " << num(m.m[0][1]) << "], [" << num(m.m[1][0]) << ", " << num(m.m[1][1])
      << "]]  eigenvalues = (" << num(m.eigenvalues[0]) << ", " << num(m.eigenvalues[1])
      << ")  asymmetry = " << num(m.asymmetry) << "\n";
  return kExitOk;
}

int cmd_channel(const RunConfig& cfg, std::ostream& out) {
  const auto tag = tag_of(cfg);
  const BoundaryFunction gamma = resolve_boundary(cfg);
  const ChannelResolution res = effective_channel(cfg, gamma);
  write_config(cfg);
  const int n = static_cast<int>(cfg.epsilons.size());
  std::vector<std::unique_ptr<ChannelSolution>> sols(n);
  parallel_for(n, cfg.threads, [&](int i) {
    sols[i] = std::make_unique<ChannelSolution>(
        solve_channel(gamma, cfg.epsilons[i], cfg.nper, cfg.u_top, cfg.nonlinear, res, channel_options(cfg)));
  });
  for (int i = 0; i < n; ++i) {
    const auto& s = *sols[i];
    write_channel_dump(path_in(cfg, "channel_" + std::to_string(i)), s, tag);
    out << "channel eps = " << num(s.epsilon) << "  picard = " << s.residuals.picard_iterations
        << "  weak_residual = " << num(s.residuals.weak_residual)
        << "  energy_mismatch = " << num(s.residuals.energy_mismatch) << "\n";
  }
  return kExitOk;
}

int cmd_walllaw_report(const RunConfig& cfg, std::ostream& out) {
  const auto tag = tag_of(cfg);
  const BoundaryFunction gamma = resolve_boundary(cfg);
  write_config(cfg);
  const CorrectorPair c = solve_pair(cfg, gamma, effective_cell(cfg, gamma));
  const int n = static_cast<int>(cfg.epsilons.size());
  std::vector<std::unique_ptr<ScaleReport>> reports(n);
  std::vector<std::string> failures(n);
  parallel_for(n, cfg.threads, [&](int i) {
    try {
      const double eps = cfg.epsilons[i];
      if (cfg.manufactured) {
        ManufacturedField f(c[0], c[1], eps, cfg.manufactured_j, cfg.amplitude);
        reports[i] = std::make_unique<ScaleReport>(scale_scan(f, cfg.r_values));
      } else {
        auto sol = std::make_shared<const ChannelSolution>(solve_channel(
            gamma, eps, cfg.nper, cfg.u_top, cfg.nonlinear, effective_channel(cfg, gamma), channel_options(cfg)));
        ChannelBoxField f(sol, c[0], c[1]);
        reports[i] = std::make_unique<ScaleReport>(scale_scan(f, cfg.r_values));
      }
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  json members = json::array();
  std::vector<ScaleReport> ok;
  bool failed = false;
  for (int i = 0; i < n; ++i) {
    const std::string stem = "report_" + std::to_string(i);
    if (!reports[i]) {
      failed = true;
      members.push_back({{"epsilon", cfg.epsilons[i]}, {"status", "failed"}, {"error", failures[i]}});
      out << "eps = " << num(cfg.epsilons[i]) << "  FAILED  " << failures[i] << "\n";
      continue;
    }
    write_scale_report(path_in(cfg, stem), *reports[i], tag);
    members.push_back({{"epsilon", cfg.epsilons[i]}, {"status", "ok"}, {"report", stem}});
    ok.push_back(*reports[i]);
    out << "eps = " << num(reports[i]->epsilon);
    for (const char* col : {"res_plain", "res_navier"}) {
      auto it = reports[i]->slopes.find(col);
      if (it != reports[i]->slopes.end()) out << "  " << col << " slope vs r = " << num(it->second.slope);
    }
    out << "\n";
  }

  json vs_eps = json::object();
  if (ok.size() >= 3)
    for (const char* col : {"improvement", "res_plain", "res_navier", "res_corrector"}) {
      try {
        vs_eps[col] = rate_fit_json(rate_fit_epsilon(ok, col, cfg.improvement_r));
      } catch (const Error& e) {
        vs_eps[col] = {{"error", e.what()}};
      }
    }
  if (vs_eps.contains("improvement") && vs_eps["improvement"].contains("slope"))
    out << "improvement slope vs eps at r = " << num(cfg.improvement_r) << ": "
        << num(vs_eps["improvement"]["slope"].get<double>()) << "\n";
  write_json(path_in(cfg, "walllaw_summary.json"), {{"members", members},
                                                    {"manufactured", cfg.manufactured},
                                                    {"improvement_r", cfg.improvement_r},
                                                    {"slopes_vs_epsilon", vs_eps},
                                                    {"config_hash", tag.config_hash},
                                                    {"version", tag.version}});
  return failed ? kExitSolver : kExitOk;
}

int cmd_halfspace_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.trace.is_null()) throw Error(ErrorKind::ConfigError, "halfspace-eval needs a trace");
  if (cfg.points.empty()) throw Error(ErrorKind::ConfigError, "halfspace-eval needs evaluation points");
  const SpectralTrace trace = trace_from_json(cfg.trace);
  for (const auto& p : cfg.points)
    if (!(p[2] > 0.0)) throw Error(ErrorKind::DomainError, "evaluation points need y3 > 0");
  write_config(cfg);
  std::vector<FieldRow> rows;
  for (const auto& p : cfg.points) {
    const PointValue v = halfspace_point(trace, p[0], p[1], p[2], cfg.cutoff);
    rows.push_back({p[0], p[1], p[2], v.u, v.p});
  }
  write_field_csv(path_in(cfg, "field.csv"), rows);
  out << "evaluated " << rows.size() << " points\n";
  return kExitOk;
}

int cmd_selftest(const RunConfig& cfg, std::ostream& out) {
  const auto tag = tag_of(cfg);
  write_config(cfg);
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool pass, double value) {
    all = all && pass;
    checks.push_back({{"name", name}, {"pass", pass}, {"value", value}});
    out << (pass ? "PASS " : "FAIL ") << name << "  " << num(value) << "\n";
  };

  const auto flat = BoundaryFunction::from_modes({{0, 0, cplx(-0.5, 0.0)}}, 16);
  double err = 0.0;
  for (int j : {1, 2}) {
    const auto s = solve_corrector(flat, j, {16, 1, 16, 0.0});
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(s.alpha[i] - (i == j - 1 ? 0.5 : 0.0)));
  }
  record("flat wall slip vector", err <= 1e-8, err);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double x1 = nd(rng), x2 = nd(rng), xi = std::hypot(x1, x2);
    const DnSymbol d = dn_symbol(x1, x2);
    CVec3 w;
    double w2 = 0.0;
    for (auto& c : w) {
      c = cplx(nd(rng), nd(rng));
      w2 += std::norm(c);
    }
    double re = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) re += (std::conj(w[a]) * d.matrix[a][b] * w[b]).real();
    worst = std::max(worst, (xi * w2 - re) / (xi * w2));
  }
  record("DN coercivity", worst <= 1e-12, worst);

  const auto sol = solve_channel(flat, 0.125, 2, {1.0, 0.0}, false, {16, 1, 16, 1.5});
  double cerr = 0.0;
  const auto& op = *sol.op;
  const auto& lg = op.grid();
  for (int k = 0; k <= op.nz(); ++k)
    for (int i = 0; i < op.ncol(); ++i) {
      const Vec3 ex = couette_velocity(0.125, -0.5, {1.0, 0.0}, lg.g[i] * (1.0 - lg.s[k]) + lg.s[k]);
      for (int q = 0; q < 3; ++q) cerr = std::max(cerr, std::abs(sol.u[op.vidx(q, k, i)] - ex[q]));
    }
  record("flat Couette reproduction", cerr <= 1e-10, cerr);

  const RateFit f = rate_fit({0.5, 0.25, 0.125, 0.0625}, {0.25, 0.0625, 0.015625, 0.00390625});
  record("rate fit of r^2", std::abs(f.slope - 2.0) <= 1e-10, f.slope);

  write_json(path_in(cfg, "selftest.json"),
             {{"checks", checks}, {"pass", all}, {"config_hash", tag.config_hash}, {"version", tag.version}});
  return all ? kExitOk : kExitAcceptance;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "corrector") return cmd_corrector(cfg, out);
    if (cfg.command == "slip-matrix") return cmd_slip_matrix(cfg, out);
    if (cfg.command == "channel") return cmd_channel(cfg, out);
    if (cfg.command == "walllaw-report") return cmd_walllaw_report(cfg, out);
    if (cfg.command == "halfspace-eval") return cmd_halfspace_eval(cfg, out);
    if (cfg.command == "selftest") return cmd_selftest(cfg, out);
    throw Error(ErrorKind::ConfigError, "unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const int code = exit_code_for(e.kind());
    if (code == kExitSolver) {
      try {
        write_json(path_in(cfg, "failure.json"), {{"error", kind_name(e.kind())},
                                                  {"message", e.what()},
                                                  {"history", e.history()},
                                                  {"config_hash", config_hash(cfg)},
                                                  {"version", kVersion}});
      } catch (const std::exception& w) {
        err << "error: could not write failure report: " << w.what() << "\n";
      }
    }
    return code;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rough-wall boundary layer and wall-law toolkit", "roughwall"};
  std::string command, config_path, out_dir;
  std::optional<int> threads, nper, max_picard;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::vector<double> epsilons, utop;
  bool refine = false, stokes = false, navier = false, manufactured = false;
  app.add_option("command", command, "corrector | slip-matrix | channel | walllaw-report | halfspace-eval | selftest")
      ->required()
      ->check(CLI::IsMember({"corrector", "slip-matrix", "channel", "walllaw-report", "halfspace-eval", "selftest"}));
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for independent solves");
  app.add_option("--seed", seed, "seed for randomized inputs");
  app.add_flag("--refine", refine, "repeat corrector solves at doubled resolution");
  app.add_option("--epsilon", epsilons, "roughness scale (repeatable)");
  app.add_option("--nper", nper, "roughness periods across the channel");
  app.add_option("--utop", utop, "top wall velocity U1 U2")->expected(2);
  auto* st = app.add_flag("--stokes", stokes, "drop the convective term");
  auto* ns = app.add_flag("--navier-stokes", navier, "keep the convective term");
  st->excludes(ns);
  app.add_option("--tol", tol, "channel residual tolerance");
  app.add_option("--max-picard", max_picard, "Picard iteration cap");
  app.add_flag("--manufactured", manufactured, "walllaw-report on manufactured fields");

  std::vector<std::string> argv_store{"roughwall"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  cfg.command = command;
  if (!out_dir.empty()) cfg.out = out_dir;
  if (threads) cfg.threads = *threads;
  if (seed) cfg.seed = *seed;
  if (refine) cfg.refine = true;
  if (!epsilons.empty()) cfg.epsilons = epsilons;
  if (nper) cfg.nper = *nper;
  if (!utop.empty()) cfg.u_top = {utop[0], utop[1]};
  if (stokes) cfg.nonlinear = false;
  if (navier) cfg.nonlinear = true;
  if (tol) cfg.tol = *tol;
  if (max_picard) cfg.max_picard = *max_picard;
  if (manufactured) cfg.manufactured = true;
  if (cfg.threads < 1) {
    err << "error: threads must be at least 1\n";
    return kExitConfig;
  }
  return run_command(cfg, out, err);
}

}  // namespace roughwall
