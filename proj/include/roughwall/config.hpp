#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "roughwall/cell.hpp"
#include "roughwall/channel.hpp"
#include "roughwall/io.hpp"

namespace roughwall {

// Every field has a default; the expanded form is written next to each run's artifacts.
struct RunConfig {
  std::string command;

  // Boundary as {"modes": ..., "grid": N}, or {"random": {...}} drawn from `seed`.
  json boundary = json{{"modes", json::array({json{{"k", {0, 0}}, {"re", -0.5}, {"im", 0.0}}})}, {"grid", 32}};

  CellResolution cell{64, 64, 64, 0.0};
  bool groove_fast_path = true;  // n2 = 1 when gamma depends on y1 only
  double corrector_tol = 1e-8;
  int corrector_max_iterations = 3000;

  ChannelResolution channel{96, 96, 64, 1.5};
  std::vector<double> epsilons{1.0 / 16};
  int nper = 2;
  std::array<double, 2> u_top{1.0, 0.0};
  bool nonlinear = true;
  double tol = 1e-8;
  int max_picard = 200;
  double relaxation = 0.7;
  int max_krylov = 3000;

  std::vector<double> r_values{0.5, 0.25, 0.125, 0.0625};
  bool manufactured = false;
  double amplitude = 1.0;
  int manufactured_j = 1;
  double improvement_r = 0.25;

  json trace = nullptr;  // SpectralTrace JSON for halfspace-eval
  std::vector<Vec3> points;
  double cutoff = 0.0;

  bool refine = false;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "out";
};

// Parses a config object; unknown keys are rejected. Relative file references resolve against `base_dir`.
RunConfig config_from_json(const json& j, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);

// The fully expanded config with the boundary resolved to explicit modes. `out` and `threads` are
// left out because they do not change any result.
json expanded_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

BoundaryFunction resolve_boundary(const RunConfig& cfg);
// Mean `mean`, random modes with |k|_inf <= kmax and total amplitude `amplitude`.
BoundaryFunction random_boundary(std::uint64_t seed, int kmax, double amplitude, double mean, int grid);

// Cell resolution actually used for the given boundary.
CellResolution effective_cell(const RunConfig& cfg, const BoundaryFunction& gamma);
ChannelResolution effective_channel(const RunConfig& cfg, const BoundaryFunction& gamma);

}  // namespace roughwall
