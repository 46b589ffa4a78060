#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "roughwall/analysis.hpp"
#include "roughwall/cell.hpp"
#include "roughwall/channel.hpp"
#include "roughwall/geometry.hpp"
#include "roughwall/halfspace.hpp"

namespace roughwall {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::json;

// Identification carried by every artifact.
struct ArtifactTag {
  std::string config_hash;
  std::string version = kVersion;
};

// {"modes": [{"k": [k1, k2], "re": x, "im": y}, ...], "grid": N}
json boundary_to_json(const BoundaryFunction& gamma);
BoundaryFunction boundary_from_json(const json& j);
BoundaryFunction read_boundary_file(const std::string& path);
void write_boundary_file(const std::string& path, const BoundaryFunction& gamma);
// Header "y1,y2,gamma", one row per grid node, y1 fastest.
void write_boundary_grid_csv(const std::string& path, const BoundaryFunction& gamma);

// {"Kmax": n, "modes": [{"k": [k1, k2], "v": [[re, im] x 3]}]}; an optional "period" defaults to 2 pi.
json trace_to_json(const SpectralTrace& trace);
SpectralTrace trace_from_json(const json& j);
SpectralTrace read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, const SpectralTrace& trace);

struct FieldRow {
  double y1 = 0.0, y2 = 0.0, y3 = 0.0;
  Vec3 u{0, 0, 0};
  double p = 0.0;
};

// Header "y1,y2,y3,u1,u2,u3,p".
void write_field_csv(const std::string& path, const std::vector<FieldRow>& rows);

// Little-endian 64-bit floats; blocks v1, v2, v3 over (level, y2, y1) then q over (cell, y2, y1),
// y1 fastest. The sidecar is written to `stem`.json.
json corrector_sidecar(const CorrectorSolution& c, const ArtifactTag& tag);
void write_corrector_dump(const std::string& stem, const CorrectorSolution& c, const ArtifactTag& tag);
// Same layout for u1, u2, u3 and the cell pressure.
json channel_sidecar(const ChannelSolution& sol, const ArtifactTag& tag);
void write_channel_dump(const std::string& stem, const ChannelSolution& sol, const ArtifactTag& tag);
std::vector<double> read_binary(const std::string& path);

// CSV header "r,avg_l2,lipschitz_ratio,c1_grad,c2_grad,c1_lsq,c2_lsq,res_plain,res_corrector,res_navier"
// and the summary {"slopes", "epsilon", "config_hash", "version"}.
std::string scale_report_csv(const ScaleReport& report);
json scale_report_json(const ScaleReport& report, const ArtifactTag& tag);
json rate_fit_json(const RateFit& fit);
void write_scale_report(const std::string& stem, const ScaleReport& report, const ArtifactTag& tag);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const json& j);

}  // namespace roughwall
