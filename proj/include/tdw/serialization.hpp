#pragma once

#include <json.hpp>
#include <string>

#include "tdw/optimizer.hpp"
#include "tdw/statics.hpp"
#include "tdw/workspace.hpp"

namespace tdw {

using Json = nlohmann::ordered_json;

inline constexpr const char* kConfigSchema = "tdw.run_config/1";

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

Json to_json(const Wrench& w);
Wrench wrench_from_json(const Json& j);

Json to_json(const ScaffoldCylinder& s);
ScaffoldCylinder scaffold_from_json(const Json& j);

Json to_json(const OvertubeSpec& s);
OvertubeSpec overtube_from_json(const Json& j);

const char* to_string(DofMode mode);
DofMode dof_mode_from_string(const std::string& s);
const char* to_string(LayoutSymmetry s);
LayoutSymmetry symmetry_from_string(const std::string& s);

// Tendon list: [{"entry": {"angle_rad", "axial_mm"}, "attachment_mm": [x, y, z]}, ...]
Json tendons_to_json(const TendonConfiguration& c);
void tendons_from_json(const Json& j, TendonConfiguration& c);

// Complete configuration in the run-config file format; loadable with --config.
Json to_json(const TendonConfiguration& c);
TendonConfiguration tendon_configuration_from_json(const Json& j);

Json to_json(const OrientationPolicy& p);
OrientationPolicy orientation_policy_from_json(const Json& j);

Json to_json(const GridSpec& g);
Json to_json(const CoverageReport& r);
// {volume_cm3, grid, counts}
Json workspace_summary(const WorkspaceMap& map);
Json to_json(const OptimizationResult& r);
Json to_json(const ComparisonReport& r);

}  // namespace tdw
