#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdw/optimizer.hpp"
#include "tdw/serialization.hpp"
#include "tdw/task_data.hpp"

namespace tdw {

// Everything a CLI run needs besides the task file. Loaded from JSON, then
// patched by command-line overrides, then validated before any computation.
struct RunConfig {
  ScaffoldCylinder scaffold;
  std::string overtube_preset = "straight";  // "custom" for explicit segments
  OvertubeSpec overtube = OvertubeSpec::straight();
  DofMode dof_mode = DofMode::five_dof;
  double t_min = 1.0;
  double t_max = 60.0;

  double resolution = 2.0;
  std::optional<Box3> bounds;   // unset: derived from the task centroid
  double half_extent_x = 30.0;  // axial half-width of the derived box, mm
  OrientationPolicy orientation = OrientationPolicy::task_mean();
  std::vector<Wrench> workspace_wrenches{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()}};

  Vec3 task_offset = Vec3::Zero();
  double downsample_hz = 0.0;
  std::optional<std::pair<double, double>> trim;
  Wrench default_wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()};

  OptimizerSettings optimizer;  // threads is a runtime option and never serialized
  LayoutSymmetry symmetry = LayoutSymmetry::none;
  int tendon_count = 6;
  std::optional<std::pair<double, double>> entry_axial_range;    // unset: whole scaffold
  std::optional<std::pair<double, double>> attach_offset_range;  // unset: whole overtube

  StandardConfigParams standard;
  GridAxis l_att_axis{20.0, 60.0, 5};
  GridAxis l_entry_axis{40.0, 120.0, 5};

  // Explicit tendon layout; when absent the standard configuration is used.
  std::optional<std::vector<EntryPoint>> entries;
  std::vector<AttachmentPoint> attachments;

  void select_overtube(const std::string& preset);
  void validate() const;

  PreprocessOptions preprocess_options() const;
  GridSpec grid_for(const TaskSpace& task) const;
  OptimizationConstraints constraints_for(const TaskSpace& task) const;
  // Explicit tendons if given, otherwise the standard layout with `standard`.
  TendonConfiguration configuration_for(const TaskSpace& task) const;
};

RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config_file(const std::string& path);
Json to_json(const RunConfig& c);

// Reads, preprocesses and offsets the task according to the run config.
TaskSpace load_task(const std::string& path, const RunConfig& c);

}  // namespace tdw
