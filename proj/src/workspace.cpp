#include "tdw/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tdw/errors.hpp"
#include "tdw/parallel.hpp"
#include "text_io.hpp"

namespace tdw {

std::vector<Orientation> OrientationPolicy::resolve(const TaskSpace* task) const {
  switch (kind) {
    case Kind::fixed:
      if (orientations.empty()) throw DomainError("fixed orientation policy needs an orientation");
      return {orientations.front()};
    case Kind::task_mean:
      if (task == nullptr || task->empty()) throw DomainError("task_mean orientation needs a non-empty task");
      return {{task->mean_yaw, task->mean_pitch}};
    case Kind::per_voxel_list:
      if (orientations.empty()) throw DomainError("orientation list is empty");
      return orientations;
  }
  return {};
}

std::array<int, 3> GridSpec::dims() const {
  std::array<int, 3> d{};
  for (int k = 0; k < 3; ++k)
    d[k] = static_cast<int>(std::floor((bounds.max[k] - bounds.min[k]) / resolution + 1e-9));
  return d;
}

std::size_t GridSpec::voxel_count() const {
  const auto d = dims();
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

Vec3 GridSpec::voxel_center(std::size_t index) const {
  const auto d = dims();
  const std::size_t i = index % d[0];
  const std::size_t j = (index / d[0]) % d[1];
  const std::size_t k = index / (static_cast<std::size_t>(d[0]) * d[1]);
  return bounds.min + resolution * Vec3(static_cast<double>(i) + 0.5, static_cast<double>(j) + 0.5,
                                        static_cast<double>(k) + 0.5);
}

void GridSpec::validate(const ScaffoldCylinder& scaffold) const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw DomainError("grid resolution must be positive");
  if (!bounds.min.allFinite() || !bounds.max.allFinite()) throw DomainError("grid bounds must be finite");
  const auto d = dims();
  if (d[0] < 1 || d[1] < 1 || d[2] < 1) throw DomainError("grid bounds must span at least one voxel per axis");
  const double y = std::max(std::abs(bounds.min.y()), std::abs(bounds.max.y()));
  const double z = std::max(std::abs(bounds.min.z()), std::abs(bounds.max.z()));
  if (bounds.min.x() < 0.0 || bounds.max.x() > scaffold.length || y * y + z * z > scaffold.radius() * scaffold.radius())
    throw DomainError("grid bounds are not contained in the scaffold");
}

std::size_t WorkspaceMap::feasible_count() const {
  return static_cast<std::size_t>(std::count(feasible.begin(), feasible.end(), std::uint8_t{1}));
}

double WorkspaceMap::volume_cm3() const {
  const double r = grid.resolution;
  return static_cast<double>(feasible_count()) * r * r * r / 1000.0;
}

double workspace_volume(const WorkspaceMap& map) { return map.volume_cm3(); }

const char* to_string(PoseStatus status) {
  switch (status) {
    case PoseStatus::feasible: return "feasible";
    case PoseStatus::infeasible: return "infeasible";
    case PoseStatus::outside_scaffold: return "outside_scaffold";
    case PoseStatus::singular_geometry: return "singular_geometry";
    case PoseStatus::invalid_pose: return "invalid_pose";
  }
  return "unknown";
}

PoseEvaluator::PoseEvaluator(const TendonConfiguration& config) : config_(config) {
  entries_world_.reserve(config.entries.size());
  for (const auto& e : config.entries) entries_world_.push_back(entry_point_to_world(config.scaffold, e));
}

PoseStatus PoseEvaluator::classify(const Pose& pose, const std::vector<Wrench>& wrenches, double* margin) const {
  if (margin) *margin = 0.0;
  if (!pose.valid()) return PoseStatus::invalid_pose;
  const auto& scaffold = config_.scaffold;
  if (!scaffold.contains_radially(pose.position) || pose.position.x() < 0.0 || pose.position.x() > scaffold.length)
    return PoseStatus::outside_scaffold;
  for (const auto& a : config_.attachments)
    if (!scaffold.contains_radially(pose_to_world(pose, a.local))) return PoseStatus::outside_scaffold;

  double worst = std::numeric_limits<double>::infinity();
  try {
    const WrenchMatrix a = wrench_matrix(entries_world_, config_.attachments, pose, config_.dof_mode);
    for (const auto& w : wrenches) {
      const auto s = tension_distribution(a, reduce_wrench(w, pose, config_.dof_mode), config_.t_min, config_.t_max);
      if (!s.feasible) return PoseStatus::infeasible;
      worst = std::min(worst, s.margin);
    }
  } catch (const SingularGeometryError&) {
    return PoseStatus::singular_geometry;
  }
  if (margin && !wrenches.empty()) *margin = worst;
  return PoseStatus::feasible;
}

WorkspaceMap estimate_workspace(const TendonConfiguration& config, const GridSpec& grid,
                                const std::vector<Wrench>& wrenches, const TaskSpace* task, unsigned threads) {
  grid.validate(config.scaffold);
  if (wrenches.empty()) throw DomainError("wrench set must not be empty (use the zero wrench)");
  WorkspaceMap map;
  map.grid = grid;
  map.orientations = grid.orientation.resolve(task);
  map.wrench_set = wrenches;
  map.feasible.assign(grid.voxel_count(), 0);

  const PoseEvaluator evaluator(config);
  parallel_for(map.feasible.size(), threads, [&](std::size_t index) {
    const Vec3 center = grid.voxel_center(index);
    for (const auto& o : map.orientations) {
      if (evaluator.classify(Pose{center, o.yaw, o.pitch}, wrenches) != PoseStatus::feasible) return;
    }
    map.feasible[index] = 1;
  });
  return map;
}

CoverageReport taskspace_coverage(const TendonConfiguration& config, const TaskSpace& task) {
  if (task.empty()) throw DomainError("task must contain at least one pose");
  const PoseEvaluator evaluator(config);
  CoverageReport report;
  report.total_poses = task.size();
  report.margins.assign(task.size(), 0.0);
  std::vector<Wrench> single(1);
  for (std::size_t i = 0; i < task.size(); ++i) {
    single[0] = task.wrenches[i];
    double margin = 0.0;
    const PoseStatus status = evaluator.classify(task.poses[i], single, &margin);
    if (status == PoseStatus::feasible) {
      ++report.feasible_poses;
      report.margins[i] = margin;
    } else {
      report.failures.push_back({i, task.wrenches[i], 0.0, status});
    }
  }
  return report;
}

void write_point_cloud_csv(std::ostream& out, const WorkspaceMap& map) {
  out << "x_mm,y_mm,z_mm,feasible\n";
  for (std::size_t i = 0; i < map.feasible.size(); ++i) {
    const Vec3 c = map.grid.voxel_center(i);
    detail::put_number(out, c.x());
    out << ',';
    detail::put_number(out, c.y());
    out << ',';
    detail::put_number(out, c.z());
    out << ',' << static_cast<int>(map.feasible[i]) << '\n';
  }
}

}  // namespace tdw
