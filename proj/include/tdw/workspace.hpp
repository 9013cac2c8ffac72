#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdw/geometry.hpp"
#include "tdw/statics.hpp"
#include "tdw/task_data.hpp"

namespace tdw {

struct Box3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct Orientation {
  double yaw = 0.0;
  double pitch = 0.0;

  bool operator==(const Orientation&) const = default;
};

// Orientation(s) at which every voxel centre is evaluated. With several
// orientations a voxel counts only if it is feasible at all of them.
struct OrientationPolicy {
  enum class Kind { fixed, task_mean, per_voxel_list };
  Kind kind = Kind::task_mean;
  std::vector<Orientation> orientations;  // one entry for fixed

  static OrientationPolicy fixed(double yaw, double pitch) { return {Kind::fixed, {{yaw, pitch}}}; }
  static OrientationPolicy task_mean() { return {Kind::task_mean, {}}; }
  static OrientationPolicy list(std::vector<Orientation> o) { return {Kind::per_voxel_list, std::move(o)}; }

  // task may be null unless kind == task_mean.
  std::vector<Orientation> resolve(const TaskSpace* task) const;
};

struct GridSpec {
  Box3 bounds;
  double resolution = 2.0;  // voxel edge, mm
  OrientationPolicy orientation;

  std::array<int, 3> dims() const;
  std::size_t voxel_count() const;
  // Voxels are ordered x fastest, then y, then z.
  Vec3 voxel_center(std::size_t index) const;
  // Throws DomainError for a degenerate grid or one reaching outside the scaffold.
  void validate(const ScaffoldCylinder& scaffold) const;
};

struct WorkspaceMap {
  GridSpec grid;
  std::vector<Orientation> orientations;  // resolved from grid.orientation
  std::vector<Wrench> wrench_set;
  std::vector<std::uint8_t> feasible;     // one flag per voxel

  std::size_t feasible_count() const;
  double volume_cm3() const;
};

// Voxel centre feasible iff feasible for every wrench (and orientation). Voxel
// results are independent, so `threads` does not change the map.
WorkspaceMap estimate_workspace(const TendonConfiguration& config, const GridSpec& grid,
                                const std::vector<Wrench>& wrenches, const TaskSpace* task = nullptr,
                                unsigned threads = 1);

double workspace_volume(const WorkspaceMap& map);

enum class PoseStatus { feasible, infeasible, outside_scaffold, singular_geometry, invalid_pose };

const char* to_string(PoseStatus status);

struct PoseFailure {
  std::size_t index = 0;
  Wrench wrench;
  double margin = 0.0;
  PoseStatus reason = PoseStatus::infeasible;
};

struct CoverageReport {
  std::size_t total_poses = 0;
  std::size_t feasible_poses = 0;
  std::vector<PoseFailure> failures;
  std::vector<double> margins;  // per pose; 0 for failures

  bool full() const { return failures.empty(); }
  double fraction() const {
    return total_poses == 0 ? 0.0 : static_cast<double>(feasible_poses) / static_cast<double>(total_poses);
  }
};

CoverageReport taskspace_coverage(const TendonConfiguration& config, const TaskSpace& task);

// Configuration with entry points resolved, for evaluating many poses.
class PoseEvaluator {
 public:
  explicit PoseEvaluator(const TendonConfiguration& config);

  // Tip must lie inside the scaffold (radially and axially); attachment points
  // must lie radially inside. Otherwise outside_scaffold.
  PoseStatus classify(const Pose& pose, const std::vector<Wrench>& wrenches, double* margin = nullptr) const;

 private:
  const TendonConfiguration& config_;
  std::vector<Vec3> entries_world_;
};

// Point cloud: header x_mm,y_mm,z_mm,feasible then one row per voxel.
void write_point_cloud_csv(std::ostream& out, const WorkspaceMap& map);

}  // namespace tdw
