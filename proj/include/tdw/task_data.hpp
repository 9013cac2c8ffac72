#pragma once

#include <Eigen/Geometry>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdw/geometry.hpp"
#include "tdw/statics.hpp"

namespace tdw {

// One tracked sample of the instrument, optionally with the loadcell reading.
struct TaskSample {
  double time = 0.0;  // s
  Vec3 position = Vec3::Zero();  // mm
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  std::optional<Wrench> wrench;  // force N, torque N*mm
};

struct TaskRecording {
  std::vector<TaskSample> samples;
  std::string instrument_id;
  std::string frame_id;
};

// Index-paired poses and wrenches plus their summary statistics.
struct TaskSpace {
  std::vector<Pose> poses;
  std::vector<Wrench> wrenches;
  Vec3 centroid = Vec3::Zero();
  double mean_yaw = 0.0;    // circular mean
  double mean_pitch = 0.0;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }

  // Builds a task and computes its centroid and mean orientation.
  static TaskSpace from(std::vector<Pose> poses, std::vector<Wrench> wrenches);
  // Same task rigidly shifted by `offset`.
  TaskSpace translated(const Vec3& offset) const;
};

// Header row of the recording CSV; the last six columns are optional as a block.
inline constexpr const char* kTaskCsvHeader =
    "time_s,x_mm,y_mm,z_mm,qw,qx,qy,qz,fx_N,fy_N,fz_N,tx_Nmm,ty_Nmm,tz_Nmm";

// Throws ParseError carrying the 1-based line number.
TaskRecording load_task_recording(std::istream& in);
TaskRecording load_task_recording_file(const std::string& path);
void write_task_recording(std::ostream& out, const TaskRecording& rec);

// Z-Y decomposition; roll is discarded.
std::pair<double, double> yaw_pitch_from_quaternion(const Eigen::Quaterniond& q);
Eigen::Quaterniond quaternion_from_yaw_pitch(double yaw, double pitch);

double circular_mean(const std::vector<double>& angles);

struct PreprocessOptions {
  double downsample_hz = 0.0;  // <= 0 keeps every sample
  std::optional<std::pair<double, double>> trim;  // inclusive [t0, t1]
  Wrench default_wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()};
  DofMode dof_mode = DofMode::five_dof;  // five_dof drops the recorded torques
};

TaskSpace preprocess(const TaskRecording& rec, const PreprocessOptions& opts);

enum class TaskShape { line, arc, lissajous };

struct SyntheticTaskSpec {
  TaskShape shape = TaskShape::arc;
  Vec3 center = Vec3::Zero();  // centre of the bounding box of the path
  double extent = 30.0;        // mm, edge of the bounding box
  int n_poses = 30;
  double yaw = 0.0;
  double pitch = 0.0;
  double orientation_amplitude = 0.0;  // rad, sinusoidal sweep along the path
  double jitter = 0.0;                 // mm, uniform noise clamped to the box

  enum class WrenchProfile { constant, random };
  WrenchProfile wrench_profile = WrenchProfile::constant;
  Wrench wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()};  // constant profile
  double max_force = 1.0;                             // random profile, N

  std::uint64_t seed = 42;
};

TaskSpace synthesize_task(const SyntheticTaskSpec& spec);

// Inverse of preprocess for synthetic tasks: one sample per pose at `rate_hz`.
TaskRecording to_recording(const TaskSpace& task, double rate_hz, std::string instrument_id = "synthetic");

}  // namespace tdw
