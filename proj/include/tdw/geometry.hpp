#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <numbers>
#include <vector>

namespace tdw {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

// R = Rz(yaw) * Ry(pitch).
Mat3 rotation_yaw_pitch(double yaw, double pitch);

// Tip frame of the overtube. The body x-axis is the tip tangent; roll is not represented.
struct Pose {
  Vec3 position = Vec3::Zero();  // mm
  double yaw = 0.0;              // (-pi, pi]
  double pitch = 0.0;            // (-pi/2, pi/2)

  Mat3 rotation() const { return rotation_yaw_pitch(yaw, pitch); }
  bool valid() const;
};

Vec3 pose_to_world(const Pose& pose, const Vec3& local);
Vec3 world_to_pose(const Pose& pose, const Vec3& world);

// Cylinder along the world X-axis, from x = 0 to x = length.
struct ScaffoldCylinder {
  double diameter = 70.0;  // mm
  double length = 150.0;   // mm

  double radius() const { return 0.5 * diameter; }
  // Strictly inside the lateral surface; the axial extent is not checked.
  bool contains_radially(const Vec3& p) const {
    return p.y() * p.y() + p.z() * p.z() < radius() * radius();
  }
  void validate() const;
};

// Tendon fulcrum on the scaffold wall.
struct EntryPoint {
  double angle = 0.0;  // rad, around the X-axis measured from +Y towards +Z
  double axial = 0.0;  // mm along the scaffold axis
};

Vec3 entry_point_to_world(const ScaffoldCylinder& scaffold, const EntryPoint& entry);

struct TubeSegment {
  double length = 0.0;            // mm
  double bend_angle = 0.0;        // rad, 0 = straight
  double bend_plane_angle = 0.0;  // rad, bend direction around the local tangent
};

struct OvertubeSpec {
  double total_length = 100.0;
  std::vector<TubeSegment> segments{{100.0, 0.0, 0.0}};
  double front_ring_offset = 10.0;  // arc length from tip to the front attachment ring
  double attachment_ring_radius = 3.0;

  int bend_count() const;
  void validate() const;

  static OvertubeSpec straight();
  static OvertubeSpec single_curved();
  static OvertubeSpec double_curved();
};

// Position and orientation of a point along the tube. Rotation columns are the
// local tangent followed by the two cross-section axes.
struct Frame {
  Vec3 origin = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

// Overtube centreline built from tangent-continuous circular arcs. The base of
// the tube sits at the origin of the base frame pointing along +X; all public
// queries are expressed in the tip frame, which is the body frame of a Pose.
class OvertubeModel {
 public:
  explicit OvertubeModel(OvertubeSpec spec);

  const OvertubeSpec& spec() const { return spec_; }

  // Frame at the given arc length measured back from the tip, in tip coordinates.
  Frame frame_at_offset(double offset_from_tip) const;
  Vec3 ring_center(double offset_from_tip) const { return frame_at_offset(offset_from_tip).origin; }
  Vec3 front_ring_center() const { return ring_center(spec_.front_ring_offset); }
  Vec3 rear_ring_center(double ring_spacing) const {
    return ring_center(spec_.front_ring_offset + ring_spacing);
  }

  // Point on the attachment-ring surface at the given offset and angle around the tube.
  Vec3 surface_point(double offset_from_tip, double angle) const;

  // | distance to centreline - attachment_ring_radius |
  double surface_distance(const Vec3& tip_local) const;

  // Tip frame expressed in the base frame.
  const Frame& tip_in_base() const { return tip_; }
  // Tangent at the tube base, in tip coordinates.
  Vec3 base_direction() const { return tip_.rotation.transpose().col(0); }

 private:
  Frame frame_in_base(double arc_from_base) const;

  OvertubeSpec spec_;
  std::vector<Frame> starts_;  // segment start frames in base coordinates
  Frame tip_;
};

OvertubeModel build_overtube(const OvertubeSpec& spec);

struct AttachmentPoint {
  Vec3 local = Vec3::Zero();  // tip frame, mm
};

}  // namespace tdw
