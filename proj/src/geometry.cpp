#include "tdw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "tdw/errors.hpp"

namespace tdw {

namespace {

constexpr double kPi = std::numbers::pi;

// Rigid transform of one segment over the first `arc` mm of its length, in the
// segment's start frame.
Frame segment_transform(const TubeSegment& seg, double arc) {
  Frame f;
  if (seg.bend_angle == 0.0) {
    f.origin = Vec3(arc, 0.0, 0.0);
    return f;
  }
  const double cp = std::cos(seg.bend_plane_angle);
  const double sp = std::sin(seg.bend_plane_angle);
  const Vec3 normal(0.0, cp, sp);
  const Vec3 binormal(0.0, -sp, cp);
  const double radius = seg.length / seg.bend_angle;  // signed
  const double swept = seg.bend_angle * (arc / seg.length);
  f.origin = radius * std::sin(swept) * Vec3::UnitX() + radius * (1.0 - std::cos(swept)) * normal;
  f.rotation = Eigen::AngleAxisd(swept, binormal).toRotationMatrix();
  return f;
}

Frame compose(const Frame& a, const Frame& b) {
  return {a.origin + a.rotation * b.origin, a.rotation * b.rotation};
}

// Distance from q (segment start coordinates) to the segment centreline.
double distance_to_segment(const TubeSegment& seg, const Vec3& q) {
  if (seg.bend_angle == 0.0) {
    const double s = std::clamp(q.x(), 0.0, seg.length);
    return (q - Vec3(s, 0.0, 0.0)).norm();
  }
  const double sign = seg.bend_angle > 0.0 ? 1.0 : -1.0;
  const Vec3 toward(0.0, sign * std::cos(seg.bend_plane_angle), sign * std::sin(seg.bend_plane_angle));
  const double radius = seg.length / std::abs(seg.bend_angle);
  const double sweep = std::abs(seg.bend_angle);
  const Vec3 center = radius * toward;
  const Vec3 rel = q - center;
  double alpha = std::atan2(rel.dot(Vec3::UnitX()), -rel.dot(toward));
  if (alpha < 0.0 && alpha < -0.5 * (2.0 * kPi - sweep)) alpha += 2.0 * kPi;
  alpha = std::clamp(alpha, 0.0, sweep);
  auto point = [&](double a) -> Vec3 {
    return Vec3(radius * std::sin(a), 0.0, 0.0) + radius * (1.0 - std::cos(a)) * toward;
  };
  return std::min({(q - point(alpha)).norm(), (q - point(0.0)).norm(), (q - point(sweep)).norm()});
}

}  // namespace

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Mat3 rotation_yaw_pitch(double yaw, double pitch) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  Mat3 r;
  r << cy * cp, -sy, cy * sp,
       sy * cp, cy, sy * sp,
       -sp, 0.0, cp;
  return r;
}

bool Pose::valid() const {
  return position.allFinite() && std::isfinite(yaw) && std::isfinite(pitch) && yaw > -kPi &&
         yaw <= kPi && pitch > -0.5 * kPi && pitch < 0.5 * kPi;
}

Vec3 pose_to_world(const Pose& pose, const Vec3& local) {
  return pose.rotation() * local + pose.position;
}

Vec3 world_to_pose(const Pose& pose, const Vec3& world) {
  return pose.rotation().transpose() * (world - pose.position);
}

void ScaffoldCylinder::validate() const {
  if (!(diameter > 0.0) || !(length > 0.0) || !std::isfinite(diameter) || !std::isfinite(length))
    throw DomainError("scaffold diameter and length must be positive");
}

Vec3 entry_point_to_world(const ScaffoldCylinder& scaffold, const EntryPoint& entry) {
  if (!(entry.axial >= 0.0 && entry.axial <= scaffold.length))
    throw DomainError("entry point axial position outside the scaffold");
  const double r = scaffold.radius();
  return {entry.axial, r * std::cos(entry.angle), r * std::sin(entry.angle)};
}

int OvertubeSpec::bend_count() const {
  return static_cast<int>(std::count_if(segments.begin(), segments.end(),
                                        [](const TubeSegment& s) { return s.bend_angle != 0.0; }));
}

void OvertubeSpec::validate() const {
  if (segments.empty()) throw DomainError("overtube needs at least one segment");
  double sum = 0.0;
  for (const auto& s : segments) {
    if (!(s.length > 0.0)) throw DomainError("overtube segment length must be positive");
    if (!std::isfinite(s.bend_angle) || !std::isfinite(s.bend_plane_angle))
      throw DomainError("overtube bend angles must be finite");
    if (std::abs(s.bend_angle) >= kPi)
      throw DomainError("overtube bend angle must be below pi (self-intersecting arc)");
    sum += s.length;
  }
  if (std::abs(sum - total_length) > 1e-9)
    throw DomainError("overtube segment lengths do not add up to total_length");
  if (!(front_ring_offset >= 0.0 && front_ring_offset <= total_length))
    throw DomainError("front ring offset outside the overtube");
  if (!(attachment_ring_radius > 0.0)) throw DomainError("attachment ring radius must be positive");
}

OvertubeSpec OvertubeSpec::straight() { return OvertubeSpec{}; }

OvertubeSpec OvertubeSpec::single_curved() {
  OvertubeSpec s;
  s.segments = {{80.0, 0.0, 0.0}, {20.0, kPi / 9.0, 0.5 * kPi}};
  return s;
}

OvertubeSpec OvertubeSpec::double_curved() {
  OvertubeSpec s;
  s.segments = {{60.0, 0.0, 0.0}, {20.0, kPi / 9.0, 0.5 * kPi}, {20.0, -kPi / 9.0, 0.5 * kPi}};
  return s;
}

OvertubeModel::OvertubeModel(OvertubeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  Frame f;
  starts_.reserve(spec_.segments.size());
  for (const auto& seg : spec_.segments) {
    starts_.push_back(f);
    f = compose(f, segment_transform(seg, seg.length));
  }
  tip_ = f;
}

Frame OvertubeModel::frame_in_base(double arc_from_base) const {
  double remaining = std::clamp(arc_from_base, 0.0, spec_.total_length);
  for (std::size_t i = 0; i < spec_.segments.size(); ++i) {
    const auto& seg = spec_.segments[i];
    if (remaining <= seg.length || i + 1 == spec_.segments.size())
      return compose(starts_[i], segment_transform(seg, std::min(remaining, seg.length)));
    remaining -= seg.length;
  }
  return tip_;
}

Frame OvertubeModel::frame_at_offset(double offset_from_tip) const {
  if (!(offset_from_tip >= 0.0 && offset_from_tip <= spec_.total_length))
    throw DomainError("offset outside the overtube");
  const Frame base = offset_from_tip == 0.0 ? tip_ : frame_in_base(spec_.total_length - offset_from_tip);
  const Mat3 rt = tip_.rotation.transpose();
  return {rt * (base.origin - tip_.origin), rt * base.rotation};
}

Vec3 OvertubeModel::surface_point(double offset_from_tip, double angle) const {
  const Frame f = frame_at_offset(offset_from_tip);
  const double r = spec_.attachment_ring_radius;
  return f.origin + r * std::cos(angle) * f.rotation.col(1) + r * std::sin(angle) * f.rotation.col(2);
}

double OvertubeModel::surface_distance(const Vec3& tip_local) const {
  const Vec3 in_base = tip_.origin + tip_.rotation * tip_local;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    const Vec3 q = starts_[i].rotation.transpose() * (in_base - starts_[i].origin);
    best = std::min(best, distance_to_segment(spec_.segments[i], q));
  }
  return std::abs(best - spec_.attachment_ring_radius);
}

OvertubeModel build_overtube(const OvertubeSpec& spec) { return OvertubeModel(spec); }

}  // namespace tdw
