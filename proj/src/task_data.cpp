#include "tdw/task_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include "tdw/errors.hpp"
#include "text_io.hpp"

namespace tdw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kPoseColumns = 8;
constexpr std::size_t kAllColumns = 14;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line, const char* column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ParseError(line, std::string("malformed value for ") + column + ": '" + std::string(field) + "'");
  return v;
}

// Sum that does not depend on input order.
double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

TaskSpace TaskSpace::from(std::vector<Pose> poses, std::vector<Wrench> wrenches) {
  if (poses.size() != wrenches.size()) throw DomainError("poses and wrenches must be index-paired");
  TaskSpace t;
  t.poses = std::move(poses);
  t.wrenches = std::move(wrenches);
  if (t.poses.empty()) return t;
  const double count = static_cast<double>(t.poses.size());
  std::array<std::vector<double>, 3> coords;
  std::vector<double> yaws, pitches;
  for (const auto& p : t.poses) {
    for (int k = 0; k < 3; ++k) coords[k].push_back(p.position[k]);
    yaws.push_back(p.yaw);
    pitches.push_back(p.pitch);
  }
  for (int k = 0; k < 3; ++k) t.centroid[k] = ordered_sum(coords[k]) / count;
  t.mean_yaw = circular_mean(yaws);
  t.mean_pitch = ordered_sum(pitches) / count;
  return t;
}

TaskSpace TaskSpace::translated(const Vec3& offset) const {
  std::vector<Pose> moved = poses;
  for (auto& p : moved) p.position += offset;
  return from(std::move(moved), wrenches);
}

double circular_mean(const std::vector<double>& angles) {
  std::vector<double> s, c;
  s.reserve(angles.size());
  c.reserve(angles.size());
  for (double a : angles) {
    s.push_back(std::sin(a));
    c.push_back(std::cos(a));
  }
  const double ss = ordered_sum(std::move(s));
  const double cs = ordered_sum(std::move(c));
  if (ss == 0.0 && cs == 0.0) return 0.0;
  return wrap_angle(std::atan2(ss, cs));
}

std::pair<double, double> yaw_pitch_from_quaternion(const Eigen::Quaterniond& q) {
  const Mat3 r = q.normalized().toRotationMatrix();
  const double yaw = wrap_angle(std::atan2(r(1, 0), r(0, 0)));
  const double limit = std::nextafter(0.5 * kPi, 0.0);
  const double pitch = std::clamp(std::asin(std::clamp(-r(2, 0), -1.0, 1.0)), -limit, limit);
  return {yaw, pitch};
}

Eigen::Quaterniond quaternion_from_yaw_pitch(double yaw, double pitch) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()));
}

TaskRecording load_task_recording(std::istream& in) {
  static constexpr std::array<const char*, kAllColumns> kNames = {
      "time_s", "x_mm", "y_mm", "z_mm", "qw", "qx", "qy", "qz",
      "fx_N", "fy_N", "fz_N", "tx_Nmm", "ty_Nmm", "tz_Nmm"};
  const std::string full_header = kTaskCsvHeader;
  const std::string pose_header = full_header.substr(0, full_header.find(",fx_N"));

  TaskRecording rec;
  std::size_t columns = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      for (auto [key, field] : {std::pair{std::string_view("instrument_id:"), &rec.instrument_id},
                                std::pair{std::string_view("frame_id:"), &rec.frame_id}}) {
        if (body.substr(0, key.size()) == key) *field = std::string(trim(body.substr(key.size())));
      }
      continue;
    }
    if (columns == 0) {
      if (line == full_header)
        columns = kAllColumns;
      else if (line == pose_header)
        columns = kPoseColumns;
      else
        throw ParseError(line_no, "unexpected header, expected '" + full_header + "'");
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != columns)
      throw ParseError(line_no, "expected " + std::to_string(columns) + " columns, got " +
                                    std::to_string(fields.size()));
    TaskSample s;
    std::array<double, kAllColumns> v{};
    for (std::size_t c = 0; c < kPoseColumns; ++c) v[c] = parse_number(fields[c], line_no, kNames[c]);
    if (columns == kAllColumns) {
      const auto empty = std::count_if(fields.begin() + kPoseColumns, fields.end(),
                                       [](std::string_view f) { return f.empty(); });
      if (empty != 0 && empty != static_cast<long>(kAllColumns - kPoseColumns))
        throw ParseError(line_no, "wrench columns must be all present or all empty");
      if (empty == 0) {
        for (std::size_t c = kPoseColumns; c < kAllColumns; ++c) v[c] = parse_number(fields[c], line_no, kNames[c]);
        s.wrench = Wrench{Vec3(v[8], v[9], v[10]), Vec3(v[11], v[12], v[13])};
      }
    }
    s.time = v[0];
    s.position = Vec3(v[1], v[2], v[3]);
    s.orientation = Eigen::Quaterniond(v[4], v[5], v[6], v[7]);
    if (std::abs(s.orientation.norm() - 1.0) > 1e-6) throw ParseError(line_no, "quaternion is not unit-norm");
    if (!rec.samples.empty() && !(s.time > rec.samples.back().time))
      throw ParseError(line_no, "time is not strictly increasing");
    rec.samples.push_back(s);
  }
  if (columns == 0) throw ParseError(line_no + 1, "missing header row");
  return rec;
}

TaskRecording load_task_recording_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open task recording '" + path + "'");
  return load_task_recording(in);
}

void write_task_recording(std::ostream& out, const TaskRecording& rec) {
  if (!rec.instrument_id.empty()) out << "# instrument_id: " << rec.instrument_id << '\n';
  if (!rec.frame_id.empty()) out << "# frame_id: " << rec.frame_id << '\n';
  const bool with_wrench = std::any_of(rec.samples.begin(), rec.samples.end(),
                                       [](const TaskSample& s) { return s.wrench.has_value(); });
  const std::string header = kTaskCsvHeader;
  out << (with_wrench ? header : header.substr(0, header.find(",fx_N"))) << '\n';
  for (const auto& s : rec.samples) {
    detail::put_number(out, s.time);
    for (double v : {s.position.x(), s.position.y(), s.position.z(), s.orientation.w(), s.orientation.x(),
                     s.orientation.y(), s.orientation.z()}) {
      out << ',';
      detail::put_number(out, v);
    }
    if (with_wrench) {
      if (s.wrench) {
        for (double v : {s.wrench->force.x(), s.wrench->force.y(), s.wrench->force.z(), s.wrench->moment.x(),
                         s.wrench->moment.y(), s.wrench->moment.z()}) {
          out << ',';
          detail::put_number(out, v);
        }
      } else {
        out << ",,,,,,";
      }
    }
    out << '\n';
  }
}

TaskSpace preprocess(const TaskRecording& rec, const PreprocessOptions& opts) {
  std::vector<const TaskSample*> kept;
  for (const auto& s : rec.samples) {
    if (opts.trim && (s.time < opts.trim->first || s.time > opts.trim->second)) continue;
    kept.push_back(&s);
  }
  if (kept.empty()) throw DomainError("task recording is empty after trimming");

  if (opts.downsample_hz > 0.0) {
    const double period = 1.0 / opts.downsample_hz;
    const double t0 = kept.front()->time;
    const double t_end = kept.back()->time;
    std::vector<const TaskSample*> picked;
    std::size_t cursor = 0;
    for (std::size_t k = 0;; ++k) {
      const double target = t0 + static_cast<double>(k) * period;
      if (target > t_end + 0.5 * period) break;
      while (cursor + 1 < kept.size() && kept[cursor + 1]->time <= target) ++cursor;
      std::size_t best = cursor;
      if (cursor + 1 < kept.size() &&
          kept[cursor + 1]->time - target < target - kept[cursor]->time)
        best = cursor + 1;
      if (picked.empty() || picked.back() != kept[best]) picked.push_back(kept[best]);
    }
    kept = std::move(picked);
  }

  std::vector<Pose> poses;
  std::vector<Wrench> wrenches;
  poses.reserve(kept.size());
  wrenches.reserve(kept.size());
  for (const TaskSample* s : kept) {
    const auto [yaw, pitch] = yaw_pitch_from_quaternion(s->orientation);
    poses.push_back(Pose{s->position, yaw, pitch});
    if (s->wrench) {
      Wrench w = *s->wrench;
      if (opts.dof_mode == DofMode::five_dof) w.moment = Vec3::Zero();
      wrenches.push_back(w);
    } else {
      wrenches.push_back(opts.default_wrench);
    }
  }
  return TaskSpace::from(std::move(poses), std::move(wrenches));
}

TaskSpace synthesize_task(const SyntheticTaskSpec& spec) {
  if (spec.n_poses < 1) throw DomainError("synthetic task needs at least one pose");
  if (!(spec.extent >= 0.0)) throw DomainError("synthetic task extent must be non-negative");
  std::mt19937_64 rng(spec.seed);
  const double half = 0.5 * spec.extent;
  const int n = spec.n_poses;

  std::vector<Pose> poses;
  std::vector<Wrench> wrenches;
  for (int k = 0; k < n; ++k) {
    const double u = n > 1 ? static_cast<double>(k) / (n - 1) : 0.5;
    Vec3 offset = Vec3::Zero();
    switch (spec.shape) {
      case TaskShape::line:
        offset.x() = n > 1 ? -half + u * spec.extent : 0.0;
        break;
      case TaskShape::arc: {
        // 120 degree arc whose chord spans the extent along Y.
        const double sweep = 2.0 * kPi / 3.0;
        const double radius = half / std::sin(0.5 * sweep);
        const double phi = (u - 0.5) * sweep;
        const double x_mid = 0.5 * radius * (1.0 + std::cos(0.5 * sweep));
        offset = Vec3(radius * std::cos(phi) - x_mid, radius * std::sin(phi), 0.0);
        break;
      }
      case TaskShape::lissajous: {
        const double s = 2.0 * kPi * k / n;
        offset = half * Vec3(std::sin(3.0 * s), std::sin(2.0 * s), std::sin(s + 0.25 * kPi));
        break;
      }
    }
    if (spec.jitter > 0.0) {
      for (int c = 0; c < 3; ++c) {
        offset[c] += spec.jitter * (2.0 * unit_draw(rng) - 1.0);
        offset[c] = std::clamp(offset[c], -half, half);
      }
    }
    const double phase = 2.0 * kPi * u;
    const double yaw = wrap_angle(spec.yaw + spec.orientation_amplitude * std::sin(phase));
    const double pitch = spec.pitch + spec.orientation_amplitude * std::cos(phase);
    poses.push_back(Pose{spec.center + offset, yaw, pitch});

    if (spec.wrench_profile == SyntheticTaskSpec::WrenchProfile::constant) {
      wrenches.push_back(spec.wrench);
    } else {
      const double z = 2.0 * unit_draw(rng) - 1.0;
      const double theta = 2.0 * kPi * unit_draw(rng);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double magnitude = spec.max_force * unit_draw(rng);
      wrenches.push_back(Wrench{magnitude * Vec3(r * std::cos(theta), r * std::sin(theta), z), Vec3::Zero()});
    }
  }
  return TaskSpace::from(std::move(poses), std::move(wrenches));
}

TaskRecording to_recording(const TaskSpace& task, double rate_hz, std::string instrument_id) {
  TaskRecording rec;
  rec.instrument_id = std::move(instrument_id);
  rec.frame_id = "scaffold";
  for (std::size_t i = 0; i < task.size(); ++i) {
    TaskSample s;
    s.time = static_cast<double>(i) / rate_hz;
    s.position = task.poses[i].position;
    s.orientation = quaternion_from_yaw_pitch(task.poses[i].yaw, task.poses[i].pitch);
    s.wrench = task.wrenches[i];
    rec.samples.push_back(s);
  }
  return rec;
}

}  // namespace tdw
