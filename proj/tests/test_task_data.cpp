#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tdw/errors.hpp"
#include "tdw/task_data.hpp"

using namespace tdw;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kHeader = std::string(kTaskCsvHeader) + "\n";
const std::string kPoseHeader = "time_s,x_mm,y_mm,z_mm,qw,qx,qy,qz\n";

TaskRecording parse(const std::string& text) {
  std::istringstream in(text);
  return load_task_recording(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TaskRecording random_recording(std::mt19937_64& rng, bool with_wrench) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TaskRecording rec;
  rec.instrument_id = "left grasper";
  rec.frame_id = "scaffold";
  double t = u(rng) * 5.0;
  const int n = 1 + static_cast<int>(rng() % 40);
  for (int i = 0; i < n; ++i) {
    TaskSample s;
    t += 1e-4 + std::abs(u(rng)) * 0.05;
    s.time = t;
    s.position = Vec3(u(rng) * 150.0, u(rng) * 35.0, u(rng) * 35.0);
    s.orientation = Eigen::Quaterniond(u(rng), u(rng), u(rng), u(rng)).normalized();
    if (with_wrench) s.wrench = Wrench{Vec3(u(rng), u(rng), u(rng)) * 5.0, Vec3(u(rng), u(rng), u(rng)) * 20.0};
    rec.samples.push_back(s);
  }
  return rec;
}

}  // namespace

TEST_CASE("one-row file with identity quaternion") {
  const auto rec = parse(kHeader + "0,1,2,3,1,0,0,0,0,0,-0.1,0,0,0\n");
  REQUIRE(rec.samples.size() == 1);
  const auto [yaw, pitch] = yaw_pitch_from_quaternion(rec.samples[0].orientation);
  CHECK(yaw == 0.0);
  CHECK(pitch == 0.0);
  REQUIRE(rec.samples[0].wrench.has_value());
  CHECK(rec.samples[0].wrench->force.z() == -0.1);
}

TEST_CASE("decreasing timestamps name the offending line") {
  const std::string text = kHeader + "0,0,0,0,1,0,0,0,,,,,,\n0.2,0,0,0,1,0,0,0,,,,,,\n0.1,0,0,0,1,0,0,0,,,,,,\n";
  CHECK(error_line(text) == 4);
  CHECK(error_line(kPoseHeader + "0,0,0,0,1,0,0,0\n0,0,0,0,1,0,0,0\n") == 3);
}

TEST_CASE("malformed input is a parse error with a line number") {
  CHECK(error_line("time_s,x_mm\n") == 1);
  CHECK(error_line(kPoseHeader + "0,0,0,0,1.1,0,0,0\n") == 2);  // not unit norm
  CHECK(error_line(kPoseHeader + "0,0,0,0,1,0,0\n") == 2);      // missing field
  CHECK(error_line(kPoseHeader + "0,abc,0,0,1,0,0,0\n") == 2);
  CHECK(error_line(kPoseHeader + "0,1e999,0,0,1,0,0,0\n") == 2);
  CHECK(error_line(kHeader + "0,0,0,0,1,0,0,0,1,2,,,,\n") == 2);  // partial wrench block
  CHECK_THROWS_AS(parse("# only a comment\n"), ParseError);  // no header at all
}

TEST_CASE("comments and metadata lines") {
  const auto rec =
      parse("# instrument_id: right\n# frame_id: scaffold\n# free text\n" + kPoseHeader + "# between rows\n0,1,2,3,1,0,0,0\n");
  CHECK(rec.instrument_id == "right");
  CHECK(rec.frame_id == "scaffold");
  REQUIRE(rec.samples.size() == 1);
  CHECK_FALSE(rec.samples[0].wrench.has_value());
}

TEST_CASE("quaternion norm tolerance is 1e-6") {
  CHECK_NOTHROW(parse(kPoseHeader + "0,0,0,0,1.0000009,0,0,0\n"));
  CHECK_THROWS_AS(parse(kPoseHeader + "0,0,0,0,1.000002,0,0,0\n"), ParseError);
}

TEST_CASE("round trip through CSV preserves every field") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rec = random_recording(rng, trial % 3 != 0);
    std::stringstream buf;
    write_task_recording(buf, rec);
    const auto back = load_task_recording(buf);
    REQUIRE(back.samples.size() == rec.samples.size());
    CHECK(back.instrument_id == rec.instrument_id);
    CHECK(back.frame_id == rec.frame_id);
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
      const auto& a = rec.samples[i];
      const auto& b = back.samples[i];
      CHECK(std::abs(a.time - b.time) <= 1e-9);
      CHECK((a.position - b.position).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((a.orientation.coeffs() - b.orientation.coeffs()).cwiseAbs().maxCoeff() <= 1e-9);
      REQUIRE(a.wrench.has_value() == b.wrench.has_value());
      if (a.wrench) {
        CHECK((a.wrench->force - b.wrench->force).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((a.wrench->moment - b.wrench->moment).cwiseAbs().maxCoeff() <= 1e-9);
      }
    }
  }
}

TEST_CASE("yaw and pitch from quaternions discard roll") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double yaw = u(rng) * kPi;
    const double pitch = u(rng) * 0.49 * kPi;
    const double roll = u(rng) * kPi;
    const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                                 Eigen::AngleAxisd(roll, Vec3::UnitX());
    const auto [y, p] = yaw_pitch_from_quaternion(q);
    CHECK(std::abs(wrap_angle(y - yaw)) < 1e-9);
    CHECK(p == doctest::Approx(pitch).epsilon(1e-9));
    const auto [y2, p2] = yaw_pitch_from_quaternion(quaternion_from_yaw_pitch(yaw, pitch));
    CHECK(std::abs(wrap_angle(y2 - yaw)) < 1e-9);
    CHECK(p2 == doctest::Approx(pitch).epsilon(1e-9));
  }
}

TEST_CASE("circular mean of +179 and -179 degrees is 180 degrees") {
  const double d = kPi / 180.0;
  const double m = circular_mean({179.0 * d, -179.0 * d});
  CHECK(std::abs(std::abs(m) - kPi) < 1e-12);
  CHECK(circular_mean({10.0 * d, 30.0 * d}) == doctest::Approx(20.0 * d));
  CHECK(circular_mean({}) == 0.0);
}

TEST_CASE("constant pose stream gives its own centroid") {
  std::string text = kPoseHeader;
  for (int i = 0; i < 5; ++i) text += std::to_string(i) + ",12.5,-3,4,1,0,0,0\n";
  const auto task = preprocess(parse(text), {});
  REQUIRE(task.size() == 5);
  CHECK(task.centroid == Vec3(12.5, -3.0, 4.0));
  CHECK(task.mean_yaw == 0.0);
  CHECK(task.mean_pitch == 0.0);
  for (const auto& p : task.poses) CHECK(p.position == Vec3(12.5, -3.0, 4.0));
}

TEST_CASE("default wrench fills samples without load data") {
  const auto rec = parse(kHeader + "0,0,0,0,1,0,0,0,,,,,,\n1,0,0,0,1,0,0,0,1,2,3,4,5,6\n");
  PreprocessOptions opts;
  const auto five = preprocess(rec, opts);
  CHECK(five.wrenches[0] == Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()});
  CHECK(five.wrenches[1] == Wrench{Vec3(1.0, 2.0, 3.0), Vec3::Zero()});  // torque dropped in five_dof
  opts.dof_mode = DofMode::six_dof;
  const auto six = preprocess(rec, opts);
  CHECK(six.wrenches[1] == Wrench{Vec3(1.0, 2.0, 3.0), Vec3(4.0, 5.0, 6.0)});
}

TEST_CASE("trim and downsampling") {
  std::string text = kPoseHeader;
  for (int i = 0; i < 11; ++i) text += std::to_string(i * 0.1) + "," + std::to_string(i) + ",0,0,1,0,0,0\n";
  const auto rec = parse(text);

  PreprocessOptions native;
  native.downsample_hz = 10.0;
  const auto same = preprocess(rec, native);
  const auto all = preprocess(rec, {});
  REQUIRE(same.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(same.poses[i].position == all.poses[i].position);

  PreprocessOptions half;
  half.downsample_hz = 5.0;
  const auto h = preprocess(rec, half);
  REQUIRE(h.size() == 6);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h.poses[i].position.x() == doctest::Approx(2.0 * i));

  PreprocessOptions trimmed;
  trimmed.trim = std::pair{0.25, 0.55};
  const auto t = preprocess(rec, trimmed);
  REQUIRE(t.size() == 3);
  CHECK(t.poses.front().position.x() == 3.0);

  PreprocessOptions empty;
  empty.trim = std::pair{5.0, 6.0};
  CHECK_THROWS_AS(preprocess(rec, empty), DomainError);
}

TEST_CASE("wrench pairing is index stable") {
  std::string text = kHeader;
  for (int i = 0; i < 20; ++i)
    text += std::to_string(i * 0.01) + "," + std::to_string(i) + ",0,0,1,0,0,0," + std::to_string(i) + ",0,0,0,0,0\n";
  PreprocessOptions opts;
  opts.downsample_hz = 33.0;
  opts.trim = std::pair{0.03, 0.17};
  const auto task = preprocess(parse(text), opts);
  REQUIRE(!task.empty());
  for (std::size_t i = 0; i < task.size(); ++i) CHECK(task.wrenches[i].force.x() == task.poses[i].position.x());
}

TEST_CASE("task means are invariant under permutation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Pose> poses;
  std::vector<Wrench> wrenches;
  for (int i = 0; i < 57; ++i) {
    poses.push_back({Vec3(90.0 + 10.0 * u(rng), 10.0 * u(rng), 1e-3 * u(rng)), kPi * u(rng), 0.4 * u(rng)});
    wrenches.push_back({});
  }
  const auto a = TaskSpace::from(poses, wrenches);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(poses.begin(), poses.end(), rng);
    const auto b = TaskSpace::from(poses, wrenches);
    CHECK(a.centroid == b.centroid);
    CHECK(a.mean_yaw == b.mean_yaw);
    CHECK(a.mean_pitch == b.mean_pitch);
  }
}

TEST_CASE("synthetic tasks") {
  SyntheticTaskSpec line;
  line.shape = TaskShape::line;
  line.center = Vec3(10.0, 0.0, 0.0);
  line.extent = 20.0;
  line.n_poses = 3;
  const auto l = synthesize_task(line);
  CHECK(l.poses.front().position.isApprox(Vec3(0.0, 0.0, 0.0)));
  CHECK(l.poses.back().position.isApprox(Vec3(20.0, 0.0, 0.0)));
  CHECK((l.centroid - Vec3(10.0, 0.0, 0.0)).norm() < 1e-12);

  SyntheticTaskSpec liss;
  liss.shape = TaskShape::lissajous;
  liss.center = Vec3(95.0, 1.0, -2.0);
  liss.extent = 30.0;
  liss.n_poses = 200;
  liss.jitter = 2.0;
  liss.wrench_profile = SyntheticTaskSpec::WrenchProfile::random;
  liss.max_force = 3.0;
  const auto a = synthesize_task(liss);
  const auto b = synthesize_task(liss);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(((a.poses[i].position - liss.center).cwiseAbs().array() <= 15.0).all());
    CHECK(a.poses[i].position == b.poses[i].position);
    CHECK(a.wrenches[i] == b.wrenches[i]);
    CHECK(a.wrenches[i].force.norm() <= 3.0);
  }

  SyntheticTaskSpec arc;
  arc.center = Vec3(95.0, 0.0, 0.0);
  const auto c = synthesize_task(arc);
  for (const auto& p : c.poses) CHECK(((p.position - arc.center).cwiseAbs().array() <= 15.0 + 1e-9).all());
  CHECK(std::abs(c.poses.front().position.y() + 15.0) < 1e-9);
  CHECK(std::abs(c.poses.back().position.y() - 15.0) < 1e-9);
}

TEST_CASE("synthetic task survives the CSV round trip") {
  SyntheticTaskSpec spec;
  spec.center = Vec3(95.0, 0.0, 0.0);
  spec.orientation_amplitude = 0.1;
  spec.jitter = 0.5;
  const auto task = synthesize_task(spec);
  std::stringstream buf;
  write_task_recording(buf, to_recording(task, 10.0));
  PreprocessOptions opts;
  const auto back = preprocess(load_task_recording(buf), opts);
  REQUIRE(back.size() == task.size());
  for (std::size_t i = 0; i < task.size(); ++i) {
    CHECK((back.poses[i].position - task.poses[i].position).norm() < 1e-9);
    CHECK(std::abs(back.poses[i].yaw - task.poses[i].yaw) < 1e-9);
    CHECK(std::abs(back.poses[i].pitch - task.poses[i].pitch) < 1e-9);
  }
}
