#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "tdw/errors.hpp"
#include "tdw/serialization.hpp"
#include "tdw/workspace.hpp"

using namespace tdw;
using namespace tdw::testing;

namespace {

const Wrench kZero{};

WorkspaceMap map_with(const Box3& box, double res, std::size_t feasible) {
  WorkspaceMap m;
  m.grid.bounds = box;
  m.grid.resolution = res;
  m.feasible.assign(m.grid.voxel_count(), 0);
  for (std::size_t i = 0; i < feasible; ++i) m.feasible[i] = 1;
  return m;
}

// Compact grid around the demo task that keeps these tests fast.
GridSpec demo_grid(double res = 4.0) {
  GridSpec g;
  g.bounds = Box3{Vec3(68.0, -24.0, -24.0), Vec3(124.0, 24.0, 24.0)};
  g.resolution = res;
  g.orientation = OrientationPolicy::fixed(0.0, 0.0);
  return g;
}

TendonConfiguration scaled(const TendonConfiguration& c, double s) {
  TendonConfiguration out = c;
  out.scaffold.diameter *= s;
  out.scaffold.length *= s;
  out.overtube.total_length *= s;
  out.overtube.front_ring_offset *= s;
  out.overtube.attachment_ring_radius *= s;
  for (auto& seg : out.overtube.segments) seg.length *= s;
  for (auto& e : out.entries) e.axial *= s;
  for (auto& a : out.attachments) a.local *= s;
  return out;
}

TendonConfiguration mirrored(const TendonConfiguration& c) {
  TendonConfiguration out = c;
  for (auto& e : out.entries) e.angle = wrap_angle(std::numbers::pi - e.angle);  // y = r cos(angle)
  for (auto& a : out.attachments) a.local.y() = -a.local.y();
  for (auto& seg : out.overtube.segments) seg.bend_plane_angle = wrap_angle(std::numbers::pi - seg.bend_plane_angle);
  return out;
}

Wrench mirrored(const Wrench& w) {
  return Wrench{Vec3(w.force.x(), -w.force.y(), w.force.z()), Vec3(-w.moment.x(), w.moment.y(), -w.moment.z())};
}

}  // namespace

TEST_CASE("volume is the exact voxel-count formula") {
  const Box3 cube10{Vec3::Zero(), Vec3::Constant(10.0)};
  CHECK(map_with(Box3{Vec3::Zero(), Vec3::Constant(10.0)}, 1.0, 1000).volume_cm3() == 1.0);
  CHECK(map_with(cube10, 1.0, 0).volume_cm3() == 0.0);
  const auto fine = map_with(cube10, 0.5, 8000);
  CHECK(fine.feasible.size() == 8000);
  CHECK(workspace_volume(fine) == 1.0);
  const auto part = map_with(cube10, 2.0, 37);
  CHECK(part.volume_cm3() == 37.0 * 8.0 / 1000.0);
}

TEST_CASE("voxel centres are ordered x fastest") {
  GridSpec g;
  g.bounds = Box3{Vec3(0.0, -3.0, 1.0), Vec3(4.0, 3.0, 3.0)};
  g.resolution = 1.0;
  CHECK(g.dims() == std::array<int, 3>{4, 6, 2});
  CHECK(g.voxel_center(0) == Vec3(0.5, -2.5, 1.5));
  CHECK(g.voxel_center(1) == Vec3(1.5, -2.5, 1.5));
  CHECK(g.voxel_center(4) == Vec3(0.5, -1.5, 1.5));
  CHECK(g.voxel_center(24) == Vec3(0.5, -2.5, 2.5));
}

TEST_CASE("grid validation") {
  const ScaffoldCylinder s;
  GridSpec g = demo_grid();
  CHECK_NOTHROW(g.validate(s));
  g.bounds.max.y() = 30.0;  // corner outside the 35 mm radius
  CHECK_THROWS_AS(g.validate(s), DomainError);
  g = demo_grid();
  g.bounds.max.x() = 151.0;
  CHECK_THROWS_AS(g.validate(s), DomainError);
  g = demo_grid();
  g.resolution = 0.0;
  CHECK_THROWS_AS(g.validate(s), DomainError);
  g = demo_grid();
  g.bounds.max.z() = g.bounds.min.z();
  CHECK_THROWS_AS(g.validate(s), DomainError);

  const auto config = demo_standard(demo_constraints(4.0));
  GridSpec outside = demo_grid();
  outside.bounds.min.y() = -40.0;
  CHECK_THROWS_AS(estimate_workspace(config, outside, {kZero}), DomainError);
  CHECK_THROWS_AS(estimate_workspace(config, demo_grid(), {}), DomainError);
}

TEST_CASE("degenerate tension box with zero load gives an empty map") {
  auto config = demo_standard(demo_constraints(4.0));
  config.t_max = config.t_min;
  const auto map = estimate_workspace(config, demo_grid(), {kZero});
  CHECK(map.feasible_count() == 0);
  CHECK(map.volume_cm3() == 0.0);
}

TEST_CASE("voxel verdicts agree with the per-pose feasibility check") {
  const auto config = demo_standard(demo_constraints(4.0));
  const std::vector<Wrench> wrenches{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()},
                                     Wrench{Vec3(0.3, -0.2, 0.1), Vec3::Zero()}};
  const auto grid = demo_grid();
  const auto map = estimate_workspace(config, grid, wrenches);
  REQUIRE(map.feasible_count() > 0);
  REQUIRE(map.feasible_count() < map.feasible.size());
  for (std::size_t i = 0; i < map.feasible.size(); ++i) {
    const Pose pose{grid.voxel_center(i), 0.0, 0.0};
    bool all = true;
    for (const auto& w : wrenches) all = all && is_wrench_feasible(config, pose, w).feasible;
    if (map.feasible[i]) {
      CHECK(all);
    } else if (all) {
      // Only geometric exclusions may reject a statically feasible voxel.
      CHECK(PoseEvaluator(config).classify(pose, wrenches) == PoseStatus::outside_scaffold);
    }
  }
}

TEST_CASE("doubling t_max never loses voxels") {
  auto config = demo_standard(demo_constraints(4.0));
  const std::vector<Wrench> w{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()}, Wrench{Vec3(2.0, 1.0, -1.0), Vec3::Zero()}};
  const auto base = estimate_workspace(config, demo_grid(), w);
  config.t_max *= 2.0;
  const auto wide = estimate_workspace(config, demo_grid(), w);
  for (std::size_t i = 0; i < base.feasible.size(); ++i)
    if (base.feasible[i]) CHECK(wide.feasible[i]);
  CHECK(wide.volume_cm3() >= base.volume_cm3());
}

TEST_CASE("adding a wrench never adds voxels") {
  const auto config = demo_standard(demo_constraints(4.0));
  std::vector<Wrench> w{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()}};
  const auto one = estimate_workspace(config, demo_grid(), w);
  w.push_back(Wrench{Vec3(0.0, 3.0, 0.0), Vec3(0.0, 0.0, 5.0)});
  const auto two = estimate_workspace(config, demo_grid(), w);
  CHECK(two.feasible_count() < one.feasible_count());
  for (std::size_t i = 0; i < one.feasible.size(); ++i)
    if (two.feasible[i]) CHECK(one.feasible[i]);
}

TEST_CASE("uniform scaling by 2 with zero load reproduces the voxel pattern") {
  const auto config = demo_standard(demo_constraints(4.0));
  const auto grid = demo_grid();
  GridSpec big = grid;
  big.bounds.min *= 2.0;
  big.bounds.max *= 2.0;
  big.resolution *= 2.0;
  const auto a = estimate_workspace(config, grid, {kZero});
  const auto b = estimate_workspace(scaled(config, 2.0), big, {kZero});
  REQUIRE(a.feasible_count() > 0);
  CHECK(a.feasible == b.feasible);
  CHECK(b.volume_cm3() == 8.0 * a.volume_cm3());
}

TEST_CASE("XZ-plane reflection mirrors the map") {
  for (const auto& spec : {OvertubeSpec::straight(), OvertubeSpec::single_curved()}) {
    RunConfig rc;
    rc.overtube = spec;
    rc.resolution = 4.0;
    const auto c = rc.constraints_for(demo_task());
    const auto config = standard_configuration({40.0, 80.0, 1.2}, c);  // phase breaks the y-symmetry
    const auto mirror = mirrored(config);
    const std::vector<Wrench> w{Wrench{Vec3(0.2, 0.3, -0.1), Vec3(1.0, -2.0, 0.5)}};
    GridSpec g = demo_grid();
    g.orientation = OrientationPolicy::fixed(0.15, 0.05);
    GridSpec gm = g;
    gm.orientation = OrientationPolicy::fixed(-0.15, 0.05);
    const auto a = estimate_workspace(config, g, w);
    const auto b = estimate_workspace(mirror, gm, {mirrored(w[0])});
    REQUIRE(a.feasible_count() > 0);
    const auto d = g.dims();
    std::size_t mismatches = 0;
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const std::size_t src = i + static_cast<std::size_t>(d[0]) * (j + static_cast<std::size_t>(d[1]) * k);
          const std::size_t dst =
              i + static_cast<std::size_t>(d[0]) * ((d[1] - 1 - j) + static_cast<std::size_t>(d[1]) * k);
          mismatches += a.feasible[src] != b.feasible[dst];
        }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("halving the resolution stays within the coarse surface shell") {
  const auto config = demo_standard(demo_constraints(4.0));
  const std::vector<Wrench> w{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()}};
  const auto coarse = estimate_workspace(config, demo_grid(4.0), w);
  const auto fine = estimate_workspace(config, demo_grid(2.0), w);
  const auto d = coarse.grid.dims();
  auto at = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= d[0] || j >= d[1] || k >= d[2]) return false;
    return coarse.feasible[i + static_cast<std::size_t>(d[0]) * (j + static_cast<std::size_t>(d[1]) * k)] != 0;
  };
  std::size_t shell = 0;
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        const bool inside = at(i, j, k);
        const bool interior = at(i - 1, j, k) && at(i + 1, j, k) && at(i, j - 1, k) && at(i, j + 1, k) &&
                              at(i, j, k - 1) && at(i, j, k + 1);
        // Boundary voxels of either phase bound the region the refinement can flip.
        if (inside != interior || (!inside && (at(i - 1, j, k) || at(i + 1, j, k) || at(i, j - 1, k) ||
                                               at(i, j + 1, k) || at(i, j, k - 1) || at(i, j, k + 1))))
          ++shell;
      }
  const double shell_volume = static_cast<double>(shell) * 64.0 / 1000.0;
  CHECK(std::abs(fine.volume_cm3() - coarse.volume_cm3()) < shell_volume);
}

TEST_CASE("map does not depend on the thread count") {
  const auto config = demo_standard(demo_constraints(4.0));
  const std::vector<Wrench> w{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()}};
  const auto a = estimate_workspace(config, demo_grid(), w, nullptr, 1);
  const auto b = estimate_workspace(config, demo_grid(), w, nullptr, 3);
  const auto c = estimate_workspace(config, demo_grid(), w, nullptr, 8);
  CHECK(a.feasible == b.feasible);
  CHECK(a.feasible == c.feasible);
}

TEST_CASE("task-mean orientation policy uses the task means") {
  const auto task = demo_task();
  const auto o = OrientationPolicy::task_mean().resolve(&task);
  REQUIRE(o.size() == 1);
  CHECK(o[0].yaw == task.mean_yaw);
  CHECK(o[0].pitch == task.mean_pitch);
  CHECK_THROWS_AS(OrientationPolicy::task_mean().resolve(nullptr), DomainError);
}

TEST_CASE("every listed orientation must pass") {
  const auto config = demo_standard(demo_constraints(4.0));
  const std::vector<Wrench> w{Wrench{Vec3(0.0, 0.0, -0.1), Vec3::Zero()}};
  GridSpec g = demo_grid();
  const auto straight = estimate_workspace(config, g, w);
  g.orientation = OrientationPolicy::fixed(0.3, 0.0);
  const auto yawed = estimate_workspace(config, g, w);
  g.orientation = OrientationPolicy::list({{0.0, 0.0}, {0.3, 0.0}});
  const auto both = estimate_workspace(config, g, w);
  for (std::size_t i = 0; i < both.feasible.size(); ++i)
    CHECK(both.feasible[i] == (straight.feasible[i] && yawed.feasible[i]));
}

TEST_CASE("single unloaded pose in a force-closure region is covered") {
  const auto c = demo_constraints(4.0);
  const auto config = demo_standard(c);
  const Pose pose{Vec3(95.0, 0.0, 0.0), 0.0, 0.0};
  const auto task = TaskSpace::from({pose}, {kZero});
  const auto report = taskspace_coverage(config, task);
  CHECK(report.full());
  CHECK(report.feasible_poses == 1);

  const Eigen::MatrixXd a = wrench_matrix(config, pose);
  const auto verdict =
      oracle::nullspace_interval(a, Eigen::VectorXd::Zero(a.rows()), config.t_min, config.t_max);
  CHECK(verdict.feasible);
  CHECK(report.margins[0] >= 0.0);
}

TEST_CASE("poses outside the scaffold fail with a geometric reason") {
  const auto config = demo_standard(demo_constraints(4.0));
  const auto task = TaskSpace::from({Pose{Vec3(95.0, 0.0, 0.0), 0.0, 0.0}, Pose{Vec3(95.0, 50.0, 0.0), 0.0, 0.0},
                                     Pose{Vec3(170.0, 0.0, 0.0), 0.0, 0.0}},
                                    {kZero, kZero, kZero});
  const auto report = taskspace_coverage(config, task);
  CHECK_FALSE(report.full());
  CHECK(report.total_poses == 3);
  CHECK(report.feasible_poses == 1);
  REQUIRE(report.failures.size() == 2);
  CHECK(report.failures[0].index == 1);
  CHECK(report.failures[0].reason == PoseStatus::outside_scaffold);
  CHECK(report.failures[1].index == 2);
  CHECK(report.failures[1].reason == PoseStatus::outside_scaffold);
  CHECK(report.failures.empty() == (report.feasible_poses == report.total_poses));
}

TEST_CASE("demo task is covered by the default standard configuration") {
  const auto c = demo_constraints(4.0);
  const auto report = taskspace_coverage(demo_standard(c), c.task);
  CHECK(report.full());
  CHECK(report.feasible_poses == report.total_poses);
  CHECK(report.margins.size() == report.total_poses);
}

TEST_CASE("point cloud and summary exports") {
  const auto config = demo_standard(demo_constraints(4.0));
  const auto map = estimate_workspace(config, demo_grid(), {kZero});
  std::ostringstream out;
  write_point_cloud_csv(out, map);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x_mm,y_mm,z_mm,feasible");
  std::size_t rows = 0, ones = 0;
  while (std::getline(in, line)) {
    ++rows;
    ones += line.back() == '1';
  }
  CHECK(rows == map.feasible.size());
  CHECK(ones == map.feasible_count());

  const auto summary = workspace_summary(map);
  CHECK(summary["volume_cm3"].get<double>() == map.volume_cm3());
  CHECK(summary["counts"]["voxels"].get<std::size_t>() == map.feasible.size());
  CHECK(summary["counts"]["feasible"].get<std::size_t>() == map.feasible_count());
  CHECK(summary["grid"]["resolution_mm"].get<double>() == 4.0);
}
