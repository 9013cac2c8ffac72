#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tdw/statics.hpp"
#include "tdw/task_data.hpp"
#include "tdw/workspace.hpp"

namespace tdw {

// Two equilateral tendon triangles (front and rear) sharing one YZ projection.
// Entry points sit on the scaffold wall; attachments on the overtube rings.
struct StandardConfigParams {
  double l_att = 40.0;    // mm between the front and rear attachment rings
  double l_entry = 80.0;  // mm between the front and rear entry planes
  double phase = 0.5 * std::numbers::pi;  // rotation of both triangles about X
};

enum class LayoutSymmetry { none, triangle_pairs };

// Free parameters of one tendon.
struct TendonLayout {
  double entry_angle = 0.0;    // rad around the scaffold axis
  double entry_axial = 0.0;    // mm
  double attach_offset = 0.0;  // mm back from the tip along the overtube
  double attach_angle = 0.0;   // rad around the overtube

  bool operator==(const TendonLayout&) const = default;
};

struct OptimizationConstraints {
  ScaffoldCylinder scaffold;
  OvertubeSpec overtube;
  double t_min = 1.0;
  double t_max = 60.0;
  DofMode dof_mode = DofMode::five_dof;
  double entry_axial_min = 0.0;
  double entry_axial_max = 150.0;
  double attach_offset_min = 0.0;
  double attach_offset_max = 100.0;
  int tendon_count = 6;
  LayoutSymmetry symmetry = LayoutSymmetry::none;

  TaskSpace task;
  GridSpec grid;                           // objective evaluation grid
  std::vector<Wrench> workspace_wrenches;  // wrench set for the volume scan

  void validate() const;
  // Tip at the task centroid, oriented at the task's mean yaw/pitch.
  Pose nominal_pose() const;
};

TendonConfiguration realize_layout(const std::vector<TendonLayout>& layout, const OptimizationConstraints& c);

// Throws ConstraintViolation when the planes fall outside the allowed ranges.
std::vector<TendonLayout> standard_layout(const StandardConfigParams& p, const OptimizationConstraints& c);
TendonConfiguration standard_configuration(const StandardConfigParams& p, const OptimizationConstraints& c);

struct CandidateEvaluation {
  CoverageReport coverage;
  double volume_cm3 = 0.0;  // only computed for full-coverage candidates

  // Volume when the task is covered, coverage fraction - 1 (< 0) otherwise.
  double objective() const { return coverage.full() ? volume_cm3 : coverage.fraction() - 1.0; }
};

CandidateEvaluation evaluate_candidate(const TendonConfiguration& config, const OptimizationConstraints& c,
                                       unsigned threads = 1);

// Lexicographic: full coverage first, then volume, else coverage fraction.
bool ranks_above(const CandidateEvaluation& a, const CandidateEvaluation& b);

struct HistoryEntry {
  int iteration = 0;
  double best_objective = 0.0;
};

struct GridCandidate {
  StandardConfigParams params;
  bool admissible = false;  // false when the layout violated the constraints
  CandidateEvaluation evaluation;
};

struct OptimizationResult {
  bool valid = false;
  std::string status;
  TendonConfiguration best_config;
  std::vector<TendonLayout> best_layout;
  double volume_cm3 = 0.0;
  CoverageReport coverage;
  double best_coverage_fraction = 0.0;
  std::vector<HistoryEntry> history;
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;

  std::optional<StandardConfigParams> standard_params;  // grid search only
  std::vector<GridCandidate> grid;                      // grid search only
};

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;

  // steps evenly spaced values from lo to hi; a single step yields lo.
  std::vector<double> values() const;
};

OptimizationResult grid_search_standard(const OptimizationConstraints& c, const GridAxis& l_att,
                                        const GridAxis& l_entry, double phase = 0.5 * std::numbers::pi,
                                        unsigned threads = 1);

struct OptimizerSettings {
  int population = 40;
  int iterations = 60;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

// Seeded elitist evolutionary search over entry and attachment parameters.
// `seeds` are injected into the initial population (e.g. the grid-search winner).
OptimizationResult optimize_configuration(const OptimizationConstraints& c, const OptimizerSettings& settings,
                                          const std::vector<std::vector<TendonLayout>>& seeds = {});

struct ComparisonReport {
  WorkspaceMap map_a;
  WorkspaceMap map_b;
  CoverageReport coverage_a;
  CoverageReport coverage_b;
  double volume_a = 0.0;
  double volume_b = 0.0;
  double volume_difference = 0.0;  // b - a
};

ComparisonReport compare_configurations(const TendonConfiguration& a, const TendonConfiguration& b,
                                        const TaskSpace& task, const GridSpec& grid,
                                        const std::vector<Wrench>& wrenches, unsigned threads = 1);

}  // namespace tdw
