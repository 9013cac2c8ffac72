#pragma once

#include <Eigen/Core>
#include <vector>

#include "tdw/geometry.hpp"

namespace tdw {

// Upper bound on tendons per instrument; keeps the solver on the stack.
inline constexpr int kMaxTendons = 16;

using WrenchMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 6, kMaxTendons>;
using WrenchVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 6, 1>;
using TensionVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxTendons, 1>;

enum class DofMode { five_dof, six_dof };

inline int dof_count(DofMode mode) { return mode == DofMode::five_dof ? 5 : 6; }

// External load on the overtube. The moment is taken about the tip, in world
// coordinates; in five_dof mode only its components about the tip y/z axes
// (pitch and yaw moments) enter the equilibrium.
struct Wrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 moment = Vec3::Zero();  // N*mm

  bool operator==(const Wrench&) const = default;
};

struct TendonConfiguration {
  ScaffoldCylinder scaffold;
  OvertubeSpec overtube;
  std::vector<EntryPoint> entries;
  std::vector<AttachmentPoint> attachments;  // index-paired with entries
  double t_min = 1.0;   // N
  double t_max = 60.0;  // N
  DofMode dof_mode = DofMode::five_dof;

  int tendon_count() const { return static_cast<int>(entries.size()); }

  // Checks tendon count, pairing, bounds (t_min == t_max is allowed), entry
  // placement and that attachments lie on the overtube surface.
  void validate() const;
};

// Wrench in the equilibrium basis: [force; moment] with the roll row dropped in five_dof.
WrenchVector reduce_wrench(const Wrench& w, const Pose& pose, DofMode mode);

// Column i = [u_i ; reduced(r_i x u_i)], u_i the unit vector from the world
// attachment point towards its entry point, r_i the attachment relative to the
// tip. Equilibrium convention: A t + w = 0.
WrenchMatrix wrench_matrix(const TendonConfiguration& config, const Pose& pose);

// Same, from pre-resolved world entry points (hot path for workspace scans).
WrenchMatrix wrench_matrix(const std::vector<Vec3>& entries_world,
                           const std::vector<AttachmentPoint>& attachments, const Pose& pose,
                           DofMode mode);

struct TensionSolution {
  TensionVector tensions;
  bool feasible = false;
  double margin = 0.0;    // min distance to either bound, 0 when infeasible
  double residual = 0.0;  // ||A t + w||_inf
};

// Unique minimiser of sum (t_i - t_min)^2 subject to A t = -w and
// t_min <= t <= t_max, found with a dual active-set method. When the set is
// empty, `tensions` holds the least-squares equilibrium ignoring the box.
// Throws SingularGeometryError when A is not of full row rank.
TensionSolution tension_distribution(const WrenchMatrix& A, const WrenchVector& w, double t_min,
                                     double t_max);

struct FeasibilityResult {
  bool feasible = false;
  double margin = 0.0;
  TensionSolution solution;
};

FeasibilityResult is_wrench_feasible(const TendonConfiguration& config, const Pose& pose,
                                     const Wrench& w);

}  // namespace tdw
