#include "tdw/statics.hpp"

#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "tdw/errors.hpp"

namespace tdw {

namespace {

using SquareMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxTendons, kMaxTendons>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTolerance = 1e-9;
constexpr double kViolationTolerance = 1e-11;
constexpr double kZeroStep = 1e-24;  // on ||z||^2, z the projected constraint normal

// Goldfarb-Idnani dual active-set method for
//   min 1/2 |x|^2  s.t.  E x = e,  0 <= x <= upper.
// Inequality ids 0..n-1 are x_i >= 0, ids n..2n-1 are upper - x_i >= 0.
class BoxQp {
 public:
  BoxQp(const WrenchMatrix& E, const WrenchVector& e, double upper)
      : E_(E), e_(e), upper_(upper), n_(static_cast<int>(E.cols())), me_(static_cast<int>(E.rows())) {
    J_ = SquareMatrix::Identity(n_, n_);
    R_ = SquareMatrix::Zero(n_, n_);
    x_ = TensionVector::Zero(n_);
    mult_ = TensionVector::Zero(n_);
    d_ = TensionVector::Zero(n_);
    z_ = TensionVector::Zero(n_);
    r_ = TensionVector::Zero(n_);
    active_.fill(-1);
    is_active_.fill(false);
  }

  // Returns false when the box-constrained set is empty.
  bool solve() {
    for (int k = 0; k < me_; ++k) {
      const TensionVector np = E_.row(k).transpose();
      d_.noalias() = J_.transpose() * np;
      update_z_r();
      double step = 0.0;
      if (z_.squaredNorm() > kZeroStep) step = (e_[k] - np.dot(x_)) / z_.dot(np);
      x_ += step * z_;
      mult_.head(q_) -= step * r_.head(q_);
      mult_[q_] = step;
      if (!add_constraint()) throw SingularGeometryError("equilibrium rows are linearly dependent");
      active_[q_ - 1] = -1;
    }
    equilibrium_ = x_;

    const int max_iterations = 50 * (n_ + me_) + 50;
    for (int iter = 0; iter < max_iterations; ++iter) {
      int p = -1;
      double worst = -kViolationTolerance;
      for (int id = 0; id < 2 * n_; ++id) {
        if (is_active_[id] || excluded_[id]) continue;
        const double s = slack(id);
        if (s < worst) {
          worst = s;
          p = id;
        }
      }
      if (p < 0) {
        for (int i = 0; i < n_; ++i) x_[i] = std::clamp(x_[i], 0.0, upper_);
        return true;
      }
      if (!enforce(p, worst)) return false;
    }
    return false;
  }

  const TensionVector& solution() const { return x_; }
  const TensionVector& equilibrium() const { return equilibrium_; }

 private:
  double slack(int id) const { return id < n_ ? x_[id] : upper_ - x_[id - n_]; }
  double normal_dot(int id, const TensionVector& v) const { return id < n_ ? v[id] : -v[id - n_]; }

  void load_normal(int id) {
    if (id < n_)
      d_ = J_.row(id).transpose();
    else
      d_ = -J_.row(id - n_).transpose();
  }

  void update_z_r() {
    z_.noalias() = J_.rightCols(n_ - q_) * d_.tail(n_ - q_);
    if (q_ > 0)
      r_.head(q_) = R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d_.head(q_));
  }

  // Steps until constraint p is active (true) or the problem is proven infeasible.
  bool enforce(int p, double violation) {
    double mult_p = 0.0;
    while (true) {
      load_normal(p);
      update_z_r();

      double t1 = kInf;
      int drop_at = -1;
      for (int k = me_; k < q_; ++k) {
        if (r_[k] > 0.0) {
          const double ratio = mult_[k] / r_[k];
          if (ratio < t1) {
            t1 = ratio;
            drop_at = k;
          }
        }
      }
      double t2 = kInf;
      if (z_.squaredNorm() > kZeroStep) t2 = -violation / normal_dot(p, z_);

      if (t1 == kInf && t2 == kInf) return false;
      if (t2 == kInf) {
        mult_.head(q_) -= t1 * r_.head(q_);
        mult_p += t1;
        drop(drop_at);
        continue;
      }
      const double t = std::min(t1, t2);
      x_ += t * z_;
      mult_.head(q_) -= t * r_.head(q_);
      mult_p += t;
      if (t == t2) {
        if (!add_constraint()) {
          excluded_[p] = true;
          return true;
        }
        active_[q_ - 1] = p;
        is_active_[p] = true;
        mult_[q_ - 1] = mult_p;
        return true;
      }
      drop(drop_at);
      violation = slack(p);
    }
  }

  // Appends the constraint whose transformed normal is in d_.
  bool add_constraint() {
    for (int j = n_ - 1; j >= q_ + 1; --j) {
      const double a = d_[j - 1];
      const double b = d_[j];
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double c = a / h;
      const double s = b / h;
      d_[j - 1] = h;
      d_[j] = 0.0;
      for (int k = 0; k < n_; ++k) {
        const double u = J_(k, j - 1);
        const double v = J_(k, j);
        J_(k, j - 1) = c * u + s * v;
        J_(k, j) = -s * u + c * v;
      }
    }
    if (std::abs(d_[q_]) <= std::numeric_limits<double>::epsilon() * r_norm_) return false;
    R_.col(q_).head(q_ + 1) = d_.head(q_ + 1);
    r_norm_ = std::max(r_norm_, std::abs(d_[q_]));
    ++q_;
    return true;
  }

  void drop(int pos) {
    is_active_[active_[pos]] = false;
    for (int j = pos; j < q_ - 1; ++j) {
      R_.col(j).head(q_) = R_.col(j + 1).head(q_);
      active_[j] = active_[j + 1];
      mult_[j] = mult_[j + 1];
    }
    R_.col(q_ - 1).setZero();
    --q_;
    for (int j = pos; j < q_; ++j) {
      const double a = R_(j, j);
      const double b = R_(j + 1, j);
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double c = a / h;
      const double s = b / h;
      for (int k = j; k < q_; ++k) {
        const double u = R_(j, k);
        const double v = R_(j + 1, k);
        R_(j, k) = c * u + s * v;
        R_(j + 1, k) = -s * u + c * v;
      }
      for (int k = 0; k < n_; ++k) {
        const double u = J_(k, j);
        const double v = J_(k, j + 1);
        J_(k, j) = c * u + s * v;
        J_(k, j + 1) = -s * u + c * v;
      }
    }
  }

  const WrenchMatrix& E_;
  const WrenchVector& e_;
  double upper_;
  int n_;
  int me_;
  int q_ = 0;
  double r_norm_ = 1.0;

  SquareMatrix J_;
  SquareMatrix R_;
  TensionVector x_, mult_, d_, z_, r_, equilibrium_;
  std::array<int, kMaxTendons> active_;
  std::array<bool, 2 * kMaxTendons> is_active_;
  std::array<bool, 2 * kMaxTendons> excluded_{};
};

// Power-of-two row scaling: exact, and invariant under uniform length scaling.
double row_scale(const WrenchMatrix& A, int row) {
  const double biggest = A.row(row).cwiseAbs().maxCoeff();
  if (biggest == 0.0) return 1.0;
  int exponent = 0;
  std::frexp(biggest, &exponent);
  return std::ldexp(1.0, -exponent);
}

}  // namespace

void TendonConfiguration::validate() const {
  scaffold.validate();
  overtube.validate();
  const int n = tendon_count();
  const int m = dof_count(dof_mode);
  if (static_cast<int>(attachments.size()) != n)
    throw DomainError("entries and attachments must be index-paired");
  if (n < m + 1)
    throw DomainError("need at least " + std::to_string(m + 1) + " tendons for " + std::to_string(m) +
                      " controlled degrees of freedom");
  if (n > kMaxTendons) throw DomainError("too many tendons");
  if (!(t_min > 0.0) || !(t_min <= t_max) || !std::isfinite(t_max))
    throw DomainError("tension bounds must satisfy 0 < t_min <= t_max");
  for (const auto& e : entries) {
    if (!std::isfinite(e.angle)) throw DomainError("entry angle must be finite");
    (void)entry_point_to_world(scaffold, e);
  }
  const OvertubeModel tube(overtube);
  for (std::size_t i = 0; i < attachments.size(); ++i) {
    if (!attachments[i].local.allFinite() || tube.surface_distance(attachments[i].local) > 1e-6)
      throw DomainError("attachment " + std::to_string(i) + " is not on the overtube surface");
  }
}

WrenchVector reduce_wrench(const Wrench& w, const Pose& pose, DofMode mode) {
  WrenchVector out(dof_count(mode));
  out.head<3>() = w.force;
  if (mode == DofMode::six_dof) {
    out.tail<3>() = w.moment;
  } else {
    const Mat3 r = pose.rotation();
    out[3] = w.moment.dot(r.col(1));
    out[4] = w.moment.dot(r.col(2));
  }
  return out;
}

WrenchMatrix wrench_matrix(const std::vector<Vec3>& entries_world,
                           const std::vector<AttachmentPoint>& attachments, const Pose& pose,
                           DofMode mode) {
  const int n = static_cast<int>(entries_world.size());
  const Mat3 rot = pose.rotation();
  WrenchMatrix a(dof_count(mode), n);
  for (int i = 0; i < n; ++i) {
    const Vec3 arm = rot * attachments[i].local;
    const Vec3 span = entries_world[i] - (arm + pose.position);
    const double length = span.norm();
    if (!(length > 1e-6))
      throw SingularGeometryError("tendon " + std::to_string(i) + " has zero length");
    const Vec3 u = span / length;
    const Vec3 moment = arm.cross(u);
    a.col(i).head<3>() = u;
    if (mode == DofMode::six_dof) {
      a.col(i).tail<3>() = moment;
    } else {
      a(3, i) = moment.dot(rot.col(1));
      a(4, i) = moment.dot(rot.col(2));
    }
  }
  return a;
}

WrenchMatrix wrench_matrix(const TendonConfiguration& config, const Pose& pose) {
  std::vector<Vec3> entries;
  entries.reserve(config.entries.size());
  for (const auto& e : config.entries) entries.push_back(entry_point_to_world(config.scaffold, e));
  return wrench_matrix(entries, config.attachments, pose, config.dof_mode);
}

TensionSolution tension_distribution(const WrenchMatrix& A, const WrenchVector& w, double t_min,
                                     double t_max) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (w.size() != m) throw DomainError("wrench dimension does not match the wrench matrix");
  if (n > kMaxTendons) throw DomainError("too many tendons");
  if (!(t_min <= t_max)) throw DomainError("t_min must not exceed t_max");

  // Substitute x = t - t_min: E x = e with E the row-equilibrated A.
  WrenchMatrix E(m, n);
  WrenchVector e(m);
  for (int i = 0; i < m; ++i) {
    const double s = row_scale(A, i);
    E.row(i) = s * A.row(i);
    e[i] = s * (-w[i] - t_min * A.row(i).sum());
  }

  if (n < m) throw SingularGeometryError("fewer tendons than equilibrium rows");
  const Eigen::JacobiSVD<WrenchMatrix> svd(E);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[m - 1] < kRankTolerance * sv[0])
    throw SingularGeometryError("wrench matrix is rank deficient");

  BoxQp qp(E, e, t_max - t_min);
  TensionSolution out;
  out.feasible = qp.solve();
  const TensionVector& x = out.feasible ? qp.solution() : qp.equilibrium();
  out.tensions = x.array() + t_min;
  out.residual = (A * out.tensions + w).cwiseAbs().maxCoeff();
  if (out.feasible) {
    double margin = kInf;
    for (int i = 0; i < n; ++i)
      margin = std::min({margin, out.tensions[i] - t_min, t_max - out.tensions[i]});
    out.margin = std::max(0.0, margin);
  }
  return out;
}

FeasibilityResult is_wrench_feasible(const TendonConfiguration& config, const Pose& pose,
                                     const Wrench& w) {
  const WrenchMatrix a = wrench_matrix(config, pose);
  FeasibilityResult r;
  r.solution = tension_distribution(a, reduce_wrench(w, pose, config.dof_mode), config.t_min, config.t_max);
  r.feasible = r.solution.feasible;
  r.margin = r.solution.margin;
  return r;
}

}  // namespace tdw
