#include "tdw/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "tdw/errors.hpp"
#include "tdw/parallel.hpp"

namespace tdw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTriangleStep = 2.0 * kPi / 3.0;

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal_draw(std::mt19937_64& rng) {
  const double u1 = unit_draw(rng);
  const double u2 = unit_draw(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * kPi * u2);
}

// Search-space coordinate: box-projected, or wrapped when periodic.
struct Gene {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;

  double project(double v) const { return periodic ? wrap_angle(v) : std::clamp(v, lo, hi); }
  double span() const { return hi - lo; }
};

class Genome {
 public:
  explicit Genome(const OptimizationConstraints& c) : c_(c) {
    const Gene angle{-kPi, kPi, true};
    const Gene axial{c.entry_axial_min, c.entry_axial_max, false};
    const Gene offset{c.attach_offset_min, c.attach_offset_max, false};
    const int blocks = c.symmetry == LayoutSymmetry::triangle_pairs ? 2 : c.tendon_count;
    for (int b = 0; b < blocks; ++b) genes_.insert(genes_.end(), {angle, axial, offset, angle});
  }

  std::size_t size() const { return genes_.size(); }
  const Gene& gene(std::size_t i) const { return genes_[i]; }

  std::vector<TendonLayout> decode(const std::vector<double>& x) const {
    std::vector<TendonLayout> layout;
    if (c_.symmetry == LayoutSymmetry::triangle_pairs) {
      for (int g = 0; g < 2; ++g)
        for (int k = 0; k < 3; ++k)
          layout.push_back({wrap_angle(x[4 * g] + k * kTriangleStep), x[4 * g + 1], x[4 * g + 2],
                            wrap_angle(x[4 * g + 3] + k * kTriangleStep)});
    } else {
      for (std::size_t t = 0; t < x.size() / 4; ++t)
        layout.push_back({x[4 * t], x[4 * t + 1], x[4 * t + 2], x[4 * t + 3]});
    }
    return layout;
  }

  std::vector<double> encode(const std::vector<TendonLayout>& layout) const {
    std::vector<double> x;
    if (c_.symmetry == LayoutSymmetry::triangle_pairs) {
      if (layout.size() != 6) throw DomainError("triangle_pairs seeds need six tendons");
      for (int g = 0; g < 2; ++g) {
        const auto& t = layout[3 * g];
        x.insert(x.end(), {t.entry_angle, t.entry_axial, t.attach_offset, t.attach_angle});
      }
    } else {
      if (static_cast<int>(layout.size()) != c_.tendon_count) throw DomainError("seed has the wrong tendon count");
      for (const auto& t : layout) x.insert(x.end(), {t.entry_angle, t.entry_axial, t.attach_offset, t.attach_angle});
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = genes_[i].project(x[i]);
    return x;
  }

  std::vector<double> random(std::mt19937_64& rng) const {
    std::vector<double> x(genes_.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = genes_[i].project(genes_[i].lo + genes_[i].span() * unit_draw(rng));
    return x;
  }

 private:
  const OptimizationConstraints& c_;
  std::vector<Gene> genes_;
};

struct Individual {
  std::vector<double> genes;
  CandidateEvaluation eval;
  std::size_t birth = 0;
};

bool individual_order(const Individual& a, const Individual& b) {
  if (ranks_above(a.eval, b.eval)) return true;
  if (ranks_above(b.eval, a.eval)) return false;
  return a.birth < b.birth;
}

void fill_result(OptimizationResult& r, const TendonConfiguration& config, const std::vector<TendonLayout>& layout,
                 const CandidateEvaluation& eval) {
  r.best_config = config;
  r.best_layout = layout;
  r.volume_cm3 = eval.coverage.full() ? eval.volume_cm3 : 0.0;
  r.coverage = eval.coverage;
  r.best_coverage_fraction = eval.coverage.fraction();
  r.valid = eval.coverage.full();
}

}  // namespace

void OptimizationConstraints::validate() const {
  scaffold.validate();
  overtube.validate();
  if (!(t_min > 0.0) || !(t_min <= t_max)) throw DomainError("tension bounds must satisfy 0 < t_min <= t_max");
  if (!(entry_axial_min >= 0.0 && entry_axial_min <= entry_axial_max && entry_axial_max <= scaffold.length))
    throw DomainError("entry axial range must be a nonempty range inside the scaffold");
  if (!(attach_offset_min >= 0.0 && attach_offset_min <= attach_offset_max &&
        attach_offset_max <= overtube.total_length))
    throw DomainError("attachment offset range must be a nonempty range on the overtube");
  if (tendon_count < dof_count(dof_mode) + 1 || tendon_count > kMaxTendons)
    throw DomainError("tendon count must be at least one more than the controlled degrees of freedom");
  if (symmetry == LayoutSymmetry::triangle_pairs && tendon_count != 6)
    throw DomainError("triangle_pairs symmetry uses exactly six tendons");
  if (task.empty()) throw DomainError("task must contain at least one pose");
  if (workspace_wrenches.empty()) throw DomainError("workspace wrench set must not be empty");
  grid.validate(scaffold);
}

Pose OptimizationConstraints::nominal_pose() const { return Pose{task.centroid, task.mean_yaw, task.mean_pitch}; }

TendonConfiguration realize_layout(const std::vector<TendonLayout>& layout, const OptimizationConstraints& c) {
  const OvertubeModel tube(c.overtube);
  TendonConfiguration config;
  config.scaffold = c.scaffold;
  config.overtube = c.overtube;
  config.t_min = c.t_min;
  config.t_max = c.t_max;
  config.dof_mode = c.dof_mode;
  for (const auto& t : layout) {
    config.entries.push_back({t.entry_angle, t.entry_axial});
    config.attachments.push_back({tube.surface_point(t.attach_offset, t.attach_angle)});
  }
  return config;
}

std::vector<TendonLayout> standard_layout(const StandardConfigParams& p, const OptimizationConstraints& c) {
  if (!(p.l_att > 0.0)) throw ConstraintViolation("L_att must be positive");
  if (!(p.l_entry > 0.0)) throw ConstraintViolation("L_entry must be positive");
  const double front_offset = c.overtube.front_ring_offset;
  const double rear_offset = front_offset + p.l_att;
  if (rear_offset > c.overtube.total_length || rear_offset > c.attach_offset_max || front_offset < c.attach_offset_min)
    throw ConstraintViolation("attachment rings do not fit on the overtube");
  if (c.overtube.attachment_ring_radius >= c.scaffold.radius())
    throw ConstraintViolation("attachment triangle does not fit inside the scaffold");

  // Entry planes are centred on the axial midpoint of the two rings at the nominal pose.
  const OvertubeModel tube(c.overtube);
  const Pose nominal = c.nominal_pose();
  const double mid = 0.5 * (pose_to_world(nominal, tube.ring_center(front_offset)).x() +
                            pose_to_world(nominal, tube.ring_center(rear_offset)).x());
  const double front_axial = mid + 0.5 * p.l_entry;
  const double rear_axial = mid - 0.5 * p.l_entry;
  if (rear_axial < c.entry_axial_min || front_axial > c.entry_axial_max)
    throw ConstraintViolation("entry planes fall outside the allowed axial range");

  std::vector<TendonLayout> layout;
  for (const auto& [axial, offset] : {std::pair{front_axial, front_offset}, std::pair{rear_axial, rear_offset}}) {
    for (int k = 0; k < 3; ++k) {
      const double angle = wrap_angle(wrap_angle(p.phase) + k * kTriangleStep);
      layout.push_back({angle, axial, offset, angle});
    }
  }
  return layout;
}

TendonConfiguration standard_configuration(const StandardConfigParams& p, const OptimizationConstraints& c) {
  return realize_layout(standard_layout(p, c), c);
}

bool ranks_above(const CandidateEvaluation& a, const CandidateEvaluation& b) {
  if (a.coverage.full() != b.coverage.full()) return a.coverage.full();
  if (a.coverage.full()) return a.volume_cm3 > b.volume_cm3;
  return a.coverage.fraction() > b.coverage.fraction();
}

CandidateEvaluation evaluate_candidate(const TendonConfiguration& config, const OptimizationConstraints& c,
                                       unsigned threads) {
  CandidateEvaluation e;
  e.coverage = taskspace_coverage(config, c.task);
  if (e.coverage.full())
    e.volume_cm3 = estimate_workspace(config, c.grid, c.workspace_wrenches, &c.task, threads).volume_cm3();
  return e;
}

std::vector<double> GridAxis::values() const {
  if (steps < 1) throw DomainError("grid axis needs at least one step");
  if (!(lo <= hi)) throw DomainError("grid axis range is empty");
  std::vector<double> v;
  for (int k = 0; k < steps; ++k) v.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
  return v;
}

OptimizationResult grid_search_standard(const OptimizationConstraints& c, const GridAxis& l_att,
                                        const GridAxis& l_entry, double phase, unsigned threads) {
  c.validate();
  OptimizationResult result;
  for (double la : l_att.values())
    for (double le : l_entry.values()) result.grid.push_back({{la, le, phase}, false, {}});

  std::vector<std::vector<TendonLayout>> layouts(result.grid.size());
  parallel_for(result.grid.size(), threads, [&](std::size_t i) {
    auto& cand = result.grid[i];
    try {
      layouts[i] = standard_layout(cand.params, c);
    } catch (const ConstraintViolation&) {
      return;
    }
    cand.admissible = true;
    cand.evaluation = evaluate_candidate(realize_layout(layouts[i], c), c);
  });

  // Deterministic winner: rank, then smaller L_att, then smaller L_entry.
  auto better = [](const GridCandidate& a, const GridCandidate& b) {
    if (ranks_above(a.evaluation, b.evaluation)) return true;
    if (ranks_above(b.evaluation, a.evaluation)) return false;
    if (a.params.l_att != b.params.l_att) return a.params.l_att < b.params.l_att;
    return a.params.l_entry < b.params.l_entry;
  };
  std::optional<std::size_t> best;
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    const auto& cand = result.grid[i];
    if (cand.admissible) {
      ++result.evaluations;
      if (!best || better(cand, result.grid[*best])) best = i;
      running = std::max(running, cand.evaluation.objective());
    }
    if (best) result.history.push_back({static_cast<int>(i), running});
  }

  if (!best) {
    result.status = "no admissible standard configuration in the grid";
    return result;
  }
  const auto& winner = result.grid[*best];
  fill_result(result, realize_layout(layouts[*best], c), layouts[*best], winner.evaluation);
  result.standard_params = winner.params;
  result.status = result.valid ? "ok" : "standard configuration cannot achieve the full task";
  return result;
}

OptimizationResult optimize_configuration(const OptimizationConstraints& c, const OptimizerSettings& settings,
                                          const std::vector<std::vector<TendonLayout>>& seeds) {
  c.validate();
  if (settings.population < 2) throw DomainError("population must be at least 2");
  if (settings.iterations < 0) throw DomainError("iterations must be non-negative");

  const Genome genome(c);
  const std::size_t pop_size = static_cast<std::size_t>(settings.population);
  const std::size_t dim = genome.size();
  std::mt19937_64 master(settings.seed);
  std::size_t births = 0;

  auto evaluate_all = [&](std::vector<Individual>& batch) {
    parallel_for(batch.size(), settings.threads, [&](std::size_t i) {
      batch[i].eval = evaluate_candidate(realize_layout(genome.decode(batch[i].genes), c), c);
    });
  };

  std::vector<Individual> population;
  for (const auto& s : seeds) {
    if (population.size() == pop_size) break;
    population.push_back({genome.encode(s), {}, births++});
  }
  // Half of the remaining slots explore around the seeds, the rest is uniform.
  const std::size_t seeded = population.size();
  const std::size_t local = seeded == 0 ? 0 : (pop_size - seeded) / 2;
  for (std::size_t k = 0; k < local; ++k) {
    std::mt19937_64 rng(master());
    std::vector<double> genes = population[k % seeded].genes;
    for (std::size_t i = 0; i < dim; ++i)
      genes[i] = genome.gene(i).project(genes[i] + 0.05 * genome.gene(i).span() * normal_draw(rng));
    population.push_back({std::move(genes), {}, births++});
  }
  while (population.size() < pop_size) {
    std::mt19937_64 rng(master());
    population.push_back({genome.random(rng), {}, births++});
  }
  evaluate_all(population);
  std::stable_sort(population.begin(), population.end(), individual_order);

  OptimizationResult result;
  result.seed = settings.seed;
  result.evaluations = population.size();
  result.history.push_back({0, population.front().eval.objective()});

  const double mutation_rate = std::min(1.0, 2.0 / static_cast<double>(dim));
  for (int gen = 1; gen <= settings.iterations; ++gen) {
    const double progress = settings.iterations > 1 ? static_cast<double>(gen - 1) / (settings.iterations - 1) : 0.0;
    const double sigma = 0.08 * (1.0 - 0.9 * progress);

    std::vector<std::uint64_t> child_seeds(pop_size);
    for (auto& s : child_seeds) s = master();

    std::vector<Individual> offspring(pop_size);
    for (std::size_t k = 0; k < pop_size; ++k) {
      std::mt19937_64 rng(child_seeds[k]);
      auto tournament = [&] {
        const std::size_t a = rng() % pop_size;
        const std::size_t b = rng() % pop_size;
        return std::min(a, b);  // population is sorted best first
      };
      std::vector<double> child = population[tournament()].genes;
      if (unit_draw(rng) < 0.5) {
        const auto& other = population[tournament()].genes;
        for (std::size_t i = 0; i < dim; ++i)
          if (unit_draw(rng) < 0.5) child[i] = other[i];
      }
      bool mutated = false;
      for (std::size_t i = 0; i < dim; ++i) {
        if (unit_draw(rng) < mutation_rate) {
          child[i] += sigma * genome.gene(i).span() * normal_draw(rng);
          mutated = true;
        }
      }
      if (!mutated) {
        const std::size_t i = rng() % dim;
        child[i] += sigma * genome.gene(i).span() * normal_draw(rng);
      }
      for (std::size_t i = 0; i < dim; ++i) child[i] = genome.gene(i).project(child[i]);
      offspring[k] = {std::move(child), {}, births++};
    }
    evaluate_all(offspring);
    result.evaluations += offspring.size();

    for (auto& o : offspring) population.push_back(std::move(o));
    std::stable_sort(population.begin(), population.end(), individual_order);
    population.resize(pop_size);
    result.history.push_back({gen, population.front().eval.objective()});
  }

  const Individual& best = population.front();
  const auto layout = genome.decode(best.genes);
  fill_result(result, realize_layout(layout, c), layout, best.eval);
  result.status = result.valid ? "ok" : "no configuration achieving the full task was found";
  return result;
}

ComparisonReport compare_configurations(const TendonConfiguration& a, const TendonConfiguration& b,
                                        const TaskSpace& task, const GridSpec& grid,
                                        const std::vector<Wrench>& wrenches, unsigned threads) {
  ComparisonReport r;
  r.map_a = estimate_workspace(a, grid, wrenches, &task, threads);
  r.map_b = estimate_workspace(b, grid, wrenches, &task, threads);
  r.coverage_a = taskspace_coverage(a, task);
  r.coverage_b = taskspace_coverage(b, task);
  r.volume_a = workspace_volume(r.map_a);
  r.volume_b = workspace_volume(r.map_b);
  r.volume_difference = r.volume_b - r.volume_a;
  return r;
}

}  // namespace tdw
