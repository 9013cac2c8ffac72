#include "tdw/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "tdw/errors.hpp"
#include "tdw/run_config.hpp"

namespace tdw {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string task_path;
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> resolution;
  std::optional<double> bowel_diameter;
  std::optional<std::string> overtube;
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::optional<int> population;
  std::optional<int> iterations;
  std::optional<std::string> dof_mode;
  std::optional<std::string> symmetry;
};

struct SynthOptions {
  std::string output;
  std::string shape = "arc";
  std::vector<double> center{95.0, 0.0, 0.0};
  double extent = 30.0;
  int n_poses = 30;
  double yaw = 0.0;
  double pitch = 0.0;
  double orientation_amplitude = 0.0;
  double jitter = 0.0;
  double force_z = -0.1;
  double rate_hz = 10.0;
  std::uint64_t seed = 42;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool task_required) {
  auto* task = cmd->add_option("--task", o.task_path, "Task recording CSV");
  if (task_required) task->required();
  cmd->add_option("--config", o.config_path, "Run configuration JSON");
  cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it");
  cmd->add_option("--seed", o.seed, "Optimizer seed");
  cmd->add_option("--resolution-mm", o.resolution, "Voxel edge length");
  cmd->add_option("--bowel-diameter", o.bowel_diameter, "Scaffold diameter, mm");
  cmd->add_option("--overtube", o.overtube, "Overtube preset")
      ->check(CLI::IsMember({"straight", "single", "double"}));
  cmd->add_option("--t-min", o.t_min, "Minimum tendon tension, N");
  cmd->add_option("--t-max", o.t_max, "Maximum tendon tension, N");
  cmd->add_option("--population", o.population, "Optimizer population size");
  cmd->add_option("--iterations", o.iterations, "Optimizer generations");
  cmd->add_option("--dof-mode", o.dof_mode, "Controlled DOF")->check(CLI::IsMember({"five_dof", "six_dof"}));
  cmd->add_option("--symmetry", o.symmetry, "Layout parametrisation")
      ->check(CLI::IsMember({"none", "triangle_pairs"}));
}

RunConfig resolve_config(const CommonOptions& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config_file(o.config_path);
  if (o.seed) c.optimizer.seed = *o.seed;
  if (o.resolution) c.resolution = *o.resolution;
  if (o.bowel_diameter) c.scaffold.diameter = *o.bowel_diameter;
  if (o.overtube) c.select_overtube(*o.overtube);
  if (o.t_min) c.t_min = *o.t_min;
  if (o.t_max) c.t_max = *o.t_max;
  if (o.population) c.optimizer.population = *o.population;
  if (o.iterations) c.optimizer.iterations = *o.iterations;
  if (o.dof_mode) c.dof_mode = dof_mode_from_string(*o.dof_mode);
  if (o.symmetry) c.symmetry = symmetry_from_string(*o.symmetry);
  c.optimizer.threads = o.threads;
  c.validate();
  return c;
}

Json task_summary(const std::string& path, const TaskSpace& task) {
  return Json{{"file", fs::path(path).filename().string()},
              {"poses", task.size()},
              {"centroid_mm", to_json(task.centroid)},
              {"mean_yaw_rad", task.mean_yaw},
              {"mean_pitch_rad", task.mean_pitch}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path.string() + "'");
  f << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_cloud(const fs::path& path, const WorkspaceMap& map) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path.string() + "'");
  write_point_cloud_csv(f, map);
}

fs::path prepare_out(const CommonOptions& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

Json base_report(const char* command, const RunConfig& c, const CommonOptions& o, const TaskSpace& task,
                 const GridSpec& grid) {
  Json r{{"command", command}, {"config", to_json(c)}};
  if (!task.empty()) r["task"] = task_summary(o.task_path, task);
  r["grid"] = to_json(grid);
  return r;
}

void print_coverage(std::ostream& out, const char* label, const CoverageReport& cov) {
  out << label << "coverage " << cov.feasible_poses << "/" << cov.total_poses << " poses";
  if (!cov.full()) {
    out << "; failing pose indices:";
    for (const auto& f : cov.failures) out << ' ' << f.index;
  }
  out << '\n';
}

void print_volume(std::ostream& out, const char* label, double v) {
  out << label << std::fixed << std::setprecision(3) << v << " cm^3\n" << std::defaultfloat;
}

int cmd_validate(const CommonOptions& o, std::ostream& out) {
  const auto c = resolve_config(o);
  const auto task = load_task(o.task_path, c);
  const auto config = c.configuration_for(task);
  const auto cov = taskspace_coverage(config, task);
  const auto dir = prepare_out(o);
  Json r{{"command", "validate"}, {"config", to_json(c)}, {"task", task_summary(o.task_path, task)}};
  r["configuration"] = to_json(config);
  r["coverage"] = to_json(cov);
  write_json(dir / "report.json", r);
  print_coverage(out, "", cov);
  return cov.full() ? kExitOk : kExitConstraintFailure;
}

OptimizationResult run_baseline(const RunConfig& c, const OptimizationConstraints& k) {
  return grid_search_standard(k, c.l_att_axis, c.l_entry_axis, c.standard.phase, c.optimizer.threads);
}

OptimizationResult run_optimizer(const RunConfig& c, const OptimizationConstraints& k,
                                 const OptimizationResult& baseline) {
  std::vector<std::vector<TendonLayout>> seeds;
  if (baseline.valid && c.tendon_count == 6) seeds.push_back(baseline.best_layout);
  return optimize_configuration(k, c.optimizer, seeds);
}

int cmd_baseline(const CommonOptions& o, std::ostream& out) {
  const auto c = resolve_config(o);
  const auto task = load_task(o.task_path, c);
  const auto k = c.constraints_for(task);
  const auto result = run_baseline(c, k);
  const auto dir = prepare_out(o);
  auto r = base_report("baseline", c, o, task, k.grid);
  r["baseline"] = to_json(result);
  if (result.valid) {
    const auto map = estimate_workspace(result.best_config, k.grid, k.workspace_wrenches, &task, c.optimizer.threads);
    write_cloud(dir / "workspace_standard.csv", map);
    write_json(dir / "workspace_standard.json", workspace_summary(map));
    out << "standard L_att " << result.standard_params->l_att << " mm, L_entry " << result.standard_params->l_entry
        << " mm\n";
    print_volume(out, "standard volume: ", result.volume_cm3);
  } else {
    out << result.status << '\n';
  }
  write_json(dir / "report.json", r);
  return result.valid ? kExitOk : kExitConstraintFailure;
}

int cmd_optimize(const CommonOptions& o, std::ostream& out) {
  const auto c = resolve_config(o);
  const auto task = load_task(o.task_path, c);
  const auto k = c.constraints_for(task);
  const auto baseline = run_baseline(c, k);
  const auto result = run_optimizer(c, k, baseline);
  const auto dir = prepare_out(o);
  auto r = base_report("optimize", c, o, task, k.grid);
  r["optimization"] = to_json(result);
  if (!result.best_config.entries.empty()) {
    const auto map = estimate_workspace(result.best_config, k.grid, k.workspace_wrenches, &task, c.optimizer.threads);
    write_cloud(dir / "workspace_optimized.csv", map);
    write_json(dir / "workspace_optimized.json", workspace_summary(map));
    write_json(dir / "best_config.json", to_json(result.best_config));
  }
  write_json(dir / "report.json", r);
  if (result.valid)
    print_volume(out, "optimized volume: ", result.volume_cm3);
  else
    out << result.status << '\n';
  return result.valid ? kExitOk : kExitConstraintFailure;
}

int cmd_compare(const CommonOptions& o, std::ostream& out) {
  const auto c = resolve_config(o);
  const auto task = load_task(o.task_path, c);
  const auto k = c.constraints_for(task);
  const auto baseline = run_baseline(c, k);
  const auto optimized = run_optimizer(c, k, baseline);
  const auto dir = prepare_out(o);
  auto r = base_report("compare", c, o, task, k.grid);
  r["baseline"] = to_json(baseline);
  r["optimization"] = to_json(optimized);
  if (baseline.best_config.entries.empty() || optimized.best_config.entries.empty()) {
    r["comparison"] = nullptr;
    write_json(dir / "report.json", r);
    out << "no admissible configuration to compare\n";
    return kExitConstraintFailure;
  }
  const auto cmp = compare_configurations(baseline.best_config, optimized.best_config, task, k.grid,
                                          k.workspace_wrenches, c.optimizer.threads);
  Json comparison = to_json(cmp);
  comparison.erase("grid");
  comparison["standard"] = comparison["a"];
  comparison["optimized"] = comparison["b"];
  comparison.erase("a");
  comparison.erase("b");
  comparison["volume_difference_cm3"] = cmp.volume_difference;
  r["comparison"] = comparison;
  write_cloud(dir / "workspace_standard.csv", cmp.map_a);
  write_cloud(dir / "workspace_optimized.csv", cmp.map_b);
  write_json(dir / "best_config.json", to_json(optimized.best_config));
  write_json(dir / "report.json", r);
  print_coverage(out, "standard  ", cmp.coverage_a);
  print_coverage(out, "optimized ", cmp.coverage_b);
  print_volume(out, "standard volume:  ", cmp.volume_a);
  print_volume(out, "optimized volume: ", cmp.volume_b);
  print_volume(out, "difference:       ", cmp.volume_difference);
  return cmp.coverage_a.full() && cmp.coverage_b.full() ? kExitOk : kExitConstraintFailure;
}

int cmd_volume(const CommonOptions& o, std::ostream& out) {
  const auto c = resolve_config(o);
  const TaskSpace task = o.task_path.empty() ? TaskSpace{} : load_task(o.task_path, c);
  const auto config = c.configuration_for(task);
  const auto grid = c.grid_for(task);
  const auto map = estimate_workspace(config, grid, c.workspace_wrenches, task.empty() ? nullptr : &task,
                                      c.optimizer.threads);
  const auto dir = prepare_out(o);
  auto r = base_report("volume", c, o, task, grid);
  r["configuration"] = to_json(config);
  r["workspace"] = workspace_summary(map);
  write_cloud(dir / "workspace_volume.csv", map);
  write_json(dir / "report.json", r);
  print_volume(out, "volume: ", map.volume_cm3());
  return kExitOk;
}

int cmd_synth(const SynthOptions& s, std::ostream& out) {
  SyntheticTaskSpec spec;
  spec.shape = s.shape == "line" ? TaskShape::line : s.shape == "lissajous" ? TaskShape::lissajous : TaskShape::arc;
  if (s.center.size() != 3) throw DomainError("--center needs three values");
  spec.center = Vec3(s.center[0], s.center[1], s.center[2]);
  spec.extent = s.extent;
  spec.n_poses = s.n_poses;
  spec.yaw = s.yaw;
  spec.pitch = s.pitch;
  spec.orientation_amplitude = s.orientation_amplitude;
  spec.jitter = s.jitter;
  spec.wrench = Wrench{Vec3(0.0, 0.0, s.force_z), Vec3::Zero()};
  spec.seed = s.seed;
  const auto rec = to_recording(synthesize_task(spec), s.rate_hz);
  std::ofstream f(s.output, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + s.output + "'");
  write_task_recording(f, rec);
  out << "wrote " << rec.samples.size() << " samples to " << s.output << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wrench-feasible workspace analysis and tendon layout optimisation", "tendonws"};
  app.require_subcommand(1);
  CommonOptions common;
  SynthOptions synth;

  auto* validate = app.add_subcommand("validate", "Check that a configuration covers every task pose");
  add_common(validate, common, true);
  auto* baseline = app.add_subcommand("baseline", "Grid-search the standard configuration over L_att and L_entry");
  add_common(baseline, common, true);
  auto* optimize = app.add_subcommand("optimize", "Evolutionary search for the largest covering layout");
  add_common(optimize, common, true);
  auto* compare = app.add_subcommand("compare", "Standard versus optimised configuration");
  add_common(compare, common, true);
  auto* volume = app.add_subcommand("volume", "Workspace volume of one configuration");
  add_common(volume, common, false);

  auto* syn = app.add_subcommand("synth", "Write a synthetic task recording CSV");
  syn->add_option("--output", synth.output, "CSV path")->required();
  syn->add_option("--shape", synth.shape)->check(CLI::IsMember({"line", "arc", "lissajous"}));
  syn->add_option("--center", synth.center, "x y z, mm")->expected(3);
  syn->add_option("--extent", synth.extent, "Bounding-box edge, mm");
  syn->add_option("--n-poses", synth.n_poses);
  syn->add_option("--yaw", synth.yaw, "rad");
  syn->add_option("--pitch", synth.pitch, "rad");
  syn->add_option("--orientation-amplitude", synth.orientation_amplitude, "rad");
  syn->add_option("--jitter", synth.jitter, "mm");
  syn->add_option("--force-z", synth.force_z, "Constant tip force along Z, N");
  syn->add_option("--rate-hz", synth.rate_hz);
  syn->add_option("--seed", synth.seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  try {
    if (validate->parsed()) return cmd_validate(common, out);
    if (baseline->parsed()) return cmd_baseline(common, out);
    if (optimize->parsed()) return cmd_optimize(common, out);
    if (compare->parsed()) return cmd_compare(common, out);
    if (volume->parsed()) return cmd_volume(common, out);
    if (syn->parsed()) return cmd_synth(synth, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ConstraintViolation& e) {
    err << "constraint violation: " << e.what() << '\n';
    return kExitConstraintFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace tdw
