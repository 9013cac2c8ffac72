#include "tdw/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "tdw/errors.hpp"

namespace tdw {

namespace {

double number(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw DomainError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

void read_number(const Json& j, const char* key, double& target) {
  if (j.contains(key)) target = number(j, key);
}

void read_int(const Json& j, const char* key, int& target) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) throw DomainError(std::string("field '") + key + "' must be an integer");
  target = j.at(key).get<int>();
}

std::optional<std::pair<double, double>> range_from_json(const Json& j) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "auto")) return std::nullopt;
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw DomainError("range must be [lo, hi] or \"auto\"");
  return std::pair{j[0].get<double>(), j[1].get<double>()};
}

Json range_to_json(const std::optional<std::pair<double, double>>& r) {
  if (!r) return "auto";
  return Json::array({r->first, r->second});
}

GridAxis axis_from_json(const Json& j, int steps) {
  const auto r = range_from_json(j);
  if (!r) throw DomainError("grid-search ranges cannot be \"auto\"");
  return {r->first, r->second, steps};
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw DomainError("'" + where + "' must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw DomainError("unknown key '" + item.key() + "' in " + where);
}

void check_range(const std::pair<double, double>& r, const char* what) {
  if (!std::isfinite(r.first) || !std::isfinite(r.second) || r.first > r.second)
    throw DomainError(std::string(what) + " must satisfy lo <= hi");
}

}  // namespace

void RunConfig::select_overtube(const std::string& preset) {
  if (preset == "straight")
    overtube = OvertubeSpec::straight();
  else if (preset == "single")
    overtube = OvertubeSpec::single_curved();
  else if (preset == "double")
    overtube = OvertubeSpec::double_curved();
  else
    throw DomainError("unknown overtube preset '" + preset + "'");
  overtube_preset = preset;
}

void RunConfig::validate() const {
  scaffold.validate();
  overtube.validate();
  if (!(t_min >= 0.0) || !(t_min < t_max) || !std::isfinite(t_max))
    throw DomainError("tension bounds must satisfy 0 <= t_min < t_max");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw DomainError("resolution must be positive");
  if (!(half_extent_x > 0.0)) throw DomainError("half_extent_x_mm must be positive");
  if (bounds) GridSpec{*bounds, resolution, orientation}.validate(scaffold);
  if (orientation.kind != OrientationPolicy::Kind::task_mean && orientation.orientations.empty())
    throw DomainError("orientation list is empty");
  if (workspace_wrenches.empty()) throw DomainError("workspace_wrenches must not be empty");
  if (optimizer.population < 2) throw DomainError("optimizer population must be at least 2");
  if (optimizer.iterations < 0) throw DomainError("optimizer iterations must be non-negative");
  if (tendon_count < dof_count(dof_mode) + 1 || tendon_count > kMaxTendons)
    throw DomainError("tendon_count must be in [dof + 1, " + std::to_string(kMaxTendons) + "]");
  if (symmetry == LayoutSymmetry::triangle_pairs && tendon_count != 6)
    throw DomainError("triangle_pairs symmetry needs six tendons");
  if (entry_axial_range) check_range(*entry_axial_range, "entry_axial_range_mm");
  if (attach_offset_range) check_range(*attach_offset_range, "attach_offset_range_mm");
  for (const auto* axis : {&l_att_axis, &l_entry_axis}) {
    check_range({axis->lo, axis->hi}, "standard grid range");
    if (axis->steps < 1) throw DomainError("standard grid steps must be >= 1");
  }
  if (downsample_hz < 0.0) throw DomainError("downsample_hz must be non-negative");
  if (trim) check_range(*trim, "trim_s");
  if (entries) {
    TendonConfiguration c;
    c.scaffold = scaffold;
    c.overtube = overtube;
    c.entries = *entries;
    c.attachments = attachments;
    c.t_min = t_min;
    c.t_max = t_max;
    c.dof_mode = dof_mode;
    c.validate();
  }
}

PreprocessOptions RunConfig::preprocess_options() const {
  PreprocessOptions p;
  p.downsample_hz = downsample_hz;
  p.trim = trim;
  p.default_wrench = default_wrench;
  p.dof_mode = dof_mode;
  return p;
}

GridSpec RunConfig::grid_for(const TaskSpace& task) const {
  GridSpec g;
  g.resolution = resolution;
  g.orientation = orientation;
  if (bounds) {
    g.bounds = *bounds;
    return g;
  }
  if (task.empty()) throw DomainError("grid bounds are derived from the task; give a task or explicit bounds");
  // Largest square cross-section on the resolution lattice that fits the scaffold.
  const double half = std::floor(scaffold.radius() / std::sqrt(2.0) / resolution) * resolution;
  g.bounds.min = Vec3(std::max(0.0, task.centroid.x() - half_extent_x), -half, -half);
  g.bounds.max = Vec3(std::min(scaffold.length, task.centroid.x() + half_extent_x), half, half);
  return g;
}

OptimizationConstraints RunConfig::constraints_for(const TaskSpace& task) const {
  OptimizationConstraints c;
  c.scaffold = scaffold;
  c.overtube = overtube;
  c.t_min = t_min;
  c.t_max = t_max;
  c.dof_mode = dof_mode;
  const auto axial = entry_axial_range.value_or(std::pair{0.0, scaffold.length});
  c.entry_axial_min = axial.first;
  c.entry_axial_max = axial.second;
  const auto offset = attach_offset_range.value_or(std::pair{0.0, overtube.total_length});
  c.attach_offset_min = offset.first;
  c.attach_offset_max = offset.second;
  c.tendon_count = tendon_count;
  c.symmetry = symmetry;
  c.task = task;
  c.grid = grid_for(task);
  c.workspace_wrenches = workspace_wrenches;
  c.validate();
  return c;
}

TendonConfiguration RunConfig::configuration_for(const TaskSpace& task) const {
  if (!entries) return standard_configuration(standard, constraints_for(task));
  TendonConfiguration c;
  c.scaffold = scaffold;
  c.overtube = overtube;
  c.entries = *entries;
  c.attachments = attachments;
  c.t_min = t_min;
  c.t_max = t_max;
  c.dof_mode = dof_mode;
  c.validate();
  return c;
}

RunConfig run_config_from_json(const Json& j) {
  check_keys(j,
             {"schema", "scaffold", "overtube", "dof_mode", "tension", "grid", "workspace_wrenches", "task",
              "optimizer", "standard", "tendons"},
             "config");
  if (!j.contains("schema") || !j.at("schema").is_string())
    throw DomainError(std::string("config needs \"schema\": \"") + kConfigSchema + "\"");
  if (j.at("schema").get<std::string>() != kConfigSchema)
    throw DomainError("unsupported config schema '" + j.at("schema").get<std::string>() + "'");

  RunConfig c;
  if (j.contains("scaffold")) {
    check_keys(j.at("scaffold"), {"diameter_mm", "length_mm"}, "scaffold");
    c.scaffold = scaffold_from_json(j.at("scaffold"));
  }
  if (j.contains("overtube")) {
    const auto& o = j.at("overtube");
    check_keys(o, {"preset", "total_length_mm", "segments", "front_ring_offset_mm", "attachment_ring_radius_mm"},
               "overtube");
    c.overtube = overtube_from_json(o);
    if (o.contains("segments"))
      c.overtube_preset = "custom";
    else if (o.contains("preset"))
      c.overtube_preset = o.at("preset").get<std::string>();
  }
  if (j.contains("dof_mode")) c.dof_mode = dof_mode_from_string(j.at("dof_mode").get<std::string>());
  if (j.contains("tension")) {
    check_keys(j.at("tension"), {"t_min_N", "t_max_N"}, "tension");
    read_number(j.at("tension"), "t_min_N", c.t_min);
    read_number(j.at("tension"), "t_max_N", c.t_max);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, {"resolution_mm", "bounds_mm", "half_extent_x_mm", "orientation"}, "grid");
    read_number(g, "resolution_mm", c.resolution);
    read_number(g, "half_extent_x_mm", c.half_extent_x);
    if (g.contains("bounds_mm") && !(g.at("bounds_mm").is_string() && g.at("bounds_mm") == "auto")) {
      const auto& b = g.at("bounds_mm");
      c.bounds = Box3{vec3_from_json(b.at("min")), vec3_from_json(b.at("max"))};
    }
    if (g.contains("orientation")) c.orientation = orientation_policy_from_json(g.at("orientation"));
  }
  if (j.contains("workspace_wrenches")) {
    c.workspace_wrenches.clear();
    for (const auto& w : j.at("workspace_wrenches")) c.workspace_wrenches.push_back(wrench_from_json(w));
  }
  if (j.contains("task")) {
    const auto& t = j.at("task");
    check_keys(t, {"offset_mm", "downsample_hz", "trim_s", "default_wrench"}, "task");
    if (t.contains("offset_mm")) c.task_offset = vec3_from_json(t.at("offset_mm"));
    read_number(t, "downsample_hz", c.downsample_hz);
    if (t.contains("trim_s")) c.trim = range_from_json(t.at("trim_s"));
    if (t.contains("default_wrench")) c.default_wrench = wrench_from_json(t.at("default_wrench"));
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    check_keys(o,
               {"population", "iterations", "seed", "symmetry", "tendon_count", "entry_axial_range_mm",
                "attach_offset_range_mm"},
               "optimizer");
    read_int(o, "population", c.optimizer.population);
    read_int(o, "iterations", c.optimizer.iterations);
    if (o.contains("seed")) {
      if (!o.at("seed").is_number_unsigned()) throw DomainError("optimizer seed must be a non-negative integer");
      c.optimizer.seed = o.at("seed").get<std::uint64_t>();
    }
    if (o.contains("symmetry")) c.symmetry = symmetry_from_string(o.at("symmetry").get<std::string>());
    read_int(o, "tendon_count", c.tendon_count);
    if (o.contains("entry_axial_range_mm")) c.entry_axial_range = range_from_json(o.at("entry_axial_range_mm"));
    if (o.contains("attach_offset_range_mm"))
      c.attach_offset_range = range_from_json(o.at("attach_offset_range_mm"));
  }
  if (j.contains("standard")) {
    const auto& s = j.at("standard");
    check_keys(s, {"l_att_mm", "l_entry_mm", "phase_rad", "l_att_range_mm", "l_entry_range_mm", "steps"},
               "standard");
    read_number(s, "l_att_mm", c.standard.l_att);
    read_number(s, "l_entry_mm", c.standard.l_entry);
    read_number(s, "phase_rad", c.standard.phase);
    int att_steps = c.l_att_axis.steps;
    int entry_steps = c.l_entry_axis.steps;
    if (s.contains("steps")) {
      const auto& st = s.at("steps");
      if (!st.is_array() || st.size() != 2 || !st[0].is_number_integer() || !st[1].is_number_integer())
        throw DomainError("standard.steps must be [n_att, n_entry]");
      att_steps = st[0].get<int>();
      entry_steps = st[1].get<int>();
    }
    if (s.contains("l_att_range_mm")) c.l_att_axis = axis_from_json(s.at("l_att_range_mm"), att_steps);
    if (s.contains("l_entry_range_mm")) c.l_entry_axis = axis_from_json(s.at("l_entry_range_mm"), entry_steps);
    c.l_att_axis.steps = att_steps;
    c.l_entry_axis.steps = entry_steps;
  }
  if (j.contains("tendons")) {
    TendonConfiguration tmp;
    tendons_from_json(j.at("tendons"), tmp);
    c.entries = tmp.entries;
    c.attachments = tmp.attachments;
  }
  return c;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DomainError("config file '" + path + "': " + e.what());
  }
  try {
    return run_config_from_json(j);
  } catch (const Json::exception& e) {
    throw DomainError("config file '" + path + "': " + e.what());
  }
}

Json to_json(const RunConfig& c) {
  Json overtube{{"preset", c.overtube_preset}};
  const Json spec = to_json(c.overtube);
  for (const auto& item : spec.items()) overtube[item.key()] = item.value();
  Json grid{{"resolution_mm", c.resolution},
            {"bounds_mm", c.bounds ? Json{{"min", to_json(c.bounds->min)}, {"max", to_json(c.bounds->max)}}
                                   : Json("auto")},
            {"half_extent_x_mm", c.half_extent_x},
            {"orientation", to_json(c.orientation)}};
  Json wrenches = Json::array();
  for (const auto& w : c.workspace_wrenches) wrenches.push_back(to_json(w));
  Json out{{"schema", kConfigSchema},
           {"scaffold", to_json(c.scaffold)},
           {"overtube", overtube},
           {"dof_mode", to_string(c.dof_mode)},
           {"tension", Json{{"t_min_N", c.t_min}, {"t_max_N", c.t_max}}},
           {"grid", grid},
           {"workspace_wrenches", wrenches},
           {"task", Json{{"offset_mm", to_json(c.task_offset)},
                         {"downsample_hz", c.downsample_hz},
                         {"trim_s", c.trim ? Json::array({c.trim->first, c.trim->second}) : Json(nullptr)},
                         {"default_wrench", to_json(c.default_wrench)}}},
           {"optimizer", Json{{"population", c.optimizer.population},
                              {"iterations", c.optimizer.iterations},
                              {"seed", c.optimizer.seed},
                              {"symmetry", to_string(c.symmetry)},
                              {"tendon_count", c.tendon_count},
                              {"entry_axial_range_mm", range_to_json(c.entry_axial_range)},
                              {"attach_offset_range_mm", range_to_json(c.attach_offset_range)}}},
           {"standard", Json{{"l_att_mm", c.standard.l_att},
                             {"l_entry_mm", c.standard.l_entry},
                             {"phase_rad", c.standard.phase},
                             {"l_att_range_mm", Json::array({c.l_att_axis.lo, c.l_att_axis.hi})},
                             {"l_entry_range_mm", Json::array({c.l_entry_axis.lo, c.l_entry_axis.hi})},
                             {"steps", Json::array({c.l_att_axis.steps, c.l_entry_axis.steps})}}}};
  if (c.entries) {
    TendonConfiguration tmp;
    tmp.entries = *c.entries;
    tmp.attachments = c.attachments;
    out["tendons"] = tendons_to_json(tmp);
  }
  return out;
}

TaskSpace load_task(const std::string& path, const RunConfig& c) {
  const auto task = preprocess(load_task_recording_file(path), c.preprocess_options());
  if (task.empty()) throw DomainError("task '" + path + "' has no poses after preprocessing");
  return c.task_offset.isZero(0.0) ? task : task.translated(c.task_offset);
}

}  // namespace tdw
