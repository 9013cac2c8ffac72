#include "tdw/serialization.hpp"

#include "tdw/errors.hpp"

namespace tdw {

namespace {

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw DomainError(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

}  // namespace

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw DomainError("expected a 3-element array");
  for (const auto& e : j)
    if (!e.is_number()) throw DomainError("expected numbers in a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const Wrench& w) { return Json{{"force_N", to_json(w.force)}, {"moment_Nmm", to_json(w.moment)}}; }

Wrench wrench_from_json(const Json& j) {
  Wrench w;
  if (j.is_array()) {
    if (j.size() != 6) throw DomainError("wrench array needs six components");
    for (int k = 0; k < 3; ++k) {
      w.force[k] = j.at(k).get<double>();
      w.moment[k] = j.at(k + 3).get<double>();
    }
    return w;
  }
  if (j.contains("force_N")) w.force = vec3_from_json(j.at("force_N"));
  if (j.contains("moment_Nmm")) w.moment = vec3_from_json(j.at("moment_Nmm"));
  return w;
}

Json to_json(const ScaffoldCylinder& s) { return Json{{"diameter_mm", s.diameter}, {"length_mm", s.length}}; }

ScaffoldCylinder scaffold_from_json(const Json& j) {
  ScaffoldCylinder s;
  s.diameter = number_or(j, "diameter_mm", s.diameter);
  s.length = number_or(j, "length_mm", s.length);
  return s;
}

Json to_json(const OvertubeSpec& s) {
  Json segs = Json::array();
  for (const auto& seg : s.segments)
    segs.push_back(Json{{"length_mm", seg.length}, {"bend_angle_rad", seg.bend_angle},
                        {"bend_plane_angle_rad", seg.bend_plane_angle}});
  return Json{{"total_length_mm", s.total_length},
              {"segments", segs},
              {"front_ring_offset_mm", s.front_ring_offset},
              {"attachment_ring_radius_mm", s.attachment_ring_radius}};
}

OvertubeSpec overtube_from_json(const Json& j) {
  OvertubeSpec s;
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset == "straight")
      s = OvertubeSpec::straight();
    else if (preset == "single")
      s = OvertubeSpec::single_curved();
    else if (preset == "double")
      s = OvertubeSpec::double_curved();
    else
      throw DomainError("unknown overtube preset '" + preset + "'");
  }
  if (j.contains("segments")) {
    s.segments.clear();
    for (const auto& seg : j.at("segments"))
      s.segments.push_back({number(seg, "length_mm"), number_or(seg, "bend_angle_rad", 0.0),
                            number_or(seg, "bend_plane_angle_rad", 0.0)});
    double sum = 0.0;
    for (const auto& seg : s.segments) sum += seg.length;
    s.total_length = number_or(j, "total_length_mm", sum);
  }
  s.front_ring_offset = number_or(j, "front_ring_offset_mm", s.front_ring_offset);
  s.attachment_ring_radius = number_or(j, "attachment_ring_radius_mm", s.attachment_ring_radius);
  return s;
}

const char* to_string(DofMode mode) { return mode == DofMode::five_dof ? "five_dof" : "six_dof"; }

DofMode dof_mode_from_string(const std::string& s) {
  if (s == "five_dof") return DofMode::five_dof;
  if (s == "six_dof") return DofMode::six_dof;
  throw DomainError("unknown dof_mode '" + s + "'");
}

const char* to_string(LayoutSymmetry s) { return s == LayoutSymmetry::none ? "none" : "triangle_pairs"; }

LayoutSymmetry symmetry_from_string(const std::string& s) {
  if (s == "none") return LayoutSymmetry::none;
  if (s == "triangle_pairs") return LayoutSymmetry::triangle_pairs;
  throw DomainError("unknown symmetry '" + s + "'");
}

Json tendons_to_json(const TendonConfiguration& c) {
  Json tendons = Json::array();
  for (std::size_t i = 0; i < c.entries.size(); ++i)
    tendons.push_back(Json{{"entry", Json{{"angle_rad", c.entries[i].angle}, {"axial_mm", c.entries[i].axial}}},
                           {"attachment_mm", to_json(c.attachments[i].local)}});
  return tendons;
}

void tendons_from_json(const Json& j, TendonConfiguration& c) {
  if (!j.is_array()) throw DomainError("'tendons' must be an array");
  c.entries.clear();
  c.attachments.clear();
  for (const auto& t : j) {
    c.entries.push_back({number(t.at("entry"), "angle_rad"), number(t.at("entry"), "axial_mm")});
    c.attachments.push_back({vec3_from_json(t.at("attachment_mm"))});
  }
}

Json to_json(const TendonConfiguration& c) {
  return Json{{"schema", kConfigSchema},
              {"scaffold", to_json(c.scaffold)},
              {"overtube", to_json(c.overtube)},
              {"dof_mode", to_string(c.dof_mode)},
              {"tension", Json{{"t_min_N", c.t_min}, {"t_max_N", c.t_max}}},
              {"tendons", tendons_to_json(c)}};
}

TendonConfiguration tendon_configuration_from_json(const Json& j) {
  TendonConfiguration c;
  if (j.contains("scaffold")) c.scaffold = scaffold_from_json(j.at("scaffold"));
  if (j.contains("overtube")) c.overtube = overtube_from_json(j.at("overtube"));
  if (j.contains("dof_mode")) c.dof_mode = dof_mode_from_string(j.at("dof_mode").get<std::string>());
  if (j.contains("tension")) {
    c.t_min = number_or(j.at("tension"), "t_min_N", c.t_min);
    c.t_max = number_or(j.at("tension"), "t_max_N", c.t_max);
  }
  if (!j.contains("tendons")) throw DomainError("configuration has no 'tendons' block");
  tendons_from_json(j.at("tendons"), c);
  c.validate();
  return c;
}

Json to_json(const OrientationPolicy& p) {
  auto one = [](const Orientation& o) { return Json{{"yaw_rad", o.yaw}, {"pitch_rad", o.pitch}}; };
  switch (p.kind) {
    case OrientationPolicy::Kind::task_mean:
      return "task_mean";
    case OrientationPolicy::Kind::fixed:
      return one(p.orientations.at(0));
    case OrientationPolicy::Kind::per_voxel_list: {
      Json list = Json::array();
      for (const auto& o : p.orientations) list.push_back(one(o));
      return list;
    }
  }
  return nullptr;
}

OrientationPolicy orientation_policy_from_json(const Json& j) {
  auto one = [](const Json& o) { return Orientation{number(o, "yaw_rad"), number(o, "pitch_rad")}; };
  if (j.is_string()) {
    if (j.get<std::string>() != "task_mean") throw DomainError("unknown orientation policy");
    return OrientationPolicy::task_mean();
  }
  if (j.is_object()) {
    const auto o = one(j);
    return OrientationPolicy::fixed(o.yaw, o.pitch);
  }
  if (j.is_array()) {
    std::vector<Orientation> list;
    for (const auto& o : j) list.push_back(one(o));
    return OrientationPolicy::list(std::move(list));
  }
  throw DomainError("orientation must be \"task_mean\", an object or a list");
}

Json to_json(const GridSpec& g) {
  const auto d = g.dims();
  return Json{{"bounds_mm", Json{{"min", to_json(g.bounds.min)}, {"max", to_json(g.bounds.max)}}},
              {"resolution_mm", g.resolution},
              {"dims", Json::array({d[0], d[1], d[2]})},
              {"orientation", to_json(g.orientation)}};
}

Json to_json(const CoverageReport& r) {
  Json failures = Json::array();
  for (const auto& f : r.failures)
    failures.push_back(Json{{"pose_index", f.index}, {"reason", to_string(f.reason)}, {"margin_N", f.margin},
                            {"wrench", to_json(f.wrench)}});
  return Json{{"total_poses", r.total_poses},
              {"feasible_poses", r.feasible_poses},
              {"full_coverage", r.full()},
              {"coverage_fraction", r.fraction()},
              {"failures", failures},
              {"margins_N", r.margins}};
}

Json workspace_summary(const WorkspaceMap& map) {
  Json orientations = Json::array();
  for (const auto& o : map.orientations) orientations.push_back(Json{{"yaw_rad", o.yaw}, {"pitch_rad", o.pitch}});
  Json wrenches = Json::array();
  for (const auto& w : map.wrench_set) wrenches.push_back(to_json(w));
  return Json{{"volume_cm3", map.volume_cm3()},
              {"grid", to_json(map.grid)},
              {"counts", Json{{"voxels", map.feasible.size()}, {"feasible", map.feasible_count()}}},
              {"orientations", orientations},
              {"wrench_set", wrenches}};
}

Json to_json(const OptimizationResult& r) {
  Json history = Json::array();
  for (const auto& h : r.history) history.push_back(Json{{"iteration", h.iteration}, {"best_objective", h.best_objective}});
  Json out{{"valid", r.valid},
           {"status", r.status},
           {"volume_cm3", r.volume_cm3},
           {"best_coverage_fraction", r.best_coverage_fraction},
           {"seed", r.seed},
           {"evaluations", r.evaluations},
           {"coverage", to_json(r.coverage)}};
  if (r.standard_params) {
    out["standard_params"] = Json{{"l_att_mm", r.standard_params->l_att},
                                  {"l_entry_mm", r.standard_params->l_entry},
                                  {"phase_rad", r.standard_params->phase}};
  }
  if (!r.grid.empty()) {
    Json grid = Json::array();
    for (const auto& g : r.grid) {
      Json row{{"l_att_mm", g.params.l_att}, {"l_entry_mm", g.params.l_entry}, {"admissible", g.admissible}};
      if (g.admissible) {
        row["coverage_fraction"] = g.evaluation.coverage.fraction();
        row["volume_cm3"] = g.evaluation.coverage.full() ? Json(g.evaluation.volume_cm3) : Json(nullptr);
      }
      grid.push_back(row);
    }
    out["grid"] = grid;
  }
  out["history"] = history;
  if (!r.best_config.entries.empty()) out["best_config"] = to_json(r.best_config);
  return out;
}

Json to_json(const ComparisonReport& r) {
  auto side = [](const WorkspaceMap& map, const CoverageReport& cov) {
    return Json{{"volume_cm3", map.volume_cm3()},
                {"feasible_voxels", map.feasible_count()},
                {"coverage", to_json(cov)}};
  };
  return Json{{"a", side(r.map_a, r.coverage_a)},
              {"b", side(r.map_b, r.coverage_b)},
              {"volume_difference_cm3", r.volume_difference},
              {"grid", to_json(r.map_a.grid)}};
}

}  // namespace tdw
