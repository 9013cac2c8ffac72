#pragma once

// The bundled demo scenario: an arc task in a 70 mm scaffold with a straight
// overtube and the default standard configuration.

#include "tdw/optimizer.hpp"
#include "tdw/run_config.hpp"
#include "tdw/task_data.hpp"

namespace tdw::testing {

inline SyntheticTaskSpec demo_task_spec() {
  SyntheticTaskSpec spec;
  spec.shape = TaskShape::arc;
  spec.center = Vec3(95.0, 0.0, 0.0);
  spec.extent = 30.0;
  spec.n_poses = 30;
  spec.orientation_amplitude = 0.05;
  spec.jitter = 0.5;
  return spec;
}

inline TaskSpace demo_task() { return synthesize_task(demo_task_spec()); }

inline OptimizationConstraints demo_constraints(double resolution = 2.0, const TaskSpace& task = demo_task()) {
  RunConfig rc;
  rc.resolution = resolution;
  return rc.constraints_for(task);
}

inline TendonConfiguration demo_standard(const OptimizationConstraints& c) {
  return standard_configuration(StandardConfigParams{}, c);
}

}  // namespace tdw::testing
