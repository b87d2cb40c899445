#pragma once

#include <optional>
#include <vector>

#include "geoflow/model.hpp"

namespace geoflow {

inline constexpr double kDefaultFlowStep = 1e-3;

struct FlowSample {
  UnitTangent v;
  double K = 0.0;
  std::optional<double> ku;  // filled on demand by the Riccati layer
  std::optional<double> ks;
};

/// A finite orbit segment (v, t) sampled every `step` units of flow time.
struct OrbitSegment {
  UnitTangent initial;
  double duration = 0.0;
  double step = kDefaultFlowStep;
  std::vector<FlowSample> samples;  // floor(|t|/h) + 1 entries, samples[0] = initial
  UnitTangent end;                  // f_t(initial), exact duration
};

/// Geodesic flow with 4th-order Runge-Kutta in the disk chart; chart models
/// are wrapped through the octagon after every step. Negative t flows
/// backwards. Synthetic models translate orbit time.
OrbitSegment flow(const MetricModel& model, const UnitTangent& v, double t,
                  double h = kDefaultFlowStep);
UnitTangent flow_endpoint(const MetricModel& model, const UnitTangent& v, double t,
                          double h = kDefaultFlowStep);

/// State in the universal cover; never wrapped.
struct CoverState {
  Complex z;
  double angle;
};

CoverState cover_step(const MetricModel& model, const CoverState& s, double h);
/// Integrates in the universal cover, returning the states at every
/// `stride`-th step (and always the final state). The final step is shortened
/// so the run ends exactly at t.
std::vector<CoverState> flow_cover(const MetricModel& model, const CoverState& start, double t,
                                   double h = kDefaultFlowStep, int stride = 1);

/// Speed of the geodesic vector field in the metric, minus one.
double unit_speed_defect(const MetricModel& model, const CoverState& s);

}  // namespace geoflow
