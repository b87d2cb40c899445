#pragma once

#include "geoflow/periodic.hpp"

namespace geoflow::detail {

struct RefinedLoop {
  Complex z;       // start point in the chart (near the octagon)
  double angle;    // start direction
  double length;   // period of the closed orbit
  RefinementReport report;
};

/// Closed geodesic of a conformal model freely homotopic to the axis of the
/// hyperbolic deck element g (given in the model chart).
RefinedLoop refine_conformal(const MetricModel& model, const Mobius& g, double node_spacing);

}  // namespace geoflow::detail
