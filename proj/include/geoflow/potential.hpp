#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoflow/model.hpp"
#include "geoflow/riccati.hpp"

namespace geoflow {

/// height * exp(-(d(footpoint, center) / width)^2), d the surface distance.
struct FootpointBump {
  Complex center{0.0, 0.0};
  double width = 0.5;
  double height = 1.0;
};

/// Data available at one orbit sample when evaluating a potential.
struct PotentialSample {
  UnitTangent v;
  double K = -1.0;
  double ku = 1.0;
};

/// phi = constant + unstable_weight * phi^u + sum of footpoint bumps + extra.
/// The id names the potential in orbit caches and output tables.
struct Potential {
  std::string id = "zero";
  double constant = 0.0;
  double unstable_weight = 0.0;
  std::vector<FootpointBump> bumps;
  std::function<double(const MetricModel&, const UnitTangent&)> extra;

  static Potential zero() { return {}; }
  static Potential constant_value(double c);
  /// q * phi^u
  static Potential geometric(double q);

  bool needs_unstable_curvature() const { return unstable_weight != 0.0; }
  double at(const MetricModel& model, const PotentialSample& s) const;
  double at(const MetricModel& model, const UnitTangent& v, const RiccatiConfig& cfg = {}) const;
  /// The same potential plus c, with a derived id.
  Potential shifted(double c) const;
};

/// Phi(v, t): trapezoid quadrature of phi along f_tau v, tau in [0, t]. The
/// step is shrunk so that it divides t.
double potential_integral(const MetricModel& model, const Potential& phi, const UnitTangent& v,
                          double t, double h = kDefaultFlowStep, const RiccatiConfig& cfg = {});

/// Values of phi at t0, t0 + step, ... along the orbit of v (step divides
/// t1 - t0 after shrinking).
std::vector<double> potential_samples(const MetricModel& model, const Potential& phi,
                                      const UnitTangent& v, double t0, double t1, double& step,
                                      const RiccatiConfig& cfg = {});

}  // namespace geoflow
