#pragma once

#include <optional>
#include <vector>

#include "geoflow/flow.hpp"
#include "geoflow/model.hpp"

namespace geoflow {

struct RiccatiConfig {
  double T_conv = 30.0;
  double tol = 1e-8;
  double h = kDefaultFlowStep;
  double seed_cap = 10.0;  // upper Riccati seed, Lambda_cap
};

inline constexpr double kBlowupThreshold = 1e6;

struct RiccatiState {
  double U = 0.0;
  bool valid = true;
  std::optional<double> blowup_time;
};

struct JacobiState {
  double J = 0.0;
  double Jp = 0.0;
};

struct HyperbolicityIndex {
  double lambda = 0.0;
  double lambda_T = 0.0;
  double T = 0.0;
};

/// Curvature K(f_t v) as a function of orbit time t. Fuchsian and synthetic
/// models evaluate it in closed form; conformal models sample the flow on a
/// half-step grid so that every RK4 stage lands on a sample.
class CurvatureTrack {
 public:
  static CurvatureTrack along(const MetricModel& model, const UnitTangent& v, double t_begin,
                              double t_end, double h = kDefaultFlowStep);
  /// A loop of period `period` sampled uniformly (first sample at time 0, the
  /// sample at `period` omitted).
  static CurvatureTrack periodic(std::vector<double> samples, double period);

  double operator()(double t) const;
  bool exact_nodes() const { return sampled_; }
  /// Largest step an adaptive integrator may take from time t.
  double max_step(double t) const;
  double node_spacing() const { return spacing_; }
  double begin() const { return begin_; }
  double end() const { return end_; }

 private:
  enum class Source { constant, synthetic, samples, loop };
  Source source_ = Source::constant;
  bool sampled_ = false;
  double constant_ = -1.0;
  const MetricModel* model_ = nullptr;
  UnitTangent base_;
  double begin_ = 0.0, end_ = 0.0, spacing_ = 0.0, period_ = 0.0;
  std::vector<double> values_;
};

/// J'' = -K J along the orbit of v, RK4 with step h. Negative t runs backwards.
JacobiState jacobi_integrate(const MetricModel& model, const UnitTangent& v, double t, double J0,
                             double Jp0, double h = kDefaultFlowStep);
JacobiState jacobi_integrate(const CurvatureTrack& K, double t0, double t1, double J0, double Jp0,
                             double h = kDefaultFlowStep);

/// U' = -U^2 - K(f_t v) on [t0, t1]; |U| > 1e6 stops the run with the
/// blowup time located to 1e-6.
RiccatiState riccati_integrate(const MetricModel& model, const UnitTangent& v, double t0, double t1,
                               double U0, double h = kDefaultFlowStep);
RiccatiState riccati_integrate(const CurvatureTrack& K, double t0, double t1, double U0,
                               double h = kDefaultFlowStep);
/// Values of the same run at t0, t0 + step, ..., t1 (step a multiple of h).
std::vector<double> riccati_trajectory(const CurvatureTrack& K, double t0, double t1, double U0,
                                       double step, double h = kDefaultFlowStep);

double unstable_curvature(const MetricModel& model, const UnitTangent& v,
                          const RiccatiConfig& cfg = {});
double stable_curvature(const MetricModel& model, const UnitTangent& v,
                        const RiccatiConfig& cfg = {});
double lambda(const MetricModel& model, const UnitTangent& v, const RiccatiConfig& cfg = {});
double lambda_T(const MetricModel& model, const UnitTangent& v, double T,
                const RiccatiConfig& cfg = {});
HyperbolicityIndex hyperbolicity_index(const MetricModel& model, const UnitTangent& v, double T,
                                       const RiccatiConfig& cfg = {});
/// -k_u (1 - K) / (1 + k_u^2)
double geometric_potential(const MetricModel& model, const UnitTangent& v,
                           const RiccatiConfig& cfg = {});
double geometric_potential_from(double ku, double K);

/// A vector displaced from v by `offset` (signed, to the left of v) along its
/// stable horocycle, to first order in the offset for non-constant curvature:
/// the footpoint moves along the normal geodesic and the direction turns by
/// -k^s * offset relative to parallel transport. On fuchsian models the exact
/// hyperbolic horocycle is used.
UnitTangent stable_perturbation(const MetricModel& model, const UnitTangent& v, double offset,
                                const RiccatiConfig& cfg = {});
/// Same along the unstable horocycle.
UnitTangent unstable_perturbation(const MetricModel& model, const UnitTangent& v, double offset,
                                  const RiccatiConfig& cfg = {});

/// Trapezoid integrals of the sampled function f over the windows
/// [i - m, i + m] for every i with a complete window (m <= i < n - m).
std::vector<double> sliding_window_integral(const std::vector<double>& f, double step,
                                            std::size_t m);
/// Composite trapezoid rule on a uniform grid.
double trapezoid(const std::vector<double>& f, double step);

/// k^u, k^s and K on the grid t0, t0 + step, ..., t1 of the orbit of v,
/// computed from one forward and one backward Riccati sweep per seed.
struct HyperbolicityProfile {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<double> ku, ks, K;
  double max_spread = 0.0;

  std::size_t size() const { return ku.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * step; }
  double lambda(std::size_t i) const;
  /// Trapezoid integral of lambda over [time(i) - T, time(i) + T]; T is
  /// rounded to a multiple of step and the window must fit the grid.
  double lambda_T(std::size_t i, double T) const;
  /// lambda_T at every grid point whose window fits, as (first index, values).
  std::pair<std::size_t, std::vector<double>> lambda_T_series(double T) const;
};

HyperbolicityProfile hyperbolicity_profile(const MetricModel& model, const UnitTangent& v,
                                           double t0, double t1, double step,
                                           const RiccatiConfig& cfg = {});
HyperbolicityProfile hyperbolicity_profile(const CurvatureTrack& K, double t0, double t1,
                                           double step, const RiccatiConfig& cfg = {});

}  // namespace geoflow
