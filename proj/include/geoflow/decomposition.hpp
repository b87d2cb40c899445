#pragma once

#include <utility>
#include <vector>

#include "geoflow/model.hpp"
#include "geoflow/riccati.hpp"

namespace geoflow {

struct DecompositionParams {
  double T = 1.0;
  double eta = 1.0;
  double h = 1e-2;
  /// Require the good inequalities with slack eta * h * lambda_max.
  bool safety_margin = false;
};

struct SegmentSplit {
  double p = 0.0;
  double g = 0.0;
  double s = 0.0;
};

/// lambda_T(f_{jh} v) for j = 0..N on the decomposition grid of [0, t], with
/// its running trapezoid integral. Every predicate below reads from this.
class LambdaSeries {
 public:
  LambdaSeries(const MetricModel& model, const UnitTangent& v, double t,
               const DecompositionParams& params, const RiccatiConfig& cfg = {});

  std::size_t steps() const { return values_.size() - 1; }
  double h() const { return h_; }
  double value(std::size_t j) const { return values_[j]; }
  /// Integral of lambda_T(f_theta v) over theta in [h i, h j].
  double integral(std::size_t i, std::size_t j) const { return cumulative_[j] - cumulative_[i]; }
  double lambda_max() const { return lambda_max_; }

  /// (f_{ih} v, (j-i)h) is bad: integral < (j-i) h eta. Empty segments are not bad.
  bool bad(std::size_t i, std::size_t j) const;
  /// Both defining inequalities of a good segment at every grid time.
  bool good(std::size_t i, std::size_t j) const { return good(i, j, params_.safety_margin); }
  bool good(std::size_t i, std::size_t j, bool with_margin) const;

 private:
  DecompositionParams params_;
  double h_ = 0.0;
  double lambda_max_ = 0.0;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

bool reg_T_member(const MetricModel& model, const UnitTangent& v, const DecompositionParams& params,
                  const RiccatiConfig& cfg = {});
bool is_good(const MetricModel& model, const UnitTangent& v, double t,
             const DecompositionParams& params, const RiccatiConfig& cfg = {});
bool is_bad(const MetricModel& model, const UnitTangent& v, double t,
            const DecompositionParams& params, const RiccatiConfig& cfg = {});

SegmentSplit decompose(const LambdaSeries& series);
SegmentSplit decompose(const MetricModel& model, const UnitTangent& v, double t,
                       const DecompositionParams& params, const RiccatiConfig& cfg = {});

/// (tau, d_K(f_tau v, f_tau w)) for tau = 0, h, ..., t.
std::vector<std::pair<double, double>> separation_profile(const MetricModel& model,
                                                          const UnitTangent& v,
                                                          const UnitTangent& w, double t,
                                                          double h = 1e-2);

/// Least-squares slope of log(distance) against tau, skipping zero distances.
double fitted_rate(const std::vector<std::pair<double, double>>& profile);

}  // namespace geoflow
