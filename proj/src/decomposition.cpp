#include "geoflow/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"

namespace geoflow {

LambdaSeries::LambdaSeries(const MetricModel& model, const UnitTangent& v, double t,
                           const DecompositionParams& params, const RiccatiConfig& cfg)
    : params_(params) {
  if (!(params.T > 0.0) || !(params.eta > 0.0) || !(params.h > 0.0))
    throw Error(ErrorCode::InvalidArgument, "decomposition needs T, eta, h > 0");
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "segment duration must be >= 0");
  const long n = t > 0.0 ? static_cast<long>(std::ceil(t / params.h - 1e-9)) : 0;
  h_ = n > 0 ? t / static_cast<double>(n) : params.h;
  // Fine Riccati grid that divides the decomposition step.
  const long k = std::max(1L, std::lround(h_ / cfg.h));
  RiccatiConfig fine = cfg;
  fine.h = h_ / static_cast<double>(k);
  const auto profile = hyperbolicity_profile(model, v, -params.T, t + params.T, fine.h, fine);
  const auto [first, series] = profile.lambda_T_series(params.T);
  values_.resize(static_cast<std::size_t>(n) + 1);
  for (long j = 0; j <= n; ++j) values_[j] = series.at(static_cast<std::size_t>(j * k));
  for (std::size_t i = 0; i < profile.size(); ++i)
    lambda_max_ = std::max(lambda_max_, profile.lambda(i));
  cumulative_.assign(values_.size(), 0.0);
  for (std::size_t j = 1; j < values_.size(); ++j)
    cumulative_[j] = cumulative_[j - 1] + 0.5 * h_ * (values_[j - 1] + values_[j]);
}

bool LambdaSeries::bad(std::size_t i, std::size_t j) const {
  if (j <= i) return false;
  return integral(i, j) < static_cast<double>(j - i) * h_ * params_.eta;
}

bool LambdaSeries::good(std::size_t i, std::size_t j, bool with_margin) const {
  const double slack = with_margin ? params_.eta * h_ * lambda_max_ : 0.0;
  for (std::size_t k = 1; i + k <= j; ++k) {
    const double need = static_cast<double>(k) * h_ * params_.eta + slack;
    if (integral(i, i + k) < need) return false;
    if (integral(j - k, j) < need) return false;
  }
  return true;
}

bool reg_T_member(const MetricModel& model, const UnitTangent& v, const DecompositionParams& params,
                  const RiccatiConfig& cfg) {
  return lambda_T(model, v, params.T, cfg) >= params.eta;
}

bool is_good(const MetricModel& model, const UnitTangent& v, double t,
             const DecompositionParams& params, const RiccatiConfig& cfg) {
  if (t == 0.0) return true;
  const LambdaSeries series(model, v, t, params, cfg);
  return series.good(0, series.steps());
}

bool is_bad(const MetricModel& model, const UnitTangent& v, double t,
            const DecompositionParams& params, const RiccatiConfig& cfg) {
  if (t == 0.0) return false;
  const LambdaSeries series(model, v, t, params, cfg);
  return series.bad(0, series.steps());
}

SegmentSplit decompose(const LambdaSeries& series) {
  const std::size_t n = series.steps();
  std::size_t p = 0;
  for (std::size_t j = n; j >= 1; --j) {
    if (series.bad(0, j)) {
      p = j;
      break;
    }
  }
  std::size_t s = 0;
  for (std::size_t j = n - p; j >= 1; --j) {
    if (series.bad(n - j, n)) {
      s = j;
      break;
    }
  }
  const std::size_t g = n - p - s;
  if (!(p == 0 || series.bad(0, p)) || !series.good(p, p + g, false) ||
      !(s == 0 || series.bad(n - s, n)))
    throw std::logic_error("decompose: split violates its membership postconditions");
  const double h = series.h();
  return {static_cast<double>(p) * h, static_cast<double>(g) * h, static_cast<double>(s) * h};
}

SegmentSplit decompose(const MetricModel& model, const UnitTangent& v, double t,
                       const DecompositionParams& params, const RiccatiConfig& cfg) {
  if (t == 0.0) return {};
  return decompose(LambdaSeries(model, v, t, params, cfg));
}

std::vector<std::pair<double, double>> separation_profile(const MetricModel& model,
                                                          const UnitTangent& v,
                                                          const UnitTangent& w, double t,
                                                          double h) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "separation_profile on a synthetic model");
  if (!(h > 0.0) || t < 0.0) throw Error(ErrorCode::InvalidArgument, "bad separation grid");
  const long n = static_cast<long>(std::floor(t / h + 1e-9));
  const long k = std::max(1L, std::lround(h / kDefaultFlowStep));
  const double fine = h / static_cast<double>(k);
  // Footpoint distance on the fine grid over [0, t + 1]; d_K at tau is its
  // maximum over [tau, tau + 1].
  const double span = static_cast<double>(n) * h + 1.0;
  const auto a = flow(model, v, span, fine);
  const auto b = flow(model, w, span, fine);
  const std::size_t m = std::min(a.samples.size(), b.samples.size());
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i)
    d[i] = model.surface_distance(a.samples[i].v.z, b.samples[i].v.z);
  const auto window = static_cast<std::size_t>(std::lround(1.0 / fine));
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (long j = 0; j <= n; ++j) {
    const auto lo = static_cast<std::size_t>(j * k);
    const std::size_t hi = std::min(m - 1, lo + window);
    out.emplace_back(static_cast<double>(j) * h,
                     *std::max_element(d.begin() + static_cast<long>(lo),
                                       d.begin() + static_cast<long>(hi) + 1));
  }
  return out;
}

double fitted_rate(const std::vector<std::pair<double, double>>& profile) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& [tau, d] : profile) {
    if (!(d > 0.0)) continue;
    const double y = std::log(d);
    sx += tau, sy += y, sxx += tau * tau, sxy += tau * y, n += 1;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

}  // namespace geoflow
