#include "geoflow/potential.hpp"

#include <cmath>
#include <sstream>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"

namespace geoflow {

Potential Potential::constant_value(double c) {
  Potential p;
  std::ostringstream id;
  id << "const(" << c << ")";
  p.id = id.str();
  p.constant = c;
  return p;
}

Potential Potential::geometric(double q) {
  Potential p;
  std::ostringstream id;
  id << q << "*phi_u";
  p.id = id.str();
  p.unstable_weight = q;
  return p;
}

Potential Potential::shifted(double c) const {
  Potential p = *this;
  std::ostringstream id;
  id << this->id << "+" << c;
  p.id = id.str();
  p.constant += c;
  return p;
}

double Potential::at(const MetricModel& model, const PotentialSample& s) const {
  double value = constant;
  if (unstable_weight != 0.0) value += unstable_weight * geometric_potential_from(s.ku, s.K);
  if (!bumps.empty()) {
    if (model.kind() == ModelKind::synthetic)
      throw Error(ErrorCode::Unsupported, "footpoint bumps on a synthetic model");
    for (const auto& b : bumps) {
      const double d = model.surface_distance(s.v.z, b.center) / b.width;
      value += b.height * std::exp(-d * d);
    }
  }
  if (extra) value += extra(model, s.v);
  return value;
}

double Potential::at(const MetricModel& model, const UnitTangent& v,
                     const RiccatiConfig& cfg) const {
  PotentialSample s{v, model.curvature(v), 0.0};
  if (needs_unstable_curvature()) s.ku = unstable_curvature(model, v, cfg);
  return at(model, s);
}

std::vector<double> potential_samples(const MetricModel& model, const Potential& phi,
                                      const UnitTangent& v, double t0, double t1, double& step,
                                      const RiccatiConfig& cfg) {
  if (t1 < t0) throw Error(ErrorCode::InvalidArgument, "potential_samples needs t0 <= t1");
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  const double span = t1 - t0;
  const long n = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-9)));
  step = span > 0.0 ? span / static_cast<double>(n) : step;
  const UnitTangent start = t0 == 0.0 ? v : flow_endpoint(model, v, t0, step);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 1);

  const bool constant_only = !phi.needs_unstable_curvature() && phi.bumps.empty() && !phi.extra;
  if (constant_only) {
    out.assign(span > 0.0 ? static_cast<std::size_t>(n) + 1 : 1, phi.constant);
    return out;
  }
  const OrbitSegment seg = flow(model, start, span, step);
  std::vector<double> ku(seg.samples.size(), 0.0);
  if (phi.needs_unstable_curvature()) {
    RiccatiConfig local = cfg;
    local.h = step;
    const auto profile = hyperbolicity_profile(model, start, 0.0, span, step, local);
    for (std::size_t i = 0; i < ku.size() && i < profile.size(); ++i) ku[i] = profile.ku[i];
  }
  for (std::size_t i = 0; i < seg.samples.size(); ++i)
    out.push_back(phi.at(model, {seg.samples[i].v, seg.samples[i].K, ku[i]}));
  if (span == 0.0) out.resize(1);
  return out;
}

double potential_integral(const MetricModel& model, const Potential& phi, const UnitTangent& v,
                          double t, double h, const RiccatiConfig& cfg) {
  if (t == 0.0) return 0.0;
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "potential_integral needs t >= 0");
  double step = h;
  const auto values = potential_samples(model, phi, v, 0.0, t, step, cfg);
  return trapezoid(values, step);
}

}  // namespace geoflow
