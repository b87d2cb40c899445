#include "geoflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/errors.hpp"

namespace geoflow {

namespace {

struct Rate {
  double dx, dy, dtheta;
};

// Unit-speed geodesic equations for the metric e^{2 sigma}|dz|^2 with the
// velocity stored as a Euclidean direction angle.
Rate geodesic_rate(const MetricModel& model, Complex z, double angle) {
  const ConformalFactor f = model.conformal_factor(z);
  const double inv = std::exp(-f.sigma);
  const double c = std::cos(angle), s = std::sin(angle);
  return {inv * c, inv * s, inv * (f.dy * c - f.dx * s)};
}

void check_state(const CoverState& s) {
  if (!std::isfinite(s.z.real()) || !std::isfinite(s.z.imag()) || !std::isfinite(s.angle) ||
      std::norm(s.z) >= 1.0)
    throw Error(ErrorCode::IntegratorDiverged, "geodesic left the disk chart");
}

int step_count(double t, double h) {
  return static_cast<int>(std::floor(std::abs(t) / h + 1e-9));
}

}  // namespace

CoverState cover_step(const MetricModel& model, const CoverState& s, double h) {
  const Rate k1 = geodesic_rate(model, s.z, s.angle);
  const Complex z2 = s.z + 0.5 * h * Complex{k1.dx, k1.dy};
  const Rate k2 = geodesic_rate(model, z2, s.angle + 0.5 * h * k1.dtheta);
  const Complex z3 = s.z + 0.5 * h * Complex{k2.dx, k2.dy};
  const Rate k3 = geodesic_rate(model, z3, s.angle + 0.5 * h * k2.dtheta);
  const Complex z4 = s.z + h * Complex{k3.dx, k3.dy};
  const Rate k4 = geodesic_rate(model, z4, s.angle + h * k3.dtheta);
  CoverState out{
      s.z + h / 6.0 * Complex{k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx,
                              k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy},
      s.angle + h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta)};
  check_state(out);
  return out;
}

double unit_speed_defect(const MetricModel& model, const CoverState& s) {
  const Rate r = geodesic_rate(model, s.z, s.angle);
  const double speed = std::exp(model.conformal_factor(s.z).sigma) * std::hypot(r.dx, r.dy);
  return speed - 1.0;
}

std::vector<CoverState> flow_cover(const MetricModel& model, const CoverState& start, double t,
                                   double h, int stride) {
  if (h <= 0.0) throw Error(ErrorCode::InvalidArgument, "flow step must be positive");
  const double dir = t < 0.0 ? -1.0 : 1.0;
  const int n = step_count(t, h);
  std::vector<CoverState> out;
  out.reserve(n / std::max(stride, 1) + 2);
  CoverState s = start;
  out.push_back(s);
  for (int i = 1; i <= n; ++i) {
    s = cover_step(model, s, dir * h);
    if (i % stride == 0) out.push_back(s);
  }
  const double rest = std::abs(t) - n * h;
  if (rest > 1e-15) s = cover_step(model, s, dir * rest);
  if (rest > 1e-15 || n % stride != 0) out.push_back(s);
  return out;
}

OrbitSegment flow(const MetricModel& model, const UnitTangent& v, double t, double h) {
  if (h <= 0.0) throw Error(ErrorCode::InvalidArgument, "flow step must be positive");
  OrbitSegment seg;
  seg.initial = v;
  seg.duration = t;
  seg.step = h;
  const int n = step_count(t, h);
  const double dir = t < 0.0 ? -1.0 : 1.0;
  seg.samples.reserve(n + 1);

  if (model.kind() == ModelKind::synthetic) {
    const double sign = v.synthetic_reversed() ? -1.0 : 1.0;
    for (int i = 0; i <= n; ++i) {
      const UnitTangent w =
          UnitTangent::synthetic(v.synthetic_time() + sign * dir * i * h, v.synthetic_reversed());
      seg.samples.push_back({w, model.curvature(w), std::nullopt, std::nullopt});
    }
    seg.end = UnitTangent::synthetic(v.synthetic_time() + sign * t, v.synthetic_reversed());
    return seg;
  }

  CoverState s{v.z, v.angle};
  auto record = [&](const CoverState& st) {
    const UnitTangent w = UnitTangent::at(st.z, st.angle);
    seg.samples.push_back({w, model.curvature_at(st.z), std::nullopt, std::nullopt});
  };
  auto rewrap = [&](CoverState& st) {
    if (!model.inside(st.z)) {
      const Wrapped w = model.wrap(st.z, st.angle);
      st = {w.z, w.angle};
    }
  };
  rewrap(s);
  record(s);
  for (int i = 1; i <= n; ++i) {
    s = cover_step(model, s, dir * h);
    rewrap(s);
    record(s);
  }
  const double rest = std::abs(t) - n * h;
  if (rest > 1e-15) {
    s = cover_step(model, s, dir * rest);
    rewrap(s);
  }
  seg.end = UnitTangent::at(s.z, s.angle);
  return seg;
}

UnitTangent flow_endpoint(const MetricModel& model, const UnitTangent& v, double t, double h) {
  if (model.kind() == ModelKind::synthetic) {
    const double sign = v.synthetic_reversed() ? -1.0 : 1.0;
    return UnitTangent::synthetic(v.synthetic_time() + sign * t, v.synthetic_reversed());
  }
  const auto states = flow_cover(model, {v.z, v.angle}, t, h, 1 << 30);
  return model.wrap(UnitTangent::at(states.back().z, states.back().angle));
}

double knieper_distance(const MetricModel& model, const UnitTangent& v, const UnitTangent& w,
                        double h) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "knieper_distance on a synthetic model");
  const auto pv = flow_cover(model, {v.z, v.angle}, 1.0, h);
  const auto pw = flow_cover(model, {w.z, w.angle}, 1.0, h);
  const int last = static_cast<int>(std::min(pv.size(), pw.size())) - 1;
  auto dist_at = [&](int i) { return model.surface_distance(pv[i].z, pw[i].z); };
  // Start on 32 points and double until the maximum settles.
  double prev = -1.0, best = 0.0;
  for (int n = 32; n <= 1024; n *= 2) {
    best = 0.0;
    for (int j = 0; j <= n; ++j) {
      const int i = static_cast<int>(std::lround(static_cast<double>(j) * last / n));
      best = std::max(best, dist_at(i));
    }
    if (std::abs(best - prev) < 1e-9 || n >= last) break;
    prev = best;
  }
  return best;
}

}  // namespace geoflow
