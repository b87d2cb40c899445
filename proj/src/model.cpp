#include "geoflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "geoflow/errors.hpp"

namespace geoflow {

namespace {

constexpr double kMaxAbsCurvature = 100.0;
constexpr double kWrapTolerance = 1e-9;

double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }

// Bump profile b(s) = exp(1 - 1/(1-s)) on s = |z-c|^2/r^2 < 1, and its first
// two derivatives in s.
struct BumpJet {
  double b = 0.0, db = 0.0, d2b = 0.0;
};

BumpJet bump_profile(double s) {
  if (s >= 1.0) return {};
  const double q = 1.0 / (1.0 - s);
  const double b = std::exp(1.0 - q);
  return {b, -b * q * q, b * (q * q * q * q - 2.0 * q * q * q)};
}

}  // namespace

const char* kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::fuchsian: return "fuchsian";
    case ModelKind::conformal: return "conformal";
    case ModelKind::synthetic: return "synthetic";
  }
  return "unknown";
}

UnitTangent UnitTangent::synthetic(double time, bool reversed) {
  return {Complex{time, 0.0}, reversed ? std::numbers::pi : 0.0};
}

bool UnitTangent::synthetic_reversed() const {
  return std::cos(angle) < 0.0;
}

// ---------------------------------------------------------------------------

SyntheticProfile::SyntheticProfile(std::vector<std::pair<double, double>> knots,
                                   std::optional<double> period)
    : knots_(std::move(knots)), period_(period) {
  if (knots_.empty()) throw Error(ErrorCode::InvalidArgument, "synthetic profile needs knots");
  std::sort(knots_.begin(), knots_.end());
  if (period_) {
    if (*period_ <= 0.0) throw Error(ErrorCode::InvalidArgument, "period must be positive");
    if (knots_.front().first < 0.0 || knots_.back().first > *period_)
      throw Error(ErrorCode::InvalidArgument, "periodic knots must lie in [0, period]");
  }
}

SyntheticProfile SyntheticProfile::constant(double k, std::optional<double> period) {
  return SyntheticProfile({{0.0, k}}, period);
}

SyntheticProfile SyntheticProfile::flat_core(double inner, double outer, double outer_k) {
  return SyntheticProfile({{-outer, outer_k}, {-inner, 0.0}, {inner, 0.0}, {outer, outer_k}});
}

double SyntheticProfile::operator()(double t) const {
  if (knots_.size() == 1) return knots_.front().second;
  if (period_) {
    const double p = *period_;
    t = std::fmod(t, p);
    if (t < 0.0) t += p;
    const auto& first = knots_.front();
    const auto& last = knots_.back();
    if (t < first.first) {
      const double t0 = last.first - p;
      const double x = (t - t0) / (first.first - t0);
      return last.second + (first.second - last.second) * smoothstep(x);
    }
    if (t > last.first) {
      const double t1 = first.first + p;
      const double x = (t - last.first) / (t1 - last.first);
      return last.second + (first.second - last.second) * smoothstep(x);
    }
  } else {
    if (t <= knots_.front().first) return knots_.front().second;
    if (t >= knots_.back().first) return knots_.back().second;
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double value, const auto& k) { return value < k.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double span = hi.first - lo.first;
  if (span <= 0.0) return hi.second;
  return lo.second + (hi.second - lo.second) * smoothstep((t - lo.first) / span);
}

double SyntheticProfile::sup_abs() const {
  double m = 0.0;
  for (const auto& k : knots_) m = std::max(m, std::abs(k.second));
  return m;
}

double SyntheticProfile::max() const {
  double m = knots_.front().second;
  for (const auto& k : knots_) m = std::max(m, k.second);
  return m;
}

// ---------------------------------------------------------------------------

double MetricModel::systole() { return 2.0 * std::acosh(1.0 + std::numbers::sqrt2); }

double MetricModel::circumradius() {
  return std::acosh(3.0 + 2.0 * std::numbers::sqrt2);
}

double MetricModel::inscribed_chart_radius() { return std::tanh(systole() / 4.0); }

void MetricModel::build_tables() {
  for (int k = 0; k < 8; ++k) side_centers_[k] = generators_[k].apply(Complex{0.0, 0.0});
  // Tiles touching the octagon have centers within twice the circumradius.
  const double reach = 2.0 * circumradius() + 0.25;
  nearby_.clear();
  nearby_.push_back(Mobius::identity());
  std::deque<Mobius> queue{Mobius::identity()};
  while (!queue.empty()) {
    const Mobius g = queue.front();
    queue.pop_front();
    for (const auto& s : generators_) {
      const Mobius n = g * s;
      if (n.origin_displacement() > reach) continue;
      const Complex c = n.apply(Complex{0.0, 0.0});
      const bool seen = std::any_of(nearby_.begin(), nearby_.end(), [&](const Mobius& m) {
        return std::abs(m.apply(Complex{0.0, 0.0}) - c) < 1e-9;
      });
      if (seen) continue;
      nearby_.push_back(n);
      queue.push_back(n);
    }
  }
}

MetricModel MetricModel::with_declared_singular(bool flag) const {
  MetricModel copy = *this;
  copy.declared_singular_ = flag;
  return copy;
}

bool MetricModel::inside(Complex z, double tol) const {
  const double r2 = std::norm(z);
  for (const auto& p : side_centers_) {
    if (std::norm(z - p) / (1.0 - std::norm(p)) < r2 - tol) return false;
  }
  return true;
}

Wrapped MetricModel::wrap(Complex z, double angle) const {
  Wrapped out{z, angle, Mobius::identity(), 0};
  if (kind_ == ModelKind::synthetic) return out;
  for (int iter = 0; iter < 4096; ++iter) {
    const double r2 = std::norm(out.z);
    int worst = -1;
    double worst_gap = -kWrapTolerance;
    for (int k = 0; k < 8; ++k) {
      const Complex p = side_centers_[k];
      const double gap = std::norm(out.z - p) / (1.0 - std::norm(p)) - r2;
      if (gap < worst_gap) {
        worst_gap = gap;
        worst = k;
      }
    }
    if (worst < 0) {
      out.angle = wrap_angle(out.angle);
      return out;
    }
    const Mobius back = generators_[(worst + 4) % 8];
    out.angle += back.angle_shift(out.z);
    out.z = back.apply(out.z);
    out.applied = back * out.applied;
    ++out.steps;
  }
  throw Error(ErrorCode::IntegratorDiverged, "point could not be wrapped into the octagon");
}

UnitTangent MetricModel::wrap(const UnitTangent& v) const {
  if (kind_ == ModelKind::synthetic) return v;
  const Wrapped w = wrap(v.z, v.angle);
  return {w.z, w.angle};
}

UnitTangent MetricModel::reverse(const UnitTangent& v) const {
  if (kind_ == ModelKind::synthetic)
    return UnitTangent::synthetic(v.synthetic_time(), !v.synthetic_reversed());
  return UnitTangent::at(v.z, v.angle + std::numbers::pi);
}

MetricModel::ExponentJet MetricModel::exponent(Complex z) const {
  ExponentJet jet;
  if (bumps_.empty()) return jet;
  Complex w = z;
  Mobius g = Mobius::identity();
  if (!inside(z, 0.0)) {
    const Wrapped wr = wrap(z, 0.0);
    w = wr.z;
    g = wr.applied;
  }
  Complex grad_w{0.0, 0.0};
  double lap_w = 0.0;
  for (const auto& bump : bumps_) {
    const Complex d = w - bump.center;
    const double r2 = bump.radius * bump.radius;
    const double s = std::norm(d) / r2;
    if (s >= 1.0) continue;
    const BumpJet b = bump_profile(s);
    jet.u += bump.amplitude * b.b;
    grad_w += bump.amplitude * b.db * 2.0 * d / r2;
    lap_w += bump.amplitude * (4.0 / r2) * (b.d2b * s + b.db);
  }
  // Pull back through the deck element: grad(u o g) = conj(g') grad u,
  // lap(u o g) = |g'|^2 lap u.
  const Complex gp = g.derivative(z);
  jet.grad = std::conj(gp) * grad_w;
  jet.laplacian = std::norm(gp) * lap_w;
  return jet;
}

ConformalFactor MetricModel::conformal_factor(Complex z) const {
  const double r2 = std::norm(z);
  const double denom = 1.0 - r2;
  ConformalFactor f{std::log(2.0 / denom), 2.0 * z.real() / denom, 2.0 * z.imag() / denom};
  if (kind_ == ModelKind::conformal) {
    const ExponentJet jet = exponent(z);
    f.sigma += jet.u;
    f.dx += jet.grad.real();
    f.dy += jet.grad.imag();
  }
  return f;
}

double MetricModel::curvature_at(Complex z) const {
  switch (kind_) {
    case ModelKind::fuchsian: return -1.0;
    case ModelKind::synthetic: return profile_(z.real());
    case ModelKind::conformal: break;
  }
  const ExponentJet jet = exponent(z);
  // Hyperbolic (geometer's, nonnegative spectrum) Laplacian of u.
  const double scale = (1.0 - std::norm(z)) / 2.0;
  const double lap_hyp = -scale * scale * jet.laplacian;
  return std::exp(-2.0 * jet.u) * (-1.0 + lap_hyp);
}

double MetricModel::curvature(const UnitTangent& v) const {
  if (kind_ == ModelKind::synthetic) return profile_(v.synthetic_time());
  return curvature_at(v.z);
}

double MetricModel::cover_distance(Complex z, Complex w) const {
  const double d = disk_distance(z, w);
  if (kind_ != ModelKind::conformal || bumps_.empty()) return d;
  return d * std::exp(exponent(0.5 * (z + w)).u);
}

double MetricModel::surface_distance(Complex z, Complex w) const {
  if (kind_ == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "surface distance on a synthetic model");
  const Complex zw = wrap(z, 0.0).z;
  const Complex ww = wrap(w, 0.0).z;
  double best = disk_distance(zw, ww);
  Complex best_image = ww;
  for (const auto& g : nearby_) {
    const Complex img = g.apply(ww);
    const double d = disk_distance(zw, img);
    if (d < best) {
      best = d;
      best_image = img;
    }
  }
  return cover_distance(zw, best_image);
}

// ---------------------------------------------------------------------------

MetricModel make_fuchsian(const std::array<Mobius, 8>& generators) {
  MetricModel m;
  m.kind_ = ModelKind::fuchsian;
  m.generators_ = generators;
  double det_err = 0.0;
  for (int k = 0; k < 8; ++k) {
    det_err = std::max(det_err, std::abs(generators[k].det() - 1.0));
    const Mobius prod = generators[k] * generators[(k + 4) % 8];
    if (std::abs(prod.a - Complex{1.0, 0.0}) > 1e-9 && std::abs(prod.a + Complex{1.0, 0.0}) > 1e-9)
      throw Error(ErrorCode::Schema, "generator " + std::to_string(k + 4) +
                                         " is not the inverse of generator " + std::to_string(k));
  }
  if (det_err > 1e-12)
    throw Error(ErrorCode::Schema, "generator determinant differs from 1 by " + std::to_string(det_err));
  m.build_tables();
  m.report_ = {ModelKind::fuchsian, det_err, -1.0, Complex{0.0, 0.0}, -1.0,
               MetricModel::systole() / 2.0, true};
  return m;
}

MetricModel make_fuchsian_bolza() {
  std::array<Mobius, 8> gens;
  const Mobius t = Mobius::translation(MetricModel::systole());
  for (int k = 0; k < 8; ++k) {
    const double phi = k * std::numbers::pi / 4.0;
    gens[k] = Mobius::rotation(phi) * t * Mobius::rotation(-phi);
  }
  return make_fuchsian(gens);
}

MetricModel make_conformal(const MetricModel& base, std::vector<Bump> bumps, double tolerance) {
  if (base.kind() != ModelKind::fuchsian)
    throw Error(ErrorCode::InvalidArgument, "conformal base must be a fuchsian model");
  const double limit = MetricModel::inscribed_chart_radius();
  for (const auto& b : bumps) {
    if (b.radius <= 0.0)
      throw Error(ErrorCode::Schema, "bump radius must be positive");
    if (std::abs(b.center) + b.radius > limit - 1e-6)
      throw Error(ErrorCode::Schema, "bump support must lie inside the inscribed disk of the octagon");
  }
  MetricModel m = base;
  m.kind_ = ModelKind::conformal;
  m.bumps_ = std::move(bumps);
  m.report_.kind = ModelKind::conformal;

  // Curvature only departs from -1 on bump supports; a polar grid over the
  // inscribed disk covers them.
  double kmax = -1.0, kmin = -1.0, umin = 0.0;
  Complex where{0.0, 0.0};
  if (!m.bumps_.empty()) {
    constexpr int kRadial = 240, kAngular = 360;
    for (int i = 0; i <= kRadial; ++i) {
      const double r = limit * i / kRadial;
      for (int j = 0; j < (i == 0 ? 1 : kAngular); ++j) {
        const Complex z = std::polar(r, kTwoPi * j / kAngular);
        const double k = m.curvature_at(z);
        if (k > kmax) {
          kmax = k;
          where = z;
        }
        kmin = std::min(kmin, k);
        umin = std::min(umin, m.exponent(z).u);
      }
    }
    for (const auto& b : m.bumps_) {
      const double k = m.curvature_at(b.center);
      if (k > kmax) {
        kmax = k;
        where = b.center;
      }
      kmin = std::min(kmin, k);
    }
  }
  m.report_.max_curvature = kmax;
  m.report_.min_curvature = kmin;
  m.report_.max_curvature_location = where;
  m.report_.injectivity_radius = MetricModel::systole() / 2.0 * std::exp(umin);
  if (kmax > tolerance) {
    m.report_.ok = false;
    throw Error(ErrorCode::PositiveCurvature,
                "max sampled curvature " + std::to_string(kmax) + " at (" +
                    std::to_string(where.real()) + ", " + std::to_string(where.imag()) + ")");
  }
  if (-kmin > kMaxAbsCurvature)
    throw Error(ErrorCode::InvalidArgument, "curvature magnitude exceeds 100");
  return m;
}

MetricModel make_synthetic(SyntheticProfile profile) {
  if (profile.max() > 0.0)
    throw Error(ErrorCode::PositiveCurvature,
                "synthetic profile reaches K = " + std::to_string(profile.max()));
  if (profile.sup_abs() > kMaxAbsCurvature)
    throw Error(ErrorCode::InvalidArgument, "curvature magnitude exceeds 100");
  MetricModel m;
  m.kind_ = ModelKind::synthetic;
  m.profile_ = std::move(profile);
  double kmin = 0.0;
  for (const auto& k : m.profile_.knots()) kmin = std::min(kmin, k.second);
  m.report_ = {ModelKind::synthetic, 0.0, m.profile_.max(), Complex{0.0, 0.0}, kmin, 0.0, true};
  m.declared_singular_ = m.profile_.max() == 0.0 && kmin == 0.0;
  return m;
}

}  // namespace geoflow
