#include "geoflow/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoflow/errors.hpp"

namespace geoflow {

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();
constexpr double kSyntheticStep = 0.05;

// Snaps t to the nearest multiple of `grid` when it is within rounding noise.
double snap(double t, double grid) {
  const double k = std::round(t / grid);
  return std::abs(t - k * grid) < 1e-9 * grid ? k * grid : t;
}

}  // namespace

// ---------------------------------------------------------------------------
// CurvatureTrack

CurvatureTrack CurvatureTrack::along(const MetricModel& model, const UnitTangent& v,
                                     double t_begin, double t_end, double h) {
  if (t_end < t_begin) std::swap(t_begin, t_end);
  CurvatureTrack track;
  track.begin_ = t_begin;
  track.end_ = t_end;
  switch (model.kind()) {
    case ModelKind::fuchsian:
      track.source_ = Source::constant;
      track.constant_ = -1.0;
      return track;
    case ModelKind::synthetic:
      track.source_ = Source::synthetic;
      track.model_ = &model;
      track.base_ = v;
      return track;
    case ModelKind::conformal:
      break;
  }
  // Sample from v outwards in both directions so both halves stay on the
  // orbit of v itself.
  const double sp = 0.5 * h;
  const long lo = static_cast<long>(std::floor(std::min(t_begin, 0.0) / sp + 1e-9));
  const long hi = static_cast<long>(std::ceil(std::max(t_end, 0.0) / sp - 1e-9));
  track.source_ = Source::samples;
  track.sampled_ = true;
  track.spacing_ = sp;
  track.begin_ = lo * sp;
  track.end_ = hi * sp;
  track.values_.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  if (hi > 0) {
    const auto fwd = flow(model, v, hi * sp, sp);
    for (long j = 0; j <= hi; ++j) track.values_[j - lo] = fwd.samples[j].K;
  }
  if (lo < 0) {
    const auto bwd = flow(model, v, lo * sp, sp);
    for (long j = 0; j <= -lo; ++j) track.values_[-j - lo] = bwd.samples[j].K;
  }
  if (hi <= 0 && lo >= 0) track.values_[0] = model.curvature(v);
  return track;
}

CurvatureTrack CurvatureTrack::periodic(std::vector<double> samples, double period) {
  if (samples.size() < 4 || period <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "periodic curvature track needs >= 4 samples");
  CurvatureTrack track;
  track.source_ = Source::loop;
  track.period_ = period;
  track.spacing_ = period / static_cast<double>(samples.size());
  track.begin_ = -kUnbounded;
  track.end_ = kUnbounded;
  track.values_ = std::move(samples);
  return track;
}

double CurvatureTrack::operator()(double t) const {
  switch (source_) {
    case Source::constant:
      return constant_;
    case Source::synthetic: {
      const double sign = base_.synthetic_reversed() ? -1.0 : 1.0;
      return model_->profile()(base_.synthetic_time() + sign * t);
    }
    case Source::samples: {
      const double x = (t - begin_) / spacing_;
      const double j = std::round(x);
      const auto last = static_cast<double>(values_.size() - 1);
      if (x < -1e-6 || x > last + 1e-6)
        throw Error(ErrorCode::InvalidArgument, "curvature requested outside the sampled track");
      if (std::abs(x - j) < 1e-7) return values_[static_cast<std::size_t>(std::clamp(j, 0.0, last))];
      const auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, last - 1.0));
      const double f = x - static_cast<double>(i);
      return (1.0 - f) * values_[i] + f * values_[i + 1];
    }
    case Source::loop: {
      // Catmull-Rom interpolation around the loop.
      const auto n = static_cast<long>(values_.size());
      const double x = std::fmod(t / spacing_, static_cast<double>(n));
      const double xx = x < 0 ? x + n : x;
      const long i = static_cast<long>(std::floor(xx));
      const double f = xx - i;
      auto at = [&](long k) { return values_[static_cast<std::size_t>(((k % n) + n) % n)]; };
      const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
      return p1 + 0.5 * f *
                      (p2 - p0 +
                       f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
    }
  }
  return constant_;
}

double CurvatureTrack::max_step(double t) const {
  switch (source_) {
    case Source::constant:
      return kUnbounded;
    case Source::samples:
    case Source::loop:
      return spacing_;
    case Source::synthetic: {
      const auto& profile = model_->profile();
      if (profile.knots().size() < 2) return kUnbounded;
      if (profile.period()) return kSyntheticStep;
      const double sign = base_.synthetic_reversed() ? -1.0 : 1.0;
      const double s = base_.synthetic_time() + sign * t;
      const double lo = profile.knots().front().first, hi = profile.knots().back().first;
      if (s >= lo && s <= hi) return kSyntheticStep;
      // Outside the knots the profile is constant: stride up to the knot range.
      return std::max(kSyntheticStep, s < lo ? lo - s : s - hi);
    }
  }
  return kSyntheticStep;
}

// ---------------------------------------------------------------------------
// Integrators

namespace {

// Integrates U' = -U^2 - K(t0 + dir tau) for tau in [0, duration], recording
// U at tau = rec_start + k rec_step for k < n_rec. Sampled tracks use fixed
// RK4 steps of h; closed-form tracks use step-doubling RK4.
struct RiccatiRun {
  double U = 0.0;
  bool valid = true;
  double blowup_time = 0.0;
  std::vector<double> recorded;
};

class RiccatiSweep {
 public:
  RiccatiSweep(const CurvatureTrack& K, double t0, int dir) : K_(K), t0_(t0), dir_(dir) {}

  RiccatiRun run(double duration, double U0, double h, double rec_start, double rec_step,
                 std::size_t n_rec) const {
    RiccatiRun out;
    out.recorded.reserve(n_rec);
    double tau = 0.0, U = U0;
    std::size_t next = 0;
    auto record_point = [&](std::size_t k) { return rec_start + static_cast<double>(k) * rec_step; };
    // Records that coincide with the start (within a fraction of a step).
    while (next < n_rec && record_point(next) <= 1e-9 * h) {
      out.recorded.push_back(U);
      ++next;
    }
    double hcur = h;
    const bool fixed = K_.exact_nodes();
    while (tau < duration) {
      double target = duration;
      if (next < n_rec) target = std::min(target, record_point(next));
      double step = fixed ? h : std::min(hcur, K_.max_step(time(tau)));
      bool lands = false;
      if (target - tau <= step * (1.0 + 1e-9)) {
        step = target - tau;
        lands = true;
      }
      double Unew;
      if (fixed) {
        Unew = rk4(tau, U, step);
      } else {
        const double full = rk4(tau, U, step);
        const double mid = rk4(tau, U, 0.5 * step);
        const double half = rk4(tau + 0.5 * step, mid, 0.5 * step);
        const double err = std::abs(half - full) / 15.0;
        const double allowed = 1e-14 + 1e-13 * std::abs(half);
        if (std::isfinite(half) && std::abs(half) <= kBlowupThreshold && err > allowed) {
          if (step <= 1e-12) throw Error(ErrorCode::IntegratorDiverged, "Riccati step underflow");
          hcur = std::max(step * std::max(0.2, 0.9 * std::pow(allowed / err, 0.2)), 1e-12);
          continue;
        }
        Unew = half + (half - full) / 15.0;
        hcur = step * (err > 0.0 ? std::min(4.0, 0.9 * std::pow(allowed / err, 0.2)) : 4.0);
      }
      if (!std::isfinite(Unew) || std::abs(Unew) > kBlowupThreshold) {
        out.U = U;
        out.valid = false;
        out.blowup_time = time(tau + locate_blowup(tau, U, step));
        return out;
      }
      tau = lands ? target : tau + step;
      U = Unew;
      while (next < n_rec && record_point(next) <= tau + 1e-9 * h) {
        out.recorded.push_back(U);
        ++next;
      }
    }
    out.U = U;
    return out;
  }

 private:
  double time(double tau) const { return t0_ + dir_ * tau; }
  double kd(double tau) const { return K_(time(tau)); }

  double rk4(double tau, double U, double s) const {
    auto f = [&](double at, double u) { return -u * u - kd(at); };
    const double k1 = f(tau, U);
    const double k2 = f(tau + 0.5 * s, U + 0.5 * s * k1);
    const double k3 = f(tau + 0.5 * s, U + 0.5 * s * k2);
    const double k4 = f(tau + s, U + s * k3);
    return U + s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Shortest sub-step after which |U| crosses the blowup threshold.
  double locate_blowup(double tau, double U, double step) const {
    double lo = 0.0, hi = step;
    while (hi - lo > 1e-7) {
      const double mid = 0.5 * (lo + hi);
      const double u = rk4(tau, U, mid);
      if (!std::isfinite(u) || std::abs(u) > kBlowupThreshold)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

  const CurvatureTrack& K_;
  double t0_;
  int dir_;
};

void check_step(double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "integration step must be positive");
}

}  // namespace

JacobiState jacobi_integrate(const CurvatureTrack& K, double t0, double t1, double J0, double Jp0,
                             double h) {
  check_step(h);
  if (J0 == 0.0 && Jp0 == 0.0)
    throw Error(ErrorCode::InvalidArgument, "Jacobi initial data must be nonzero");
  const double dir = t1 < t0 ? -1.0 : 1.0;
  const double span = std::abs(t1 - t0);
  const long n = static_cast<long>(std::floor(span / h + 1e-9));
  double J = J0, Jp = Jp0;
  // In the reversed parametrisation s = -t the derivative flips sign.
  auto step = [&](double t, double s) {
    auto k = [&](double at) { return K(at); };
    const double kd1 = k(t), kd2 = k(t + 0.5 * dir * s), kd4 = k(t + dir * s);
    const double a1 = dir * Jp, b1 = -dir * kd1 * J;
    const double a2 = dir * (Jp + 0.5 * s * b1), b2 = -dir * kd2 * (J + 0.5 * s * a1);
    const double a3 = dir * (Jp + 0.5 * s * b2), b3 = -dir * kd2 * (J + 0.5 * s * a2);
    const double a4 = dir * (Jp + s * b3), b4 = -dir * kd4 * (J + s * a3);
    J += s / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    Jp += s / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
  };
  for (long i = 0; i < n; ++i) step(t0 + dir * i * h, h);
  const double rest = span - n * h;
  if (rest > 1e-15) step(t0 + dir * n * h, rest);
  return {J, Jp};
}

JacobiState jacobi_integrate(const MetricModel& model, const UnitTangent& v, double t, double J0,
                             double Jp0, double h) {
  check_step(h);
  const auto track = CurvatureTrack::along(model, v, std::min(0.0, t), std::max(0.0, t), h);
  return jacobi_integrate(track, 0.0, t, J0, Jp0, h);
}

RiccatiState riccati_integrate(const CurvatureTrack& K, double t0, double t1, double U0,
                               double h) {
  check_step(h);
  if (t1 < t0) throw Error(ErrorCode::InvalidArgument, "riccati_integrate needs t0 <= t1");
  const auto run = RiccatiSweep(K, t0, 1).run(t1 - t0, U0, h, 0.0, 1.0, 0);
  RiccatiState state{run.U, run.valid, std::nullopt};
  if (!run.valid) state.blowup_time = run.blowup_time;
  return state;
}

RiccatiState riccati_integrate(const MetricModel& model, const UnitTangent& v, double t0,
                               double t1, double U0, double h) {
  check_step(h);
  const auto track = CurvatureTrack::along(model, v, t0, t1, h);
  return riccati_integrate(track, t0, t1, U0, h);
}

std::vector<double> riccati_trajectory(const CurvatureTrack& K, double t0, double t1, double U0,
                                       double step, double h) {
  check_step(h);
  if (t1 < t0) throw Error(ErrorCode::InvalidArgument, "riccati_trajectory needs t0 <= t1");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9)) + 1;
  // Truncated at a blowup.
  return RiccatiSweep(K, t0, 1).run(t1 - t0, U0, h, 0.0, step, n).recorded;
}

namespace {

double rounded_horizon(const RiccatiConfig& cfg) {
  if (!(cfg.T_conv > 0.0) || !(cfg.tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "T_conv and tol must be positive");
  check_step(cfg.h);
  return std::ceil(cfg.T_conv / cfg.h - 1e-9) * cfg.h;
}

// Two-seed bracket of the bounded-in-the-past Riccati solution, evaluated at
// the record points of a sweep that starts T_conv before them.
std::vector<double> bracket(const CurvatureTrack& K, double start, int dir, double horizon,
                            double span, double step, std::size_t n, const RiccatiConfig& cfg,
                            double& spread, const char* what) {
  const RiccatiSweep sweep(K, start, dir);
  const auto low = sweep.run(horizon + span, 0.0, cfg.h, horizon, step, n);
  const auto high = sweep.run(horizon + span, cfg.seed_cap, cfg.h, horizon, step, n);
  if (!low.valid || !high.valid || low.recorded.size() != n || high.recorded.size() != n)
    throw Error(ErrorCode::IntegratorDiverged, std::string(what) + ": Riccati seed blew up");
  std::vector<double> mid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(high.recorded[i] - low.recorded[i]);
    spread = std::max(spread, d);
    if (d > cfg.tol) throw NotConvergedError(d, what);
    mid[i] = std::max(0.0, 0.5 * (high.recorded[i] + low.recorded[i]));
  }
  return mid;
}

}  // namespace

double unstable_curvature(const MetricModel& model, const UnitTangent& v,
                          const RiccatiConfig& cfg) {
  const double horizon = rounded_horizon(cfg);
  const auto track = CurvatureTrack::along(model, v, -horizon, 0.0, cfg.h);
  double spread = 0.0;
  return bracket(track, -horizon, 1, horizon, 0.0, cfg.h, 1, cfg, spread, "unstable_curvature")[0];
}

double stable_curvature(const MetricModel& model, const UnitTangent& v,
                        const RiccatiConfig& cfg) {
  return unstable_curvature(model, model.reverse(v), cfg);
}

double lambda(const MetricModel& model, const UnitTangent& v, const RiccatiConfig& cfg) {
  return std::min(unstable_curvature(model, v, cfg), stable_curvature(model, v, cfg));
}

double geometric_potential_from(double ku, double K) {
  return -ku * (1.0 - K) / (1.0 + ku * ku);
}

double geometric_potential(const MetricModel& model, const UnitTangent& v,
                           const RiccatiConfig& cfg) {
  return geometric_potential_from(unstable_curvature(model, v, cfg), model.curvature(v));
}

HyperbolicityIndex hyperbolicity_index(const MetricModel& model, const UnitTangent& v, double T,
                                       const RiccatiConfig& cfg) {
  const auto profile = hyperbolicity_profile(model, v, -T, T, cfg.h, cfg);
  const std::size_t centre = profile.size() / 2;
  return {profile.lambda(centre), profile.lambda_T(centre, T), T};
}

double lambda_T(const MetricModel& model, const UnitTangent& v, double T,
                const RiccatiConfig& cfg) {
  return hyperbolicity_index(model, v, T, cfg).lambda_T;
}

// ---------------------------------------------------------------------------
// Orbit-wide profiles

std::vector<double> sliding_window_integral(const std::vector<double>& f, double step,
                                            std::size_t m) {
  if (f.size() < 2 * m + 1) return {};
  std::vector<double> cumulative(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i)
    cumulative[i] = cumulative[i - 1] + 0.5 * step * (f[i - 1] + f[i]);
  std::vector<double> out(f.size() - 2 * m);
  for (std::size_t i = m; i + m < f.size(); ++i) out[i - m] = cumulative[i + m] - cumulative[i - m];
  return out;
}

double trapezoid(const std::vector<double>& f, double step) {
  if (f.size() < 2) return 0.0;
  double sum = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  return sum * step;
}

double HyperbolicityProfile::lambda(std::size_t i) const { return std::min(ku[i], ks[i]); }

std::pair<std::size_t, std::vector<double>> HyperbolicityProfile::lambda_T_series(
    double T) const {
  const auto m = static_cast<std::size_t>(std::lround(T / step));
  if (size() < 2 * m + 1)
    throw Error(ErrorCode::InvalidArgument, "profile too short for the lambda_T window");
  std::vector<double> lam(size());
  for (std::size_t i = 0; i < size(); ++i) lam[i] = lambda(i);
  auto out = sliding_window_integral(lam, step, m);
  return {m, std::move(out)};
}

double HyperbolicityProfile::lambda_T(std::size_t i, double T) const {
  const auto m = static_cast<std::size_t>(std::lround(T / step));
  if (i < m || i + m >= size())
    throw Error(ErrorCode::InvalidArgument, "lambda_T window leaves the profile");
  double sum = 0.0;
  for (std::size_t j = i - m; j < i + m; ++j) sum += 0.5 * step * (lambda(j) + lambda(j + 1));
  return sum;
}

HyperbolicityProfile hyperbolicity_profile(const CurvatureTrack& K, double t0, double t1,
                                           double step, const RiccatiConfig& cfg) {
  const double horizon = rounded_horizon(cfg);
  if (t1 < t0) throw Error(ErrorCode::InvalidArgument, "profile needs t0 <= t1");
  step = snap(step, cfg.h);
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9)) + 1;
  const double span = static_cast<double>(n - 1) * step;
  HyperbolicityProfile p;
  p.t0 = t0;
  p.step = step;
  p.ku = bracket(K, t0 - horizon, 1, horizon, span, step, n, cfg, p.max_spread,
                 "unstable curvature profile");
  // k^s(f_t v) = k^u(-f_t v): the same sweep run backwards from t0 + span.
  auto ks = bracket(K, t0 + span + horizon, -1, horizon, span, step, n, cfg, p.max_spread,
                    "stable curvature profile");
  p.ks.assign(ks.rbegin(), ks.rend());
  p.K.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.K[i] = K(p.time(i));
  return p;
}

HyperbolicityProfile hyperbolicity_profile(const MetricModel& model, const UnitTangent& v,
                                           double t0, double t1, double step,
                                           const RiccatiConfig& cfg) {
  const double horizon = rounded_horizon(cfg);
  const auto track = CurvatureTrack::along(model, v, t0 - horizon, t1 + horizon, cfg.h);
  return hyperbolicity_profile(track, t0, t1, step, cfg);
}

}  // namespace geoflow

namespace geoflow {

UnitTangent stable_perturbation(const MetricModel& model, const UnitTangent& v, double offset,
                                const RiccatiConfig& cfg) {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "horocycle perturbation on a synthetic model");
  if (offset == 0.0) return v;
  if (model.kind() == ModelKind::fuchsian) {
    // Normalise v to (0, direction 0); w = i(1+z)/(1-z) sends the forward
    // endpoint to infinity and the stable horocycle to Im w = 1, with the
    // left normal pointing to decreasing Re w.
    const Mobius frame = Mobius::moving(v.z, v.angle);
    const Complex i{0.0, 1.0};
    const Complex w{-offset, 1.0};
    const Complex z = (w - i) / (w + i);
    const double angle = half_pi + std::arg(2.0 * i / ((w + i) * (w + i)));
    return model.wrap(UnitTangent::at(frame.apply(z), angle + frame.angle_shift(z)));
  }
  const double ks = stable_curvature(model, v, cfg);
  const double side = offset > 0.0 ? 1.0 : -1.0;
  const double len = std::abs(offset);
  const long n = std::max(8L, static_cast<long>(std::ceil(len / 1e-3)));
  const auto normal = flow_cover(model, {v.z, v.angle + side * half_pi}, len, len / n);
  const CoverState end = normal.back();
  return model.wrap(UnitTangent::at(end.z, end.angle - side * half_pi - ks * offset));
}

UnitTangent unstable_perturbation(const MetricModel& model, const UnitTangent& v, double offset,
                                  const RiccatiConfig& cfg) {
  return model.reverse(stable_perturbation(model, model.reverse(v), offset, cfg));
}

}  // namespace geoflow
