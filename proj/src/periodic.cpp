#include "geoflow/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/parallel.hpp"
#include "refine.hpp"

namespace geoflow {

// ---------------------------------------------------------------------------
// Words

std::vector<int> cyclically_reduce(std::vector<int> letters) {
  std::vector<int> stack;
  for (int l : letters) {
    if (!stack.empty() && stack.back() == inverse_letter(l))
      stack.pop_back();
    else
      stack.push_back(l);
  }
  std::size_t lo = 0, hi = stack.size();
  while (hi - lo >= 2 && stack[lo] == inverse_letter(stack[hi - 1])) {
    ++lo;
    --hi;
  }
  return {stack.begin() + static_cast<long>(lo), stack.begin() + static_cast<long>(hi)};
}

std::vector<int> least_rotation(const std::vector<int>& letters) {
  std::vector<int> best = letters;
  std::vector<int> rot = letters;
  for (std::size_t r = 1; r < letters.size(); ++r) {
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    if (rot < best) best = rot;
  }
  return best;
}

GroupWord::GroupWord(std::vector<int> letters) {
  for (int l : letters)
    if (l < 0 || l > 7) throw Error(ErrorCode::InvalidArgument, "word letters must lie in 0..7");
  letters_ = least_rotation(cyclically_reduce(std::move(letters)));
}

GroupWord GroupWord::parse(const std::string& text) {
  std::vector<int> letters;
  for (char c : text) {
    if (c >= '0' && c <= '7')
      letters.push_back(c - '0');
    else if (c != '.' && c != ',' && c != ' ')
      throw Error(ErrorCode::InvalidArgument, "unexpected character in word: " + text);
  }
  return GroupWord(std::move(letters));
}

GroupWord GroupWord::inverse() const {
  std::vector<int> inv(letters_.rbegin(), letters_.rend());
  for (int& l : inv) l = inverse_letter(l);
  return GroupWord(std::move(inv));
}

GroupWord GroupWord::power(int n) const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "word power must be >= 1");
  std::vector<int> out;
  out.reserve(letters_.size() * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.insert(out.end(), letters_.begin(), letters_.end());
  return GroupWord(std::move(out));
}

GroupWord GroupWord::unoriented() const { return std::min(*this, inverse()); }

bool GroupWord::cyclically_reduced() const { return cyclically_reduce(letters_) == letters_; }

Mobius GroupWord::element(const MetricModel& model) const {
  Mobius g = Mobius::identity();
  for (int l : letters_) g = g * model.generators()[static_cast<std::size_t>(l)];
  return g;
}

std::string GroupWord::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < letters_.size(); ++i) out << (i ? "." : "") << letters_[i];
  return out.str();
}

// ---------------------------------------------------------------------------
// Ball of deck elements

namespace {

// Deck elements g with sinh(d(0, g0)/2) <= bound, found by breadth-first
// search over right multiplication by generators. Elements are identified by
// the hyperboloid coordinates 2ab of g(0); distinct elements lie several
// units apart there, so a unit grid with boundary checks is exact.
class ElementBall {
 public:
  ElementBall(const MetricModel& model, double sinh_half_radius, std::size_t max_elements) {
    add(Mobius::identity(), std::numeric_limits<std::uint32_t>::max(), -1);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      for (int k = 0; k < 8; ++k) {
        const Mobius child = elements_[i] * model.generators()[static_cast<std::size_t>(k)];
        if (std::abs(child.b) > sinh_half_radius) continue;
        if (find(child)) continue;
        if (elements_.size() >= max_elements)
          throw Error(ErrorCode::BudgetExceeded,
                      "group ball exceeds " + std::to_string(max_elements) + " elements");
        add(child, static_cast<std::uint32_t>(i), k);
      }
    }
  }

  std::size_t size() const { return elements_.size(); }
  const Mobius& element(std::size_t i) const { return elements_[i]; }

  std::vector<int> word(std::size_t i) const {
    std::vector<int> out;
    while (letter_[i] >= 0) {
      out.push_back(letter_[i]);
      i = parent_[i];
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::optional<std::size_t> find(const Mobius& g) const {
    const Complex w = 2.0 * g.a * g.b;
    const double fx = w.real() / kCell, fy = w.imag() / kCell;
    const auto cx = static_cast<std::int64_t>(std::floor(fx));
    const auto cy = static_cast<std::int64_t>(std::floor(fy));
    const double rx = fx - static_cast<double>(cx), ry = fy - static_cast<double>(cy);
    for (int dx = (rx < kMargin ? -1 : 0); dx <= (rx > 1.0 - kMargin ? 1 : 0); ++dx) {
      for (int dy = (ry < kMargin ? -1 : 0); dy <= (ry > 1.0 - kMargin ? 1 : 0); ++dy) {
        const auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        const Complex other = 2.0 * elements_[it->second].a * elements_[it->second].b;
        if (std::abs(other - w) < kMargin * kCell) return it->second;
      }
    }
    return std::nullopt;
  }

 private:
  static constexpr double kCell = 1.0;
  static constexpr double kMargin = 0.25;

  static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
  }

  void add(const Mobius& g, std::uint32_t parent, int letter) {
    const Complex w = 2.0 * g.a * g.b;
    cells_.emplace(key(static_cast<std::int64_t>(std::floor(w.real() / kCell)),
                       static_cast<std::int64_t>(std::floor(w.imag() / kCell))),
                   static_cast<std::uint32_t>(elements_.size()));
    elements_.push_back(g);
    parent_.push_back(parent);
    letter_.push_back(static_cast<std::int8_t>(letter));
  }

  std::vector<Mobius> elements_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::int8_t> letter_;
  std::unordered_map<std::uint64_t, std::uint32_t> cells_;
};

// Index of the conjugate of g whose axis passes closest to the origin. The
// axis is walked over one period with incremental wrapping; at each sample
// the orbit points of the origin near the sample are tried. Ties go to the
// lowest ball index.
std::size_t canonical_conjugate(const MetricModel& model, const ElementBall& ball,
                                const std::vector<Complex>& centres, const Mobius& g) {
  const double ell = g.translation_length();
  const int samples = std::max(4, static_cast<int>(std::ceil(ell / 0.25)));
  const double delta = ell / samples;
  const double reach = MetricModel::circumradius() + delta;
  const auto& nearby = model.nearby_elements();

  const DiskPoint start = axis_point_nearest_origin(g);
  Wrapped w = model.wrap(start.z, start.angle);
  Mobius h = w.applied;
  std::vector<std::pair<double, Mobius>> tried;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < samples; ++j) {
    for (std::size_t n = 0; n < nearby.size(); ++n) {
      if (disk_distance(centres[n], w.z) > reach) continue;
      const Mobius c = nearby[n] * h;
      const double b = std::abs((c * g * c.inverse()).b);
      best = std::min(best, b);
      tried.emplace_back(b, c);
    }
    const DiskPoint next = hyperbolic_geodesic(w.z, w.angle, delta);
    const Wrapped step = model.wrap(next.z, next.angle);
    h = step.applied * h;
    w = step;
  }
  std::size_t chosen = std::numeric_limits<std::size_t>::max();
  for (const auto& [b, c] : tried) {
    if (b > best * (1.0 + 1e-9) + 1e-12) continue;
    const auto idx = ball.find(c * g * c.inverse());
    if (!idx) throw Error(ErrorCode::NoConvergence, "canonical conjugate left the search ball");
    chosen = std::min(chosen, *idx);
  }
  return chosen;
}

bool is_proper_power(const ElementBall& ball, const Mobius& g) {
  const double ell = g.translation_length();
  const DiskPoint p = axis_point_nearest_origin(g);
  const Mobius frame = Mobius::moving(p.z, p.angle);
  for (int n = 2; n * MetricModel::systole() <= ell + 1e-9; ++n) {
    const Mobius root = frame * Mobius::translation(ell / n) * frame.inverse();
    const auto idx = ball.find(root);
    if (!idx) continue;
    // A coordinate match must also agree as a matrix (up to sign).
    const Mobius& e = ball.element(*idx);
    const double scale = 1e-6 * (1.0 + std::abs(root.a));
    if (std::abs(e.a - root.a) + std::abs(e.b - root.b) < scale ||
        std::abs(e.a + root.a) + std::abs(e.b + root.b) < scale)
      return true;
  }
  return false;
}

}  // namespace

std::vector<ClassRecord> enumerate_classes(const MetricModel& model,
                                           const EnumerationLimits& limits) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "enumerate_classes on a synthetic model");
  double max_length = limits.max_length;
  if (max_length <= 0.0) {
    if (limits.max_word_len <= 0)
      throw Error(ErrorCode::InvalidArgument, "enumeration needs max_length or max_word_len");
    // A word of n letters translates by at most n systoles.
    max_length = limits.max_word_len * MetricModel::systole() + 1e-9;
  }
  const double rv = MetricModel::circumradius();
  const double sinh_half = std::cosh(rv) * std::sinh(0.5 * max_length) + 1e-9;
  // Area of the search ball over the area 4 pi of the surface.
  const double ball_estimate = 0.5 * (std::cosh(2.0 * std::asinh(sinh_half)) - 1.0);
  if (ball_estimate > static_cast<double>(limits.max_elements))
    throw Error(ErrorCode::BudgetExceeded,
                "projected " + std::to_string(static_cast<long long>(ball_estimate)) +
                    " group elements exceed the element budget");
  const double class_estimate = std::exp(max_length) / max_length;
  if (class_estimate > 2.0 * static_cast<double>(limits.max_classes))
    throw Error(ErrorCode::BudgetExceeded, "projected class count exceeds the class cap");

  const ElementBall ball(model, sinh_half, limits.max_elements);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i < ball.size(); ++i) {
    const Mobius& g = ball.element(i);
    if (!g.hyperbolic() || g.translation_length() > max_length + 1e-9) continue;
    if (g.axis_distance_from_origin() > rv + 1e-9) continue;
    candidates.push_back(i);
  }
  std::vector<Complex> centres;
  for (const auto& n : model.nearby_elements()) centres.push_back(n.inverse().apply(0.0));

  std::vector<std::size_t> canonical(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t c) {
    canonical[c] = canonical_conjugate(model, ball, centres, ball.element(candidates[c]));
  });
  std::sort(canonical.begin(), canonical.end());
  canonical.erase(std::unique(canonical.begin(), canonical.end()), canonical.end());

  std::vector<ClassRecord> out;
  std::vector<char> keep(canonical.size(), 0);
  parallel_for(canonical.size(), [&](std::size_t c) {
    keep[c] = is_proper_power(ball, ball.element(canonical[c])) ? 0 : 1;
  });
  for (std::size_t c = 0; c < canonical.size(); ++c) {
    if (!keep[c]) continue;
    GroupWord word(ball.word(canonical[c]));
    if (limits.max_word_len > 0 && word.size() > static_cast<std::size_t>(limits.max_word_len))
      continue;
    const Mobius& g = ball.element(canonical[c]);
    out.push_back({std::move(word), g, g.translation_length()});
  }
  if (out.size() > limits.max_classes)
    throw Error(ErrorCode::BudgetExceeded,
                std::to_string(out.size()) + " classes exceed the class cap");
  std::sort(out.begin(), out.end(), [](const ClassRecord& a, const ClassRecord& b) {
    return std::abs(a.length - b.length) > 1e-9 ? a.length < b.length : a.word < b.word;
  });
  return out;
}

std::vector<GroupWord> enumerate_words(const MetricModel& model, int max_word_len) {
  EnumerationLimits limits;
  limits.max_word_len = max_word_len;
  std::vector<GroupWord> out;
  for (auto& r : enumerate_classes(model, limits)) out.push_back(std::move(r.word));
  return out;
}

// ---------------------------------------------------------------------------
// Closed geodesics

namespace {

PeriodicOrbit orbit_from(const MetricModel& model, GroupWord word, const Mobius& g,
                         double node_spacing) {
  if (!g.hyperbolic() || std::abs(g.half_trace()) <= 1.0 + 1e-12)
    throw Error(ErrorCode::NotHyperbolic,
                "word " + word.str() + " has |trace| <= 2 and closes no geodesic");
  PeriodicOrbit orbit;
  orbit.word = std::move(word);
  Complex z;
  double angle;
  if (model.kind() == ModelKind::conformal) {
    const auto refined = detail::refine_conformal(model, g, node_spacing);
    z = refined.z;
    angle = refined.angle;
    orbit.length = refined.length;
    orbit.refinement = refined.report;
  } else {
    const DiskPoint p = axis_point_nearest_origin(g);
    z = p.z;
    angle = p.angle;
    orbit.length = g.translation_length();
  }
  const Wrapped w = model.wrap(z, angle);
  orbit.base = UnitTangent::at(w.z, w.angle);
  orbit.element = w.applied * g * w.applied.inverse();
  return orbit;
}

}  // namespace

PeriodicOrbit close_geodesic(const MetricModel& model, const GroupWord& word, double node_spacing) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "close_geodesic on a synthetic model; use synthetic_orbit");
  if (word.empty()) throw Error(ErrorCode::NotHyperbolic, "empty word");
  return orbit_from(model, word, word.element(model), node_spacing);
}

PeriodicOrbit close_geodesic(const MetricModel& model, const ClassRecord& record,
                             double node_spacing) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "close_geodesic on a synthetic model; use synthetic_orbit");
  return orbit_from(model, record.word, record.element, node_spacing);
}

PeriodicOrbit synthetic_orbit(const MetricModel& model) {
  if (model.kind() != ModelKind::synthetic || !model.profile().period())
    throw Error(ErrorCode::InvalidArgument, "synthetic_orbit needs a periodic synthetic profile");
  PeriodicOrbit orbit;
  orbit.length = *model.profile().period();
  orbit.base = UnitTangent::synthetic(0.0);
  return orbit;
}

// ---------------------------------------------------------------------------
// Sampling along orbits

namespace {

std::size_t loop_points(double length, double step) {
  return std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(length / step - 1e-9)));
}

// N states evenly spaced over one period, starting at the base.
std::vector<UnitTangent> loop_states(const MetricModel& model, const PeriodicOrbit& orbit,
                                     std::size_t n) {
  const double dt = orbit.length / static_cast<double>(n);
  std::vector<UnitTangent> out;
  out.reserve(n);
  if (model.kind() == ModelKind::synthetic) {
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(UnitTangent::synthetic(orbit.base.synthetic_time() + dt * static_cast<double>(i),
                                           orbit.base.synthetic_reversed()));
    return out;
  }
  if (model.kind() == ModelKind::fuchsian) {
    // Exact geodesic, re-wrapped after every stride.
    UnitTangent v = orbit.base;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(v);
      const DiskPoint next = hyperbolic_geodesic(v.z, v.angle, dt);
      v = model.wrap(UnitTangent::at(next.z, next.angle));
    }
    return out;
  }
  const long sub = std::max(1L, static_cast<long>(std::ceil(dt / kDefaultFlowStep - 1e-9)));
  const OrbitSegment seg = flow(model, orbit.base, orbit.length, dt / static_cast<double>(sub));
  for (std::size_t i = 0; i < n; ++i) out.push_back(seg.samples[i * static_cast<std::size_t>(sub)].v);
  return out;
}

}  // namespace

CurvatureTrack orbit_track(const MetricModel& model, const PeriodicOrbit& orbit, double step) {
  if (model.kind() != ModelKind::conformal)
    return CurvatureTrack::along(model, orbit.base, 0.0, orbit.length);
  const auto states = loop_states(model, orbit, loop_points(orbit.length, step));
  std::vector<double> K;
  K.reserve(states.size());
  for (const auto& v : states) K.push_back(model.curvature(v));
  return CurvatureTrack::periodic(std::move(K), orbit.length);
}

namespace {

CurvatureTrack reversed_track(const MetricModel& model, const PeriodicOrbit& orbit, double step) {
  if (model.kind() == ModelKind::synthetic) {
    const auto back = UnitTangent::synthetic(orbit.base.synthetic_time(), !orbit.base.synthetic_reversed());
    return CurvatureTrack::along(model, back, 0.0, orbit.length);
  }
  if (model.kind() == ModelKind::fuchsian) return CurvatureTrack::along(model, orbit.base, 0.0, orbit.length);
  const auto states = loop_states(model, orbit, loop_points(orbit.length, step));
  std::vector<double> K{model.curvature(states[0])};
  for (std::size_t i = states.size() - 1; i > 0; --i) K.push_back(model.curvature(states[i]));
  return CurvatureTrack::periodic(std::move(K), orbit.length);
}

// The invariant Riccati solution of a loop: J'/J of the expanding (or, when
// parabolic, the neutral) eigenvector of the Jacobi monodromy.
double invariant_slope(const CurvatureTrack& track, double length, double h) {
  const JacobiState c1 = jacobi_integrate(track, 0.0, length, 1.0, 0.0, h);
  const JacobiState c2 = jacobi_integrate(track, 0.0, length, 0.0, 1.0, h);
  const double m11 = c1.J, m21 = c1.Jp, m12 = c2.J, m22 = c2.Jp;
  const double half = 0.5 * (m11 + m22);
  const double mu = half + std::sqrt(std::max(0.0, half * half - 1.0));
  // Two candidate eigenvectors; keep the better conditioned one.
  const double ax = m12, ay = mu - m11;
  const double bx = mu - m22, by = m21;
  const bool first = std::hypot(ax, ay) >= std::hypot(bx, by);
  const double x = first ? ax : bx, y = first ? ay : by;
  if (std::abs(x) < 1e-300)
    throw Error(ErrorCode::NotConverged, "loop monodromy has no finite invariant slope");
  return y / x;
}

// k^u at the n loop points t_i = i * length / n.
std::vector<double> loop_curvature(const CurvatureTrack& track, double length, std::size_t n,
                                   const RiccatiConfig& cfg) {
  const double dt = length / static_cast<double>(n);
  const double h = dt / std::ceil(dt / cfg.h - 1e-9);
  const double u0 = invariant_slope(track, length, h);
  auto values = riccati_trajectory(track, 0.0, length - dt, u0, dt, h);
  if (values.size() != n)
    throw Error(ErrorCode::IntegratorDiverged, "Riccati sweep around the loop blew up");
  return values;
}

struct LoopProfile {
  std::vector<double> ku, ks, K;
  double dt = 0.0;
};

LoopProfile loop_profile(const MetricModel& model, const PeriodicOrbit& orbit, std::size_t n,
                         const RiccatiConfig& cfg) {
  LoopProfile p;
  p.dt = orbit.length / static_cast<double>(n);
  const CurvatureTrack fwd = orbit_track(model, orbit, p.dt);
  p.ku = loop_curvature(fwd, orbit.length, n, cfg);
  const auto back = loop_curvature(reversed_track(model, orbit, p.dt), orbit.length, n, cfg);
  p.ks.resize(n);
  p.K.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.ks[i] = back[(n - i) % n];
    p.K[i] = fwd(p.dt * static_cast<double>(i));
  }
  return p;
}

}  // namespace

std::vector<PotentialSample> orbit_samples(const MetricModel& model, const PeriodicOrbit& orbit,
                                           double step, bool with_unstable,
                                           const RiccatiConfig& cfg) {
  const std::size_t n = loop_points(orbit.length, step);
  const auto states = loop_states(model, orbit, n);
  std::vector<PotentialSample> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {states[i], model.curvature(states[i]), 0.0};
  if (with_unstable) {
    const auto ku = loop_curvature(orbit_track(model, orbit, step), orbit.length, n, cfg);
    for (std::size_t i = 0; i < n; ++i) out[i].ku = ku[i];
  }
  return out;
}

bool classify_regular(const MetricModel& model, const PeriodicOrbit& orbit, double T,
                      double eta_sing, const RiccatiConfig& cfg) {
  const std::size_t n = loop_points(orbit.length, std::min(1e-2, orbit.length / 8.0));
  const LoopProfile loop = loop_profile(model, orbit, n, cfg);
  // Unroll the loop so every point has a full window.
  const auto m = static_cast<std::size_t>(std::lround(T / loop.dt));
  HyperbolicityProfile profile;
  profile.step = loop.dt;
  profile.t0 = -static_cast<double>(m) * loop.dt;
  for (std::size_t i = 0; i < n + 2 * m; ++i) {
    const std::size_t k = (i + n * (m / n + 1) - m) % n;
    profile.ku.push_back(loop.ku[k]);
    profile.ks.push_back(loop.ks[k]);
    profile.K.push_back(loop.K[k]);
  }
  const auto series = profile.lambda_T_series(static_cast<double>(m) * loop.dt).second;
  return *std::max_element(series.begin(), series.end()) > eta_sing;
}

double orbit_potential(const MetricModel& model, PeriodicOrbit& orbit, const Potential& phi,
                       const RiccatiConfig& cfg, double step) {
  if (const auto it = orbit.phi_cache.find(phi.id); it != orbit.phi_cache.end()) return it->second;
  double value;
  const bool closed_form = phi.bumps.empty() && !phi.extra &&
                           (!phi.needs_unstable_curvature() || model.kind() == ModelKind::fuchsian);
  if (closed_form) {
    // On constant curvature -1, k^u = 1 and phi^u = -1 identically.
    value = (phi.constant - phi.unstable_weight) * orbit.length;
    if (!phi.needs_unstable_curvature()) value = phi.constant * orbit.length;
  } else {
    const auto samples = orbit_samples(model, orbit, step, phi.needs_unstable_curvature(), cfg);
    double sum = 0.0;
    for (const auto& s : samples) sum += phi.at(model, s);
    value = sum * orbit.length / static_cast<double>(samples.size());
  }
  orbit.phi_cache.emplace(phi.id, value);
  return value;
}

double orbit_average(const MetricModel& model, const PeriodicOrbit& orbit,
                     const std::function<double(const UnitTangent&)>& psi, double step) {
  const auto states = loop_states(model, orbit, loop_points(orbit.length, step));
  double sum = 0.0;
  for (const auto& v : states) sum += psi(v);
  return sum / static_cast<double>(states.size());
}

}  // namespace geoflow
