#include "geoflow/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/parallel.hpp"

namespace geoflow {

const char* method_name(PressureMethod method) {
  switch (method) {
    case PressureMethod::separated:
      return "separated";
    case PressureMethod::gurevich_upper:
      return "gurevich_upper";
    case PressureMethod::gurevich_lower:
      return "gurevich_lower";
  }
  return "unknown";
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

void check_grid(const std::vector<double>& grid, std::size_t min_points, const char* what) {
  if (grid.size() < min_points)
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " needs at least " + std::to_string(min_points) + " points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be strictly increasing");
}

}  // namespace

// ---------------------------------------------------------------------------
// Orbit tables

std::size_t OrbitTable::size() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.orbits.size();
  return n;
}

bool OrbitTable::declared_singular() const {
  for (const auto& c : components) {
    if (c.model.declared_singular()) return true;
    for (const auto& o : c.orbits)
      if (!o.regular) return true;
  }
  return false;
}

OrbitTable build_orbit_table(const MetricModel& model, double max_length, const RiccatiConfig& cfg) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "orbit tables of synthetic models: use add_synthetic_component");
  if (!(max_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_length must be positive");
  // Conformal lengths are at least e^{min u} times the hyperbolic ones.
  double u_min = 0.0;
  for (const auto& b : model.bumps()) u_min += std::min(0.0, b.amplitude);
  EnumerationLimits limits;
  limits.max_length = max_length * std::exp(-u_min);
  const auto classes = enumerate_classes(model, limits);

  std::vector<PeriodicOrbit> orbits(classes.size());
  parallel_for(classes.size(), [&](std::size_t i) {
    orbits[i] = close_geodesic(model, classes[i]);
    orbits[i].regular = classify_regular(model, orbits[i], 1.0, kSingularThreshold, cfg);
  });
  std::erase_if(orbits, [&](const PeriodicOrbit& o) { return o.length > max_length; });
  std::stable_sort(orbits.begin(), orbits.end(),
                   [](const PeriodicOrbit& a, const PeriodicOrbit& b) { return a.length < b.length; });

  OrbitTable table;
  table.max_length = max_length;
  table.components.push_back({model, std::move(orbits)});
  return table;
}

void add_synthetic_component(OrbitTable& table, const MetricModel& synthetic, const RiccatiConfig& cfg) {
  PeriodicOrbit orbit = synthetic_orbit(synthetic);
  orbit.regular = classify_regular(synthetic, orbit, 1.0, kSingularThreshold, cfg);
  table.components.push_back({synthetic, {std::move(orbit)}});
}

// ---------------------------------------------------------------------------
// Gurevich sums

namespace {

template <class F>
void for_window(OrbitTable& table, double t, double Delta, F&& body) {
  if (t > table.max_length + 1e-9)
    throw Error(ErrorCode::IncompleteSpectrum,
                "window ends at " + std::to_string(t) + " beyond the enumerated length " +
                    std::to_string(table.max_length));
  for (std::size_t c = 0; c < table.components.size(); ++c) {
    auto& comp = table.components[c];
    for (std::size_t i = 0; i < comp.orbits.size(); ++i) {
      auto& o = comp.orbits[i];
      if (o.regular && o.length > t - Delta && o.length <= t) body(comp, c, i);
    }
  }
}

// log of the window sum, computed with a running maximum; -inf when empty.
std::pair<std::size_t, double> log_window_sum(OrbitTable& table, const Potential& phi, double t,
                                              double Delta, const RiccatiConfig& cfg) {
  std::vector<double> exponents;
  for_window(table, t, Delta, [&](OrbitComponent& comp, std::size_t, std::size_t i) {
    exponents.push_back(orbit_potential(comp.model, comp.orbits[i], phi, cfg));
  });
  if (exponents.empty()) return {0, -std::numeric_limits<double>::infinity()};
  const double top = *std::max_element(exponents.begin(), exponents.end());
  double s = 0.0;
  for (double e : exponents) s += std::exp(e - top);
  return {exponents.size(), top + std::log(s)};
}

}  // namespace

double gurevich_sum(OrbitTable& table, const Potential& phi, double t, double Delta,
                    const RiccatiConfig& cfg) {
  if (!(Delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Delta must be positive");
  return std::exp(log_window_sum(table, phi, t, Delta, cfg).second);
}

GurevichPressure gurevich_pressure(OrbitTable& table, const Potential& phi, double Delta,
                                   const std::vector<double>& t_grid, const RiccatiConfig& cfg) {
  if (!(Delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Delta must be positive");
  check_grid(t_grid, 2, "t_grid");
  // Fill the potential caches before anything else reads them.
  for (auto& comp : table.components)
    parallel_for(comp.orbits.size(), [&](std::size_t i) {
      auto& o = comp.orbits[i];
      if (o.regular && o.length <= t_grid.back() + 1e-9 && o.length > t_grid.front() - Delta)
        orbit_potential(comp.model, o, phi, cfg);
    });

  GurevichPressure out;
  for (double t : t_grid) {
    const auto [count, log_sum] = log_window_sum(table, phi, t, Delta, cfg);
    if (count == 0) continue;
    out.rows.push_back({t, count, log_sum, log_sum / t, (log_sum + std::log(t)) / t});
  }
  if (out.rows.empty())
    throw Error(ErrorCode::EmptyWindow, "no regular orbits in any Gurevich window");

  // Tail half of the usable windows.
  const std::size_t first = out.rows.size() / 2;
  std::vector<double> ts, logs;
  double hi = -std::numeric_limits<double>::infinity(), lo = -hi;
  double raw_hi = hi, raw_lo = lo;
  for (std::size_t k = first; k < out.rows.size(); ++k) {
    const auto& r = out.rows[k];
    ts.push_back(r.t);
    logs.push_back(r.log_sum);
    hi = std::max(hi, r.corrected);
    lo = std::min(lo, r.corrected);
    raw_hi = std::max(raw_hi, r.log_sum_over_t);
    raw_lo = std::min(raw_lo, r.log_sum_over_t);
  }
  const LineFit fit = ts.size() >= 2 ? fit_line(ts, logs) : LineFit{};
  auto make = [&](double value, double raw, PressureMethod m) {
    PressureEstimate e;
    e.value = value;
    e.raw = raw;
    e.method = m;
    e.t_min = ts.front();
    e.t_max = ts.back();
    e.scale = Delta;
    e.slope = fit.slope;
    e.fit_residual = fit.residual;
    return e;
  };
  out.upper = make(hi, raw_hi, PressureMethod::gurevich_upper);
  out.lower = make(lo, raw_lo, PressureMethod::gurevich_lower);
  return out;
}

std::vector<ScanPoint> pressure_scan(OrbitTable& table, const std::vector<double>& q_grid, double Delta,
                                     const std::vector<double>& t_grid, const RiccatiConfig& cfg) {
  const bool clamp = table.declared_singular();
  std::vector<ScanPoint> out;
  for (double q : q_grid) {
    ScanPoint p;
    p.q = q;
    p.estimate = gurevich_pressure(table, Potential::geometric(q), Delta, t_grid, cfg);
    p.raw = p.estimate.upper.value;
    p.clamped = clamp ? std::max(p.raw, 0.0) : p.raw;
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Separated sets

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

double chart_circumradius() { return std::tanh(0.5 * MetricModel::circumradius()); }

double max_exponent(const MetricModel& model) {
  double u = 0.0;
  for (const auto& b : model.bumps()) u += std::max(0.0, b.amplitude);
  return u;
}

// Relative area density of the metric at z, in (0, 1] after dividing by `peak`.
double area_density(const MetricModel& model, Complex z) {
  const double r2 = std::norm(z);
  return 4.0 / ((1.0 - r2) * (1.0 - r2)) * std::exp(2.0 * model.exponent(z).u);
}

double peak_density(const MetricModel& model) {
  const double R = chart_circumradius();
  return 4.0 / ((1.0 - R * R) * (1.0 - R * R)) * std::exp(2.0 * max_exponent(model));
}

// Footpoints on a grid of spacing `grid` over [0, span]. Separation is read
// at scale delta, so a coarser RK4 step than the flow default is enough.
constexpr double kTrackStep = 1e-2;

std::vector<Complex> footprint(const MetricModel& model, const UnitTangent& v, double span, double grid) {
  const long stride = std::max(1L, std::lround(grid / kTrackStep));
  const auto seg = flow(model, v, span, grid / static_cast<double>(stride));
  std::vector<Complex> out;
  for (std::size_t i = 0; i < seg.samples.size(); i += static_cast<std::size_t>(stride))
    out.push_back(seg.samples[i].v.z);
  return out;
}

std::vector<std::vector<Complex>> footprints(const MetricModel& model,
                                             const std::vector<UnitTangent>& vs, double span,
                                             double grid) {
  std::vector<std::vector<Complex>> out(vs.size());
  parallel_for(vs.size(), [&](std::size_t i) { out[i] = footprint(model, vs[i], span, grid); });
  return out;
}

// Surface distance test d >= delta. On constant curvature a translate g(w) of
// w lies outside the octagon, so d(z, g w) is at least the depth of z (or w)
// inside the inscribed disk; that settles most pairs without the translate scan.
class SeparationTest {
 public:
  SeparationTest(const MetricModel& model, double delta)
      : model_(model), delta_(delta), fast_(model.kind() == ModelKind::fuchsian) {}

  bool at_least(Complex z, Complex w) const {
    if (!fast_) return model_.surface_distance(z, w) >= delta_;
    const double d0 = disk_distance(z, w);
    if (d0 < delta_) return false;
    const double inradius = 0.5 * MetricModel::systole();
    const double depth = inradius - std::min(disk_distance(0.0, z), disk_distance(0.0, w));
    if (depth >= delta_) return true;
    return model_.surface_distance(z, w) >= delta_;
  }

 private:
  const MetricModel& model_;
  double delta_;
  bool fast_;
};

// Latest times first: separation is usually largest there.
bool separated(const SeparationTest& test, const std::vector<Complex>& a, const std::vector<Complex>& b,
               std::size_t last) {
  for (std::size_t k = last + 1; k-- > 0;)
    if (test.at_least(a[k], b[k])) return true;
  return false;
}

std::vector<std::size_t> greedy_separated(const MetricModel& model,
                                          const std::vector<std::vector<Complex>>& tracks,
                                          std::size_t last, double delta) {
  const SeparationTest test(model, delta);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    bool ok = true;
    for (std::size_t j : kept)
      if (!separated(test, tracks[i], tracks[j], last)) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(i);
  }
  return kept;
}

std::size_t grid_index(double t, double grid) {
  return static_cast<std::size_t>(std::lround((t + 1.0) / grid));
}

void require_chart(const MetricModel& model, const char* what) {
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, std::string(what) + " needs a surface model");
}

}  // namespace

double bowen_distance(const MetricModel& model, const UnitTangent& v, const UnitTangent& w, double t,
                      double grid) {
  require_chart(model, "bowen_distance");
  const auto a = footprint(model, v, t + 1.0, grid);
  const auto b = footprint(model, w, t + 1.0, grid);
  double d = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
    d = std::max(d, model.surface_distance(a[k], b[k]));
  return d;
}

std::vector<UnitTangent> separated_set(const MetricModel& model,
                                       const std::vector<UnitTangent>& candidates, double t,
                                       double delta, double grid) {
  require_chart(model, "separated_set");
  if (!(delta > 0.0) || !(grid > 0.0) || t < 0.0)
    throw Error(ErrorCode::InvalidArgument, "separated_set needs t >= 0 and positive delta, grid");
  const auto tracks = footprints(model, candidates, t + 1.0, grid);
  std::vector<UnitTangent> out;
  for (std::size_t i : greedy_separated(model, tracks, grid_index(t, grid), delta))
    out.push_back(candidates[i]);
  return out;
}

std::vector<UnitTangent> dense_tangents(const MetricModel& model, std::size_t n) {
  require_chart(model, "dense_tangents");
  const double R = chart_circumradius();
  const double peak = peak_density(model);
  std::vector<UnitTangent> out;
  for (std::uint64_t i = 1; out.size() < n; ++i) {
    const double r = R * std::sqrt(radical_inverse(i, 2));
    const double a = 2.0 * std::numbers::pi * radical_inverse(i, 3);
    const Complex z = std::polar(r, a);
    if (!model.inside(z)) continue;
    if (radical_inverse(i, 5) * peak > area_density(model, z)) continue;
    out.push_back(UnitTangent::at(z, 2.0 * std::numbers::pi * radical_inverse(i, 7)));
  }
  return out;
}

std::vector<UnitTangent> unstable_arc_candidates(const MetricModel& model, std::size_t n_arcs,
                                                 std::size_t per_arc, double arc_length,
                                                 std::uint64_t seed, const RiccatiConfig& cfg) {
  require_chart(model, "unstable_arc_candidates");
  if (n_arcs == 0 || per_arc == 0) return {};
  // Different seeds start at different points of the sequence.
  const auto pool = dense_tangents(model, n_arcs * (seed + 1));
  std::vector<UnitTangent> out;
  out.reserve(n_arcs * per_arc);
  for (std::size_t a = 0; a < n_arcs; ++a) {
    const UnitTangent& base = pool[n_arcs * seed + a];
    for (std::size_t k = 0; k < per_arc; ++k) {
      const double s = per_arc == 1 ? 0.0
                                    : arc_length * (static_cast<double>(k) / static_cast<double>(per_arc - 1) - 0.5);
      out.push_back(unstable_perturbation(model, base, s, cfg));
    }
  }
  return out;
}

PressureEstimate pressure_separated(const MetricModel& model, const Potential& phi,
                                    const std::vector<double>& t_grid, const SeparatedOptions& opt,
                                    const RiccatiConfig& cfg, std::vector<SeparatedRow>* rows) {
  require_chart(model, "pressure_separated");
  check_grid(t_grid, 4, "t_grid");
  if (!(opt.delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  const std::size_t per_arc = std::max<std::size_t>(1, opt.n_candidates / std::max<std::size_t>(1, opt.n_arcs));
  const auto candidates =
      unstable_arc_candidates(model, opt.n_arcs, per_arc, opt.arc_length, opt.seed, cfg);
  const auto tracks = footprints(model, candidates, t_grid.back() + 1.0, opt.grid);

  std::vector<double> logs;
  for (double t : t_grid) {
    const auto kept = greedy_separated(model, tracks, grid_index(t, opt.grid), opt.delta);
    if (kept.size() < 10)
      throw Error(ErrorCode::InsufficientSeparation,
                  "only " + std::to_string(kept.size()) + " separated atoms at t = " + std::to_string(t));
    std::vector<double> exps(kept.size());
    parallel_for(kept.size(), [&](std::size_t k) {
      exps[k] = potential_integral(model, phi, candidates[kept[k]], t, opt.grid, cfg);
    });
    const double top = *std::max_element(exps.begin(), exps.end());
    double s = 0.0;
    for (double e : exps) s += std::exp(e - top);
    logs.push_back(top + std::log(s));
    if (rows) rows->push_back({t, kept.size(), logs.back()});
  }
  const LineFit fit = fit_line(t_grid, logs);
  PressureEstimate e;
  e.value = fit.slope;
  e.slope = fit.slope;
  e.method = PressureMethod::separated;
  e.t_min = t_grid.front();
  e.t_max = t_grid.back();
  e.scale = opt.delta;
  e.fit_residual = fit.residual;
  return e;
}

// ---------------------------------------------------------------------------
// Measures

double EmpiricalMeasure::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

double EmpiricalMeasure::integrate(const OrbitTable& table,
                                   const std::function<double(const UnitTangent&)>& psi,
                                   double step) const {
  std::vector<double> parts(atoms.size());
  parallel_for(atoms.size(), [&](std::size_t k) {
    const auto& a = atoms[k];
    const auto& comp = table.components.at(a.component);
    parts[k] = a.weight * orbit_average(comp.model, comp.orbits.at(a.index), psi, step);
  });
  double s = 0.0;
  for (double p : parts) s += p;
  return s;
}

EmpiricalMeasure weighted_orbit_measure(OrbitTable& table, const Potential& phi, double t,
                                        double Delta, const RiccatiConfig& cfg) {
  if (!(Delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Delta must be positive");
  EmpiricalMeasure m;
  std::vector<double> exps;
  for_window(table, t, Delta, [&](OrbitComponent& comp, std::size_t c, std::size_t i) {
    m.atoms.push_back({c, i, 0.0});
    exps.push_back(orbit_potential(comp.model, comp.orbits[i], phi, cfg));
  });
  if (m.atoms.empty())
    throw Error(ErrorCode::EmptyWindow, "no regular orbits with length in the window");
  const double top = *std::max_element(exps.begin(), exps.end());
  double s = 0.0;
  for (double e : exps) s += std::exp(e - top);
  for (std::size_t k = 0; k < exps.size(); ++k) m.atoms[k].weight = std::exp(exps[k] - top) / s;
  return m;
}

double liouville_average(const MetricModel& model,
                         const std::function<double(const UnitTangent&)>& psi, std::size_t n,
                         std::uint64_t seed) {
  require_chart(model, "liouville_average");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "liouville_average needs samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double R = chart_circumradius();
  const double peak = peak_density(model);
  double sum = 0.0;
  for (std::size_t k = 0; k < n;) {
    const Complex z{R * (2.0 * unit(rng) - 1.0), R * (2.0 * unit(rng) - 1.0)};
    const double accept = unit(rng);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    if (std::norm(z) >= R * R || !model.inside(z)) continue;
    if (accept * peak > area_density(model, z)) continue;
    sum += psi(UnitTangent::at(z, angle));
    ++k;
  }
  return sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Gap criterion and Bowen property

bool gap_criterion(const MetricModel& model, const Potential& phi, double h_top,
                   const std::vector<UnitTangent>& singular_samples, std::size_t n_dense,
                   const RiccatiConfig& cfg) {
  if (singular_samples.empty()) return true;
  double sup = -std::numeric_limits<double>::infinity();
  for (const auto& v : singular_samples) sup = std::max(sup, phi.at(model, v, cfg));
  const auto dense = dense_tangents(model, n_dense);
  std::vector<double> values(dense.size());
  parallel_for(dense.size(), [&](std::size_t i) { values[i] = phi.at(model, dense[i], cfg); });
  double inf = *std::min_element(values.begin(), values.end());
  // The singular samples belong to the bundle too.
  for (const auto& v : singular_samples) inf = std::min(inf, phi.at(model, v, cfg));
  return sup - inf < h_top;
}

double bowen_discrepancy(const MetricModel& model, const Potential& phi, const UnitTangent& v,
                         double t, double epsilon, std::size_t n_probes, std::uint64_t seed,
                         const RiccatiConfig& cfg) {
  require_chart(model, "bowen_discrepancy");
  if (!(epsilon > 0.0) || t < 0.0 || n_probes == 0)
    throw Error(ErrorCode::InvalidArgument, "bowen_discrepancy needs t >= 0, epsilon > 0, probes");
  // Proposals in (stable, unstable, flow) offsets scaled to the ball, then
  // rejected unless the Bowen distance is verified on the grid.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const double base = potential_integral(model, phi, v, t, 0.05, cfg);
  double worst = 0.0;
  std::size_t found = 0;
  for (std::size_t tries = 0; found < n_probes && tries < 50 * n_probes; ++tries) {
    const double a = sym(rng), b = sym(rng), c = sym(rng);
    UnitTangent w = stable_perturbation(model, v, 0.4 * epsilon * a, cfg);
    w = unstable_perturbation(model, w, 0.4 * epsilon * std::exp(-t) * b, cfg);
    w = flow_endpoint(model, w, 0.2 * epsilon * c);
    if (bowen_distance(model, v, w, t) >= epsilon) continue;
    ++found;
    worst = std::max(worst, std::abs(base - potential_integral(model, phi, w, t, 0.05, cfg)));
  }
  if (found == 0)
    throw Error(ErrorCode::NoProbesFound, "no probe landed in the Bowen ball");
  return worst;
}

}  // namespace geoflow
