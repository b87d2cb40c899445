#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "geoflow/model.hpp"
#include "geoflow/periodic.hpp"
#include "geoflow/potential.hpp"
#include "geoflow/riccati.hpp"

namespace geoflow {

enum class PressureMethod { separated, gurevich_upper, gurevich_lower };
const char* method_name(PressureMethod method);

struct PressureEstimate {
  double value = 0.0;
  PressureMethod method = PressureMethod::separated;
  double t_min = 0.0, t_max = 0.0;
  double fit_residual = 0.0;  // rms residual of the log-sum line fit
  double scale = 0.0;         // delta (separated) or Delta (Gurevich)
  double slope = 0.0;         // least-squares slope of the log sums against t
  double raw = 0.0;           // Gurevich only: extreme of (1/t) log sum, no prefactor correction
};

// ---------------------------------------------------------------------------
// Orbit tables

struct OrbitComponent {
  MetricModel model;
  std::vector<PeriodicOrbit> orbits;
};

/// Closed orbits of one or more surfaces, complete up to max_length.
struct OrbitTable {
  std::vector<OrbitComponent> components;
  double max_length = 0.0;

  std::size_t size() const;
  /// A component model declares singular orbits, or a tabulated orbit is singular.
  bool declared_singular() const;
};

/// Enumerates, closes and classifies every primitive class up to max_length.
OrbitTable build_orbit_table(const MetricModel& model, double max_length,
                             const RiccatiConfig& cfg = {});
/// Adds the closed orbit of a periodic synthetic profile as its own component.
void add_synthetic_component(OrbitTable& table, const MetricModel& synthetic,
                             const RiccatiConfig& cfg = {});

// ---------------------------------------------------------------------------
// Gurevich sums

/// Sum of e^Phi over regular orbits with length in (t - Delta, t].
double gurevich_sum(OrbitTable& table, const Potential& phi, double t, double Delta,
                    const RiccatiConfig& cfg = {});

struct GurevichRow {
  double t = 0.0;
  std::size_t count = 0;
  double log_sum = 0.0;
  double log_sum_over_t = 0.0;
  double corrected = 0.0;  // (1/t) log(t * sum)
};

struct GurevichPressure {
  PressureEstimate upper, lower;
  std::vector<GurevichRow> rows;
};

/// Upper and lower estimates over the tail half of t_grid. Windows with no
/// orbits are skipped.
GurevichPressure gurevich_pressure(OrbitTable& table, const Potential& phi, double Delta,
                                   const std::vector<double>& t_grid,
                                   const RiccatiConfig& cfg = {});

struct ScanPoint {
  double q = 0.0;
  double raw = 0.0;
  double clamped = 0.0;
  GurevichPressure estimate;
};

/// q -> P(q phi^u) from the upper Gurevich estimate; clamped at zero from
/// below when the table declares a singular component.
std::vector<ScanPoint> pressure_scan(OrbitTable& table, const std::vector<double>& q_grid,
                                     double Delta, const std::vector<double>& t_grid,
                                     const RiccatiConfig& cfg = {});

// ---------------------------------------------------------------------------
// Separated sets

/// Bowen distance: largest footpoint distance over a grid of [0, t + 1]
/// (the Knieper distance of f_tau v and f_tau w maximised over tau in [0, t]).
double bowen_distance(const MetricModel& model, const UnitTangent& v, const UnitTangent& w, double t,
                      double grid = 0.05);

/// Greedy (t, delta)-separated subset in input order.
std::vector<UnitTangent> separated_set(const MetricModel& model,
                                       const std::vector<UnitTangent>& candidates, double t,
                                       double delta, double grid = 0.05);

/// Candidates on short unstable arcs through quasi-random base vectors.
std::vector<UnitTangent> unstable_arc_candidates(const MetricModel& model, std::size_t n_arcs,
                                                 std::size_t per_arc, double arc_length,
                                                 std::uint64_t seed,
                                                 const RiccatiConfig& cfg = {});

struct SeparatedOptions {
  double delta = 0.3;
  std::size_t n_candidates = 3200;
  std::size_t n_arcs = 4;
  double arc_length = 0.01;
  std::uint64_t seed = 1;
  double grid = 0.05;
};

struct SeparatedRow {
  double t = 0.0;
  std::size_t atoms = 0;
  double log_lambda = 0.0;
};

/// Slope of log Lambda(phi, delta, t) against t.
PressureEstimate pressure_separated(const MetricModel& model, const Potential& phi,
                                    const std::vector<double>& t_grid,
                                    const SeparatedOptions& options = {},
                                    const RiccatiConfig& cfg = {},
                                    std::vector<SeparatedRow>* rows = nullptr);

// ---------------------------------------------------------------------------
// Measures

struct EmpiricalMeasure {
  struct Atom {
    std::size_t component = 0;
    std::size_t index = 0;
    double weight = 0.0;
  };
  std::vector<Atom> atoms;

  double total_weight() const;
  /// Sum of weight * (1/|gamma|) * loop integral of psi.
  double integrate(const OrbitTable& table, const std::function<double(const UnitTangent&)>& psi,
                   double step = 1e-2) const;
};

EmpiricalMeasure weighted_orbit_measure(OrbitTable& table, const Potential& phi, double t,
                                        double Delta, const RiccatiConfig& cfg = {});

/// Monte Carlo average of psi over the unit tangent bundle with the Liouville
/// measure (uniform direction, metric area on the footpoint).
double liouville_average(const MetricModel& model,
                         const std::function<double(const UnitTangent&)>& psi, std::size_t n,
                         std::uint64_t seed);

/// Quasi-random unit tangents over the fundamental octagon (Halton footpoints
/// weighted by area, angles from a further Halton axis).
std::vector<UnitTangent> dense_tangents(const MetricModel& model, std::size_t n);

// ---------------------------------------------------------------------------
// Gap criterion and Bowen property

/// sup over singular samples of phi minus inf over a dense sample of the
/// unit tangent bundle, compared with h_top. The supremum over an empty
/// singular set is -infinity, so the criterion then holds.
bool gap_criterion(const MetricModel& model, const Potential& phi, double h_top,
                   const std::vector<UnitTangent>& singular_samples, std::size_t n_dense = 4096,
                   const RiccatiConfig& cfg = {});

/// Largest |Phi(v, t) - Phi(w, t)| over probes w verified to lie in the
/// Bowen ball B_t(v, epsilon).
double bowen_discrepancy(const MetricModel& model, const Potential& phi, const UnitTangent& v,
                         double t, double epsilon, std::size_t n_probes, std::uint64_t seed,
                         const RiccatiConfig& cfg = {});

}  // namespace geoflow
