#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoflow/hyperbolic.hpp"

namespace geoflow {

enum class ModelKind { fuchsian, conformal, synthetic };

const char* kind_name(ModelKind kind);

/// A point of the unit tangent bundle. For chart models `z` is the footpoint
/// in the Poincare disk; for synthetic models `z.real()` is the orbit time and
/// `angle` is 0 (forward) or pi (time-reversed).
struct UnitTangent {
  Complex z{0.0, 0.0};
  double angle = 0.0;

  static UnitTangent at(Complex z, double angle) { return {z, wrap_angle(angle)}; }
  static UnitTangent synthetic(double time, bool reversed = false);

  double synthetic_time() const { return z.real(); }
  bool synthetic_reversed() const;
};

/// Compactly supported conformal bump a * exp(1 - 1/(1 - |z-c|^2/r^2)) in
/// chart coordinates.
struct Bump {
  Complex center;
  double radius = 0.1;
  double amplitude = 0.0;
};

/// Curvature along a single notional orbit. Knots are joined by C^1 cubic
/// smoothsteps and held constant outside the knot range. With a period the
/// profile repeats with that period (knots must lie in [0, period]).
class SyntheticProfile {
 public:
  SyntheticProfile() = default;
  explicit SyntheticProfile(std::vector<std::pair<double, double>> knots,
                            std::optional<double> period = std::nullopt);

  static SyntheticProfile constant(double k, std::optional<double> period = std::nullopt);
  /// Flat for |t| < inner, curvature `outer_k` for |t| > outer, smooth between.
  static SyntheticProfile flat_core(double inner, double outer, double outer_k = -1.0);

  double operator()(double t) const;
  double sup_abs() const;
  double max() const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  const std::optional<double>& period() const { return period_; }

 private:
  std::vector<std::pair<double, double>> knots_;
  std::optional<double> period_;
};

/// Conformal factor sigma = log(metric density) and its chart gradient.
struct ConformalFactor {
  double sigma = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// Result of moving a chart point into the fundamental octagon.
struct Wrapped {
  Complex z;
  double angle;
  Mobius applied;  // z_wrapped = applied.apply(z_original)
  int steps = 0;
};

struct ValidationReport {
  ModelKind kind{};
  double max_det_error = 0.0;
  double max_curvature = -1.0;
  Complex max_curvature_location{0.0, 0.0};
  double min_curvature = -1.0;
  double injectivity_radius = 0.0;
  bool ok = true;
};

/// Immutable surface geometry. Construct through the make_* factories.
class MetricModel {
 public:
  ModelKind kind() const { return kind_; }
  const std::array<Mobius, 8>& generators() const { return generators_; }
  const std::vector<Bump>& bumps() const { return bumps_; }
  const SyntheticProfile& profile() const { return profile_; }
  const ValidationReport& report() const { return report_; }

  /// Whether the model is declared to contain singular (flat) orbits.
  bool declared_singular() const { return declared_singular_; }
  MetricModel with_declared_singular(bool flag) const;

  bool constant_curvature() const { return kind_ == ModelKind::fuchsian; }

  /// Gaussian curvature at a chart point (wrapped into the domain first).
  double curvature_at(Complex z) const;
  /// Curvature at the footpoint of v; for synthetic models K(orbit time).
  double curvature(const UnitTangent& v) const;

  /// Conformal exponent u and its derivatives at a chart point, respecting
  /// deck invariance. Returns {u, grad u (complex), Euclidean laplacian}.
  struct ExponentJet {
    double u = 0.0;
    Complex grad{0.0, 0.0};
    double laplacian = 0.0;
  };
  ExponentJet exponent(Complex z) const;
  ConformalFactor conformal_factor(Complex z) const;

  /// Dirichlet test: true when z lies in the closed fundamental octagon
  /// (up to `tol`).
  bool inside(Complex z, double tol = 1e-9) const;
  Wrapped wrap(Complex z, double angle) const;
  UnitTangent wrap(const UnitTangent& v) const;

  /// The same footpoint with the opposite direction.
  UnitTangent reverse(const UnitTangent& v) const;

  /// Surface distance between footpoints: minimum over nearby deck translates.
  /// Conformal models scale the hyperbolic distance by e^u at the midpoint.
  double surface_distance(Complex z, Complex w) const;
  /// Local metric distance in the universal cover (no deck minimization).
  double cover_distance(Complex z, Complex w) const;

  /// Deck elements whose tiles touch the fundamental octagon (identity first).
  const std::vector<Mobius>& nearby_elements() const { return nearby_; }

  /// Euclidean radius of the disk inscribed in the octagon.
  static double inscribed_chart_radius();
  /// Hyperbolic distance from the center to an octagon vertex.
  static double circumradius();
  /// Translation length of the side pairings (the systole).
  static double systole();

 private:
  friend MetricModel make_fuchsian_bolza();
  friend MetricModel make_fuchsian(const std::array<Mobius, 8>& generators);
  friend MetricModel make_conformal(const MetricModel& base, std::vector<Bump> bumps,
                                    double tolerance);
  friend MetricModel make_synthetic(SyntheticProfile profile);

  MetricModel() = default;
  void build_tables();

  ModelKind kind_ = ModelKind::fuchsian;
  std::array<Mobius, 8> generators_{};
  std::array<Complex, 8> side_centers_{};
  std::vector<Mobius> nearby_;
  std::vector<Bump> bumps_;
  SyntheticProfile profile_;
  ValidationReport report_;
  bool declared_singular_ = false;
};

/// The Bolza surface: regular octagon with opposite sides paired.
MetricModel make_fuchsian_bolza();
/// Octagon model from explicit side pairings; generator k+4 must be the
/// inverse of generator k.
MetricModel make_fuchsian(const std::array<Mobius, 8>& generators);
/// Conformal perturbation e^{2u} of a fuchsian base metric. Throws
/// PositiveCurvature when sampled curvature exceeds `tolerance`.
MetricModel make_conformal(const MetricModel& base, std::vector<Bump> bumps,
                           double tolerance = 1e-9);
MetricModel make_synthetic(SyntheticProfile profile);

/// Knieper distance: max over t in [0,1] of the surface distance between the
/// footpoints of f_t v and f_t w. Not defined for synthetic models.
double knieper_distance(const MetricModel& model, const UnitTangent& v, const UnitTangent& w,
                        double h = 1e-3);

}  // namespace geoflow
