#pragma once

#include <complex>
#include <numbers>

namespace geoflow {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Normalizes an angle to [0, 2pi).
double wrap_angle(double angle);

/// An element of SU(1,1) acting on the Poincare disk by
/// z -> (a z + b) / (conj(b) z + conj(a)).
struct Mobius {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  static Mobius identity() { return {}; }
  /// z -> e^{i angle} z
  static Mobius rotation(double angle);
  /// Hyperbolic translation along the real diameter taking 0 to tanh(length/2).
  static Mobius translation(double length);
  /// The unique element taking the unit vector (0, direction 0) to (z, angle).
  static Mobius moving(Complex z, double angle);
  /// Build from the four stored floats (Re a, Im a, Re b, Im b).
  static Mobius from_entries(double ar, double ai, double br, double bi);

  Mobius operator*(const Mobius& rhs) const;
  Mobius inverse() const { return {std::conj(a), -b}; }

  Complex apply(Complex z) const { return (a * z + b) / (std::conj(b) * z + std::conj(a)); }
  /// Complex derivative of the action at z.
  Complex derivative(Complex z) const;
  /// Change of a tangent direction angle under the action at z.
  double angle_shift(Complex z) const { return std::arg(derivative(z)); }

  double det() const { return std::norm(a) - std::norm(b); }
  double half_trace() const { return a.real(); }
  bool hyperbolic() const { return std::abs(a.real()) > 1.0; }
  /// 2 arccosh(|tr|/2); zero for non-hyperbolic elements.
  double translation_length() const;
  /// Distance from the origin to the translation axis (hyperbolic elements only).
  double axis_distance_from_origin() const;
  /// Hyperbolic distance between 0 and its image.
  double origin_displacement() const;
  /// Attracting and repelling fixed points on the unit circle (hyperbolic only).
  Complex attracting_fixed_point() const;
  Complex repelling_fixed_point() const;
};

/// Hyperbolic distance in the Poincare disk (curvature -1).
double disk_distance(Complex z, Complex w);

/// Point and direction reached after hyperbolic arclength s from (z, angle).
struct DiskPoint {
  Complex z;
  double angle;
};
DiskPoint hyperbolic_geodesic(Complex z, double angle, double s);

/// Closest point to the origin on the axis of a hyperbolic element, with the
/// direction of translation there.
DiskPoint axis_point_nearest_origin(const Mobius& g);

}  // namespace geoflow
