#include "geoflow/hyperbolic.hpp"

#include <cmath>

namespace geoflow {

double wrap_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

Mobius Mobius::rotation(double angle) {
  return {std::polar(1.0, angle / 2.0), Complex{0.0, 0.0}};
}

Mobius Mobius::translation(double length) {
  return {Complex{std::cosh(length / 2.0), 0.0}, Complex{std::sinh(length / 2.0), 0.0}};
}

Mobius Mobius::moving(Complex z, double angle) {
  const double s = 1.0 / std::sqrt(1.0 - std::norm(z));
  const Mobius to_z{Complex{s, 0.0}, z * s};
  return to_z * rotation(angle);
}

Mobius Mobius::from_entries(double ar, double ai, double br, double bi) {
  return {Complex{ar, ai}, Complex{br, bi}};
}

Mobius Mobius::operator*(const Mobius& rhs) const {
  // [[a, b], [conj b, conj a]] products stay in the same form.
  return {a * rhs.a + b * std::conj(rhs.b), a * rhs.b + b * std::conj(rhs.a)};
}

Complex Mobius::derivative(Complex z) const {
  const Complex d = std::conj(b) * z + std::conj(a);
  return det() / (d * d);
}

double Mobius::translation_length() const {
  const double ht = std::abs(a.real());
  return ht > 1.0 ? 2.0 * std::acosh(ht) : 0.0;
}

double Mobius::axis_distance_from_origin() const {
  const double sh = std::sinh(translation_length() / 2.0);
  const double c = std::abs(b) / sh;
  return c > 1.0 ? std::acosh(c) : 0.0;
}

double Mobius::origin_displacement() const { return 2.0 * std::asinh(std::abs(b)); }

namespace {

void fixed_points(const Mobius& g, Complex& p1, Complex& p2) {
  const double root = std::sqrt(std::max(0.0, g.a.real() * g.a.real() - 1.0));
  const Complex cb = std::conj(g.b);
  if (std::abs(cb) < 1e-300) {
    // Diagonal element: only possible for elliptic ones in SU(1,1).
    p1 = p2 = Complex{1.0, 0.0};
    return;
  }
  p1 = (Complex{0.0, g.a.imag()} + root) / cb;
  p2 = (Complex{0.0, g.a.imag()} - root) / cb;
  p1 /= std::abs(p1);
  p2 /= std::abs(p2);
}

}  // namespace

Complex Mobius::attracting_fixed_point() const {
  Complex p1, p2;
  fixed_points(*this, p1, p2);
  return std::abs(derivative(p1)) < std::abs(derivative(p2)) ? p1 : p2;
}

Complex Mobius::repelling_fixed_point() const {
  Complex p1, p2;
  fixed_points(*this, p1, p2);
  return std::abs(derivative(p1)) < std::abs(derivative(p2)) ? p2 : p1;
}

double disk_distance(Complex z, Complex w) {
  const double num = 2.0 * std::norm(z - w);
  const double den = (1.0 - std::norm(z)) * (1.0 - std::norm(w));
  return std::acosh(1.0 + num / den);
}

DiskPoint hyperbolic_geodesic(Complex z, double angle, double s) {
  const Mobius m = Mobius::moving(z, angle);
  const Complex w{std::tanh(s / 2.0), 0.0};
  return {m.apply(w), wrap_angle(m.angle_shift(w))};
}

DiskPoint axis_point_nearest_origin(const Mobius& g) {
  const Complex plus = g.attracting_fixed_point();
  const Complex minus = g.repelling_fixed_point();
  const Complex mid = plus + minus;
  const double rho = g.axis_distance_from_origin();
  if (std::abs(mid) < 1e-14 || rho < 1e-14) {
    return {Complex{0.0, 0.0}, wrap_angle(std::arg(plus))};
  }
  const Complex unit = mid / std::abs(mid);
  const Complex p = std::tanh(rho / 2.0) * unit;
  // The axis meets the radius through p at a right angle.
  const double side = (std::conj(unit) * plus).imag();
  const double dir = std::arg(unit) + (side > 0.0 ? 0.5 : -0.5) * std::numbers::pi;
  return {p, wrap_angle(dir)};
}

}  // namespace geoflow
