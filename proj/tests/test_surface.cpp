#include <doctest.h>

#include <cmath>
#include <random>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/model.hpp"

using namespace geoflow;

namespace {

UnitTangent random_tangent(const MetricModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.0, 0.6), a(0.0, kTwoPi);
  return model.wrap(UnitTangent::at(std::polar(r(rng), a(rng)), a(rng)));
}

double tangent_gap(const UnitTangent& v, const UnitTangent& w) {
  const double da = std::abs(std::remainder(v.angle - w.angle, kTwoPi));
  return std::abs(v.z - w.z) + da;
}

}  // namespace

TEST_SUITE("surface_models") {

TEST_CASE("bolza generators") {
  const auto model = make_fuchsian_bolza();
  REQUIRE(model.generators().size() == 8);
  for (const auto& g : model.generators()) {
    CHECK(std::abs(g.det() - 1.0) < 1e-12);
    // Systole from the half trace of each side pairing.
    CHECK(2.0 * std::acosh(std::abs(g.half_trace())) ==
          doctest::Approx(2.0 * std::acosh(1.0 + std::sqrt(2.0))).epsilon(1e-12));
  }
  for (int k = 0; k < 4; ++k) {
    const Mobius p = model.generators()[k] * model.generators()[k + 4];
    CHECK(std::abs(std::abs(p.a) - 1.0) < 1e-12);
    CHECK(std::abs(p.b) < 1e-12);
  }
  CHECK(model.curvature_at({0.3, -0.2}) == -1.0);
  CHECK(MetricModel::systole() == doctest::Approx(3.0571421).epsilon(1e-7));
}

TEST_CASE("wrapping lands in the octagon") {
  const auto model = make_fuchsian_bolza();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(0.0, 0.995), a(0.0, kTwoPi);
  for (int i = 0; i < 500; ++i) {
    const Wrapped w = model.wrap(std::polar(r(rng), a(rng)), a(rng));
    CHECK(model.inside(w.z));
  }
}

TEST_CASE("flow for zero time is the identity") {
  const auto model = make_fuchsian_bolza();
  const UnitTangent v = UnitTangent::at({0.1, 0.2}, 1.0);
  const auto seg = flow(model, v, 0.0);
  REQUIRE(seg.samples.size() == 1);
  CHECK(tangent_gap(seg.samples[0].v, v) < 1e-15);
}

TEST_CASE("sample count") {
  const auto model = make_fuchsian_bolza();
  const auto seg = flow(model, UnitTangent::at({0.0, 0.0}, 0.3), 1.2345, 1e-2);
  CHECK(seg.samples.size() == 124);
}

TEST_CASE("flow agrees with the closed-form hyperbolic geodesic") {
  const auto model = make_fuchsian_bolza();
  const Complex z{0.2, -0.1};
  const auto states = flow_cover(model, {z, 0.7}, 4.0);
  const DiskPoint exact = hyperbolic_geodesic(z, 0.7, 4.0);
  CHECK(std::abs(states.back().z - exact.z) < 1e-10);
  CHECK(std::abs(std::remainder(states.back().angle - exact.angle, kTwoPi)) < 1e-9);
}

TEST_CASE("reversibility") {
  for (const auto& model : {make_fuchsian_bolza(),
                            make_conformal(make_fuchsian_bolza(), {{{0.1, 0.1}, 0.3, 0.02}})}) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5; ++i) {
      const UnitTangent v = random_tangent(model, rng);
      const double t = 2.4 * (i + 1);
      const UnitTangent w = flow_endpoint(model, v, t);
      const UnitTangent back = flow(model, w, -t).end;
      CHECK(tangent_gap(back, v) < 1e-8);
    }
  }
}

TEST_CASE("axis closure") {
  const auto model = make_fuchsian_bolza();
  for (const auto& g : model.generators()) {
    const DiskPoint p = axis_point_nearest_origin(g);
    const UnitTangent v = model.wrap(UnitTangent::at(p.z, p.angle));
    const UnitTangent w = flow(model, v, g.translation_length()).end;
    CHECK(tangent_gap(w, v) < 1e-8);
  }
}

TEST_CASE("deck equivariance") {
  const auto model = make_conformal(make_fuchsian_bolza(), {{{-0.2, 0.1}, 0.25, 0.03}});
  const Mobius g = model.generators()[2] * model.generators()[5];
  const CoverState s{{0.15, 0.05}, 2.0};
  const CoverState gs{g.apply(s.z), s.angle + g.angle_shift(s.z)};
  const auto a = flow_cover(model, s, 6.0);
  const auto b = flow_cover(model, gs, 6.0);
  const Complex mapped = g.apply(a.back().z);
  CHECK(std::abs(mapped - b.back().z) < 1e-8);
}

TEST_CASE("unit speed") {
  const auto model = make_conformal(make_fuchsian_bolza(), {{{0.0, 0.0}, 0.4, 0.05}});
  const auto states = flow_cover(model, {{0.05, 0.3}, 4.0}, 3.0, 1e-3, 100);
  for (const auto& s : states) CHECK(std::abs(unit_speed_defect(model, s)) < 1e-10);
}

TEST_CASE("conformal models") {
  const auto base = make_fuchsian_bolza();
  const auto same = make_conformal(base, {});
  CHECK(same.curvature_at({0.4, 0.1}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(same.report().max_curvature == doctest::Approx(-1.0));

  const auto small = make_conformal(base, {{{0.1, 0.0}, 0.3, 0.02}});
  CHECK(small.report().max_curvature > -1.0);
  CHECK(small.report().max_curvature <= 0.0);

  // K at the bump center: e^{-2a}(-1 + ((1-|c|^2)/2)^2 * 2a*(2/r^2)), with
  // the Euclidean laplacian of the bump equal to -4a/r^2 at its center.
  const Bump big{{0.0, 0.0}, 0.2, 0.5};
  const double center_k = std::exp(-2.0 * big.amplitude) *
                          (-1.0 + 0.25 * 4.0 * big.amplitude / (big.radius * big.radius));
  REQUIRE(center_k > 0.0);
  CHECK_THROWS_AS(make_conformal(base, {big}), Error);
  try {
    make_conformal(base, {big});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PositiveCurvature);
  }
}

TEST_CASE("analytic laplacian matches second differences") {
  const auto model = make_conformal(make_fuchsian_bolza(), {{{0.1, -0.1}, 0.35, 0.04}});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-0.3, 0.3);
  for (int i = 0; i < 20; ++i) {
    const Complex z{c(rng), c(rng)};
    const double h = 1e-4;
    const double u0 = model.exponent(z).u;
    const double lap = (model.exponent(z + h).u + model.exponent(z - h).u +
                        model.exponent(z + Complex{0, h}).u +
                        model.exponent(z - Complex{0, h}).u - 4.0 * u0) /
                       (h * h);
    CHECK(std::abs(lap - model.exponent(z).laplacian) < 1e-4);
  }
}

TEST_CASE("synthetic models") {
  const auto flat = make_synthetic(SyntheticProfile::constant(0.0));
  CHECK(flat.declared_singular());
  const auto seg = flow(flat, UnitTangent::synthetic(1.0), 2.0, 0.5);
  CHECK(seg.samples.size() == 5);
  CHECK(seg.end.synthetic_time() == doctest::Approx(3.0));
  CHECK_THROWS_AS(make_synthetic(SyntheticProfile::constant(0.5)), Error);
  CHECK_THROWS_AS(knieper_distance(flat, seg.initial, seg.end), Error);
  const auto mixed = make_synthetic(SyntheticProfile::flat_core(4.0, 5.0));
  CHECK(mixed.curvature(UnitTangent::synthetic(0.0)) == 0.0);
  CHECK(mixed.curvature(UnitTangent::synthetic(-6.0)) == -1.0);
}

TEST_CASE("knieper distance") {
  const auto model = make_fuchsian_bolza();
  const UnitTangent v = UnitTangent::at({0.05, -0.02}, 0.4);
  CHECK(knieper_distance(model, v, v) == 0.0);
  for (double theta : {0.01, 0.05, 0.2}) {
    const UnitTangent w = UnitTangent::at(v.z, v.angle + theta);
    const double d = knieper_distance(model, v, w);
    CHECK(std::abs(d - knieper_distance(model, w, v)) < 1e-9);
    // Same footpoint, angle theta: the geodesics spread to 2 asinh(sinh(1) sin(theta/2)).
    const double exact = 2.0 * std::asinh(std::sinh(1.0) * std::sin(theta / 2.0));
    CHECK(d == doctest::Approx(exact).epsilon(1e-8));
    CHECK(d >= 0.5 * theta);
    CHECK(d <= 2.0 * theta);
  }
}

}  // TEST_SUITE
