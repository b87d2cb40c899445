#include <doctest.h>

#include <cmath>
#include <random>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/pressure.hpp"

using namespace geoflow;

namespace {

OrbitTable& bolza_table() {
  static OrbitTable table = build_orbit_table(make_fuchsian_bolza(), 10.0);
  return table;
}

std::vector<double> grid(double a, double b, double step) {
  std::vector<double> g;
  for (double t = a; t <= b + 1e-9; t += step) g.push_back(t);
  return g;
}

SeparatedOptions light() {
  SeparatedOptions o;
  o.n_candidates = 1200;
  return o;
}

}  // namespace

TEST_SUITE("pressure") {
  TEST_CASE("separated sets: trivial cases") {
    const auto bolza = make_fuchsian_bolza();
    const UnitTangent v = UnitTangent::at({0.1, 0.2}, 0.4);
    CHECK(separated_set(bolza, {v, v, v}, 3.0, 0.3).size() == 1);
    const UnitTangent w = UnitTangent::at({-0.3, 0.1}, 0.4);
    REQUIRE(bolza.surface_distance(v.z, w.z) >= 0.3);
    CHECK(separated_set(bolza, {v, w}, 3.0, 0.3).size() == 2);
  }

  TEST_CASE("greedy separated set is pairwise separated") {
    const auto bolza = make_fuchsian_bolza();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<UnitTangent> cand;
    while (cand.size() < 200) {
      const Complex z{u(rng), u(rng)};
      if (bolza.inside(z)) cand.push_back(UnitTangent::at(z, 12.0 * u(rng)));
    }
    const double t = 6.0, delta = 0.3;
    const auto kept = separated_set(bolza, cand, t, delta);
    REQUIRE(kept.size() >= 2);
    // Oracle: default flow step, full translate search, every pair.
    std::vector<std::vector<Complex>> tracks;
    for (const auto& v : kept) {
      const auto seg = flow(bolza, v, t + 1.0);
      std::vector<Complex> tr;
      for (std::size_t i = 0; i < seg.samples.size(); i += 50) tr.push_back(seg.samples[i].v.z);
      tracks.push_back(tr);
    }
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        double d = 0.0;
        for (std::size_t k = 0; k < tracks[i].size(); ++k)
          d = std::max(d, bolza.surface_distance(tracks[i][k], tracks[j][k]));
        CHECK(d >= delta);
      }
  }

  TEST_CASE("separated pressure: shift and monotonicity") {
    const auto bolza = make_fuchsian_bolza();
    const auto tg = grid(4.0, 7.0, 1.0);
    const auto p0 = pressure_separated(bolza, Potential::zero(), tg, light());
    const auto p1 = pressure_separated(bolza, Potential::constant_value(0.4), tg, light());
    const auto pu = pressure_separated(bolza, Potential::geometric(1.0), tg, light());
    CHECK(std::abs(p0.value - 1.0) < 0.2);
    CHECK(std::abs(p1.value - p0.value - 0.4) < 0.05);
    CHECK(pu.value <= p0.value + 2.0 * p0.fit_residual + 1e-12);
    CHECK(std::abs(pu.value) < 0.2);
    CHECK(p0.t_max > p0.t_min);
    SeparatedOptions sparse = light();
    sparse.n_candidates = 8;
    CHECK_THROWS_AS(pressure_separated(bolza, Potential::zero(), tg, sparse), geoflow::Error);
  }

  TEST_CASE("Gurevich sums against a re-scan of the table") {
    auto& table = bolza_table();
    CHECK(gurevich_sum(table, Potential::zero(), 2.0, 1.0) == 0.0);
    std::size_t brute = 0;
    for (const auto& o : table.components[0].orbits)
      if (o.length > 7.0 && o.length <= 8.0) ++brute;
    CHECK(gurevich_sum(table, Potential::zero(), 8.0, 1.0) == doctest::Approx(static_cast<double>(brute)).epsilon(1e-12));
    double weighted = 0.0;
    for (const auto& o : table.components[0].orbits)
      if (o.length > 7.0 && o.length <= 8.0) weighted += std::exp(-0.5 * o.length);
    CHECK(gurevich_sum(table, Potential::geometric(0.5), 8.0, 1.0) == doctest::Approx(weighted).epsilon(1e-9));
    CHECK_THROWS_AS(gurevich_sum(table, Potential::zero(), 11.0, 1.0), geoflow::Error);
  }

  TEST_CASE("Gurevich pressure on Bolza") {
    auto& table = bolza_table();
    const auto tg = grid(4.0, 10.0, 0.5);
    const auto p0 = gurevich_pressure(table, Potential::zero(), 1.0, tg);
    CHECK(p0.upper.value >= 0.8);
    CHECK(p0.upper.value <= 1.2);
    CHECK(p0.lower.value >= 0.8);
    CHECK(p0.lower.value <= p0.upper.value);
    const auto pu = gurevich_pressure(table, Potential::geometric(1.0), 1.0, tg);
    CHECK(std::abs(pu.upper.value) < 0.2);
    CHECK(std::abs(pu.lower.value) < 0.2);
    // Phi shifts by c|gamma|, |gamma| in (t - 1, t].
    const double c = 0.3;
    const auto pc = gurevich_pressure(table, Potential::constant_value(c), 1.0, tg);
    CHECK(std::abs(pc.upper.value - p0.upper.value - c) <= c / pc.upper.t_min + 1e-12);
    CHECK(std::abs(pc.lower.value - p0.lower.value - c) <= c / pc.lower.t_min + 1e-12);
  }

  TEST_CASE("pressure scan follows the line 1 - q") {
    auto& table = bolza_table();
    const auto tg = grid(4.0, 10.0, 0.5);
    const auto scan = pressure_scan(table, {-1.0, 0.0, 0.5}, 1.0, tg);
    const double p0 = gurevich_pressure(table, Potential::zero(), 1.0, tg).upper.value;
    CHECK(scan[1].raw == p0);
    for (const auto& p : scan) {
      CHECK(std::abs(p.raw - (p0 - p.q)) < 0.2);
      CHECK(p.clamped == p.raw);
    }
  }

  TEST_CASE("declared singular composite is clamped") {
    OrbitTable table = bolza_table();
    add_synthetic_component(table, make_synthetic(SyntheticProfile::constant(0.0, 4.0)));
    CHECK(table.declared_singular());
    CHECK_FALSE(table.components.back().orbits.front().regular);
    const auto scan = pressure_scan(table, {0.5, 1.5, 2.0}, 1.0, grid(4.0, 10.0, 0.5));
    CHECK(scan[0].clamped == scan[0].raw);
    for (std::size_t i = 1; i < scan.size(); ++i) {
      CHECK(scan[i].raw < 0.0);
      CHECK(scan[i].clamped == 0.0);
    }
  }

  TEST_CASE("weighted orbit measures") {
    auto& table = bolza_table();
    const auto m = weighted_orbit_measure(table, Potential::zero(), 8.0, 1.0);
    REQUIRE(!m.atoms.empty());
    CHECK(std::abs(m.total_weight() - 1.0) < 1e-12);
    for (const auto& a : m.atoms) CHECK(a.weight == doctest::Approx(1.0 / m.atoms.size()).epsilon(1e-12));
    CHECK(m.integrate(table, [](const UnitTangent&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(weighted_orbit_measure(table, Potential::zero(), 2.0, 1.0), geoflow::Error);

    OrbitTable single;
    single.max_length = 10.0;
    single.components.push_back({make_fuchsian_bolza(), {close_geodesic(make_fuchsian_bolza(), GroupWord({0}))}});
    const auto one = weighted_orbit_measure(single, Potential::geometric(1.0), 3.5, 1.0);
    REQUIRE(one.atoms.size() == 1);
    CHECK(one.atoms[0].weight == 1.0);
  }

  TEST_CASE("Liouville averages of constants") {
    const auto bolza = make_fuchsian_bolza();
    CHECK(liouville_average(bolza, [](const UnitTangent&) { return 0.7; }, 1000, 3) == doctest::Approx(0.7));
    // Direction is uniform: cos(angle) averages to about zero.
    CHECK(std::abs(liouville_average(bolza, [](const UnitTangent& v) { return std::cos(v.angle); }, 100000, 3)) < 0.02);
  }

  TEST_CASE("gap criterion") {
    const auto bolza = make_fuchsian_bolza();
    Potential bump;
    bump.id = "bump";
    bump.bumps = {{{0.0, 0.0}, 0.3, 2.0}};
    CHECK(gap_criterion(bolza, bump, 1.0, {}));
    const std::vector<UnitTangent> sing{UnitTangent::at({0.0, 0.0}, 0.0), UnitTangent::at({0.0, 0.0}, 1.0)};
    CHECK(gap_criterion(bolza, Potential::constant_value(3.0), 1.0, sing));
    CHECK_FALSE(gap_criterion(bolza, Potential::constant_value(3.0), 0.0, sing));
    CHECK_FALSE(gap_criterion(bolza, bump, 1.0, sing));
  }

  TEST_CASE("Bowen discrepancy") {
    const auto bolza = make_fuchsian_bolza();
    const UnitTangent v = UnitTangent::at({0.1, 0.05}, 0.7);
    CHECK(bowen_discrepancy(bolza, Potential::constant_value(2.0), v, 4.0, 0.3, 10, 1) == 0.0);
    Potential bump;
    bump.id = "bump";
    bump.bumps = {{{0.3, -0.2}, 0.6, 1.0}};
    const double d4 = bowen_discrepancy(bolza, bump, v, 4.0, 0.3, 60, 5);
    const double d8 = bowen_discrepancy(bolza, bump, v, 8.0, 0.3, 60, 5);
    CHECK(d4 > 0.0);
    CHECK(d8 < 1.5 * d4);
  }
}
