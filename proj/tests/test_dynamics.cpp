#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "eosched/dynamics.hpp"

using namespace eosched;
namespace c = eosched::constants;

namespace {

const Epoch kT0 = Epoch::from_calendar(2024, 3, 1);

StateVector circular(double altitude, double inclination_deg = 90.0) {
  KeplerianElements el;
  el.semi_major_axis = c::kEarthEquatorialRadius + altitude;
  el.inclination = inclination_deg * c::kDegToRad;
  return keplerian_to_state(kT0, el);
}

double orbit_period(double a) { return 2.0 * c::kPi * std::sqrt(a * a * a / c::kEarthMu); }

}  // namespace

TEST_CASE("point-mass acceleration") {
  const StateVector s{kT0, {6928137.0, 0.0, 0.0}, {0.0, 7585.0, 0.0}};
  const Vec3 a = acceleration(kT0, s, SpacecraftParams{}, ForceModelConfig::point_mass());
  CHECK(a.x() == doctest::Approx(-8.3048).epsilon(1e-3 / 8.3048));
  CHECK(a.y() == 0.0);
  CHECK(a.z() == 0.0);
  const Vec3 exact = -c::kEarthMu * s.position / std::pow(s.position.norm(), 3);
  CHECK((a - exact).norm() == 0.0);
}

TEST_CASE("perturbations are small relative to central gravity") {
  const StateVector s = circular(550e3, 97.6);
  const Vec3 two_body = acceleration(kT0, s, SpacecraftParams{}, ForceModelConfig::point_mass());
  const Vec3 full = acceleration(kT0, s, SpacecraftParams{}, ForceModelConfig{});
  CHECK((full - two_body).norm() / two_body.norm() < 2e-3);
  CHECK((full - two_body).norm() > 0.0);
}

TEST_CASE("acceleration is deterministic") {
  const StateVector s = circular(550e3, 51.6);
  const Vec3 a = acceleration(kT0, s, SpacecraftParams{}, ForceModelConfig{});
  const Vec3 b = acceleration(kT0, s, SpacecraftParams{}, ForceModelConfig{});
  CHECK(a == b);
}

TEST_CASE("other-force hook is added") {
  const StateVector s = circular(550e3);
  ForceModelConfig cfg = ForceModelConfig::point_mass();
  const Vec3 base = acceleration(kT0, s, SpacecraftParams{}, cfg);
  cfg.other = [](const Epoch&, const StateVector&) { return Vec3(1e-6, 0.0, 0.0); };
  CHECK((acceleration(kT0, s, SpacecraftParams{}, cfg) - base - Vec3(1e-6, 0.0, 0.0)).norm() < 1e-15);
}

TEST_CASE("re-entry below 100 km") {
  StateVector s = circular(90e3);
  CHECK_THROWS_AS((void)acceleration(kT0, s, SpacecraftParams{}, ForceModelConfig{}), ReentryError);
  CHECK_THROWS_AS((void)propagate_rk4(s, SpacecraftParams{}, ForceModelConfig{}, 60.0, 10.0), ReentryError);
}

TEST_CASE("spherical harmonic gravity") {
  const GravityModel& g = GravityModel::bundled();
  REQUIRE(g.max_degree() == 20);

  SUBCASE("degree 0 is point mass") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const Vec3 r = Vec3(n(rng), n(rng), n(rng)).normalized() * 7.0e6;
      const Vec3 pm = -g.mu() * r / std::pow(r.norm(), 3);
      CHECK((g.acceleration(r, 0, 0) - pm).norm() / pm.norm() < 1e-12);
    }
  }
  SUBCASE("J2 radial term at the equator") {
    const double j2 = -std::sqrt(5.0) * g.normalized_c(2, 0);
    CHECK(j2 == doctest::Approx(1.08263e-3).epsilon(1e-4));
    const double r = 6928137.0;
    const Vec3 pos(r, 0.0, 0.0);
    const double perturbation = (g.acceleration(pos, 2, 0) - g.acceleration(pos, 0, 0)).x();
    const double oracle = -1.5 * j2 * g.mu() * g.radius() * g.radius() / std::pow(r, 4);
    CHECK(perturbation == doctest::Approx(oracle).epsilon(1e-6));
  }
  SUBCASE("acceleration equals the gradient of the potential") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int degree : {2, 10, 20}) {
      for (int i = 0; i < 20; ++i) {
        const Vec3 r = Vec3(n(rng), n(rng), n(rng)).normalized() * 6.9e6;
        Vec3 grad;
        for (int k = 0; k < 3; ++k) {
          Vec3 dr = Vec3::Zero();
          dr[k] = 10.0;
          grad[k] = (g.potential(r + dr, degree, degree) - g.potential(r - dr, degree, degree)) / 20.0;
        }
        const Vec3 a = g.acceleration(r, degree, degree);
        CHECK((a - grad).norm() / a.norm() < 1e-6);
      }
    }
  }
  SUBCASE("order below degree drops tesseral terms") {
    const Vec3 r(4.0e6, 3.0e6, 4.5e6);
    CHECK((g.acceleration(r, 4, 0) - g.acceleration(r, 4, 4)).norm() > 0.0);
  }
  CHECK_THROWS_AS((void)g.acceleration(Vec3(7e6, 0, 0), 21, 0), ModelDomainError);
  CHECK_THROWS_AS((void)g.acceleration(Vec3(7e6, 0, 0), 2, 3), ModelDomainError);
}

TEST_CASE("coefficient file parsing") {
  const GravityModel g = GravityModel::parse("# header\n2 0 -4.84165e-4 0\n2 2 2.4e-6 -1.4e-6\n");
  CHECK(g.max_degree() == 2);
  CHECK(g.normalized_c(2, 0) == -4.84165e-4);
  CHECK(g.normalized_s(2, 2) == -1.4e-6);
  CHECK(g.normalized_c(0, 0) == 1.0);
  CHECK_THROWS((void)GravityModel::parse("2 0 not-a-number 0\n"));
}

TEST_CASE("Harris-Priester density") {
  const auto& table = harris_priester_table();
  REQUIRE(table.front().altitude_km == 100.0);
  REQUIRE(table.back().altitude_km == 1000.0);
  const Vec3 sun = analytic_sun_position(kT0);

  SUBCASE("550 km bracket") {
    const Vec3 r = geodetic_to_ecef({0.3, 1.0, 550e3});
    const double rho = harris_priester_density(r, sun);
    CHECK(rho >= 1e-14);
    CHECK(rho <= 1e-12);
  }
  SUBCASE("apex is denser than antapex") {
    // Sun below the south pole puts the bulge apex there and the antapex over the north pole.
    const Vec3 sun_south{0.0, 0.0, -c::kAstronomicalUnit};
    const Vec3 south = geodetic_to_ecef({-c::kPi / 2.0, 0.0, 500e3});
    const Vec3 north = geodetic_to_ecef({c::kPi / 2.0, 0.0, 500e3});
    CHECK(harris_priester_density(south, sun_south) > harris_priester_density(north, sun_south));
    const auto node = std::find_if(table.begin(), table.end(), [](const auto& n) { return n.altitude_km == 500.0; });
    REQUIRE(node != table.end());
    CHECK(harris_priester_density(north, sun_south) == doctest::Approx(node->density_min).epsilon(1e-9));
    CHECK(harris_priester_density(south, sun_south) == doctest::Approx(node->density_max).epsilon(1e-9));
  }
  SUBCASE("within table bounds and decreasing with altitude") {
    const Vec3 dir = Vec3(0.3, -0.8, 0.5).normalized();
    double previous = std::numeric_limits<double>::infinity();
    for (double h = 100.0; h <= 1000.0; h += 7.5) {
      const GeodeticPoint p = ecef_to_geodetic(dir * c::kEarthEquatorialRadius);
      const double rho = harris_priester_density(geodetic_to_ecef({p.latitude, p.longitude, h * 1e3}), sun);
      CHECK(rho <= previous);
      previous = rho;
    }
  }
  CHECK_THROWS_AS((void)harris_priester_density(geodetic_to_ecef({0.0, 0.0, 1200e3}), sun), ModelDomainError);
  CHECK_THROWS_AS((void)harris_priester_density(geodetic_to_ecef({0.0, 0.0, 90e3}), sun), ModelDomainError);
}

TEST_CASE("conical shadow") {
  const Vec3 sun = analytic_sun_position(kT0);
  const Vec3 s_hat = sun.normalized();
  const double r = c::kEarthEquatorialRadius + 550e3;
  CHECK(conical_shadow_factor(s_hat * r, sun) == 1.0);
  CHECK(conical_shadow_factor(-s_hat * r, sun) == 0.0);

  // Sweep the terminator in the orbit plane containing the Sun direction.
  const Vec3 perp = s_hat.cross(Vec3::UnitZ()).normalized();
  double previous = 1.0;
  bool penumbra = false;
  for (double angle = 90.0; angle <= 180.0; angle += 0.005) {
    const double t = angle * c::kDegToRad;
    const Vec3 pos = r * (std::cos(t) * s_hat + std::sin(t) * perp);
    const double nu = conical_shadow_factor(pos, sun);
    CHECK(nu >= 0.0);
    CHECK(nu <= 1.0);
    CHECK(nu <= previous + 1e-12);
    CHECK(previous - nu < 0.05);  // no jumps at 0.005 deg resolution
    penumbra = penumbra || (nu > 0.0 && nu < 1.0);
    previous = nu;
  }
  CHECK(penumbra);
  CHECK(previous == 0.0);
}

TEST_CASE("solar radiation pressure") {
  const Vec3 sun = analytic_sun_position(kT0);
  const SpacecraftParams sc;
  const Vec3 r = sun.normalized() * 7e6;
  const Vec3 a = srp_acceleration(r, sun, sc);
  const Vec3 away = (r - sun).normalized();
  CHECK(a.normalized().dot(away) == doctest::Approx(1.0).epsilon(1e-12));
  const double d = (r - sun).norm();
  const double oracle = 4.56e-6 * std::pow(c::kAstronomicalUnit / d, 2) * sc.reflectivity_coefficient *
                        sc.srp_area / sc.mass;
  CHECK(a.norm() == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(srp_acceleration(-r, sun, sc).norm() == 0.0);
}

TEST_CASE("drag opposes the atmosphere-relative velocity") {
  const StateVector s = circular(400e3, 51.6);
  const Vec3 v_rel = s.velocity - Vec3(0, 0, c::kEarthRotationRate).cross(s.position);
  const Vec3 a = drag_acceleration(s.position, s.velocity, 3e-12, SpacecraftParams{});
  const double angle = std::atan2(a.cross(-v_rel).norm(), a.dot(-v_rel));
  CHECK(angle < 1e-9);
  const SpacecraftParams sc;
  CHECK(a.norm() == doctest::Approx(0.5 * sc.drag_coefficient * sc.drag_area / sc.mass * 3e-12 *
                                    v_rel.squaredNorm()));
}

TEST_CASE("third-body attraction") {
  const Vec3 moon = analytic_moon_position(kT0);
  CHECK(third_body_acceleration(Vec3::Zero(), moon, c::kMoonMu) == Vec3::Zero());
  const Vec3 r = circular(550e3).position;
  const Vec3 a = third_body_acceleration(r, moon, c::kMoonMu);
  CHECK(a.norm() < 2e-5);
  CHECK(a.norm() > 0.0);
  // Direct two-point evaluation: pull on the spacecraft minus pull on the geocenter.
  auto pull = [&](const Vec3& at) {
    const Vec3 d = moon - at;
    return Vec3(c::kMoonMu * d / std::pow(d.norm(), 3));
  };
  CHECK((a - (pull(r) - pull(Vec3::Zero()))).norm() < 1e-18);
  // Tidal term is symmetric to first order about the geocenter.
  const Vec3 b = third_body_acceleration(-r, moon, c::kMoonMu);
  CHECK((a + b).norm() < 0.1 * a.norm());
}

TEST_CASE("relativistic correction") {
  const StateVector s = circular(550e3);
  const Vec3 a = relativistic_correction(s.position, s.velocity);
  CHECK(a.norm() > 1e-9);
  CHECK(a.norm() < 1e-7);

  // Direct formula with a doubled gravitational parameter.
  const double mu = 2.0 * c::kEarthMu;
  const Vec3& r = s.position;
  const Vec3& v = s.velocity;
  const double rn = r.norm();
  const double c2 = c::kSpeedOfLight * c::kSpeedOfLight;
  const Vec3 oracle = mu / (c2 * std::pow(rn, 3)) * ((4.0 * mu / rn - v.squaredNorm()) * r + 4.0 * r.dot(v) * v);
  CHECK((relativistic_correction(r, v, mu) - oracle).norm() < 1e-15 * oracle.norm() + 1e-25);

  const Vec3 still = relativistic_correction(r, Vec3::Zero());
  CHECK(still.cross(r).norm() < 1e-12 * still.norm() * rn);
}

TEST_CASE("RK4 two-body invariants") {
  const StateVector s0 = circular(550e3);
  const double a = s0.position.norm();
  const double period = orbit_period(a);
  CHECK(period == doctest::Approx(5739.5).epsilon(1e-4));
  const auto cfg = ForceModelConfig::point_mass();
  const SpacecraftParams sc;

  SUBCASE("one period returns to start") {
    const Trajectory t = propagate_rk4(s0, sc, cfg, period, 10.0);
    CHECK((t.nodes().back().position - s0.position).norm() < 1.0);
    CHECK(t.end() - t.start() == doctest::Approx(period).epsilon(1e-12));
  }
  SUBCASE("energy and angular momentum over a day") {
    const Trajectory t = propagate_rk4(s0, sc, cfg, 86400.0, 10.0);
    const double e0 = 0.5 * s0.velocity.squaredNorm() - c::kEarthMu / a;
    const Vec3 h0 = s0.position.cross(s0.velocity);
    double de = 0.0, dh = 0.0;
    for (const auto& s : t.nodes()) {
      de = std::max(de, std::abs(0.5 * s.velocity.squaredNorm() - c::kEarthMu / s.position.norm() - e0));
      dh = std::max(dh, (s.position.cross(s.velocity) - h0).norm());
    }
    CHECK(de / std::abs(e0) < 1e-9);
    CHECK(dh / h0.norm() < 1e-9);
  }
  SUBCASE("fourth-order convergence") {
    auto miss = [&](double step) {
      return (propagate_rk4(s0, sc, cfg, period, step).nodes().back().position - s0.position).norm();
    };
    const double ratio = miss(10.0) / miss(5.0);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("propagation bookkeeping") {
  const StateVector s0 = circular(550e3);
  const SpacecraftParams sc;
  const ForceModelConfig cfg;

  const Trajectory empty = propagate_rk4(s0, sc, cfg, 0.0, 10.0);
  REQUIRE(empty.size() == 1);
  CHECK(empty.nodes().front().position == s0.position);
  CHECK(empty.nodes().front().epoch == s0.epoch);

  const Trajectory t = propagate_rk4(s0, sc, cfg, 95.0, 10.0);
  CHECK(t.size() == 11);  // nine full steps, one partial
  CHECK(t.end() - t.start() == doctest::Approx(95.0));
  CHECK(t.nodes()[9].epoch - t.start() == doctest::Approx(90.0));

  const Trajectory again = propagate_rk4(s0, sc, cfg, 95.0, 10.0);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.nodes()[i].position == again.nodes()[i].position);

  CHECK_THROWS_AS((void)propagate_rk4(s0, sc, cfg, 10.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)propagate_rk4(s0, sc, cfg, -1.0, 10.0), std::invalid_argument);
}

TEST_CASE("Hermite interpolation") {
  const StateVector s0 = circular(550e3);
  const auto cfg = ForceModelConfig::point_mass();
  const Trajectory coarse = propagate_rk4(s0, SpacecraftParams{}, cfg, 600.0, 10.0);
  const Trajectory fine = propagate_rk4(s0, SpacecraftParams{}, cfg, 600.0, 1.0);
  for (const auto& node : coarse.nodes()) {
    const StateVector at = coarse.interpolate(node.epoch);
    CHECK(at.position == node.position);
    CHECK(at.velocity == node.velocity);
  }
  for (std::size_t k = 0; k < fine.size(); k += 7) {
    const StateVector& truth = fine.nodes()[k];
    CHECK((coarse.interpolate(truth.epoch).position - truth.position).norm() < 0.05);
  }
  CHECK_THROWS_AS((void)coarse.interpolate(coarse.end() + 1.0), std::out_of_range);
  CHECK_THROWS_AS((void)coarse.interpolate(coarse.start() - 1.0), std::out_of_range);
}

TEST_CASE("full force model departs from two-body by a plausible amount") {
  const StateVector s0 = circular(550e3);
  auto final_position = [&](const ForceModelConfig& cfg) {
    return propagate_rk4(s0, SpacecraftParams{}, cfg, 86400.0, 10.0).nodes().back().position;
  };
  ForceModelConfig j2 = ForceModelConfig::point_mass();
  j2.gravity_degree = 2;
  const Vec3 kepler = final_position(ForceModelConfig::point_mass());
  const Vec3 oblate = final_position(j2);
  const Vec3 full = final_position(ForceModelConfig{});

  // Secular along-track drift from J2 for a circular orbit bounds the oblateness effect.
  const double a = s0.position.norm();
  const double n = std::sqrt(c::kEarthMu / (a * a * a));
  const double j2_value = -std::sqrt(5.0) * GravityModel::bundled().normalized_c(2, 0);
  const double drift = 1.5 * n * j2_value * std::pow(c::kEarthEquatorialRadius / a, 2) * 86400.0 * a;
  CHECK((full - kepler).norm() > 1e3);
  CHECK((oblate - kepler).norm() < drift);
  // Everything beyond J2 is a few km over a day.
  CHECK((full - oblate).norm() > 1e3);
  CHECK((full - oblate).norm() < 100e3);
}

TEST_CASE("spacecraft and force-model validation") {
  SpacecraftParams sc;
  CHECK_NOTHROW(sc.validate());
  sc.drag_coefficient = 3.5;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = {};
  sc.mass = 0.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  ForceModelConfig cfg;
  cfg.gravity_order = 12;
  CHECK_THROWS_AS(cfg.validate(20), std::invalid_argument);
  cfg.gravity_degree = 21;
  CHECK_THROWS_AS(cfg.validate(20), std::invalid_argument);
}
