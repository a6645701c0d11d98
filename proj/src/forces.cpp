#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "eosched/dynamics.hpp"

namespace eosched {

void SpacecraftParams::validate() const {
  if (!(mass > 0.0) || !(drag_area > 0.0) || !(srp_area > 0.0)) {
    throw std::invalid_argument("spacecraft mass and areas must be positive");
  }
  if (!(drag_coefficient >= 1.5 && drag_coefficient <= 3.0)) {
    throw std::invalid_argument(fmt::format("drag coefficient {} outside [1.5, 3.0]", drag_coefficient));
  }
  if (!(reflectivity_coefficient >= 1.0 && reflectivity_coefficient <= 2.0)) {
    throw std::invalid_argument(
        fmt::format("reflectivity coefficient {} outside [1.0, 2.0]", reflectivity_coefficient));
  }
}

ForceModelConfig ForceModelConfig::point_mass() {
  ForceModelConfig cfg;
  cfg.gravity_degree = 0;
  cfg.gravity_order = 0;
  cfg.drag = cfg.srp = cfg.third_body_sun = cfg.third_body_moon = cfg.relativity = false;
  return cfg;
}

void ForceModelConfig::validate(int max_degree) const {
  if (gravity_degree < 0 || gravity_order < 0 || gravity_order > gravity_degree ||
      gravity_degree > max_degree) {
    throw std::invalid_argument(fmt::format("gravity field {}x{} invalid (max degree {})",
                                            gravity_degree, gravity_order, max_degree));
  }
}

double conical_shadow_factor(const Vec3& r, const Vec3& sun_pos) {
  const Vec3 to_sun = sun_pos - r;
  const double d_sun = to_sun.norm();
  const double d_earth = r.norm();
  // Apparent radii of the Sun and Earth and their angular separation.
  const double a = std::asin(std::min(1.0, constants::kSunRadius / d_sun));
  const double b = std::asin(std::min(1.0, constants::kEarthEquatorialRadius / d_earth));
  const double c = std::acos(std::clamp(-r.dot(to_sun) / (d_earth * d_sun), -1.0, 1.0));

  if (c >= a + b) return 1.0;
  if (c < b - a) return 0.0;
  if (c < a - b) return 1.0 - (b * b) / (a * a);

  const double x = (c * c + a * a - b * b) / (2.0 * c);
  const double y = std::sqrt(std::max(0.0, a * a - x * x));
  const double area = a * a * std::acos(std::clamp(x / a, -1.0, 1.0)) +
                      b * b * std::acos(std::clamp((c - x) / b, -1.0, 1.0)) - c * y;
  return std::clamp(1.0 - area / (constants::kPi * a * a), 0.0, 1.0);
}

Vec3 srp_acceleration(const Vec3& r, const Vec3& sun_pos, const SpacecraftParams& sc) {
  const double nu = conical_shadow_factor(r, sun_pos);
  if (nu == 0.0) return Vec3::Zero();
  const Vec3 from_sun = r - sun_pos;
  const double d = from_sun.norm();
  const double au_ratio = constants::kAstronomicalUnit / d;
  const double magnitude = nu * constants::kSolarPressure1AU * au_ratio * au_ratio *
                           sc.reflectivity_coefficient * sc.srp_area / sc.mass;
  return magnitude * from_sun / d;
}

Vec3 drag_acceleration(const Vec3& r, const Vec3& v, double density, const SpacecraftParams& sc) {
  const Vec3 omega{0.0, 0.0, constants::kEarthRotationRate};
  const Vec3 v_rel = v - omega.cross(r);
  return -0.5 * sc.drag_coefficient * sc.drag_area / sc.mass * density * v_rel.norm() * v_rel;
}

Vec3 third_body_acceleration(const Vec3& r, const Vec3& body_pos, double body_mu) {
  const Vec3 d = body_pos - r;
  const double dn = d.norm();
  const double sn = body_pos.norm();
  return body_mu * (d / (dn * dn * dn) - body_pos / (sn * sn * sn));
}

Vec3 relativistic_correction(const Vec3& r, const Vec3& v, double mu) {
  const double rn = r.norm();
  const double c2 = constants::kSpeedOfLight * constants::kSpeedOfLight;
  return mu / (c2 * rn * rn * rn) * ((4.0 * mu / rn - v.squaredNorm()) * r + 4.0 * r.dot(v) * v);
}

Vec3 acceleration(const Epoch& epoch, const StateVector& state, const SpacecraftParams& sc,
                  const ForceModelConfig& cfg, const GravityModel& gravity) {
  const Vec3& r = state.position;
  const Vec3& v = state.velocity;

  const Vec3 r_ecef = eci_to_ecef(epoch, r);
  const double altitude = ecef_to_geodetic(r_ecef).altitude;
  if (!(altitude >= kAtmosphereFloorAltitude)) {
    throw ReentryError(fmt::format("altitude {:.1f} km below {:.0f} km at {}", altitude / 1e3,
                                   kAtmosphereFloorAltitude / 1e3, epoch.to_iso()));
  }

  Vec3 total;
  if (cfg.gravity_degree == 0) {
    const double rn = r.norm();
    total = -gravity.mu() / (rn * rn * rn) * r;
  } else {
    total = ecef_to_eci(epoch, gravity.acceleration(r_ecef, cfg.gravity_degree, cfg.gravity_order));
  }

  const bool need_sun = cfg.srp || cfg.third_body_sun || cfg.drag;
  const Vec3 sun = need_sun ? analytic_sun_position(epoch) : Vec3::Zero();

  if (cfg.drag && altitude <= kAtmosphereCeilingAltitude) {
    const double density = harris_priester_density(r_ecef, eci_to_ecef(epoch, sun), cfg.harris_priester_exponent);
    total += drag_acceleration(r, v, density, sc);
  }
  if (cfg.srp) total += srp_acceleration(r, sun, sc);
  if (cfg.third_body_sun) total += third_body_acceleration(r, sun, constants::kSunMu);
  if (cfg.third_body_moon) {
    total += third_body_acceleration(r, analytic_moon_position(epoch), constants::kMoonMu);
  }
  if (cfg.relativity) total += relativistic_correction(r, v, gravity.mu());
  if (cfg.other) total += cfg.other(epoch, state);
  return total;
}

}  // namespace eosched
