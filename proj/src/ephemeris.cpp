// Low-precision analytic Sun and Moon series, mean ecliptic and equinox of J2000
// rotated to the equator. Good to roughly 0.1 deg in direction.

#include <cmath>

#include "eosched/astro_core.hpp"

namespace eosched {

namespace {

constexpr double kObliquityJ2000 = 23.43929111 * constants::kDegToRad;

Vec3 ecliptic_to_equatorial(const Vec3& v) {
  const double c = std::cos(kObliquityJ2000);
  const double s = std::sin(kObliquityJ2000);
  return {v.x(), c * v.y() - s * v.z(), s * v.y() + c * v.z()};
}

double frac_turns_to_rad(double degrees) {
  return std::fmod(degrees, 360.0) * constants::kDegToRad;
}

}  // namespace

Vec3 analytic_sun_position(const Epoch& epoch) {
  const double t = epoch.julian_centuries();
  const double m = frac_turns_to_rad(357.5256 + 35999.049 * t);
  const double lon = frac_turns_to_rad(282.9400 + 1.3972 * t) + m +
                     (6892.0 * std::sin(m) + 72.0 * std::sin(2.0 * m)) * constants::kArcsecToRad;
  const double r = (149.619 - 2.499 * std::cos(m) - 0.021 * std::cos(2.0 * m)) * 1e9;
  return ecliptic_to_equatorial(Vec3{r * std::cos(lon), r * std::sin(lon), 0.0});
}

Vec3 analytic_moon_position(const Epoch& epoch) {
  const double t = epoch.julian_centuries();
  const double l0 = frac_turns_to_rad(218.31617 + 481267.88088 * t - 1.3972 * t);
  const double l = frac_turns_to_rad(134.96292 + 477198.86753 * t);
  const double lp = frac_turns_to_rad(357.52543 + 35999.04944 * t);
  const double f = frac_turns_to_rad(93.27283 + 483202.01873 * t);
  const double d = frac_turns_to_rad(297.85027 + 445267.11135 * t);
  constexpr double as = constants::kArcsecToRad;

  const double lon =
      l0 + (22640.0 * std::sin(l) + 769.0 * std::sin(2 * l) - 4586.0 * std::sin(l - 2 * d) +
            2370.0 * std::sin(2 * d) - 668.0 * std::sin(lp) - 412.0 * std::sin(2 * f) -
            212.0 * std::sin(2 * l - 2 * d) - 206.0 * std::sin(l + lp - 2 * d) +
            192.0 * std::sin(l + 2 * d) - 165.0 * std::sin(lp - 2 * d) +
            148.0 * std::sin(l - lp) - 125.0 * std::sin(d) - 110.0 * std::sin(l + lp) -
            55.0 * std::sin(2 * f - 2 * d)) * as;

  const double lat =
      (18520.0 * std::sin(f + lon - l0 + (412.0 * std::sin(2 * f) + 541.0 * std::sin(lp)) * as) -
       526.0 * std::sin(f - 2 * d) + 44.0 * std::sin(l + f - 2 * d) -
       31.0 * std::sin(-l + f - 2 * d) - 25.0 * std::sin(-2 * l + f) -
       23.0 * std::sin(lp + f - 2 * d) + 21.0 * std::sin(-l + f) +
       11.0 * std::sin(-lp + f - 2 * d)) * as;

  const double r = (385000.0 - 20905.0 * std::cos(l) - 3699.0 * std::cos(2 * d - l) -
                    2956.0 * std::cos(2 * d) - 570.0 * std::cos(2 * l) +
                    246.0 * std::cos(2 * l - 2 * d) - 205.0 * std::cos(lp - 2 * d) -
                    171.0 * std::cos(l + 2 * d) - 152.0 * std::cos(l + lp - 2 * d)) * 1e3;

  const double cl = std::cos(lat);
  return ecliptic_to_equatorial(Vec3{r * cl * std::cos(lon), r * cl * std::sin(lon), r * std::sin(lat)});
}

}  // namespace eosched
