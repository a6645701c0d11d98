#include "eosched/astro_core.hpp"

#include <charconv>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace eosched {

namespace {

constexpr std::int64_t kNsPerSecond = 1'000'000'000;
constexpr std::int64_t kSecondsPerDay = 86'400;
// 2000-01-01T12:00:00 expressed in seconds after 1970-01-01T00:00:00.
constexpr std::int64_t kJ2000UnixSeconds = 10'957 * kSecondsPerDay + 43'200;

std::int64_t days_from_civil(int year, int month, int day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) {
    throw TimeFormatError(fmt::format("invalid calendar date {}-{}-{}", year, month, day));
  }
  return sys_days{ymd}.time_since_epoch().count();
}

int parse_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw TimeFormatError(fmt::format("truncated epoch '{}'", text));
  int value = 0;
  const char* begin = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(begin, begin + len, value);
  if (ec != std::errc{} || ptr != begin + len) {
    throw TimeFormatError(fmt::format("malformed epoch '{}'", text));
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
    throw TimeFormatError(fmt::format("malformed epoch '{}'", text));
  }
}

}  // namespace

Epoch Epoch::from_j2000_seconds(double seconds) {
  return Epoch(static_cast<std::int64_t>(std::llround(seconds * 1e9)));
}

Epoch Epoch::from_calendar(int year, int month, int day, int hour, int minute, double second) {
  const std::int64_t whole_seconds = days_from_civil(year, month, day) * kSecondsPerDay +
                                     hour * 3600 + minute * 60 - kJ2000UnixSeconds;
  return Epoch(whole_seconds * kNsPerSecond + static_cast<std::int64_t>(std::llround(second * 1e9)));
}

Epoch Epoch::from_iso(std::string_view text) {
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  if (text.size() < 19) throw TimeFormatError(fmt::format("truncated epoch '{}'", text));
  const int year = parse_int(text, 0, 4);
  expect_char(text, 4, "-");
  const int month = parse_int(text, 5, 2);
  expect_char(text, 7, "-");
  const int day = parse_int(text, 8, 2);
  expect_char(text, 10, "Tt ");
  const int hour = parse_int(text, 11, 2);
  expect_char(text, 13, ":");
  const int minute = parse_int(text, 14, 2);
  expect_char(text, 16, ":");
  const int second = parse_int(text, 17, 2);
  if (hour > 23 || minute > 59 || second > 59) {
    throw TimeFormatError(fmt::format("time of day out of range in '{}'", text));
  }

  std::int64_t fraction_ns = 0;
  if (text.size() > 19) {
    expect_char(text, 19, ".");
    const std::string_view digits = text.substr(20);
    if (digits.empty() || digits.size() > 9) {
      throw TimeFormatError(fmt::format("bad fractional seconds in '{}'", text));
    }
    std::int64_t scale = kNsPerSecond;
    for (char c : digits) {
      if (c < '0' || c > '9') throw TimeFormatError(fmt::format("malformed epoch '{}'", text));
      scale /= 10;
      fraction_ns += (c - '0') * scale;
    }
  }
  const std::int64_t whole = days_from_civil(year, month, day) * kSecondsPerDay + hour * 3600 +
                             minute * 60 + second - kJ2000UnixSeconds;
  return Epoch(whole * kNsPerSecond + fraction_ns);
}

std::string Epoch::to_iso() const {
  using namespace std::chrono;
  std::int64_t unix_ns = ns_ + kJ2000UnixSeconds * kNsPerSecond;
  std::int64_t unix_s = unix_ns / kNsPerSecond;
  std::int64_t frac = unix_ns % kNsPerSecond;
  if (frac < 0) {
    frac += kNsPerSecond;
    unix_s -= 1;
  }
  std::int64_t days = unix_s / kSecondsPerDay;
  std::int64_t sod = unix_s % kSecondsPerDay;
  if (sod < 0) {
    sod += kSecondsPerDay;
    days -= 1;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  std::string out = fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                                sod / 3600, (sod / 60) % 60, sod % 60);
  if (frac % 1'000'000 == 0) {
    out += fmt::format(".{:03d}", frac / 1'000'000);
  } else if (frac % 1'000 == 0) {
    out += fmt::format(".{:06d}", frac / 1'000);
  } else {
    out += fmt::format(".{:09d}", frac);
  }
  return out;
}

double Epoch::julian_centuries() const {
  return j2000_seconds() / (constants::kSecondsPerDay * constants::kDaysPerJulianCentury);
}

Epoch Epoch::operator+(double seconds) const {
  return Epoch(ns_ + static_cast<std::int64_t>(std::llround(seconds * 1e9)));
}

double wrap_pi(double angle) {
  double wrapped = std::fmod(angle + constants::kPi, constants::kTwoPi);
  if (wrapped < 0.0) wrapped += constants::kTwoPi;
  return wrapped - constants::kPi;
}

double earth_rotation_angle(const Epoch& epoch) {
  // Reduce the elapsed time modulo a sidereal day first to keep the angle well conditioned.
  const double elapsed = epoch.j2000_seconds();
  const double sidereal_day = constants::kTwoPi / constants::kEarthRotationRate;
  const double reduced = std::fmod(elapsed, sidereal_day);
  return std::fmod(constants::kEarthRotationAngleJ2000 + constants::kEarthRotationRate * reduced,
                   constants::kTwoPi);
}

Vec3 eci_to_ecef(const Epoch& epoch, const Vec3& r_eci) {
  const double theta = earth_rotation_angle(epoch);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * r_eci.x() + s * r_eci.y(), -s * r_eci.x() + c * r_eci.y(), r_eci.z()};
}

Vec3 ecef_to_eci(const Epoch& epoch, const Vec3& r_ecef) {
  const double theta = earth_rotation_angle(epoch);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * r_ecef.x() - s * r_ecef.y(), s * r_ecef.x() + c * r_ecef.y(), r_ecef.z()};
}

GeodeticPoint ecef_to_geodetic(const Vec3& r) {
  const double norm = r.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("ecef_to_geodetic: position at the geocenter");

  constexpr double a = constants::kEarthEquatorialRadius;
  constexpr double f = constants::kEarthFlattening;
  constexpr double e2 = f * (2.0 - f);
  const double rho2 = r.x() * r.x() + r.y() * r.y();

  // Fixed-point iteration on the z-offset of the ellipsoid normal.
  double dz = e2 * r.z();
  double n = a;
  double nh = norm;
  for (int iter = 0; iter < 50; ++iter) {
    const double zdz = r.z() + dz;
    nh = std::sqrt(rho2 + zdz * zdz);
    const double sin_phi = zdz / nh;
    n = a / std::sqrt(1.0 - e2 * sin_phi * sin_phi);
    const double dz_new = n * e2 * sin_phi;
    if (std::abs(dz - dz_new) < 1e-9) {
      dz = dz_new;
      break;
    }
    dz = dz_new;
  }
  const double zdz = r.z() + dz;
  nh = std::sqrt(rho2 + zdz * zdz);

  GeodeticPoint out;
  out.longitude = (rho2 > 0.0) ? std::atan2(r.y(), r.x()) : 0.0;
  if (out.longitude >= constants::kPi) out.longitude -= constants::kTwoPi;
  out.latitude = std::atan2(zdz, std::sqrt(rho2));
  out.altitude = nh - n;
  return out;
}

Vec3 geodetic_to_ecef(const GeodeticPoint& p) {
  constexpr double a = constants::kEarthEquatorialRadius;
  constexpr double f = constants::kEarthFlattening;
  constexpr double e2 = f * (2.0 - f);
  const double sin_lat = std::sin(p.latitude);
  const double cos_lat = std::cos(p.latitude);
  const double n = a / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
  return {(n + p.altitude) * cos_lat * std::cos(p.longitude),
          (n + p.altitude) * cos_lat * std::sin(p.longitude),
          ((1.0 - e2) * n + p.altitude) * sin_lat};
}

StateVector keplerian_to_state(const Epoch& epoch, const KeplerianElements& el, double mu) {
  const double p = el.semi_major_axis * (1.0 - el.eccentricity * el.eccentricity);
  const double nu = el.true_anomaly;
  const double r = p / (1.0 + el.eccentricity * std::cos(nu));

  const Vec3 r_pqw{r * std::cos(nu), r * std::sin(nu), 0.0};
  const double k = std::sqrt(mu / p);
  const Vec3 v_pqw{-k * std::sin(nu), k * (el.eccentricity + std::cos(nu)), 0.0};

  const double co = std::cos(el.raan), so = std::sin(el.raan);
  const double ci = std::cos(el.inclination), si = std::sin(el.inclination);
  const double cw = std::cos(el.arg_perigee), sw = std::sin(el.arg_perigee);
  Eigen::Matrix3d rot;
  rot << co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si,
         so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si,
         sw * si, cw * si, ci;

  return StateVector{epoch, rot * r_pqw, rot * v_pqw};
}

}  // namespace eosched
