/**
 * @file astro_core.hpp
 * @brief Time scale, reference frames, geodetic conversions and shared constants.
 */
#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace eosched {

using Vec3 = Eigen::Vector3d;

namespace constants {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;
inline constexpr double kArcsecToRad = kDegToRad / 3600.0;

// WGS-84 ellipsoid
inline constexpr double kEarthEquatorialRadius = 6378137.0;  // m
inline constexpr double kEarthFlattening = 1.0 / 298.257223563;
inline constexpr double kEarthPolarRadius = kEarthEquatorialRadius * (1.0 - kEarthFlattening);

inline constexpr double kEarthMu = 3.986004415e14;              // m^3/s^2
inline constexpr double kEarthRotationRate = 7.292115146706979e-5;  // rad/s
inline constexpr double kSunMu = 1.32712440018e20;               // m^3/s^2
inline constexpr double kMoonMu = 4.9028e12;                     // m^3/s^2
inline constexpr double kSunRadius = 6.957e8;                    // m
inline constexpr double kAstronomicalUnit = 1.49597870700e11;    // m
inline constexpr double kSpeedOfLight = 299792458.0;             // m/s
inline constexpr double kSolarPressure1AU = 4.56e-6;             // N/m^2

// Rotation angle of the Earth-fixed frame at the J2000 reference epoch (GMST, rad).
inline constexpr double kEarthRotationAngleJ2000 = 280.46061837504 * kDegToRad;

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDaysPerJulianCentury = 36525.0;

}  // namespace constants

/// Raised for calendar strings that are not ISO-8601 date-times.
class TimeFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Instant on a single uniform time scale.
 *
 * Stored as integer nanoseconds since 2000-01-01T12:00:00 so that differences
 * over the planning horizon are exact. Calendar labels are read and written on
 * the same uniform scale (no leap seconds).
 */
class Epoch {
 public:
  constexpr Epoch() = default;

  static constexpr Epoch from_nanoseconds(std::int64_t ns) { return Epoch(ns); }
  static Epoch from_j2000_seconds(double seconds);
  static Epoch from_calendar(int year, int month, int day, int hour = 0, int minute = 0,
                             double second = 0.0);
  /// Accepts `YYYY-MM-DDTHH:MM:SS[.fffffffff][Z]`.
  static Epoch from_iso(std::string_view text);

  /// ISO-8601 label with 3, 6 or 9 fractional digits, whichever is exact.
  [[nodiscard]] std::string to_iso() const;

  [[nodiscard]] constexpr std::int64_t nanoseconds() const { return ns_; }
  [[nodiscard]] double j2000_seconds() const { return static_cast<double>(ns_) * 1e-9; }
  /// Julian centuries since J2000, used by the analytic ephemerides.
  [[nodiscard]] double julian_centuries() const;

  Epoch operator+(double seconds) const;
  Epoch operator-(double seconds) const { return *this + (-seconds); }
  Epoch& operator+=(double seconds) { return *this = *this + seconds; }
  /// Seconds between two epochs.
  double operator-(const Epoch& other) const {
    return static_cast<double>(ns_ - other.ns_) * 1e-9;
  }

  constexpr auto operator<=>(const Epoch&) const = default;

 private:
  constexpr explicit Epoch(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_{0};
};

/// Inertial position/velocity sample.
struct StateVector {
  Epoch epoch{};
  Vec3 position{Vec3::Zero()};  // m, Earth-centered inertial
  Vec3 velocity{Vec3::Zero()};  // m/s, Earth-centered inertial
};

struct GeodeticPoint {
  double latitude{};   // rad, [-pi/2, pi/2]
  double longitude{};  // rad, [-pi, pi)
  double altitude{};   // m above the WGS-84 ellipsoid
};

/// Angle of the Earth-fixed frame about the inertial z-axis.
[[nodiscard]] double earth_rotation_angle(const Epoch& epoch);

[[nodiscard]] Vec3 eci_to_ecef(const Epoch& epoch, const Vec3& r_eci);
[[nodiscard]] Vec3 ecef_to_eci(const Epoch& epoch, const Vec3& r_ecef);

/// Throws std::invalid_argument for the geocenter.
[[nodiscard]] GeodeticPoint ecef_to_geodetic(const Vec3& r_ecef);
[[nodiscard]] Vec3 geodetic_to_ecef(const GeodeticPoint& point);

/// Geocentric inertial Sun position from a low-precision analytic series (m).
[[nodiscard]] Vec3 analytic_sun_position(const Epoch& epoch);
/// Geocentric inertial Moon position from a low-precision analytic series (m).
[[nodiscard]] Vec3 analytic_moon_position(const Epoch& epoch);

/// Classical orbital elements; angles in radians.
struct KeplerianElements {
  double semi_major_axis{};
  double eccentricity{};
  double inclination{};
  double raan{};
  double arg_perigee{};
  double true_anomaly{};
};

[[nodiscard]] StateVector keplerian_to_state(const Epoch& epoch, const KeplerianElements& el,
                                             double mu = constants::kEarthMu);

/// Wraps an angle to [-pi, pi).
[[nodiscard]] double wrap_pi(double angle);

}  // namespace eosched
