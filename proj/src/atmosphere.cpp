#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "eosched/dynamics.hpp"

namespace eosched {

namespace {

constexpr double kBulgeLag = 30.0 * constants::kDegToRad;

// Mean solar activity; densities in g/km^3 (= 1e-12 kg/m^3).
constexpr HarrisPriesterNode kTableGramsPerKm3[] = {
    {100.0, 497400.0, 497400.0}, {120.0, 24900.0, 24900.0},   {130.0, 8377.0, 8710.0},
    {140.0, 3899.0, 4059.0},     {150.0, 2122.0, 2215.0},     {160.0, 1263.0, 1344.0},
    {170.0, 800.8, 875.8},       {180.0, 528.3, 601.0},       {190.0, 361.7, 429.7},
    {200.0, 255.7, 316.2},       {210.0, 183.9, 239.6},       {220.0, 134.1, 185.3},
    {230.0, 99.49, 145.5},       {240.0, 74.88, 115.7},       {250.0, 57.09, 93.08},
    {260.0, 44.03, 75.55},       {270.0, 34.30, 61.82},       {280.0, 26.97, 50.95},
    {290.0, 21.39, 42.26},       {300.0, 17.08, 35.26},       {320.0, 10.99, 25.11},
    {340.0, 7.214, 18.19},       {360.0, 4.824, 13.37},       {380.0, 3.274, 9.955},
    {400.0, 2.249, 7.492},       {420.0, 1.558, 5.684},       {440.0, 1.091, 4.355},
    {460.0, 0.7701, 3.362},      {480.0, 0.5474, 2.612},      {500.0, 0.3916, 2.042},
    {520.0, 0.2819, 1.605},      {540.0, 0.2042, 1.267},      {560.0, 0.1488, 1.005},
    {580.0, 0.1092, 0.7997},     {600.0, 0.08070, 0.6390},    {620.0, 0.06012, 0.5123},
    {640.0, 0.04519, 0.4121},    {660.0, 0.03430, 0.3325},    {680.0, 0.02632, 0.2691},
    {700.0, 0.02043, 0.2185},    {720.0, 0.01607, 0.1779},    {740.0, 0.01281, 0.1452},
    {760.0, 0.01036, 0.1190},    {780.0, 0.008496, 0.09776},  {800.0, 0.007069, 0.08059},
    {840.0, 0.004680, 0.05741},  {880.0, 0.003200, 0.04210},  {920.0, 0.002210, 0.03130},
    {960.0, 0.001560, 0.02360},  {1000.0, 0.001150, 0.01810},
};

std::vector<HarrisPriesterNode> make_table() {
  std::vector<HarrisPriesterNode> table;
  for (const auto& row : kTableGramsPerKm3) {
    table.push_back({row.altitude_km, row.density_min * 1e-12, row.density_max * 1e-12});
  }
  return table;
}

}  // namespace

const std::vector<HarrisPriesterNode>& harris_priester_table() {
  static const std::vector<HarrisPriesterNode> table = make_table();
  return table;
}

double harris_priester_density(const Vec3& r_ecef, const Vec3& sun_ecef, double bulge_exponent) {
  const auto& table = harris_priester_table();
  const double altitude_km = ecef_to_geodetic(r_ecef).altitude / 1e3;
  if (!(altitude_km >= table.front().altitude_km && altitude_km <= table.back().altitude_km)) {
    throw ModelDomainError(
        fmt::format("Harris-Priester altitude {:.3f} km outside [100, 1000] km", altitude_km));
  }

  // Diurnal bulge apex lags the sub-solar point in right ascension.
  const double sun_ra = std::atan2(sun_ecef.y(), sun_ecef.x());
  const double sun_dec =
      std::atan2(sun_ecef.z(), std::hypot(sun_ecef.x(), sun_ecef.y()));
  const double cd = std::cos(sun_dec);
  const Vec3 apex{cd * std::cos(sun_ra + kBulgeLag), cd * std::sin(sun_ra + kBulgeLag),
                  std::sin(sun_dec)};
  const double cos_psi = std::clamp(r_ecef.normalized().dot(apex), -1.0, 1.0);
  const double bulge = std::pow(0.5 + 0.5 * cos_psi, 0.5 * bulge_exponent);

  // Bracketing nodes with exponential interpolation.
  auto upper = std::upper_bound(table.begin(), table.end(), altitude_km,
                                [](double h, const HarrisPriesterNode& node) { return h < node.altitude_km; });
  if (upper == table.end()) upper = table.end() - 1;
  const auto lower = (upper == table.begin()) ? upper : upper - 1;
  const double dh = altitude_km - lower->altitude_km;
  double rho_min = lower->density_min;
  double rho_max = lower->density_max;
  if (upper != lower && dh > 0.0) {
    const double span = upper->altitude_km - lower->altitude_km;
    const double h_min = span / std::log(lower->density_min / upper->density_min);
    const double h_max = span / std::log(lower->density_max / upper->density_max);
    rho_min = lower->density_min * std::exp(-dh / h_min);
    rho_max = lower->density_max * std::exp(-dh / h_max);
  }
  return rho_min + (rho_max - rho_min) * bulge;
}

}  // namespace eosched
