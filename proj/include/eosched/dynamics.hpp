/**
 * @file dynamics.hpp
 * @brief Perturbation force model and fixed-step RK4 trajectory propagation.
 */
#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "eosched/astro_core.hpp"

namespace eosched {

/// Propagated state fell below the atmosphere table floor.
class ReentryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model queried outside its domain (altitude range, harmonic degree, ...).
class ModelDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kAtmosphereFloorAltitude = 100e3;    // m
inline constexpr double kAtmosphereCeilingAltitude = 1000e3;  // m

struct SpacecraftParams {
  double mass{100.0};                 // kg
  double drag_area{1.0};              // m^2
  double drag_coefficient{2.3};
  double srp_area{1.0};               // m^2
  double reflectivity_coefficient{1.8};

  /// Throws std::invalid_argument when a field violates its range.
  void validate() const;
};

struct ForceModelConfig {
  int gravity_degree{10};
  int gravity_order{10};
  bool drag{true};
  bool srp{true};
  bool third_body_sun{true};
  bool third_body_moon{true};
  bool relativity{true};
  double harris_priester_exponent{3.0};
  /// Additional inertial acceleration (m/s^2); empty means none.
  std::function<Vec3(const Epoch&, const StateVector&)> other;

  /// Two-body point mass only.
  static ForceModelConfig point_mass();

  void validate(int max_degree) const;
};

/**
 * @brief Fully normalized spherical-harmonic geopotential.
 *
 * Coefficients are kept both normalized (for the potential) and unnormalized
 * (for the V/W recursion used by the acceleration).
 */
class GravityModel {
 public:
  /// Parses rows of `degree order C S`; `#` starts a comment line.
  static GravityModel parse(std::string_view text, double mu = constants::kEarthMu,
                            double radius = 6378136.3);
  static GravityModel load(const std::filesystem::path& path, double mu = constants::kEarthMu,
                           double radius = 6378136.3);
  /// EGM2008 truncated to degree and order 20.
  static const GravityModel& bundled();

  [[nodiscard]] int max_degree() const { return max_degree_; }
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] double normalized_c(int n, int m) const { return cbar_[index(n, m)]; }
  [[nodiscard]] double normalized_s(int n, int m) const { return sbar_[index(n, m)]; }

  /// Earth-fixed acceleration (m/s^2). Throws ModelDomainError when degree/order exceed the set.
  [[nodiscard]] Vec3 acceleration(const Vec3& r_ecef, int degree, int order) const;
  /// Geopotential U (m^2/s^2) with the acceleration equal to grad U.
  [[nodiscard]] double potential(const Vec3& r_ecef, int degree, int order) const;

 private:
  GravityModel(int max_degree, double mu, double radius);
  [[nodiscard]] static std::size_t index(int n, int m) {
    return static_cast<std::size_t>(n) * (n + 1) / 2 + m;
  }
  void check_range(int degree, int order) const;

  int max_degree_;
  double mu_;
  double radius_;
  std::vector<double> cbar_, sbar_;  // normalized
  std::vector<double> c_, s_;        // unnormalized
};

/// Convenience wrapper over the bundled model.
[[nodiscard]] Vec3 gravity_spherical_harmonic(const Vec3& r_ecef, int degree, int order);

/// Harris-Priester density (kg/m^3) for mean solar activity.
/// Both vectors are in the same Earth-centered frame. Throws ModelDomainError outside 100-1000 km.
[[nodiscard]] double harris_priester_density(const Vec3& r_ecef, const Vec3& sun_ecef,
                                             double bulge_exponent = 3.0);

/// Tabulated (altitude km, min density, max density) in kg/m^3.
struct HarrisPriesterNode {
  double altitude_km;
  double density_min;
  double density_max;
};
[[nodiscard]] const std::vector<HarrisPriesterNode>& harris_priester_table();

/// Fraction of the solar disk visible from r (conical Earth shadow): 1 sunlit, 0 umbra.
[[nodiscard]] double conical_shadow_factor(const Vec3& r, const Vec3& sun_pos);

/// Flat-plate SRP acceleration including shadowing.
[[nodiscard]] Vec3 srp_acceleration(const Vec3& r, const Vec3& sun_pos, const SpacecraftParams& sc);

/// Cannonball drag in the inertial frame with a co-rotating atmosphere.
[[nodiscard]] Vec3 drag_acceleration(const Vec3& r, const Vec3& v, double density,
                                     const SpacecraftParams& sc);

/// Differential (indirect-term included) point-mass attraction of a perturbing body.
[[nodiscard]] Vec3 third_body_acceleration(const Vec3& r, const Vec3& body_pos, double body_mu);

/// First-order post-Newtonian point-mass correction.
[[nodiscard]] Vec3 relativistic_correction(const Vec3& r, const Vec3& v,
                                           double mu = constants::kEarthMu);

/// Total inertial acceleration. Throws ReentryError below the atmosphere floor.
[[nodiscard]] Vec3 acceleration(const Epoch& epoch, const StateVector& state,
                                const SpacecraftParams& sc, const ForceModelConfig& cfg,
                                const GravityModel& gravity = GravityModel::bundled());

/**
 * @brief States at a fixed step with cubic Hermite interpolation between nodes.
 *
 * The last interval is shorter when the span is not a multiple of the step.
 */
class Trajectory {
 public:
  Trajectory(std::vector<StateVector> nodes, double step);

  [[nodiscard]] const std::vector<StateVector>& nodes() const { return nodes_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] Epoch start() const { return nodes_.front().epoch; }
  [[nodiscard]] Epoch end() const { return nodes_.back().epoch; }
  [[nodiscard]] double duration() const { return end() - start(); }

  /// Throws std::out_of_range outside [start, end].
  [[nodiscard]] StateVector interpolate(const Epoch& t) const;

 private:
  std::vector<StateVector> nodes_;
  double step_;
};

/// Classical RK4 with a fixed step; node count floor(duration/step)+1, plus a final partial step.
[[nodiscard]] Trajectory propagate_rk4(const StateVector& initial, const SpacecraftParams& sc,
                                       const ForceModelConfig& cfg, double duration, double step,
                                       const GravityModel& gravity = GravityModel::bundled());

}  // namespace eosched
