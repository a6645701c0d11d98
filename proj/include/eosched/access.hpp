/**
 * @file access.hpp
 * @brief Imaging opportunity windows, collect discretization and action generation.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "eosched/astro_core.hpp"
#include "eosched/dynamics.hpp"

namespace eosched {

inline constexpr double kDefaultLookAngleMax = 55.0 * constants::kDegToRad;
inline constexpr double kDefaultCollectDuration = 10.0;  // s
inline constexpr double kDefaultMaxSlewRate = 1.0 * constants::kDegToRad;  // rad/s
inline constexpr double kWindowRefineTolerance = 0.01;  // s
inline constexpr double kMinWindowDuration = 1.0;       // s

struct ImageTarget {
  std::int64_t id{};
  GeodeticPoint center{};
  double reward{1.0};
  double look_angle_max{kDefaultLookAngleMax};  // rad, off-nadir
  double collect_duration{kDefaultCollectDuration};  // s

  [[nodiscard]] Vec3 position_ecef() const { return geodetic_to_ecef(center); }
  void validate() const;
};

/// Visibility window of one image; `image` indexes the target list.
struct Opportunity {
  std::size_t image{};
  Epoch t_start{};
  Epoch t_end{};
  [[nodiscard]] double duration() const { return t_end - t_start; }
  [[nodiscard]] Epoch midpoint() const { return t_start + 0.5 * duration(); }
};

/// Fixed-length imaging sub-interval of an opportunity. Pointing vectors are inertial unit vectors.
struct Collect {
  std::int64_t id{};
  std::size_t image{};
  Epoch t_start{};
  Epoch t_end{};
  Vec3 pointing_start{Vec3::UnitX()};
  Vec3 pointing_end{Vec3::UnitX()};
};

/// Planner state: current time, per-image collected flags, and the last executed collect.
struct MdpState {
  Epoch time{};
  std::vector<bool> collected;
  std::optional<std::size_t> last_collect;  // index into the collect list
};

/// f_c(s_t, candidate): the candidate collect may follow state s_t.
using ConstraintFn =
    std::function<bool(const MdpState& state, const Collect& candidate, std::span<const Collect> collects)>;

struct ConstraintSet {
  double max_slew_rate{kDefaultMaxSlewRate};  // rad/s
  double horizon{300.0};                       // s; planning lookahead h
  std::vector<ConstraintFn> predicates;

  /// Slew feasibility from the last executed collect plus one collect per image.
  static ConstraintSet standard(double max_slew_rate = kDefaultMaxSlewRate, double horizon = 300.0);
};

/// Index into the collect list, or nil (wait).
struct Action {
  static constexpr std::size_t kNil = static_cast<std::size_t>(-1);
  std::size_t collect{kNil};
  [[nodiscard]] bool is_nil() const { return collect == kNil; }
  friend bool operator==(const Action&, const Action&) = default;
};

/// Look angle (rad) from nadir to the target direction, Earth-fixed inputs.
[[nodiscard]] double look_angle(const Vec3& sat_ecef, const Vec3& target_ecef);

[[nodiscard]] bool visibility(const StateVector& state, const ImageTarget& target);

/// Per-image windows ordered by start time; boundaries refined to 0.01 s.
[[nodiscard]] std::vector<std::vector<Opportunity>> find_opportunities(
    const Trajectory& traj, std::span<const ImageTarget> targets);

/// Back-to-back collects anchored at each window start, sorted by (start, image), ids 0..n-1.
[[nodiscard]] std::vector<Collect> discretize(const std::vector<std::vector<Opportunity>>& opportunities,
                                              std::span<const ImageTarget> targets,
                                              const Trajectory& traj);

[[nodiscard]] double pointing_angle(const Vec3& a, const Vec3& b);

[[nodiscard]] bool slew_feasible(const Collect& from, const Collect& to, double max_slew_rate);

/// NIL first, then admissible collect indices in list order. Collects must be sorted by start.
[[nodiscard]] std::vector<Action> action_space(const MdpState& state, std::span<const Collect> collects,
                                               const ConstraintSet& constraints);

}  // namespace eosched
