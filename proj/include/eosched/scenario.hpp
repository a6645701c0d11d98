/**
 * @file scenario.hpp
 * @brief Scenario configuration, target generation and the end-to-end pipeline.
 */
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eosched/evaluation.hpp"
#include "eosched/planners.hpp"
#include "eosched/uncertainty.hpp"

namespace eosched {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "EOSCHED_OUTPUT_ROOT";

/// Invalid or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OrbitSpec {
  double altitude{550e3};  // m above the equatorial radius
  double inclination{90.0 * constants::kDegToRad};
  double raan{0.0};
  double eccentricity{0.0};
  double arg_perigee{0.0};
  double true_anomaly{0.0};
};

struct TargetSource {
  std::optional<std::filesystem::path> file;  // takes precedence over the generator
  std::size_t count{600};
  std::uint64_t seed{1};
  double look_angle_max{kDefaultLookAngleMax};
  double collect_duration{kDefaultCollectDuration};
};

struct PlannerSettings {
  std::vector<std::string> enabled{"graph", "milp", "mdp"};
  double max_slew_rate{kDefaultMaxSlewRate};
  double horizon{300.0};
  int mdp_depth{2};
  double gamma{1.0};
  double milp_time_limit{600.0};
  std::size_t milp_node_limit{5'000'000};

  [[nodiscard]] ConstraintSet constraints() const { return ConstraintSet::standard(max_slew_rate, horizon); }
};

struct EvaluationSettings {
  std::size_t samples{100};
  std::uint64_t seed{2};
};

struct Scenario {
  std::string name{"scenario"};
  Epoch start{Epoch::from_calendar(2024, 1, 1)};
  double duration{86400.0};
  double step{10.0};
  OrbitSpec orbit{};
  SpacecraftParams spacecraft{};
  ForceModelConfig force_model{};
  TargetSource targets{};
  OrbitCovariance uncertainty{0.0, 10, 1};
  PlannerSettings planners{};
  EvaluationSettings evaluation{};

  void validate() const;
  [[nodiscard]] StateVector initial_state() const;
  [[nodiscard]] PropagationSettings propagation(unsigned threads) const;
  [[nodiscard]] OrbitCovariance evaluation_covariance() const;
};

/// Position sigma (m) of the orbit-determination cases 1..6.
[[nodiscard]] double case_position_sigma(int case_number);

/// Parses a scenario, or the scenario embedded in a run manifest. Relative target paths resolve
/// against `base_dir`. Throws ConfigError.
[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);
/// Every field, defaults included.
[[nodiscard]] nlohmann::json scenario_to_json(const Scenario& s);

/// Uniform on the sphere: lat = asin(u), u ~ U(-1, 1), lon ~ U(-pi, pi). Ids 1..count.
[[nodiscard]] std::vector<ImageTarget> generate_targets(std::size_t count, std::uint64_t seed,
                                                        double look_angle_max = kDefaultLookAngleMax,
                                                        double collect_duration = kDefaultCollectDuration);
[[nodiscard]] std::vector<ImageTarget> load_targets(const Scenario& s);

/// 64-bit FNV-1a, hex encoded.
[[nodiscard]] std::string fnv1a_hex(std::string_view text);

// ---------------------------------------------------------------------------------------------
// Pipeline

struct RunOptions {
  std::filesystem::path output_dir;
  std::optional<std::vector<std::string>> planners;  // overrides the scenario list
  unsigned threads{1};
  bool export_lp{false};
  std::function<void(const std::string&)> log;
};

struct RunResult {
  bool ok{true};
  std::string failed_stage;
  std::string error;
  std::filesystem::path manifest;
  std::vector<TaskPlan> plans;
  std::vector<EvaluationReport> reports;
  WindowStatistics window_stats;
};

/// Writes every artifact under options.output_dir. Stage failures are reported in the result
/// and the manifest rather than thrown.
[[nodiscard]] RunResult run_pipeline(const Scenario& scenario, const RunOptions& options);

/// Resolves an output directory against the EOSCHED_OUTPUT_ROOT override when it is relative.
[[nodiscard]] std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

/// Names of the planners accepted in configs and on the command line.
[[nodiscard]] std::vector<std::string> parse_planner_list(const std::string& csv);

}  // namespace eosched
