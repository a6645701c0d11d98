/**
 * @file io.hpp
 * @brief File formats: targets JSON, trajectory/window/collect CSV, plan and report JSON.
 */
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eosched/evaluation.hpp"
#include "eosched/planners.hpp"
#include "eosched/uncertainty.hpp"

namespace eosched::io {

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: the file is replaced as a whole.
void write_text(const std::filesystem::path& path, std::string_view text);

// Targets: [{id, lat_deg, lon_deg, alt_m, reward, theta_max_deg, collect_duration_s}]
[[nodiscard]] nlohmann::json targets_to_json(std::span<const ImageTarget> targets);
[[nodiscard]] std::vector<ImageTarget> targets_from_json(const nlohmann::json& j);
[[nodiscard]] std::vector<ImageTarget> read_targets(const std::filesystem::path& path);
void write_targets(const std::filesystem::path& path, std::span<const ImageTarget> targets);

// Trajectory CSV: epoch, rx, ry, rz, vx, vy, vz
[[nodiscard]] std::string trajectory_csv(const Trajectory& traj);
[[nodiscard]] Trajectory read_trajectory(const std::filesystem::path& path);

// Windows CSV: image_id, t_start, t_end, duration_s
[[nodiscard]] std::string windows_csv(const std::vector<std::vector<Opportunity>>& windows,
                                      std::span<const ImageTarget> targets);
[[nodiscard]] std::vector<std::vector<Opportunity>> read_windows(const std::filesystem::path& path,
                                                                 std::span<const ImageTarget> targets);

// Collects CSV: collect_id, image_id, t_start, t_end, pointing start xyz, pointing end xyz
[[nodiscard]] std::string collects_csv(std::span<const Collect> collects, std::span<const ImageTarget> targets);
[[nodiscard]] std::vector<Collect> read_collects(const std::filesystem::path& path,
                                                 std::span<const ImageTarget> targets);

// Window statistics CSV: bucket_hr, sigma_start_s, mean_duration_s, ratio, matched, low_sample
[[nodiscard]] std::string window_stats_csv(const WindowStatistics& stats);

[[nodiscard]] nlohmann::json probabilities_to_json(const CollectProbabilityTable& table);
[[nodiscard]] CollectProbabilityTable probabilities_from_json(const nlohmann::json& j);

/// Plan artifact. Wall-clock runtime is left out so reruns are byte-identical.
[[nodiscard]] nlohmann::json plan_to_json(const TaskPlan& plan, std::span<const ImageTarget> targets);
[[nodiscard]] TaskPlan plan_from_json(const nlohmann::json& j, std::span<const ImageTarget> targets);

[[nodiscard]] nlohmann::json report_to_json(const EvaluationReport& report);
/// One row per report: case, approach, runtime_s, mean_reward, stdev_reward, nominal_reward.
[[nodiscard]] std::string reports_csv(const std::string& case_name, std::span<const EvaluationReport> reports);

[[nodiscard]] std::string dump(const nlohmann::json& j);

}  // namespace eosched::io
