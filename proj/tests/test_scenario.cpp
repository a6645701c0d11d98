#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include <doctest.h>
#include <unistd.h>

#include "eosched/io.hpp"
#include "eosched/scenario.hpp"

using namespace eosched;
using nlohmann::json;
namespace fs = std::filesystem;
namespace c = eosched::constants;

namespace {

// Kolmogorov-Smirnov statistic of samples against U(lo, hi).
double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

json minimal() { return json{{"start_epoch", "2024-03-01T00:00:00"}}; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("eosched_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Scenario small_scenario() {
  Scenario s = scenario_from_json(json{{"name", "tiny"},
                                       {"start_epoch", "2024-03-01T00:00:00"},
                                       {"duration_s", 5400},
                                       {"targets", {{"count", 25}, {"seed", 4}}},
                                       {"uncertainty", {{"case", 4}, {"samples", 3}}},
                                       {"planners", {{"milp_time_limit_s", 20}}},
                                       {"evaluation", {{"samples", 3}}}});
  return s;
}

}  // namespace

TEST_CASE("generated targets are uniform on the sphere") {
  const auto targets = generate_targets(10000, 1);
  REQUIRE(targets.size() == 10000);
  std::vector<double> sin_lat, lon;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    CHECK(targets[i].id == static_cast<std::int64_t>(i + 1));
    CHECK(targets[i].reward == 1.0);
    sin_lat.push_back(std::sin(targets[i].center.latitude));
    lon.push_back(targets[i].center.longitude);
  }
  // Critical value at the 1% level.
  const double critical = 1.628 / std::sqrt(10000.0);
  CHECK(ks_uniform(sin_lat, -1.0, 1.0) < critical);
  CHECK(ks_uniform(lon, -c::kPi, c::kPi) < critical);
}

TEST_CASE("target generation details") {
  const auto one = generate_targets(1, 5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].id == 1);
  const auto a = generate_targets(50, 7, 40.0 * c::kDegToRad, 5.0);
  const auto b = generate_targets(50, 7, 40.0 * c::kDegToRad, 5.0);
  const auto other = generate_targets(50, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].center.latitude == b[i].center.latitude);
    CHECK(a[i].center.longitude == b[i].center.longitude);
    CHECK(a[i].center.latitude != other[i].center.latitude);
    CHECK(a[i].look_angle_max == 40.0 * c::kDegToRad);
    CHECK(a[i].collect_duration == 5.0);
  }
}

TEST_CASE("orbit determination cases") {
  const std::vector<double> expected{1, 10, 100, 1000, 2500, 5000};
  for (int k = 1; k <= 6; ++k) CHECK(case_position_sigma(k) == expected[static_cast<std::size_t>(k - 1)]);
  CHECK_THROWS_AS((void)case_position_sigma(0), ConfigError);
  CHECK_THROWS_AS((void)case_position_sigma(7), ConfigError);
}

TEST_CASE("scenario parsing") {
  SUBCASE("defaults") {
    const Scenario s = scenario_from_json(minimal());
    CHECK(s.start == Epoch::from_calendar(2024, 3, 1));
    CHECK(s.duration == 86400.0);
    CHECK(s.step == 10.0);
    CHECK(s.orbit.altitude == 550e3);
    CHECK(s.targets.count == 600);
    CHECK(s.planners.mdp_depth == 2);
    CHECK(s.planners.enabled == std::vector<std::string>{"graph", "milp", "mdp"});
    const StateVector x = s.initial_state();
    CHECK(x.position.norm() == doctest::Approx(c::kEarthEquatorialRadius + 550e3));
    CHECK(x.epoch == s.start);
  }
  SUBCASE("uncertainty case sets sigma") {
    json j = minimal();
    j["uncertainty"] = {{"case", 5}, {"samples", 7}, {"seed", 3}};
    const Scenario s = scenario_from_json(j);
    CHECK(s.uncertainty.position_sigma == 2500.0);
    CHECK(s.uncertainty.samples == 7);
    CHECK(s.evaluation_covariance().position_sigma == 2500.0);
    CHECK(s.evaluation_covariance().seed == s.evaluation.seed);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS((void)scenario_from_json(json::object()), ConfigError);
    json bad = minimal();
    bad["colour"] = "blue";
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["orbit"] = {{"altitude", 550}};
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["duration_s"] = "long";
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["planners"] = {{"mdp_depth", 5}};
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["planners"] = {{"enabled", {"graph", "astar"}}};
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["start_epoch"] = "yesterday";
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["spacecraft"] = {{"drag_coefficient", 4.0}};
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
    bad = minimal();
    bad["targets"] = {{"file", "/nonexistent/targets.json"}};
    CHECK_THROWS_AS((void)scenario_from_json(bad), ConfigError);
  }
  SUBCASE("round trip through JSON and a manifest") {
    json j = minimal();
    j["orbit"] = {{"altitude_km", 600}, {"inclination_deg", 97.5}};
    j["planners"] = {{"enabled", {"mdp"}}, {"mdp_depth", 3}};
    const json full = scenario_to_json(scenario_from_json(j));
    CHECK(scenario_to_json(scenario_from_json(full)) == full);
    const json manifest{{"scenario", full}, {"config_hash", fnv1a_hex(full.dump())}};
    CHECK(scenario_to_json(scenario_from_json(manifest)) == full);
  }
}

TEST_CASE("helpers") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(parse_planner_list("graph,mdp") == std::vector<std::string>{"graph", "mdp"});
  CHECK_THROWS_AS((void)parse_planner_list("graph,dijkstra"), ConfigError);
  CHECK_THROWS_AS((void)parse_planner_list(""), ConfigError);

  ::unsetenv(kOutputRootEnv);
  CHECK(resolve_output_dir("out") == fs::path("out"));
  ::setenv(kOutputRootEnv, "/tmp/eosched_root", 1);
  CHECK(resolve_output_dir("out") == fs::path("/tmp/eosched_root/out"));
  CHECK(resolve_output_dir("/abs/out") == fs::path("/abs/out"));
  ::unsetenv(kOutputRootEnv);
}

TEST_CASE("artifact round trips") {
  const auto targets = generate_targets(5, 2);
  SUBCASE("targets") {
    const auto back = io::targets_from_json(io::targets_to_json(targets));
    REQUIRE(back.size() == targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      CHECK(back[i].id == targets[i].id);
      CHECK(back[i].center.latitude == doctest::Approx(targets[i].center.latitude).epsilon(1e-15));
      CHECK(back[i].look_angle_max == doctest::Approx(targets[i].look_angle_max).epsilon(1e-15));
    }
    CHECK_THROWS_AS((void)io::targets_from_json(json{{{"id", 1}}}), io::FormatError);
  }
  SUBCASE("plans") {
    TaskPlan plan;
    plan.planner = "graph";
    const Epoch t = Epoch::from_calendar(2024, 3, 1) + 12.345;
    plan.entries = {{7, 2, t, t + 10.0}, {9, 4, t + 40.0, t + 50.0}};
    plan.nominal_reward = 2.0;
    plan.objective = 2.0;
    const TaskPlan back = io::plan_from_json(io::plan_to_json(plan, targets), targets);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].collect_id == 9);
    CHECK(back.entries[1].image == 4);
    CHECK(back.entries[0].t_start == t);
    CHECK(back.planner == "graph");
    CHECK(io::plan_to_json(plan, targets).contains("runtime_s") == false);
  }
  SUBCASE("trajectories") {
    TempDir dir("traj");
    const Scenario s = small_scenario();
    const Trajectory traj =
        propagate_rk4(s.initial_state(), s.spacecraft, ForceModelConfig::point_mass(), 95.0, 10.0);
    io::write_text(dir.path / "t.csv", io::trajectory_csv(traj));
    const Trajectory back = io::read_trajectory(dir.path / "t.csv");
    REQUIRE(back.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
      CHECK(back.nodes()[i].epoch == traj.nodes()[i].epoch);
      CHECK(back.nodes()[i].position == traj.nodes()[i].position);
      CHECK(back.nodes()[i].velocity == traj.nodes()[i].velocity);
    }
  }
}

TEST_CASE("pipeline writes every artifact") {
  TempDir dir("pipeline");
  const Scenario s = small_scenario();
  RunOptions options;
  options.output_dir = dir.path / "run";
  options.export_lp = true;
  const RunResult result = run_pipeline(s, options);
  REQUIRE(result.ok);
  for (const char* name : {"targets.json", "trajectory.csv", "windows.csv", "collects.csv", "window_stats.csv",
                           "probabilities.json", "plan_graph.json", "plan_milp.json", "plan_mdp.json", "milp.lp",
                           "evaluation.json", "evaluation.csv", "manifest.json"}) {
    CAPTURE(std::string(name));
    CHECK(fs::exists(options.output_dir / name));
  }
  const json manifest = json::parse(io::read_text(result.manifest));
  CHECK(manifest.at("status") == "ok");
  CHECK(manifest.at("config_hash") == fnv1a_hex(scenario_to_json(s).dump()));
  CHECK(manifest.at("version") == kVersion);
  CHECK(result.plans.size() == 3);
  CHECK(result.reports.size() == 3);
  for (const auto& r : result.reports) CHECK(r.sample_count == 3);

  SUBCASE("planner override") {
    RunOptions only;
    only.output_dir = dir.path / "graph_only";
    only.planners = std::vector<std::string>{"graph"};
    const RunResult r = run_pipeline(s, only);
    REQUIRE(r.ok);
    CHECK(fs::exists(only.output_dir / "plan_graph.json"));
    CHECK_FALSE(fs::exists(only.output_dir / "plan_milp.json"));
    CHECK_FALSE(fs::exists(only.output_dir / "milp.lp"));
  }
}

TEST_CASE("a failing stage is reported in the manifest") {
  TempDir dir("failing");
  io::write_text(dir.path / "targets.json", "{\"not\": \"a target list\"}");
  json j{{"start_epoch", "2024-03-01T00:00:00"},
         {"duration_s", 3600},
         {"targets", {{"file", "targets.json"}}}};
  const Scenario s = scenario_from_json(j, dir.path);
  RunOptions options;
  options.output_dir = dir.path / "run";
  const RunResult result = run_pipeline(s, options);
  CHECK_FALSE(result.ok);
  CHECK(result.failed_stage == "targets");
  const json manifest = json::parse(io::read_text(options.output_dir / "manifest.json"));
  CHECK(manifest.at("status") == "FAILED");
  CHECK(manifest.at("failed_stage") == "targets");
}
