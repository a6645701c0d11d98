#include <chrono>

#include <fmt/format.h>

#include "eosched/io.hpp"
#include "eosched/scenario.hpp"

namespace eosched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageRunner {
 public:
  StageRunner(json& stages, const RunOptions& options) : stages_(stages), options_(options) {}

  // Runs one stage; returns false (and records the failure) if it threw.
  template <typename Fn>
  bool run(const std::string& name, Fn&& fn, RunResult& result) {
    if (options_.log) options_.log(fmt::format("[{}] start", name));
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages_.push_back({{"name", name}, {"status", error.empty() ? "ok" : "FAILED"}, {"seconds", seconds}});
    if (!error.empty()) {
      result.ok = false;
      result.failed_stage = name;
      result.error = fmt::format("[{}] {}", name, error);
      if (options_.log) options_.log(result.error);
      return false;
    }
    if (options_.log) options_.log(fmt::format("[{}] done in {:.2f} s", name, seconds));
    return true;
  }

 private:
  json& stages_;
  const RunOptions& options_;
};

bool enabled(const std::vector<std::string>& list, const std::string& name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

}  // namespace

RunResult run_pipeline(const Scenario& input, const RunOptions& options) {
  Scenario scenario = input;
  if (options.planners) scenario.planners.enabled = *options.planners;
  scenario.validate();

  const fs::path out = options.output_dir;
  fs::create_directories(out);
  RunResult result;
  result.manifest = out / "manifest.json";

  const json scenario_json = scenario_to_json(scenario);
  json manifest = {{"tool", "eosched"},
                   {"version", kVersion},
                   {"config_hash", fnv1a_hex(scenario_json.dump())},
                   {"scenario", scenario_json},
                   {"seeds",
                    {{"targets", scenario.targets.seed},
                     {"planner_ensemble", scenario.uncertainty.seed},
                     {"evaluation", scenario.evaluation.seed},
                     {"planner_stream", static_cast<std::uint32_t>(SeedStream::Planner)},
                     {"evaluation_stream", static_cast<std::uint32_t>(SeedStream::Evaluation)}}},
                   {"stages", json::array()},
                   {"artifacts", json::array()}};
  StageRunner stages(manifest["stages"], options);
  auto artifact = [&](const std::string& name, std::string_view text) {
    io::write_text(out / name, text);
    manifest["artifacts"].push_back(name);
  };
  auto finish = [&]() {
    manifest["status"] = result.ok ? "ok" : "FAILED";
    if (!result.ok) {
      manifest["failed_stage"] = result.failed_stage;
      manifest["error"] = result.error;
    }
    io::write_text(result.manifest, io::dump(manifest));
    return result;
  };

  const PropagationSettings propagation = scenario.propagation(options.threads);
  const ConstraintSet constraints = scenario.planners.constraints();
  std::vector<ImageTarget> targets;
  std::vector<double> rewards;
  std::optional<Trajectory> nominal;
  std::vector<std::vector<Opportunity>> windows;
  std::vector<Collect> collects;
  CollectProbabilityTable probabilities;
  json diagnostics;

  if (!stages.run("targets", [&] {
        targets = load_targets(scenario);
        for (const auto& t : targets) rewards.push_back(t.reward);
        artifact("targets.json", io::dump(io::targets_to_json(targets)));
      }, result)) {
    return finish();
  }

  if (!stages.run("propagate", [&] {
        nominal = propagate_rk4(scenario.initial_state(), scenario.spacecraft, scenario.force_model,
                                scenario.duration, scenario.step);
        artifact("trajectory.csv", io::trajectory_csv(*nominal));
      }, result)) {
    return finish();
  }

  if (!stages.run("windows", [&] {
        windows = find_opportunities(*nominal, targets);
        collects = discretize(windows, targets, *nominal);
        std::size_t count = 0;
        for (const auto& w : windows) count += w.size();
        diagnostics["windows"] = count;
        diagnostics["collects"] = collects.size();
        artifact("windows.csv", io::windows_csv(windows, targets));
        artifact("collects.csv", io::collects_csv(collects, targets));
      }, result)) {
    return finish();
  }

  if (!stages.run("mc-stats", [&] {
        const auto samples = sample_initial_states(nominal->nodes().front(), scenario.uncertainty, SeedStream::Planner);
        Ensemble ensemble = ensemble_windows(samples, targets, propagation, windows);
        ensemble.covariance = scenario.uncertainty;
        result.window_stats = window_statistics(ensemble);
        probabilities = collect_probabilities(collects, ensemble);
        diagnostics["unmatched_windows"] = ensemble.unmatched_windows;
        diagnostics["failed_samples_planner"] = ensemble.failed_samples();
        artifact("window_stats.csv", io::window_stats_csv(result.window_stats));
        artifact("probabilities.json", io::dump(io::probabilities_to_json(probabilities)));
      }, result)) {
    return finish();
  }

  json runtimes = json::object();
  if (!stages.run("plan", [&] {
        const auto& list = scenario.planners.enabled;
        if (enabled(list, "graph")) result.plans.push_back(plan_graph(collects, rewards, constraints));
        if (enabled(list, "milp")) {
          MilpOptions milp{scenario.planners.milp_time_limit, scenario.planners.milp_node_limit};
          result.plans.push_back(plan_milp(collects, rewards, constraints, milp));
          if (options.export_lp) artifact("milp.lp", build_milp(collects, rewards, constraints).to_lp(collects));
        }
        if (enabled(list, "mdp")) {
          MdpOptions mdp;
          mdp.depth = scenario.planners.mdp_depth;
          mdp.gamma = scenario.planners.gamma;
          mdp.start = scenario.start;
          mdp.end = scenario.start + scenario.duration;
          result.plans.push_back(plan_mdp_forward_search(collects, rewards, constraints, probabilities, mdp));
        }
        for (const auto& plan : result.plans) {
          const auto problems = check_plan(plan, collects, constraints.max_slew_rate);
          if (!problems.empty()) {
            throw std::runtime_error(fmt::format("{} plan invalid: {}", plan.planner, problems.front()));
          }
          runtimes[plan.planner] = plan.runtime_s;
          artifact(fmt::format("plan_{}.json", plan.planner), io::dump(io::plan_to_json(plan, targets)));
        }
      }, result)) {
    manifest["runtimes_s"] = runtimes;
    manifest["diagnostics"] = diagnostics;
    return finish();
  }
  manifest["runtimes_s"] = runtimes;

  stages.run("evaluate", [&] {
    const TruthSet truths = sample_truths(nominal->nodes().front(), scenario.evaluation_covariance(), targets,
                                          propagation);
    json reports = json::array();
    for (const auto& plan : result.plans) {
      result.reports.push_back(evaluate(plan, truths, targets));
      reports.push_back(io::report_to_json(result.reports.back()));
    }
    diagnostics["failed_samples_evaluation"] =
        result.reports.empty() ? std::size_t{0} : result.reports.front().failed_samples;
    artifact("evaluation.json", io::dump({{"case", scenario.name}, {"reports", reports}}));
    artifact("evaluation.csv", io::reports_csv(scenario.name, result.reports));
  }, result);
  manifest["diagnostics"] = diagnostics;
  return finish();
}

}  // namespace eosched
