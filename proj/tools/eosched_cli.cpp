// Command-line front end: target generation, propagation, windows, Monte Carlo statistics,
// planning, evaluation, and the full pipeline.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "eosched/io.hpp"
#include "eosched/scenario.hpp"

namespace fs = std::filesystem;
using namespace eosched;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

class StageFailure : public std::runtime_error {
 public:
  StageFailure(const std::string& stage, const std::string& what)
      : std::runtime_error(fmt::format("[{}] {}", stage, what)) {}
};

void say(const std::string& msg) { std::cerr << msg << '\n'; }

template <typename Fn>
void stage(const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

struct Common {
  std::string scenario_path;
  std::string dir{"."};
  unsigned threads{1};

  Scenario scenario() const { return load_scenario(scenario_path); }
  fs::path out() const {
    const fs::path d = resolve_output_dir(dir);
    fs::create_directories(d);
    return d;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-s,--scenario", c.scenario_path, "Scenario JSON or run manifest")->required()->check(CLI::ExistingFile);
  cmd->add_option("-d,--dir", c.dir, "Artifact directory (relative paths honour " + std::string(kOutputRootEnv) + ")");
  cmd->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
}

std::vector<ImageTarget> stage_targets(const fs::path& dir) { return io::read_targets(dir / "targets.json"); }

std::vector<double> rewards_of(const std::vector<ImageTarget>& targets) {
  std::vector<double> r;
  for (const auto& t : targets) r.push_back(t.reward);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite imaging task planning under orbit uncertainty"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // targets
  auto* targets_cmd = app.add_subcommand("targets", "Generate random targets uniformly on the sphere");
  std::size_t count = 600;
  std::uint64_t seed = 1;
  double theta_deg = kDefaultLookAngleMax / constants::kDegToRad;
  double collect_s = kDefaultCollectDuration;
  std::string targets_out = "targets.json";
  std::string targets_scenario;
  targets_cmd->add_option("-n,--count", count, "Number of targets")->check(CLI::PositiveNumber);
  targets_cmd->add_option("--seed", seed, "Generator seed");
  targets_cmd->add_option("--theta-max-deg", theta_deg, "Look-angle limit")->check(CLI::Range(0.0, 90.0));
  targets_cmd->add_option("--collect-duration", collect_s, "Collect duration (s)")->check(CLI::PositiveNumber);
  targets_cmd->add_option("-s,--scenario", targets_scenario, "Take the target source from a scenario instead");
  targets_cmd->add_option("-o,--output", targets_out, "Output JSON");

  Common common;
  auto* propagate_cmd = app.add_subcommand("propagate", "Propagate the nominal orbit to trajectory.csv");
  add_common(propagate_cmd, common);
  auto* windows_cmd = app.add_subcommand("windows", "Compute windows.csv and collects.csv from trajectory.csv");
  add_common(windows_cmd, common);
  auto* mc_cmd = app.add_subcommand("mc-stats", "Monte Carlo window statistics and collect probabilities");
  add_common(mc_cmd, common);
  auto* plan_cmd = app.add_subcommand("plan", "Run the planners on collects.csv");
  add_common(plan_cmd, common);
  std::string planners_csv;
  plan_cmd->add_option("--planners", planners_csv, "Comma-separated subset of graph,milp,mdp");
  bool export_lp = false;
  plan_cmd->add_flag("--export-lp", export_lp, "Also write the MILP model in LP format");
  auto* eval_cmd = app.add_subcommand("evaluate", "Replay plan_*.json against sampled true trajectories");
  add_common(eval_cmd, common);
  auto* run_cmd = app.add_subcommand("run", "Full pipeline with a run manifest");
  add_common(run_cmd, common);
  run_cmd->add_option("--planners", planners_csv, "Comma-separated subset of graph,milp,mdp");
  run_cmd->add_flag("--export-lp", export_lp, "Also write the MILP model in LP format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*targets_cmd) {
      std::vector<ImageTarget> targets;
      if (!targets_scenario.empty()) {
        targets = load_targets(load_scenario(targets_scenario));
      } else {
        targets = generate_targets(count, seed, theta_deg * constants::kDegToRad, collect_s);
      }
      const fs::path out = resolve_output_dir(targets_out);
      stage("targets", [&] { io::write_targets(out, targets); });
      say(fmt::format("wrote {} targets to {}", targets.size(), out.string()));
      return 0;
    }

    const Scenario scenario = common.scenario();
    const fs::path dir = common.out();

    if (*run_cmd) {
      RunOptions options;
      options.output_dir = dir;
      options.threads = common.threads;
      options.export_lp = export_lp;
      options.log = say;
      if (!planners_csv.empty()) options.planners = parse_planner_list(planners_csv);
      const RunResult result = run_pipeline(scenario, options);
      if (!result.ok) {
        say(fmt::format("run FAILED: {}", result.error));
        return kExitStage;
      }
      for (const auto& r : result.reports) {
        say(fmt::format("{:6s} nominal {:8.1f}  mean {:8.2f}  stdev {:7.2f}  runtime {:.2f} s", r.planner,
                        r.nominal_reward, r.mean_reward, r.stdev_reward, r.runtime_s));
      }
      say(fmt::format("manifest: {}", result.manifest.string()));
      return 0;
    }

    if (*propagate_cmd) {
      stage("propagate", [&] {
        const Trajectory traj = propagate_rk4(scenario.initial_state(), scenario.spacecraft, scenario.force_model,
                                              scenario.duration, scenario.step);
        io::write_text(dir / "trajectory.csv", io::trajectory_csv(traj));
        say(fmt::format("wrote {} states", traj.size()));
      });
    } else if (*windows_cmd) {
      stage("windows", [&] {
        if (!fs::exists(dir / "targets.json")) io::write_targets(dir / "targets.json", load_targets(scenario));
        const auto targets = stage_targets(dir);
        const Trajectory traj = io::read_trajectory(dir / "trajectory.csv");
        const auto windows = find_opportunities(traj, targets);
        const auto collects = discretize(windows, targets, traj);
        io::write_text(dir / "windows.csv", io::windows_csv(windows, targets));
        io::write_text(dir / "collects.csv", io::collects_csv(collects, targets));
        say(fmt::format("{} collects", collects.size()));
      });
    } else if (*mc_cmd) {
      stage("mc-stats", [&] {
        const auto targets = stage_targets(dir);
        const auto windows = io::read_windows(dir / "windows.csv", targets);
        const auto collects = io::read_collects(dir / "collects.csv", targets);
        const auto samples = sample_initial_states(scenario.initial_state(), scenario.uncertainty);
        Ensemble ensemble = ensemble_windows(samples, targets, scenario.propagation(common.threads), windows);
        ensemble.covariance = scenario.uncertainty;
        io::write_text(dir / "window_stats.csv", io::window_stats_csv(window_statistics(ensemble)));
        io::write_text(dir / "probabilities.json",
                       io::dump(io::probabilities_to_json(collect_probabilities(collects, ensemble))));
      });
    } else if (*plan_cmd) {
      const auto list = planners_csv.empty() ? scenario.planners.enabled : parse_planner_list(planners_csv);
      stage("plan", [&] {
        const auto targets = stage_targets(dir);
        const auto rewards = rewards_of(targets);
        const auto collects = io::read_collects(dir / "collects.csv", targets);
        const ConstraintSet cs = scenario.planners.constraints();
        for (const auto& name : list) {
          TaskPlan plan;
          if (name == "graph") {
            plan = plan_graph(collects, rewards, cs);
          } else if (name == "milp") {
            plan = plan_milp(collects, rewards, cs, {scenario.planners.milp_time_limit, scenario.planners.milp_node_limit});
            if (export_lp) io::write_text(dir / "milp.lp", build_milp(collects, rewards, cs).to_lp(collects));
          } else {
            const auto probs = io::probabilities_from_json(nlohmann::json::parse(io::read_text(dir / "probabilities.json")));
            MdpOptions mdp;
            mdp.depth = scenario.planners.mdp_depth;
            mdp.gamma = scenario.planners.gamma;
            mdp.start = scenario.start;
            mdp.end = scenario.start + scenario.duration;
            plan = plan_mdp_forward_search(collects, rewards, cs, probs, mdp);
          }
          io::write_text(dir / fmt::format("plan_{}.json", name), io::dump(io::plan_to_json(plan, targets)));
          say(fmt::format("{}: nominal reward {} in {:.2f} s", name, plan.nominal_reward, plan.runtime_s));
        }
      });
    } else if (*eval_cmd) {
      stage("evaluate", [&] {
        const auto targets = stage_targets(dir);
        const TruthSet truths = sample_truths(scenario.initial_state(), scenario.evaluation_covariance(), targets,
                                              scenario.propagation(common.threads));
        std::vector<EvaluationReport> reports;
        nlohmann::json out = nlohmann::json::array();
        for (const char* name : {"graph", "milp", "mdp"}) {
          const fs::path p = dir / fmt::format("plan_{}.json", name);
          if (!fs::exists(p)) continue;
          const TaskPlan plan = io::plan_from_json(nlohmann::json::parse(io::read_text(p)), targets);
          reports.push_back(evaluate(plan, truths, targets));
          out.push_back(io::report_to_json(reports.back()));
        }
        if (reports.empty()) throw std::runtime_error("no plan_*.json found in " + dir.string());
        io::write_text(dir / "evaluation.json", io::dump({{"case", scenario.name}, {"reports", out}}));
        io::write_text(dir / "evaluation.csv", io::reports_csv(scenario.name, reports));
      });
    }
    return 0;
  } catch (const ConfigError& e) {
    say(fmt::format("config error: {}", e.what()));
    return kExitConfig;
  } catch (const StageFailure& e) {
    say(e.what());
    return kExitStage;
  } catch (const std::exception& e) {
    say(fmt::format("error: {}", e.what()));
    return kExitStage;
  }
}
