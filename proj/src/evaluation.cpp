#include "eosched/evaluation.hpp"

#include <cmath>
#include <set>

namespace eosched {

TruthSet sample_truths(const StateVector& nominal, const OrbitCovariance& cov,
                       std::span<const ImageTarget> targets, const PropagationSettings& settings) {
  const auto states = sample_initial_states(nominal, cov, SeedStream::Evaluation);
  TruthSet truths;
  truths.covariance = cov;
  truths.samples.resize(states.size());
  parallel_for(states.size(), settings.threads, [&](std::size_t i) {
    SampleWindows& out = truths.samples[i];
    try {
      const Trajectory traj =
          propagate_rk4(states[i], settings.spacecraft, settings.force_model, settings.duration, settings.step);
      out.windows = find_opportunities(traj, targets);
    } catch (const ReentryError& e) {
      out.ok = false;
      out.error = e.what();
    } catch (const ModelDomainError& e) {
      out.ok = false;
      out.error = e.what();
    }
  });
  return truths;
}

double realized_reward(const TaskPlan& plan, const std::vector<std::vector<Opportunity>>& true_windows,
                       std::span<const ImageTarget> targets) {
  std::set<std::size_t> succeeded;
  for (const auto& e : plan.entries) {
    if (e.image >= true_windows.size()) continue;
    Collect c;
    c.image = e.image;
    c.t_start = e.t_start;
    c.t_end = e.t_end;
    if (contained_in_window(c, true_windows[e.image])) succeeded.insert(e.image);
  }
  double total = 0.0;
  for (std::size_t i : succeeded) total += targets[i].reward;
  return total;
}

double realized_reward(const TaskPlan& plan, const Trajectory& true_traj, std::span<const ImageTarget> targets) {
  return realized_reward(plan, find_opportunities(true_traj, targets), targets);
}

EvaluationReport evaluate(const TaskPlan& plan, const TruthSet& truths, std::span<const ImageTarget> targets) {
  EvaluationReport report;
  report.planner = plan.planner;
  report.nominal_reward = plan.nominal_reward;
  report.runtime_s = plan.runtime_s;
  report.sample_count = truths.samples.size();
  report.seed = truths.covariance.seed;
  for (const auto& s : truths.samples) {
    if (!s.ok) {
      ++report.failed_samples;
      continue;
    }
    report.rewards.push_back(realized_reward(plan, s.windows, targets));
  }
  const auto n = static_cast<double>(report.rewards.size());
  if (!report.rewards.empty()) {
    double sum = 0.0;
    for (double r : report.rewards) sum += r;
    report.mean_reward = sum / n;
  }
  if (report.rewards.size() > 1) {
    double ss = 0.0;
    for (double r : report.rewards) ss += (r - report.mean_reward) * (r - report.mean_reward);
    report.stdev_reward = std::sqrt(ss / (n - 1.0));
  }
  return report;
}

EvaluationReport evaluate(const TaskPlan& plan, const StateVector& nominal, const OrbitCovariance& cov,
                          std::span<const ImageTarget> targets, const PropagationSettings& settings) {
  return evaluate(plan, sample_truths(nominal, cov, targets, settings), targets);
}

}  // namespace eosched
