#include "eosched/uncertainty.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace eosched {

void OrbitCovariance::validate() const {
  if (!(position_sigma >= 0.0)) throw std::invalid_argument("position sigma must be non-negative");
  if (samples < 1) throw std::invalid_argument("Monte Carlo sample count must be at least 1");
}

std::vector<StateVector> sample_initial_states(const StateVector& nominal, const OrbitCovariance& cov,
                                               SeedStream stream) {
  cov.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(cov.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(cov.seed >> 32), static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double axis_sigma = cov.position_sigma / std::sqrt(3.0);

  std::vector<StateVector> out;
  out.reserve(cov.samples);
  for (std::size_t i = 0; i < cov.samples; ++i) {
    StateVector s = nominal;
    // Always draw, so the ensemble for sigma = 0 consumes the same stream.
    const Vec3 delta{normal(rng), normal(rng), normal(rng)};
    s.position += axis_sigma * delta;
    out.push_back(s);
  }
  return out;
}

std::size_t Ensemble::failed_samples() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const SampleWindows& s) { return !s.ok; }));
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::optional<std::size_t>> match_windows(const std::vector<Opportunity>& nominal,
                                                      const std::vector<Opportunity>& sample,
                                                      std::size_t& unmatched) {
  std::vector<std::optional<std::size_t>> match(nominal.size());
  std::vector<double> best(nominal.size(), std::numeric_limits<double>::infinity());
  if (nominal.empty()) {
    unmatched += sample.size();
    return match;
  }

  // Acceptance radius: half the spacing to the nearest neighbouring nominal window.
  std::vector<double> cutoff(nominal.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < nominal.size(); ++k) {
    if (k > 0) cutoff[k] = std::min(cutoff[k], 0.5 * (nominal[k].midpoint() - nominal[k - 1].midpoint()));
    if (k + 1 < nominal.size()) {
      cutoff[k] = std::min(cutoff[k], 0.5 * (nominal[k + 1].midpoint() - nominal[k].midpoint()));
    }
  }

  std::size_t assigned = 0;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const Epoch mid = sample[j].midpoint();
    std::size_t nearest = 0;
    double distance = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nominal.size(); ++k) {
      const double d = std::abs(mid - nominal[k].midpoint());
      if (d < distance) {
        distance = d;
        nearest = k;
      }
    }
    if (distance > cutoff[nearest]) continue;
    if (distance < best[nearest]) {
      if (!match[nearest]) ++assigned;
      best[nearest] = distance;
      match[nearest] = j;
    }
  }
  unmatched += sample.size() - assigned;
  return match;
}

Ensemble ensemble_windows(std::span<const StateVector> samples, std::span<const ImageTarget> targets,
                          const PropagationSettings& settings,
                          const std::vector<std::vector<Opportunity>>& nominal_windows) {
  if (nominal_windows.size() != targets.size()) {
    throw std::invalid_argument("nominal windows must be given per target");
  }
  Ensemble ensemble;
  ensemble.start = samples.empty() ? Epoch{} : samples.front().epoch;
  ensemble.duration = settings.duration;
  ensemble.nominal = nominal_windows;
  ensemble.samples.resize(samples.size());

  parallel_for(samples.size(), settings.threads, [&](std::size_t i) {
    SampleWindows& out = ensemble.samples[i];
    try {
      const Trajectory traj = propagate_rk4(samples[i], settings.spacecraft, settings.force_model,
                                            settings.duration, settings.step);
      out.windows = find_opportunities(traj, targets);
    } catch (const ReentryError& e) {
      out.ok = false;
      out.error = e.what();
      out.windows.assign(targets.size(), {});
    } catch (const ModelDomainError& e) {
      out.ok = false;
      out.error = e.what();
      out.windows.assign(targets.size(), {});
    }
  });

  for (auto& s : ensemble.samples) {
    s.match.resize(targets.size());
    if (!s.ok) continue;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      s.match[i] = match_windows(nominal_windows[i], s.windows[i], ensemble.unmatched_windows);
    }
  }
  return ensemble;
}

WindowStatistics window_statistics(const Ensemble& ensemble) {
  if (ensemble.samples.empty()) throw std::invalid_argument("window statistics need a non-empty ensemble");

  WindowStatistics stats;
  stats.unmatched_windows = ensemble.unmatched_windows;

  double duration_sum = 0.0;
  std::size_t duration_count = 0;
  for (const auto& windows : ensemble.nominal) {
    for (const auto& w : windows) {
      duration_sum += w.duration();
      ++duration_count;
    }
  }
  stats.mean_duration = duration_count ? duration_sum / static_cast<double>(duration_count) : 0.0;

  const int hours = std::max(1, static_cast<int>(std::ceil(ensemble.duration / 3600.0 - 1e-9)));
  std::vector<double> sum_squares(hours, 0.0);
  std::vector<std::size_t> dof(hours, 0);
  stats.buckets.resize(hours);
  for (int h = 0; h < hours; ++h) stats.buckets[h].hour = h + 1;

  for (std::size_t i = 0; i < ensemble.nominal.size(); ++i) {
    for (std::size_t k = 0; k < ensemble.nominal[i].size(); ++k) {
      const double offset = ensemble.nominal[i][k].t_start - ensemble.start;
      const int bucket = std::clamp(static_cast<int>(std::floor(offset / 3600.0)), 0, hours - 1);

      std::vector<double> starts;
      for (const auto& s : ensemble.samples) {
        if (!s.ok || i >= s.match.size() || !s.match[i][k]) continue;
        starts.push_back(s.windows[i][*s.match[i][k]].t_start - ensemble.start);
      }
      stats.buckets[bucket].matched += starts.size();
      if (starts.size() < 2) continue;
      double mean = 0.0;
      for (double t : starts) mean += t;
      mean /= static_cast<double>(starts.size());
      for (double t : starts) sum_squares[bucket] += (t - mean) * (t - mean);
      dof[bucket] += starts.size() - 1;
      stats.buckets[bucket].windows += 1;
    }
  }

  for (int h = 0; h < hours; ++h) {
    auto& b = stats.buckets[h];
    if (b.matched < 2 || dof[h] == 0) {
      b.low_sample = true;
      b.sigma_start = 0.0;
    } else {
      b.sigma_start = std::sqrt(sum_squares[h] / static_cast<double>(dof[h]));
    }
    b.ratio = stats.mean_duration > 0.0 ? b.sigma_start / stats.mean_duration : 0.0;
  }
  return stats;
}

std::optional<double> CollectProbabilityTable::find(std::int64_t collect_id) const {
  const auto it = probability.find(collect_id);
  if (it == probability.end()) return std::nullopt;
  return it->second;
}

bool contained_in_window(const Collect& c, const std::vector<Opportunity>& windows) {
  // Last window starting no later than the collect.
  auto it = std::upper_bound(windows.begin(), windows.end(), c.t_start,
                             [](const Epoch& t, const Opportunity& o) { return t < o.t_start; });
  if (it == windows.begin()) return false;
  --it;
  return c.t_start >= it->t_start && c.t_end <= it->t_end;
}

CollectProbabilityTable collect_probabilities(std::span<const Collect> collects, const Ensemble& ensemble) {
  if (ensemble.samples.empty()) throw std::invalid_argument("collect probabilities need at least one sample");
  CollectProbabilityTable table;
  table.seed = ensemble.covariance.seed;
  table.samples = ensemble.samples.size();
  table.position_sigma = ensemble.covariance.position_sigma;

  const double n = static_cast<double>(ensemble.samples.size());
  for (const auto& c : collects) {
    std::size_t hits = 0;
    for (const auto& s : ensemble.samples) {
      if (s.ok && c.image < s.windows.size() && contained_in_window(c, s.windows[c.image])) ++hits;
    }
    table.probability[c.id] = static_cast<double>(hits) / n;
  }
  return table;
}

}  // namespace eosched
