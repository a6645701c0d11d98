#include <cmath>
#include <random>

#include <doctest.h>

#include "eosched/uncertainty.hpp"

using namespace eosched;
namespace c = eosched::constants;

namespace {

const Epoch kT0 = Epoch::from_calendar(2024, 3, 1);

StateVector polar() {
  KeplerianElements el;
  el.semi_major_axis = c::kEarthEquatorialRadius + 550e3;
  el.inclination = c::kPi / 2.0;
  return keplerian_to_state(kT0, el);
}

Opportunity window(std::size_t image, double a, double b) { return {image, kT0 + a, kT0 + b}; }

Collect collect(std::int64_t id, std::size_t image, double a, double b) {
  Collect col;
  col.id = id;
  col.image = image;
  col.t_start = kT0 + a;
  col.t_end = kT0 + b;
  return col;
}

std::vector<ImageTarget> targets(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), lon(-c::kPi, c::kPi);
  std::vector<ImageTarget> out(n);
  for (auto& t : out) t.center = {std::asin(u(rng)), lon(rng), 0.0};
  return out;
}

// Single-image ensemble whose samples have the given windows; matching as the library does.
Ensemble hand_ensemble(const std::vector<Opportunity>& nominal, const std::vector<std::vector<Opportunity>>& samples,
                       double duration = 7200.0) {
  Ensemble e;
  e.start = kT0;
  e.duration = duration;
  e.nominal = {nominal};
  for (const auto& w : samples) {
    SampleWindows s;
    s.windows = {w};
    s.match = {match_windows(nominal, w, e.unmatched_windows)};
    e.samples.push_back(s);
  }
  return e;
}

}  // namespace

TEST_CASE("initial-state sampling") {
  const StateVector nominal = polar();

  SUBCASE("zero sigma reproduces the nominal state") {
    const auto samples = sample_initial_states(nominal, OrbitCovariance{0.0, 5, 3});
    REQUIRE(samples.size() == 5);
    for (const auto& s : samples) {
      CHECK(s.position == nominal.position);
      CHECK(s.velocity == nominal.velocity);
      CHECK(s.epoch == nominal.epoch);
    }
  }
  SUBCASE("RMS displacement matches sigma") {
    const auto samples = sample_initial_states(nominal, OrbitCovariance{5000.0, 1000, 7});
    double sum = 0.0;
    Vec3 mean = Vec3::Zero();
    for (const auto& s : samples) {
      const Vec3 d = s.position - nominal.position;
      sum += d.squaredNorm();
      mean += d;
      CHECK(s.velocity == nominal.velocity);
    }
    const double rms = std::sqrt(sum / 1000.0);
    CHECK(rms > 0.85 * 5000.0);
    CHECK(rms < 1.15 * 5000.0);
    CHECK((mean / 1000.0).norm() < 3.0 * 5000.0 / std::sqrt(1000.0));
  }
  SUBCASE("deterministic per seed and stream") {
    const OrbitCovariance cov{100.0, 8, 42};
    const auto a = sample_initial_states(nominal, cov);
    const auto b = sample_initial_states(nominal, cov);
    const auto other_stream = sample_initial_states(nominal, cov, SeedStream::Evaluation);
    const auto other_seed = sample_initial_states(nominal, OrbitCovariance{100.0, 8, 43});
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].position == b[i].position);
      CHECK(a[i].position != other_stream[i].position);
      CHECK(a[i].position != other_seed[i].position);
    }
    // A prefix of a larger ensemble is the smaller ensemble.
    const auto longer = sample_initial_states(nominal, OrbitCovariance{100.0, 16, 42});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(longer[i].position == a[i].position);
  }
  SUBCASE("invalid covariance") {
    CHECK_THROWS_AS((void)sample_initial_states(nominal, OrbitCovariance{-1.0, 5, 1}), std::invalid_argument);
    CHECK_THROWS_AS((void)sample_initial_states(nominal, OrbitCovariance{10.0, 0, 1}), std::invalid_argument);
  }
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("window matching") {
  const std::vector<Opportunity> nominal{window(0, 100, 300), window(0, 5000, 5200)};
  std::size_t unmatched = 0;

  SUBCASE("shifted windows match their counterparts") {
    const auto m = match_windows(nominal, {window(0, 110, 310), window(0, 4990, 5180)}, unmatched);
    REQUIRE(m.size() == 2);
    CHECK(m[0] == 0u);
    CHECK(m[1] == 1u);
    CHECK(unmatched == 0);
  }
  SUBCASE("a window beyond the acceptance radius stays unmatched") {
    const auto m = match_windows(nominal, {window(0, -2700, -2600), window(0, 5000, 5200)}, unmatched);
    CHECK_FALSE(m[0].has_value());
    CHECK(m[1] == 1u);
    CHECK(unmatched == 1);
  }
  SUBCASE("the nearest of two candidates wins") {
    const auto m = match_windows(nominal, {window(0, 60, 200), window(0, 95, 305)}, unmatched);
    CHECK(m[0] == 1u);
    CHECK(unmatched == 1);
  }
  SUBCASE("extra windows with no nominal counterpart") {
    const auto m = match_windows({}, {window(0, 1, 20)}, unmatched);
    CHECK(m.empty());
    CHECK(unmatched == 1);
  }
}

TEST_CASE("window statistics from a hand-built ensemble") {
  // Two windows in hour 1 and one in hour 2; starts shifted by known offsets.
  const std::vector<Opportunity> nominal{window(0, 100, 300), window(0, 2000, 2100), window(0, 4000, 4150)};
  const std::vector<double> shift_a{-2.0, 0.0, 2.0, 4.0};
  const std::vector<double> shift_b{10.0, -10.0, 0.0, 0.0};
  const std::vector<double> shift_c{1.0, 2.0, 3.0, 6.0};
  std::vector<std::vector<Opportunity>> samples;
  for (std::size_t s = 0; s < 4; ++s) {
    samples.push_back({window(0, 100 + shift_a[s], 300), window(0, 2000 + shift_b[s], 2100),
                       window(0, 4000 + shift_c[s], 4150)});
  }
  const WindowStatistics stats = window_statistics(hand_ensemble(nominal, samples));

  auto sum_sq = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss;
  };
  const double hour1 = std::sqrt((sum_sq(shift_a) + sum_sq(shift_b)) / 6.0);
  const double hour2 = std::sqrt(sum_sq(shift_c) / 3.0);
  const double mean_duration = (200.0 + 100.0 + 150.0) / 3.0;

  REQUIRE(stats.buckets.size() == 2);
  CHECK(stats.mean_duration == doctest::Approx(mean_duration));
  CHECK(stats.buckets[0].hour == 1);
  CHECK(stats.buckets[0].sigma_start == doctest::Approx(hour1));
  CHECK(stats.buckets[0].windows == 2);
  CHECK(stats.buckets[0].matched == 8);
  CHECK(stats.buckets[1].sigma_start == doctest::Approx(hour2));
  CHECK(stats.buckets[1].ratio == doctest::Approx(hour2 / mean_duration));
  CHECK_FALSE(stats.buckets[1].low_sample);
}

TEST_CASE("window statistics flag thin buckets") {
  const std::vector<Opportunity> nominal{window(0, 100, 300)};
  const WindowStatistics stats = window_statistics(hand_ensemble(nominal, {{window(0, 101, 300)}}, 7200.0));
  REQUIRE(stats.buckets.size() == 2);
  CHECK(stats.buckets[0].low_sample);
  CHECK(stats.buckets[1].low_sample);
  CHECK(stats.buckets[1].matched == 0);
  CHECK_THROWS_AS((void)window_statistics(Ensemble{}), std::invalid_argument);
}

TEST_CASE("collect containment") {
  const std::vector<Opportunity> w{window(0, 100, 200), window(0, 300, 400)};
  CHECK(contained_in_window(collect(0, 0, 100, 110), w));
  CHECK(contained_in_window(collect(0, 0, 190, 200), w));
  CHECK_FALSE(contained_in_window(collect(0, 0, 195, 205), w));
  CHECK_FALSE(contained_in_window(collect(0, 0, 99.99, 109.99), w));
  CHECK_FALSE(contained_in_window(collect(0, 0, 250, 260), w));
  CHECK(contained_in_window(collect(0, 0, 390, 400), w));
  CHECK_FALSE(contained_in_window(collect(0, 0, 10, 20), {}));
}

TEST_CASE("collect probabilities") {
  SUBCASE("counts over samples") {
    const std::vector<Opportunity> nominal{window(0, 100, 300)};
    const Ensemble e = hand_ensemble(nominal, {{window(0, 100, 300)},
                                               {window(0, 105, 300)},
                                               {window(0, 95, 290)},
                                               {window(0, 120, 280)},
                                               {window(0, 90, 250)}});
    const std::vector<Collect> collects{collect(0, 0, 100, 110), collect(1, 0, 110, 120), collect(2, 0, 280, 290),
                                        collect(3, 0, 150, 160)};
    const auto table = collect_probabilities(collects, e);
    CHECK(table.samples == 5);
    CHECK(*table.find(0) == 3.0 / 5.0);  // samples 1, 3, 5
    CHECK(*table.find(1) == 4.0 / 5.0);
    CHECK(*table.find(2) == 3.0 / 5.0);
    CHECK(*table.find(3) == 1.0);
    CHECK_FALSE(table.find(99).has_value());
  }
  SUBCASE("nested collects are at least as likely") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> shift(0.0, 20.0);
    std::vector<std::vector<Opportunity>> samples;
    for (int s = 0; s < 50; ++s) samples.push_back({window(0, 100 + shift(rng), 300 + shift(rng))});
    const Ensemble e = hand_ensemble({window(0, 100, 300)}, samples);
    const std::vector<Collect> outer{collect(0, 0, 100, 160), collect(1, 0, 200, 300)};
    const std::vector<Collect> inner{collect(2, 0, 110, 150), collect(3, 0, 220, 230)};
    const auto p_outer = collect_probabilities(outer, e);
    const auto p_inner = collect_probabilities(inner, e);
    CHECK(*p_inner.find(2) >= *p_outer.find(0));
    CHECK(*p_inner.find(3) >= *p_outer.find(1));
  }
}

TEST_CASE("ensemble windows from propagated samples") {
  const auto tgts = targets(30, 9);
  PropagationSettings settings;
  settings.duration = 3 * 3600.0;
  settings.threads = 2;
  const StateVector nominal = polar();
  const Trajectory traj = propagate_rk4(nominal, settings.spacecraft, settings.force_model, settings.duration,
                                        settings.step);
  const auto windows = find_opportunities(traj, tgts);
  const auto collects = discretize(windows, tgts, traj);
  REQUIRE_FALSE(collects.empty());

  SUBCASE("zero sigma reproduces the nominal windows") {
    const OrbitCovariance cov{0.0, 3, 1};
    Ensemble e = ensemble_windows(sample_initial_states(nominal, cov), tgts, settings, windows);
    e.covariance = cov;
    CHECK(e.failed_samples() == 0);
    CHECK(e.unmatched_windows == 0);
    for (const auto& s : e.samples) {
      for (std::size_t i = 0; i < tgts.size(); ++i) {
        REQUIRE(s.windows[i].size() == windows[i].size());
        for (std::size_t k = 0; k < windows[i].size(); ++k) {
          CHECK(s.windows[i][k].t_start == windows[i][k].t_start);
          CHECK(s.match[i][k] == k);
        }
      }
    }
    const auto table = collect_probabilities(collects, e);
    for (const auto& col : collects) CHECK(*table.find(col.id) == 1.0);
    for (const auto& b : window_statistics(e).buckets) CHECK(b.sigma_start == 0.0);
  }
  SUBCASE("results do not depend on the worker count") {
    const OrbitCovariance cov{1000.0, 4, 2};
    const auto samples = sample_initial_states(nominal, cov);
    PropagationSettings serial = settings;
    serial.threads = 1;
    const Ensemble a = ensemble_windows(samples, tgts, serial, windows);
    const Ensemble b = ensemble_windows(samples, tgts, settings, windows);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      for (std::size_t i = 0; i < tgts.size(); ++i) {
        REQUIRE(a.samples[s].windows[i].size() == b.samples[s].windows[i].size());
        for (std::size_t k = 0; k < a.samples[s].windows[i].size(); ++k) {
          CHECK(a.samples[s].windows[i][k].t_start == b.samples[s].windows[i][k].t_start);
        }
      }
    }
  }
  SUBCASE("a re-entering sample is recorded as failed") {
    std::vector<StateVector> samples{nominal, nominal};
    samples[1].position = samples[1].position.normalized() * (c::kEarthEquatorialRadius + 50e3);
    const Ensemble e = ensemble_windows(samples, tgts, settings, windows);
    CHECK(e.failed_samples() == 1);
    CHECK_FALSE(e.samples[1].ok);
    CHECK_FALSE(e.samples[1].error.empty());
    const auto table = collect_probabilities(collects, e);
    for (const auto& col : collects) CHECK(*table.find(col.id) <= 0.5);
  }
}
