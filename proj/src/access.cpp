#include "eosched/access.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace eosched {

void ImageTarget::validate() const {
  if (!(reward >= 0.0)) throw std::invalid_argument(fmt::format("target {}: negative reward", id));
  if (!(look_angle_max > 0.0 && look_angle_max < constants::kPi / 2)) {
    throw std::invalid_argument(fmt::format("target {}: look angle limit outside (0, 90) deg", id));
  }
  if (!(collect_duration > 0.0)) {
    throw std::invalid_argument(fmt::format("target {}: collect duration must be positive", id));
  }
  if (!(std::abs(center.latitude) <= constants::kPi / 2)) {
    throw std::invalid_argument(fmt::format("target {}: latitude out of range", id));
  }
}

ConstraintSet ConstraintSet::standard(double max_slew_rate, double horizon) {
  ConstraintSet cs;
  cs.max_slew_rate = max_slew_rate;
  cs.horizon = horizon;
  cs.predicates.emplace_back(
      [rate = max_slew_rate](const MdpState& s, const Collect& c, std::span<const Collect> all) {
        return !s.last_collect || slew_feasible(all[*s.last_collect], c, rate);
      });
  cs.predicates.emplace_back([](const MdpState& s, const Collect& c, std::span<const Collect>) {
    return c.image >= s.collected.size() || !s.collected[c.image];
  });
  return cs;
}

namespace {

// Line of sight is clear when the segment does not dip inside a sphere whose radius is
// the smaller of the equatorial radius and the target's own geocentric radius.
bool line_of_sight(const Vec3& sat, const Vec3& target) {
  const double radius = std::min(constants::kEarthEquatorialRadius, target.norm()) * (1.0 - 1e-12);
  const Vec3 d = target - sat;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return true;
  const double u = std::clamp(-sat.dot(d) / len2, 0.0, 1.0);
  return (sat + u * d).norm() >= radius;
}

double cos_look(const Vec3& sat, const Vec3& target) {
  const Vec3 los = target - sat;
  return -sat.dot(los) / (sat.norm() * los.norm());
}

bool visible_ecef(const Vec3& sat, const Vec3& target, double cos_max) {
  return cos_look(sat, target) >= cos_max && line_of_sight(sat, target);
}

class WindowSearch {
 public:
  WindowSearch(const Trajectory& traj, const std::vector<Vec3>& sat_ecef)
      : traj_(traj), sat_ecef_(sat_ecef) {}

  std::vector<Opportunity> run(std::size_t image, const ImageTarget& target) const {
    const Vec3 tgt = target.position_ecef();
    const double cos_max = std::cos(target.look_angle_max);
    const auto& nodes = traj_.nodes();

    std::vector<Opportunity> out;
    auto emit = [&](Epoch a, Epoch b) {
      if (b - a >= kMinWindowDuration) out.push_back(Opportunity{image, a, b});
    };

    bool prev = visible_ecef(sat_ecef_[0], tgt, cos_max);
    Epoch start = nodes[0].epoch;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      const bool cur = visible_ecef(sat_ecef_[k], tgt, cos_max);
      const Epoch a = nodes[k - 1].epoch;
      const Epoch b = nodes[k].epoch;
      if (!prev && cur) {
        start = refine(a, b, tgt, cos_max, /*rising=*/true);
      } else if (prev && !cur) {
        emit(start, refine(a, b, tgt, cos_max, /*rising=*/false));
      } else if (!prev && !cur) {
        if (auto peak = hidden_peak(k, tgt, cos_max, target.look_angle_max)) {
          emit(refine(a, *peak, tgt, cos_max, true), refine(*peak, b, tgt, cos_max, false));
        }
      }
      prev = cur;
    }
    if (prev) emit(start, nodes.back().epoch);
    return out;
  }

 private:
  bool visible_at(const Epoch& t, const Vec3& tgt, double cos_max) const {
    return visible_ecef(eci_to_ecef(t, traj_.interpolate(t).position), tgt, cos_max);
  }

  double cos_look_at(const Epoch& t, const Vec3& tgt) const {
    return cos_look(eci_to_ecef(t, traj_.interpolate(t).position), tgt);
  }

  // Bisection on [a, b] with visibility changing across it; returns the visible-side bound.
  Epoch refine(Epoch a, Epoch b, const Vec3& tgt, double cos_max, bool rising) const {
    while (b - a > kWindowRefineTolerance) {
      const Epoch mid = a + 0.5 * (b - a);
      if (visible_at(mid, tgt, cos_max) == rising) {
        b = mid;
      } else {
        a = mid;
      }
    }
    return rising ? b : a;
  }

  // A pass can graze the look-angle cone entirely between two nodes. When both nodes are
  // near the cone edge, locate the look-angle minimum and report it if it is visible.
  std::optional<Epoch> hidden_peak(std::size_t k, const Vec3& tgt, double cos_max, double look_max) const {
    constexpr double kNearEdge = 15.0 * constants::kDegToRad;
    const double cos_near = std::cos(std::min(look_max + kNearEdge, constants::kPi / 2));
    if (cos_look(sat_ecef_[k - 1], tgt) < cos_near || cos_look(sat_ecef_[k], tgt) < cos_near) {
      return std::nullopt;
    }
    const auto& nodes = traj_.nodes();
    double lo = 0.0;
    double hi = nodes[k].epoch - nodes[k - 1].epoch;
    const Epoch t0 = nodes[k - 1].epoch;
    constexpr double kGolden = 0.6180339887498949;
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = cos_look_at(t0 + x1, tgt);
    double f2 = cos_look_at(t0 + x2, tgt);
    while (hi - lo > kWindowRefineTolerance) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kGolden * (hi - lo);
        f1 = cos_look_at(t0 + x1, tgt);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kGolden * (hi - lo);
        f2 = cos_look_at(t0 + x2, tgt);
      }
    }
    const Epoch peak = t0 + 0.5 * (lo + hi);
    if (peak <= nodes[k - 1].epoch || peak >= nodes[k].epoch) return std::nullopt;
    if (!visible_at(peak, tgt, cos_max)) return std::nullopt;
    return peak;
  }

  const Trajectory& traj_;
  const std::vector<Vec3>& sat_ecef_;
};

}  // namespace

double look_angle(const Vec3& sat_ecef, const Vec3& target_ecef) {
  return std::acos(std::clamp(cos_look(sat_ecef, target_ecef), -1.0, 1.0));
}

bool visibility(const StateVector& state, const ImageTarget& target) {
  return visible_ecef(eci_to_ecef(state.epoch, state.position), target.position_ecef(),
                      std::cos(target.look_angle_max));
}

std::vector<std::vector<Opportunity>> find_opportunities(const Trajectory& traj,
                                                         std::span<const ImageTarget> targets) {
  std::vector<Vec3> sat_ecef;
  sat_ecef.reserve(traj.size());
  for (const auto& node : traj.nodes()) sat_ecef.push_back(eci_to_ecef(node.epoch, node.position));

  const WindowSearch search(traj, sat_ecef);
  std::vector<std::vector<Opportunity>> out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) out[i] = search.run(i, targets[i]);
  return out;
}

std::vector<Collect> discretize(const std::vector<std::vector<Opportunity>>& opportunities,
                                std::span<const ImageTarget> targets, const Trajectory& traj) {
  std::vector<Collect> out;
  auto pointing = [&](const Epoch& t, const Vec3& tgt_ecef) -> Vec3 {
    const Vec3 sat = traj.interpolate(t).position;
    return (ecef_to_eci(t, tgt_ecef) - sat).normalized();
  };
  for (const auto& windows : opportunities) {
    for (const auto& w : windows) {
      const ImageTarget& target = targets[w.image];
      const Vec3 tgt = target.position_ecef();
      const auto n = static_cast<std::size_t>(std::floor((w.duration() + 1e-9) / target.collect_duration));
      for (std::size_t k = 0; k < n; ++k) {
        Collect c;
        c.image = w.image;
        c.t_start = w.t_start + static_cast<double>(k) * target.collect_duration;
        c.t_end = c.t_start + target.collect_duration;
        if (c.t_end > w.t_end) break;
        c.pointing_start = pointing(c.t_start, tgt);
        c.pointing_end = pointing(c.t_end, tgt);
        out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Collect& a, const Collect& b) {
    return a.t_start != b.t_start ? a.t_start < b.t_start : a.image < b.image;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<std::int64_t>(i);
  return out;
}

double pointing_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

bool slew_feasible(const Collect& from, const Collect& to, double max_slew_rate) {
  if (to.t_start < from.t_end) return false;
  const double gap = to.t_start - from.t_end;
  if (max_slew_rate * gap >= constants::kPi) return true;  // any reorientation fits
  return pointing_angle(from.pointing_end, to.pointing_start) <= max_slew_rate * gap;
}

std::vector<Action> action_space(const MdpState& state, std::span<const Collect> collects,
                                 const ConstraintSet& constraints) {
  std::vector<Action> out{Action{}};
  auto it = std::upper_bound(collects.begin(), collects.end(), state.time,
                             [](const Epoch& t, const Collect& c) { return t < c.t_start; });
  for (; it != collects.end(); ++it) {
    if (it->t_start - state.time > constraints.horizon) break;
    const bool admissible = std::all_of(constraints.predicates.begin(), constraints.predicates.end(),
                                        [&](const ConstraintFn& f) { return f(state, *it, collects); });
    if (admissible) out.push_back(Action{static_cast<std::size_t>(it - collects.begin())});
  }
  return out;
}

}  // namespace eosched
