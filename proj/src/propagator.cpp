#include <cmath>

#include <fmt/format.h>

#include "eosched/dynamics.hpp"

namespace eosched {

Trajectory::Trajectory(std::vector<StateVector> nodes, double step) : nodes_(std::move(nodes)), step_(step) {
  if (nodes_.empty()) throw std::invalid_argument("trajectory needs at least one node");
  if (!(step_ > 0.0)) throw std::invalid_argument("trajectory step must be positive");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i].epoch > nodes_[i - 1].epoch)) {
      throw std::invalid_argument("trajectory epochs must be strictly increasing");
    }
  }
}

StateVector Trajectory::interpolate(const Epoch& t) const {
  if (t < start() || t > end()) {
    throw std::out_of_range(fmt::format("epoch {} outside trajectory [{}, {}]", t.to_iso(),
                                        start().to_iso(), end().to_iso()));
  }
  const double offset = t - start();
  auto i = static_cast<std::size_t>(std::floor(offset / step_));
  if (i >= nodes_.size() - 1) {
    if (nodes_.size() == 1 || t == end()) return nodes_.back();
    i = nodes_.size() - 2;
  }
  // Guard the floor() against rounding across a node.
  while (i > 0 && t < nodes_[i].epoch) --i;
  while (i + 2 < nodes_.size() && t >= nodes_[i + 1].epoch) ++i;

  const StateVector& a = nodes_[i];
  const StateVector& b = nodes_[i + 1];
  if (t == a.epoch) return a;
  if (t == b.epoch) return b;

  const double h = b.epoch - a.epoch;
  const double s = (t - a.epoch) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  // Derivatives with respect to s.
  const double d00 = 6 * s2 - 6 * s;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s;
  const double d11 = 3 * s2 - 2 * s;

  StateVector out;
  out.epoch = t;
  out.position = h00 * a.position + h10 * h * a.velocity + h01 * b.position + h11 * h * b.velocity;
  out.velocity = (d00 * a.position + d01 * b.position) / h + d10 * a.velocity + d11 * b.velocity;
  return out;
}

namespace {

struct Derivative {
  Vec3 dr;
  Vec3 dv;
};

Derivative evaluate(const Epoch& t, const Vec3& r, const Vec3& v, const SpacecraftParams& sc,
                    const ForceModelConfig& cfg, const GravityModel& gravity) {
  return {v, acceleration(t, StateVector{t, r, v}, sc, cfg, gravity)};
}

StateVector rk4_step(const StateVector& s, double h, const SpacecraftParams& sc,
                     const ForceModelConfig& cfg, const GravityModel& gravity) {
  const Epoch t = s.epoch;
  const Epoch t_mid = t + 0.5 * h;
  const Epoch t_end = t + h;
  const auto k1 = evaluate(t, s.position, s.velocity, sc, cfg, gravity);
  const auto k2 = evaluate(t_mid, s.position + 0.5 * h * k1.dr, s.velocity + 0.5 * h * k1.dv, sc, cfg, gravity);
  const auto k3 = evaluate(t_mid, s.position + 0.5 * h * k2.dr, s.velocity + 0.5 * h * k2.dv, sc, cfg, gravity);
  const auto k4 = evaluate(t_end, s.position + h * k3.dr, s.velocity + h * k3.dv, sc, cfg, gravity);
  StateVector out;
  out.epoch = t_end;
  out.position = s.position + h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
  out.velocity = s.velocity + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  return out;
}

void check_state(const StateVector& s) {
  if (!s.position.allFinite() || !s.velocity.allFinite()) {
    throw ReentryError(fmt::format("non-finite state at {}", s.epoch.to_iso()));
  }
  const double altitude = ecef_to_geodetic(eci_to_ecef(s.epoch, s.position)).altitude;
  if (altitude < kAtmosphereFloorAltitude) {
    throw ReentryError(fmt::format("altitude {:.1f} km below {:.0f} km at {}", altitude / 1e3,
                                   kAtmosphereFloorAltitude / 1e3, s.epoch.to_iso()));
  }
}

}  // namespace

Trajectory propagate_rk4(const StateVector& initial, const SpacecraftParams& sc,
                         const ForceModelConfig& cfg, double duration, double step,
                         const GravityModel& gravity) {
  if (!(step > 0.0)) throw std::invalid_argument("propagation step must be positive");
  if (!(duration >= 0.0)) throw std::invalid_argument("propagation duration must be non-negative");
  cfg.validate(gravity.max_degree());
  check_state(initial);

  const auto full_steps = static_cast<std::size_t>(std::floor(duration / step + 1e-9));
  const Epoch stop = initial.epoch + duration;
  std::vector<StateVector> nodes;
  nodes.reserve(full_steps + 2);
  nodes.push_back(initial);

  for (std::size_t k = 1; k <= full_steps; ++k) {
    StateVector next = rk4_step(nodes.back(), step, sc, cfg, gravity);
    // Anchor node epochs to the grid so rounding does not accumulate.
    next.epoch = initial.epoch + static_cast<double>(k) * step;
    check_state(next);
    nodes.push_back(next);
  }
  const double remainder = stop - nodes.back().epoch;
  if (remainder > 1e-9) {
    StateVector last = rk4_step(nodes.back(), remainder, sc, cfg, gravity);
    last.epoch = stop;
    check_state(last);
    nodes.push_back(last);
  }
  return Trajectory(std::move(nodes), step);
}

}  // namespace eosched
