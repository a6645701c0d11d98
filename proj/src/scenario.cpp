#include "eosched/scenario.hpp"

#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

#include "eosched/io.hpp"

namespace eosched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = constants::kDegToRad;

// Rejects keys outside `allowed` so that typos do not silently fall back to defaults.
void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("'{}': {}", key, e.what()));
  }
}

void read_deg(const json& j, const char* key, double& out_rad) {
  if (!j.contains(key)) return;
  double deg = 0.0;
  read(j, key, deg);
  out_rad = deg * kDeg;
}

}  // namespace

double case_position_sigma(int case_number) {
  static constexpr double kSigma[] = {1.0, 10.0, 100.0, 1000.0, 2500.0, 5000.0};
  if (case_number < 1 || case_number > 6) {
    throw ConfigError(fmt::format("orbit-determination case {} not in 1..6", case_number));
  }
  return kSigma[case_number - 1];
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(duration > 0.0)) fail("duration_s must be positive");
  if (!(step > 0.0)) fail("step_s must be positive");
  if (!(orbit.altitude >= 200e3 && orbit.altitude <= 2000e3)) fail("orbit altitude must be within [200, 2000] km");
  if (!(orbit.eccentricity >= 0.0 && orbit.eccentricity < 1.0)) fail("orbit eccentricity must be in [0, 1)");
  try {
    spacecraft.validate();
    force_model.validate(GravityModel::bundled().max_degree());
    uncertainty.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (targets.file) {
    if (!fs::exists(*targets.file)) fail(fmt::format("target file {} does not exist", targets.file->string()));
  } else if (targets.count < 1) {
    fail("target count must be at least 1");
  }
  if (!(targets.look_angle_max > 0.0 && targets.look_angle_max < constants::kPi / 2)) {
    fail("theta_max_deg must be in (0, 90)");
  }
  if (!(targets.collect_duration > 0.0)) fail("collect_duration_s must be positive");
  for (const auto& p : planners.enabled) {
    if (p != "graph" && p != "milp" && p != "mdp") fail(fmt::format("unknown planner '{}'", p));
  }
  if (!(planners.max_slew_rate > 0.0)) fail("max_slew_rate_deg_s must be positive");
  if (!(planners.horizon > 0.0)) fail("horizon_s must be positive");
  if (planners.mdp_depth < 1 || planners.mdp_depth > kMaxSearchDepth) {
    fail(fmt::format("mdp_depth must be in 1..{}", kMaxSearchDepth));
  }
  if (!(planners.gamma > 0.0 && planners.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (evaluation.samples < 1) fail("evaluation samples must be at least 1");
}

StateVector Scenario::initial_state() const {
  KeplerianElements el;
  el.semi_major_axis = constants::kEarthEquatorialRadius + orbit.altitude;
  el.eccentricity = orbit.eccentricity;
  el.inclination = orbit.inclination;
  el.raan = orbit.raan;
  el.arg_perigee = orbit.arg_perigee;
  el.true_anomaly = orbit.true_anomaly;
  return keplerian_to_state(start, el);
}

PropagationSettings Scenario::propagation(unsigned threads) const {
  PropagationSettings p;
  p.force_model = force_model;
  p.spacecraft = spacecraft;
  p.duration = duration;
  p.step = step;
  p.threads = threads;
  return p;
}

OrbitCovariance Scenario::evaluation_covariance() const {
  return OrbitCovariance{uncertainty.position_sigma, evaluation.samples, evaluation.seed};
}

Scenario scenario_from_json(const json& input, const fs::path& base_dir) {
  // A run manifest carries the materialized scenario.
  const json& j = input.contains("scenario") && input.contains("config_hash") ? input.at("scenario") : input;
  check_keys(j, "scenario", {"name", "start_epoch", "duration_s", "step_s", "orbit", "spacecraft", "force_model",
                             "targets", "uncertainty", "planners", "evaluation"});
  Scenario s;
  read(j, "name", s.name);
  if (j.contains("start_epoch")) {
    try {
      s.start = Epoch::from_iso(j.at("start_epoch").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("start_epoch: {}", e.what()));
    }
  } else {
    throw ConfigError("start_epoch is required");
  }
  read(j, "duration_s", s.duration);
  read(j, "step_s", s.step);

  if (j.contains("orbit")) {
    const json& o = j.at("orbit");
    check_keys(o, "orbit", {"altitude_km", "inclination_deg", "raan_deg", "eccentricity", "arg_perigee_deg",
                            "true_anomaly_deg"});
    if (o.contains("altitude_km")) {
      double km = 0.0;
      read(o, "altitude_km", km);
      s.orbit.altitude = km * 1e3;
    }
    read_deg(o, "inclination_deg", s.orbit.inclination);
    read_deg(o, "raan_deg", s.orbit.raan);
    read(o, "eccentricity", s.orbit.eccentricity);
    read_deg(o, "arg_perigee_deg", s.orbit.arg_perigee);
    read_deg(o, "true_anomaly_deg", s.orbit.true_anomaly);
  }
  if (j.contains("spacecraft")) {
    const json& c = j.at("spacecraft");
    check_keys(c, "spacecraft",
               {"mass_kg", "drag_area_m2", "drag_coefficient", "srp_area_m2", "reflectivity_coefficient"});
    read(c, "mass_kg", s.spacecraft.mass);
    read(c, "drag_area_m2", s.spacecraft.drag_area);
    read(c, "drag_coefficient", s.spacecraft.drag_coefficient);
    read(c, "srp_area_m2", s.spacecraft.srp_area);
    read(c, "reflectivity_coefficient", s.spacecraft.reflectivity_coefficient);
  }
  if (j.contains("force_model")) {
    const json& f = j.at("force_model");
    check_keys(f, "force_model", {"gravity_degree", "gravity_order", "drag", "srp", "third_body_sun",
                                  "third_body_moon", "relativity", "harris_priester_exponent"});
    read(f, "gravity_degree", s.force_model.gravity_degree);
    read(f, "gravity_order", s.force_model.gravity_order);
    read(f, "drag", s.force_model.drag);
    read(f, "srp", s.force_model.srp);
    read(f, "third_body_sun", s.force_model.third_body_sun);
    read(f, "third_body_moon", s.force_model.third_body_moon);
    read(f, "relativity", s.force_model.relativity);
    read(f, "harris_priester_exponent", s.force_model.harris_priester_exponent);
  }
  if (j.contains("targets")) {
    const json& t = j.at("targets");
    check_keys(t, "targets", {"file", "count", "seed", "theta_max_deg", "collect_duration_s"});
    if (t.contains("file") && !t.at("file").is_null()) {
      std::string file;
      read(t, "file", file);
      fs::path p(file);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      s.targets.file = p;
    }
    read(t, "count", s.targets.count);
    read(t, "seed", s.targets.seed);
    read_deg(t, "theta_max_deg", s.targets.look_angle_max);
    read(t, "collect_duration_s", s.targets.collect_duration);
  }
  if (j.contains("uncertainty")) {
    const json& u = j.at("uncertainty");
    check_keys(u, "uncertainty", {"case", "position_sigma_m", "samples", "seed"});
    if (u.contains("case") && !u.at("case").is_null()) {
      int c = 0;
      read(u, "case", c);
      s.uncertainty.position_sigma = case_position_sigma(c);
    }
    read(u, "position_sigma_m", s.uncertainty.position_sigma);
    read(u, "samples", s.uncertainty.samples);
    read(u, "seed", s.uncertainty.seed);
  }
  if (j.contains("planners")) {
    const json& p = j.at("planners");
    check_keys(p, "planners", {"enabled", "max_slew_rate_deg_s", "horizon_s", "mdp_depth", "gamma",
                               "milp_time_limit_s", "milp_node_limit"});
    read(p, "enabled", s.planners.enabled);
    read_deg(p, "max_slew_rate_deg_s", s.planners.max_slew_rate);
    read(p, "horizon_s", s.planners.horizon);
    read(p, "mdp_depth", s.planners.mdp_depth);
    read(p, "gamma", s.planners.gamma);
    read(p, "milp_time_limit_s", s.planners.milp_time_limit);
    read(p, "milp_node_limit", s.planners.milp_node_limit);
  }
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    check_keys(e, "evaluation", {"samples", "seed"});
    read(e, "samples", s.evaluation.samples);
    read(e, "seed", s.evaluation.seed);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const io::FormatError& e) {
    throw ConfigError(e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

json scenario_to_json(const Scenario& s) {
  json targets = {{"count", s.targets.count},
                  {"seed", s.targets.seed},
                  {"theta_max_deg", s.targets.look_angle_max / kDeg},
                  {"collect_duration_s", s.targets.collect_duration}};
  targets["file"] = s.targets.file ? json(fs::absolute(*s.targets.file).lexically_normal().string()) : json(nullptr);
  return {
      {"name", s.name},
      {"start_epoch", s.start.to_iso()},
      {"duration_s", s.duration},
      {"step_s", s.step},
      {"orbit",
       {{"altitude_km", s.orbit.altitude / 1e3},
        {"inclination_deg", s.orbit.inclination / kDeg},
        {"raan_deg", s.orbit.raan / kDeg},
        {"eccentricity", s.orbit.eccentricity},
        {"arg_perigee_deg", s.orbit.arg_perigee / kDeg},
        {"true_anomaly_deg", s.orbit.true_anomaly / kDeg}}},
      {"spacecraft",
       {{"mass_kg", s.spacecraft.mass},
        {"drag_area_m2", s.spacecraft.drag_area},
        {"drag_coefficient", s.spacecraft.drag_coefficient},
        {"srp_area_m2", s.spacecraft.srp_area},
        {"reflectivity_coefficient", s.spacecraft.reflectivity_coefficient}}},
      {"force_model",
       {{"gravity_degree", s.force_model.gravity_degree},
        {"gravity_order", s.force_model.gravity_order},
        {"drag", s.force_model.drag},
        {"srp", s.force_model.srp},
        {"third_body_sun", s.force_model.third_body_sun},
        {"third_body_moon", s.force_model.third_body_moon},
        {"relativity", s.force_model.relativity},
        {"harris_priester_exponent", s.force_model.harris_priester_exponent}}},
      {"targets", targets},
      {"uncertainty",
       {{"position_sigma_m", s.uncertainty.position_sigma},
        {"samples", s.uncertainty.samples},
        {"seed", s.uncertainty.seed}}},
      {"planners",
       {{"enabled", s.planners.enabled},
        {"max_slew_rate_deg_s", s.planners.max_slew_rate / kDeg},
        {"horizon_s", s.planners.horizon},
        {"mdp_depth", s.planners.mdp_depth},
        {"gamma", s.planners.gamma},
        {"milp_time_limit_s", s.planners.milp_time_limit},
        {"milp_node_limit", s.planners.milp_node_limit}}},
      {"evaluation", {{"samples", s.evaluation.samples}, {"seed", s.evaluation.seed}}},
  };
}

std::vector<ImageTarget> generate_targets(std::size_t count, std::uint64_t seed, double look_angle_max,
                                          double collect_duration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lon(-constants::kPi, constants::kPi);
  std::vector<ImageTarget> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ImageTarget t;
    t.id = static_cast<std::int64_t>(i + 1);
    t.center.latitude = std::asin(u(rng));
    t.center.longitude = lon(rng);
    t.center.altitude = 0.0;
    t.reward = 1.0;
    t.look_angle_max = look_angle_max;
    t.collect_duration = collect_duration;
    out.push_back(t);
  }
  return out;
}

std::vector<ImageTarget> load_targets(const Scenario& s) {
  if (s.targets.file) return io::read_targets(*s.targets.file);
  return generate_targets(s.targets.count, s.targets.seed, s.targets.look_angle_max, s.targets.collect_duration);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

std::vector<std::string> parse_planner_list(const std::string& csv) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', pos), csv.size());
    std::string name = csv.substr(pos, comma - pos);
    if (name != "graph" && name != "milp" && name != "mdp") {
      throw ConfigError(fmt::format("unknown planner '{}' (expected graph, milp, mdp)", name));
    }
    if (seen.insert(name).second) out.push_back(name);
    pos = comma + 1;
  }
  return out;
}

fs::path resolve_output_dir(const fs::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / dir;
  return dir;
}

}  // namespace eosched
