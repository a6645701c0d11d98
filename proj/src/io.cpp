#include "eosched/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace eosched::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace {

json parse_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Data rows of a CSV file with the expected leading header columns.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns,
                                               std::string_view first_header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || !line.starts_with(first_header)) {
    throw FormatError(fmt::format("{}: missing header", path.string()));
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() < columns) {
      throw FormatError(fmt::format("{}:{}: expected {} columns", path.string(), line_no, columns));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError(fmt::format("bad number '{}'", s));
    return v;
  } catch (const std::logic_error&) {
    throw FormatError(fmt::format("bad number '{}'", s));
  }
}

std::int64_t to_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw FormatError(fmt::format("bad integer '{}'", s));
    return v;
  } catch (const std::logic_error&) {
    throw FormatError(fmt::format("bad integer '{}'", s));
  }
}

std::map<std::int64_t, std::size_t> image_index(std::span<const ImageTarget> targets) {
  std::map<std::int64_t, std::size_t> out;
  for (std::size_t i = 0; i < targets.size(); ++i) out.emplace(targets[i].id, i);
  return out;
}

std::size_t lookup_image(const std::map<std::int64_t, std::size_t>& index, std::int64_t id) {
  const auto it = index.find(id);
  if (it == index.end()) throw FormatError(fmt::format("unknown image id {}", id));
  return it->second;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

json targets_to_json(std::span<const ImageTarget> targets) {
  json out = json::array();
  for (const auto& t : targets) {
    out.push_back({{"id", t.id},
                   {"lat_deg", t.center.latitude / constants::kDegToRad},
                   {"lon_deg", t.center.longitude / constants::kDegToRad},
                   {"alt_m", t.center.altitude},
                   {"reward", t.reward},
                   {"theta_max_deg", t.look_angle_max / constants::kDegToRad},
                   {"collect_duration_s", t.collect_duration}});
  }
  return out;
}

std::vector<ImageTarget> targets_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("targets must be a JSON array");
  std::vector<ImageTarget> out;
  std::map<std::int64_t, bool> seen;
  for (const auto& item : j) {
    try {
      ImageTarget t;
      t.id = item.at("id").get<std::int64_t>();
      t.center.latitude = item.at("lat_deg").get<double>() * constants::kDegToRad;
      t.center.longitude = wrap_pi(item.at("lon_deg").get<double>() * constants::kDegToRad);
      t.center.altitude = item.value("alt_m", 0.0);
      t.reward = item.value("reward", 1.0);
      t.look_angle_max = item.value("theta_max_deg", kDefaultLookAngleMax / constants::kDegToRad) * constants::kDegToRad;
      t.collect_duration = item.value("collect_duration_s", kDefaultCollectDuration);
      t.validate();
      if (!seen.emplace(t.id, true).second) throw FormatError(fmt::format("duplicate target id {}", t.id));
      out.push_back(t);
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("target entry {}: {}", item.dump(), e.what()));
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
  }
  return out;
}

std::vector<ImageTarget> read_targets(const fs::path& path) { return targets_from_json(parse_json(path)); }

void write_targets(const fs::path& path, std::span<const ImageTarget> targets) {
  write_text(path, dump(targets_to_json(targets)));
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "epoch,rx,ry,rz,vx,vy,vz\n";
  for (const auto& s : traj.nodes()) {
    out += fmt::format("{},{},{},{},{},{},{}\n", s.epoch.to_iso(), num(s.position.x()), num(s.position.y()),
                       num(s.position.z()), num(s.velocity.x()), num(s.velocity.y()), num(s.velocity.z()));
  }
  return out;
}

Trajectory read_trajectory(const fs::path& path) {
  std::vector<StateVector> nodes;
  for (const auto& f : read_csv(path, 7, "epoch")) {
    StateVector s;
    s.epoch = Epoch::from_iso(f[0]);
    s.position = Vec3(to_double(f[1]), to_double(f[2]), to_double(f[3]));
    s.velocity = Vec3(to_double(f[4]), to_double(f[5]), to_double(f[6]));
    nodes.push_back(s);
  }
  if (nodes.empty()) throw FormatError(fmt::format("{}: no trajectory rows", path.string()));
  const double step = nodes.size() > 1 ? nodes[1].epoch - nodes[0].epoch : 1.0;
  return Trajectory(std::move(nodes), step);
}

std::string windows_csv(const std::vector<std::vector<Opportunity>>& windows, std::span<const ImageTarget> targets) {
  std::string out = "image_id,t_start,t_end,duration_s\n";
  for (const auto& per_image : windows) {
    for (const auto& w : per_image) {
      out += fmt::format("{},{},{},{}\n", targets[w.image].id, w.t_start.to_iso(), w.t_end.to_iso(),
                         num(w.duration()));
    }
  }
  return out;
}

std::vector<std::vector<Opportunity>> read_windows(const fs::path& path, std::span<const ImageTarget> targets) {
  const auto index = image_index(targets);
  std::vector<std::vector<Opportunity>> out(targets.size());
  for (const auto& f : read_csv(path, 3, "image_id")) {
    Opportunity o;
    o.image = lookup_image(index, to_int(f[0]));
    o.t_start = Epoch::from_iso(f[1]);
    o.t_end = Epoch::from_iso(f[2]);
    out[o.image].push_back(o);
  }
  for (auto& w : out) {
    std::sort(w.begin(), w.end(), [](const Opportunity& a, const Opportunity& b) { return a.t_start < b.t_start; });
  }
  return out;
}

std::string collects_csv(std::span<const Collect> collects, std::span<const ImageTarget> targets) {
  std::string out = "collect_id,image_id,t_start,t_end,ps_x,ps_y,ps_z,pe_x,pe_y,pe_z\n";
  for (const auto& c : collects) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", c.id, targets[c.image].id, c.t_start.to_iso(),
                       c.t_end.to_iso(), num(c.pointing_start.x()), num(c.pointing_start.y()),
                       num(c.pointing_start.z()), num(c.pointing_end.x()), num(c.pointing_end.y()),
                       num(c.pointing_end.z()));
  }
  return out;
}

std::vector<Collect> read_collects(const fs::path& path, std::span<const ImageTarget> targets) {
  const auto index = image_index(targets);
  std::vector<Collect> out;
  for (const auto& f : read_csv(path, 10, "collect_id")) {
    Collect c;
    c.id = to_int(f[0]);
    c.image = lookup_image(index, to_int(f[1]));
    c.t_start = Epoch::from_iso(f[2]);
    c.t_end = Epoch::from_iso(f[3]);
    c.pointing_start = Vec3(to_double(f[4]), to_double(f[5]), to_double(f[6]));
    c.pointing_end = Vec3(to_double(f[7]), to_double(f[8]), to_double(f[9]));
    out.push_back(c);
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].t_start < out[i - 1].t_start) throw FormatError(fmt::format("{}: collects not sorted", path.string()));
  }
  return out;
}

std::string window_stats_csv(const WindowStatistics& stats) {
  std::string out = "bucket_hr,sigma_start_s,mean_duration_s,ratio,matched,low_sample\n";
  for (const auto& b : stats.buckets) {
    out += fmt::format("{},{},{},{},{},{}\n", b.hour, num(b.sigma_start), num(stats.mean_duration), num(b.ratio),
                       b.matched, b.low_sample ? 1 : 0);
  }
  return out;
}

json probabilities_to_json(const CollectProbabilityTable& table) {
  json probs = json::object();
  for (const auto& [id, p] : table.probability) probs[std::to_string(id)] = p;
  return {{"seed", table.seed},
          {"samples", table.samples},
          {"position_sigma_m", table.position_sigma},
          {"probabilities", probs}};
}

CollectProbabilityTable probabilities_from_json(const json& j) {
  CollectProbabilityTable table;
  try {
    table.seed = j.at("seed").get<std::uint64_t>();
    table.samples = j.at("samples").get<std::size_t>();
    table.position_sigma = j.at("position_sigma_m").get<double>();
    for (const auto& [key, value] : j.at("probabilities").items()) {
      const double p = value.get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw FormatError(fmt::format("probability for {} outside [0, 1]", key));
      table.probability[to_int(key)] = p;
    }
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("probability table: {}", e.what()));
  }
  return table;
}

json plan_to_json(const TaskPlan& plan, std::span<const ImageTarget> targets) {
  json entries = json::array();
  for (const auto& e : plan.entries) {
    entries.push_back({{"collect_id", e.collect_id},
                       {"image_id", targets[e.image].id},
                       {"t_start", e.t_start.to_iso()},
                       {"t_end", e.t_end.to_iso()}});
  }
  return {{"planner", plan.planner},   {"nominal_reward", plan.nominal_reward},
          {"objective", plan.objective}, {"optimal", plan.optimal},
          {"expansions", plan.expansions}, {"entries", entries}};
}

TaskPlan plan_from_json(const json& j, std::span<const ImageTarget> targets) {
  const auto index = image_index(targets);
  TaskPlan plan;
  try {
    plan.planner = j.at("planner").get<std::string>();
    plan.nominal_reward = j.at("nominal_reward").get<double>();
    plan.objective = j.value("objective", plan.nominal_reward);
    plan.optimal = j.value("optimal", true);
    plan.expansions = j.value("expansions", std::size_t{0});
    plan.runtime_s = j.value("runtime_s", 0.0);
    for (const auto& e : j.at("entries")) {
      PlanEntry entry;
      entry.collect_id = e.at("collect_id").get<std::int64_t>();
      entry.image = lookup_image(index, e.at("image_id").get<std::int64_t>());
      entry.t_start = Epoch::from_iso(e.at("t_start").get<std::string>());
      entry.t_end = Epoch::from_iso(e.at("t_end").get<std::string>());
      plan.entries.push_back(entry);
    }
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("plan: {}", e.what()));
  }
  return plan;
}

json report_to_json(const EvaluationReport& r) {
  return {{"planner", r.planner},
          {"runtime_s", r.runtime_s},
          {"nominal_reward", r.nominal_reward},
          {"mean_reward", r.mean_reward},
          {"stdev_reward", r.stdev_reward},
          {"sample_count", r.sample_count},
          {"failed_samples", r.failed_samples},
          {"seed", r.seed},
          {"rewards", r.rewards}};
}

std::string reports_csv(const std::string& case_name, std::span<const EvaluationReport> reports) {
  std::string out = "case,approach,runtime_s,mean_reward,stdev_reward,nominal_reward\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{:.3f},{:.4f},{:.4f},{}\n", case_name, r.planner, r.runtime_s, r.mean_reward,
                       r.stdev_reward, num(r.nominal_reward));
  }
  return out;
}

}  // namespace eosched::io
