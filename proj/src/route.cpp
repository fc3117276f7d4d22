#include "ecodrive/route.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecodrive {

char phase_code(Phase p) {
  switch (p) {
    case Phase::Green: return 'G';
    case Phase::Yellow: return 'Y';
    case Phase::Red: return 'R';
  }
  return '?';
}

Phase phase_from_code(char c) {
  switch (c) {
    case 'G': return Phase::Green;
    case 'Y': return Phase::Yellow;
    case 'R': return Phase::Red;
  }
  throw std::invalid_argument(std::string("unknown phase code '") + c + "'");
}

double TrafficLight::cycle_length_s() const {
  double total = 0.0;
  for (const auto& [phase, dur] : phase_cycle) total += dur;
  return total;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_stations(const std::vector<std::pair<double, double>>& table, double length,
                    const std::string& name) {
  require(!table.empty(), name + " must not be empty");
  require(table.front().first == 0.0, name + " must start at station 0");
  for (size_t i = 1; i < table.size(); ++i)
    require(table[i].first > table[i - 1].first, name + " stations must be strictly increasing");
  require(table.back().first <= length, name + " stations must not exceed route length");
}

}  // namespace

void RouteProfile::validate() const {
  require(length_m > 0, "length_m must be positive");
  check_stations(grade_table, length_m, "grade_table");
  check_stations(speed_limit_table, length_m, "speed_limit_table");
  for (const auto& [s, v] : speed_limit_table)
    require(v > 0, "speed limits must be positive");

  std::vector<double> stations;
  for (const auto& light : lights) {
    require(light.location_m >= 0 && light.location_m <= length_m,
            "light location outside route");
    require(!light.phase_cycle.empty(), "light cycle must not be empty");
    bool has_green = false, has_red = false;
    for (const auto& [phase, dur] : light.phase_cycle) {
      require(dur > 0, "phase durations must be positive");
      has_green |= phase == Phase::Green;
      has_red |= phase == Phase::Red;
    }
    require(has_green && has_red, "light cycle needs at least one Green and one Red phase");
    stations.push_back(light.location_m);
  }
  for (const auto& sign : stop_signs) {
    require(sign.location_m >= 0 && sign.location_m <= length_m, "stop sign outside route");
    stations.push_back(sign.location_m);
  }
  std::sort(stations.begin(), stations.end());
  for (size_t i = 1; i < stations.size(); ++i)
    require(stations[i] != stations[i - 1], "infrastructure elements share a station");
}

double RouteProfile::max_speed_limit() const {
  double m = 0.0;
  for (const auto& [s, v] : speed_limit_table) m = std::max(m, v);
  return m;
}

double grade_at(const RouteProfile& route, double station_m) {
  if (station_m < 0.0 || station_m > route.length_m)
    throw std::out_of_range("grade_at: station outside route");
  const auto& t = route.grade_table;
  if (station_m <= t.front().first) return t.front().second;
  if (station_m >= t.back().first) return t.back().second;
  auto it = std::upper_bound(t.begin(), t.end(), station_m,
                             [](double s, const auto& e) { return s < e.first; });
  const auto& [s1, g1] = *it;
  const auto& [s0, g0] = *(it - 1);
  const double w = (station_m - s0) / (s1 - s0);
  return g0 + w * (g1 - g0);
}

double speed_limit_at(const RouteProfile& route, double station_m) {
  if (station_m < 0.0 || station_m > route.length_m)
    throw std::out_of_range("speed_limit_at: station outside route");
  const auto& t = route.speed_limit_table;
  auto it = std::upper_bound(t.begin(), t.end(), station_m,
                             [](double s, const auto& e) { return s < e.first; });
  return (it - 1)->second;
}

SpatMessage spat_at(const TrafficLight& light, double time_s) {
  const double cycle = light.cycle_length_s();
  double local = std::fmod(time_s + light.cycle_offset_s, cycle);
  if (local < 0) local += cycle;

  const auto& phases = light.phase_cycle;
  SpatMessage msg;
  msg.light_location_m = light.location_m;
  msg.timestamp_s = time_s;
  double start = 0.0;
  for (size_t i = 0; i < phases.size(); ++i) {
    const double end = start + phases[i].second;
    if (local < end || i + 1 == phases.size()) {
      msg.current_phase = phases[i].first;
      msg.time_to_change_s = end - local;
      msg.next_phase = phases[(i + 1) % phases.size()].first;
      return msg;
    }
    start = end;
  }
  return msg;  // unreachable
}

std::vector<std::pair<double, double>> green_intervals(const TrafficLight& light,
                                                       double from_time_s, double horizon_s) {
  const double cycle = light.cycle_length_s();
  // Walk phase boundaries from the start of the cycle containing from_time. Intervals
  // are returned with their true onsets, unclipped, so callers can keep a margin from
  // the real phase switches.
  double base = std::floor((from_time_s + light.cycle_offset_s) / cycle) * cycle -
                light.cycle_offset_s;
  std::vector<std::pair<double, double>> out;
  for (double cycle_start = base; cycle_start < from_time_s + horizon_s; cycle_start += cycle) {
    double t = cycle_start;
    for (const auto& [phase, dur] : light.phase_cycle) {
      if (phase == Phase::Green && t + dur > from_time_s) out.emplace_back(t, t + dur);
      t += dur;
    }
  }
  return out;
}

std::optional<InfraAhead> next_infrastructure(const RouteProfile& route, double station_m) {
  if (station_m < 0.0 || station_m > route.length_m)
    throw std::out_of_range("next_infrastructure: station outside route");
  std::optional<InfraAhead> best;
  for (size_t i = 0; i < route.lights.size(); ++i) {
    const double loc = route.lights[i].location_m;
    if (loc > station_m && (!best || loc < best->location_m))
      best = InfraAhead{InfraKind::Light, loc, static_cast<int>(i)};
  }
  for (size_t i = 0; i < route.stop_signs.size(); ++i) {
    const double loc = route.stop_signs[i].location_m;
    if (loc > station_m && (!best || loc < best->location_m))
      best = InfraAhead{InfraKind::StopSign, loc, static_cast<int>(i)};
  }
  return best;
}

namespace {

using nlohmann::json;

std::vector<std::pair<double, double>> table_from_json(const json& j) {
  std::vector<std::pair<double, double>> t;
  for (const auto& row : j) t.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  return t;
}

}  // namespace

RouteProfile parse_route(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("route parse error: ") + e.what());
  }
  RouteProfile route;
  try {
    route.length_m = j.at("length_m").get<double>();
    route.grade_table = table_from_json(j.at("grade_table"));
    route.speed_limit_table = table_from_json(j.at("speed_limit_table"));
    for (const auto& lj : j.value("lights", json::array())) {
      TrafficLight light;
      light.location_m = lj.at("location_m").get<double>();
      light.cycle_offset_s = lj.value("offset_s", 0.0);
      for (const auto& pj : lj.at("cycle"))
        light.phase_cycle.emplace_back(phase_from_code(pj.at(0).get<std::string>().at(0)),
                                       pj.at(1).get<double>());
      route.lights.push_back(std::move(light));
    }
    for (const auto& sj : j.value("stop_signs", json::array()))
      route.stop_signs.push_back(StopSign{sj.at("location_m").get<double>()});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("route document: ") + e.what());
  }
  route.validate();
  return route;
}

RouteProfile load_route(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open route file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_route(ss.str());
}

std::string route_to_json(const RouteProfile& route) {
  json j;
  j["length_m"] = route.length_m;
  j["grade_table"] = json::array();
  for (const auto& [s, g] : route.grade_table) j["grade_table"].push_back({s, g});
  j["speed_limit_table"] = json::array();
  for (const auto& [s, v] : route.speed_limit_table) j["speed_limit_table"].push_back({s, v});
  j["lights"] = json::array();
  for (const auto& light : route.lights) {
    json lj;
    lj["location_m"] = light.location_m;
    lj["offset_s"] = light.cycle_offset_s;
    lj["cycle"] = json::array();
    for (const auto& [phase, dur] : light.phase_cycle)
      lj["cycle"].push_back({std::string(1, phase_code(phase)), dur});
    j["lights"].push_back(std::move(lj));
  }
  j["stop_signs"] = json::array();
  for (const auto& sign : route.stop_signs)
    j["stop_signs"].push_back({{"location_m", sign.location_m}});
  return j.dump(2);
}

}  // namespace ecodrive
