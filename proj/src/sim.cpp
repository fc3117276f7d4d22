#include "ecodrive/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecodrive {

namespace {

constexpr double kEgoLength = 4.5;
constexpr double kSensingRange = 120.0;
constexpr double kLightSightRange = 100.0;  // how far background drivers react to signals
constexpr double kTrafficLcCooldown = 8.0;

double unit_draw(std::mt19937& rng) {
  // stable across standard library implementations
  return (rng() >> 5) * (1.0 / 134217728.0);  // 2^27
}

double jitter(std::mt19937& rng, double half_range) {
  return (unit_draw(rng) * 2.0 - 1.0) * half_range;
}

}  // namespace

void Scenario::validate() const {
  if (case_id < 0 || case_id > 5) throw std::invalid_argument("scenario: case_id must be 0..5");
  if (dt_s <= 0) throw std::invalid_argument("scenario: dt must be positive");
  if (duration_s <= 0) throw std::invalid_argument("scenario: duration must be positive");
  if ((case_id == 1 || case_id == 2) && traffic_enabled)
    throw std::invalid_argument("scenario: cases 1 and 2 run without traffic");
}

std::vector<TrafficVehicle> default_spawn_table(unsigned seed, const RouteProfile& route) {
  std::mt19937 rng(seed);
  std::vector<TrafficVehicle> table;
  int next_id = 1;

  auto add = [&](double t, double s, int lane, double v_des, double headway, double a,
                 double b) {
    TrafficVehicle v;
    v.id = next_id++;
    v.spawn_time_s = std::max(0.0, t + jitter(rng, 1.5));
    v.spawn_station_m = std::clamp(s + jitter(rng, 15.0), 0.0, route.length_m * 0.9);
    v.lane = lane;
    v.desired_speed_m_s = std::max(4.0, v_des + jitter(rng, 0.4));
    v.time_headway_s = headway;
    v.max_accel_m_s2 = a;
    v.comfort_decel_m_s2 = b;
    table.push_back(v);
  };

  // Slow platoon ahead of the ego in its lane; it bunches and oscillates at signals.
  add(0.0, 120.0, 0, 7.2, 1.4, 1.5, 2.0);
  add(0.0, 150.0, 0, 7.6, 1.3, 1.6, 2.0);
  add(0.0, 185.0, 0, 7.4, 1.5, 1.4, 1.8);
  add(0.0, 220.0, 0, 7.8, 1.2, 1.7, 2.2);
  // A twitchy driver that ends up directly ahead of the ego mid-route.
  add(2.0, 90.0, 0, 7.0, 0.8, 2.6, 3.2);
  // Adjacent-lane flow, dense enough that cutting out is rarely accepted.
  add(1.0, 60.0, 1, 8.5, 1.3, 1.6, 2.0);
  add(4.0, 110.0, 1, 8.0, 1.4, 1.5, 2.0);
  add(8.0, 40.0, 1, 8.8, 1.2, 1.7, 2.1);
  add(14.0, 20.0, 1, 8.2, 1.4, 1.5, 2.0);
  add(22.0, 5.0, 1, 8.6, 1.3, 1.6, 2.0);
  // Faster cars released behind the ego; they catch up and work around the platoon.
  add(30.0, 0.0, 0, 9.5, 1.1, 1.8, 2.3);
  add(55.0, 0.0, 0, 9.2, 1.2, 1.7, 2.2);
  return table;
}

Scenario make_case_scenario(int case_id, unsigned seed, const RouteProfile& route) {
  Scenario sc;
  sc.case_id = case_id;
  sc.seed = seed;
  switch (case_id) {
    case 1:
      sc.name = "eco-cruise-only";
      sc.v2i_enabled = false;
      sc.traffic_enabled = false;
      sc.follow_policy = FollowPolicy::ForceACC;
      break;
    case 2:
      sc.name = "eco-cruise+v2i";
      sc.v2i_enabled = true;
      sc.traffic_enabled = false;
      sc.follow_policy = FollowPolicy::ForceACC;
      break;
    case 3:
      sc.name = "v2i+acc";
      sc.v2i_enabled = true;
      sc.traffic_enabled = true;
      sc.follow_policy = FollowPolicy::ForceACC;
      sc.v2v_connected = false;
      break;
    case 4:
      sc.name = "v2i+cacc";
      sc.v2i_enabled = true;
      sc.traffic_enabled = true;
      sc.follow_policy = FollowPolicy::ForceCACC;
      sc.v2v_connected = true;
      break;
    case 5:
      sc.name = "v2i+eco-cacc";
      sc.v2i_enabled = true;
      sc.traffic_enabled = true;
      sc.follow_policy = FollowPolicy::ForceEcoCACC;
      sc.v2v_connected = true;
      break;
    default:
      throw std::invalid_argument("make_case_scenario: case_id must be 1..5");
  }
  if (sc.traffic_enabled) sc.spawn_table = default_spawn_table(seed, route);
  sc.validate();
  return sc;
}

double traffic_follow_accel(const TrafficVehicle& v, double speed_m_s, double gap_m,
                            double lead_speed_m_s, double local_limit_m_s) {
  const double v0 = std::max(0.1, std::min(v.desired_speed_m_s, local_limit_m_s));
  double a = v.max_accel_m_s2 * (1.0 - std::pow(speed_m_s / v0, v.accel_exponent));
  if (gap_m >= 0.0) {
    const double dv = speed_m_s - lead_speed_m_s;
    const double s_star =
        v.min_gap_m + std::max(0.0, speed_m_s * v.time_headway_s +
                                        speed_m_s * dv /
                                            (2.0 * std::sqrt(v.max_accel_m_s2 *
                                                             v.comfort_decel_m_s2)));
    const double s = std::max(gap_m, 0.1);
    a = v.max_accel_m_s2 *
        (1.0 - std::pow(speed_m_s / v0, v.accel_exponent) - (s_star / s) * (s_star / s));
  }
  return std::clamp(a, -2.5 * v.comfort_decel_m_s2, v.max_accel_m_s2);
}

int traffic_lane_change(const TrafficVehicle& v, double speed_m_s, const NeighborView& view,
                        int lane_count) {
  if (lane_count < 2) return v.lane;
  if (!view.has_leader) return v.lane;
  if (view.leader_speed_m_s >= 0.8 * v.desired_speed_m_s) return v.lane;
  if (view.leader_gap_m > 60.0) return v.lane;

  VehicleState self;
  self.speed_m_s = speed_m_s;
  GapPolicy policy;
  policy.time_gap_s = v.time_headway_s;
  policy.standstill_gap_m = std::max(2.0, v.min_gap_m);
  if (!lane_change_decision(self, view.adjacent, policy)) return v.lane;
  return v.lane == 0 ? 1 : 0;
}

namespace {

struct Agent {
  TrafficVehicle spec;
  bool spawned = false;
  bool active = false;
  double pos = 0.0;  // front bumper station
  double speed = 0.0;
  double accel = 0.0;
  double lc_cooldown = 0.0;
};

struct World {
  const Scenario& sc;
  const SimInputs& in;
  const RouteProfile& route;
  std::vector<Agent> agents;
  VehicleState ego;
  int ego_lane = 0;

  double limit_at(double s) const {
    return speed_limit_at(route, std::clamp(s, 0.0, route.length_m));
  }

  // nearest leader (front bumper strictly ahead) in `lane`; returns (rear gap, speed, accel)
  struct Leader {
    bool found = false;
    double rear_pos = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double front_pos = 0.0;
  };

  Leader leader_in_lane(double from_pos, int lane, bool include_ego) const {
    Leader best;
    double best_front = 1e18;
    for (const auto& a : agents) {
      if (!a.active || a.spec.lane != lane) continue;
      if (a.pos > from_pos + 1e-9 && a.pos < best_front) {
        best_front = a.pos;
        best = {true, a.pos - a.spec.length_m, a.speed, a.accel, a.pos};
      }
    }
    if (include_ego && ego_lane == lane && ego.position_m > from_pos + 1e-9 &&
        ego.position_m < best_front) {
      best = {true, ego.position_m - kEgoLength, ego.speed_m_s, ego.accel_m_s2,
              ego.position_m};
    }
    return best;
  }

  Leader follower_in_lane(double from_rear_pos, int lane, bool include_ego) const {
    Leader best;
    double best_front = -1e18;
    for (const auto& a : agents) {
      if (!a.active || a.spec.lane != lane) continue;
      if (a.pos <= from_rear_pos + 1e-9 && a.pos > best_front) {
        best_front = a.pos;
        best = {true, a.pos - a.spec.length_m, a.speed, a.accel, a.pos};
      }
    }
    if (include_ego && ego_lane == lane && ego.position_m <= from_rear_pos + 1e-9 &&
        ego.position_m > best_front) {
      best = {true, ego.position_m - kEgoLength, ego.speed_m_s, ego.accel_m_s2,
              ego.position_m};
    }
    return best;
  }

  // Gap summary seen from a body spanning [front - length, front] looking into `lane`.
  // Any side-by-side overlap there poisons both gaps, vetoing a move into it.
  AdjacentLaneGaps adjacent_view(double front, double length, int lane,
                                 bool include_ego) const {
    AdjacentLaneGaps out;
    out.has_lane = true;
    const auto fwd = leader_in_lane(front, lane, include_ego);
    const auto rear = follower_in_lane(front - length, lane, include_ego);
    out.forward_gap_m = fwd.found ? fwd.rear_pos - front : 1e9;
    out.forward_speed_m_s = fwd.found ? fwd.speed : 1e9;
    out.rear_gap_m = rear.found ? (front - length) - rear.front_pos : 1e9;
    out.rear_speed_m_s = rear.found ? rear.speed : 0.0;
    const double margin = 1.0;
    auto overlaps = [&](double other_front, double other_rear) {
      return other_rear < front + margin && other_front > front - length - margin;
    };
    for (const auto& a : agents) {
      if (!a.active || a.spec.lane != lane) continue;
      if (overlaps(a.pos, a.pos - a.spec.length_m)) {
        out.forward_gap_m = out.rear_gap_m = -1.0;
        break;
      }
    }
    if (include_ego && ego_lane == lane &&
        overlaps(ego.position_m, ego.position_m - kEgoLength)) {
      out.forward_gap_m = out.rear_gap_m = -1.0;
    }
    return out;
  }
};

// Background drivers hold at a light they cannot clear on the current green.
bool light_blocks(const TrafficLight& light, double t, double pos, double speed) {
  const double dist = light.location_m - pos;
  if (dist <= 0.0 || dist > kLightSightRange) return false;
  const SpatMessage spat = spat_at(light, t);
  if (spat.current_phase != Phase::Green) return true;
  return spat.time_to_change_s < (dist + 4.0) / std::max(speed, 1.0);
}

}  // namespace

std::pair<SimTrace, SimReport> run_scenario(const Scenario& sc, const SimInputs& in) {
  sc.validate();
  if (!in.route) throw std::invalid_argument("run_scenario: missing route");
  const RouteProfile& route = *in.route;

  HlConfig hl_cfg = in.hl;
  hl_cfg.v2i_enabled = sc.v2i_enabled;
  hl_cfg.follow_policy = sc.follow_policy;
  HlController hl(hl_cfg, in.vehicle, in.route, in.eco_profile);

  World w{sc, in, route};
  for (const auto& spec : sc.spawn_table) w.agents.push_back({spec});
  std::sort(w.agents.begin(), w.agents.end(),
            [](const Agent& a, const Agent& b) { return a.spec.id < b.spec.id; });

  SimTrace trace;
  trace.dt_s = sc.dt_s;
  SimReport report;
  report.case_id = sc.case_id;
  report.scenario_name = sc.name;
  report.seed = sc.seed;
  report.route_hash = in.route_hash;

  const int max_ticks = static_cast<int>(std::ceil(sc.duration_s / sc.dt_s));
  bool ego_was_moving = false;
  bool finished = false;

  for (int tick = 0; tick < max_ticks && !finished; ++tick) {
    const double t = tick * sc.dt_s;

    // spawn pending vehicles when their slot is clear
    for (auto& a : w.agents) {
      if (a.spawned || a.spec.spawn_time_s > t) continue;
      bool clear = true;
      for (const auto& other : w.agents) {
        if (!other.active || other.spec.lane != a.spec.lane) continue;
        if (std::abs(other.pos - a.spec.spawn_station_m) <
            other.spec.length_m + a.spec.length_m + 2.0)
          clear = false;
      }
      if (w.ego_lane == a.spec.lane &&
          std::abs(w.ego.position_m - a.spec.spawn_station_m) < kEgoLength + a.spec.length_m + 2.0)
        clear = false;
      if (clear) {
        a.spawned = a.active = true;
        a.pos = a.spec.spawn_station_m;
        a.speed = std::min(a.spec.desired_speed_m_s, w.limit_at(a.pos));
        a.accel = 0.0;
      }
    }

    // background accelerations (ascending id order)
    for (auto& a : w.agents) {
      if (!a.active) continue;
      const auto lead = w.leader_in_lane(a.pos, a.spec.lane, true);
      double gap = -1.0, lead_speed = 0.0;
      if (lead.found) {
        gap = lead.rear_pos - a.pos;
        lead_speed = lead.speed;
      }
      double accel = traffic_follow_accel(a.spec, a.speed, gap, lead_speed, w.limit_at(a.pos));
      for (const auto& light : route.lights) {
        if (light_blocks(light, t, a.pos, a.speed)) {
          const double wall_gap = light.location_m - 1.0 - a.pos;
          accel = std::min(accel, traffic_follow_accel(a.spec, a.speed,
                                                       std::max(wall_gap, 0.0), 0.0,
                                                       w.limit_at(a.pos)));
        }
      }
      a.accel = accel;
    }

    // background lane changes (ascending id, applied immediately)
    for (auto& a : w.agents) {
      if (!a.active) continue;
      a.lc_cooldown = std::max(0.0, a.lc_cooldown - sc.dt_s);
      if (a.lc_cooldown > 0.0) continue;
      const auto lead = w.leader_in_lane(a.pos, a.spec.lane, true);
      if (!lead.found) continue;
      NeighborView view;
      view.has_leader = true;
      view.leader_gap_m = lead.rear_pos - a.pos;
      view.leader_speed_m_s = lead.speed;
      const int other = a.spec.lane == 0 ? 1 : 0;
      view.adjacent = w.adjacent_view(a.pos, a.spec.length_m, other, true);
      const int new_lane = traffic_lane_change(a.spec, a.speed, view, 2);
      if (new_lane != a.spec.lane) {
        a.spec.lane = new_lane;
        a.lc_cooldown = kTrafficLcCooldown;
      }
    }

    // ego situation
    Situation sit;
    sit.ego = w.ego;
    const double ego_station = std::clamp(w.ego.position_m, 0.0, route.length_m);
    sit.local_speed_limit_m_s = speed_limit_at(route, ego_station);
    sit.eco_cruise_target_m_s = hl.eco_target_at(ego_station);
    sit.eco_cruise_accel_m_s2 = hl.eco_accel_at(ego_station);
    sit.next_infra = next_infrastructure(route, ego_station);

    const auto ego_lead = w.leader_in_lane(w.ego.position_m, w.ego_lane, false);
    double ego_gap = -1.0;
    if (ego_lead.found && ego_lead.rear_pos - w.ego.position_m <= kSensingRange) {
      LeadObservation obs;
      obs.lead_position_m = ego_lead.rear_pos;
      obs.lead_speed_m_s = ego_lead.speed;
      obs.lead_accel_m_s2 = sc.v2v_connected ? ego_lead.accel : 0.0;
      obs.connected = sc.v2v_connected;
      obs.timestamp_s = t;
      sit.lead = obs;
      ego_gap = ego_lead.rear_pos - w.ego.position_m;
    }

    // nearest light ahead: broadcast + line of sight
    double nearest_light = 1e18;
    for (const auto& light : route.lights) {
      if (light.location_m > ego_station && light.location_m < nearest_light) {
        nearest_light = light.location_m;
        const SpatMessage spat = spat_at(light, t);
        sit.visible_phase = spat.current_phase;
        if (light.location_m - ego_station <= hl_cfg.spat_range_m && sc.v2i_enabled) {
          sit.spat = spat;
          sit.spat_light = &light;
        } else {
          sit.spat.reset();
          sit.spat_light = nullptr;
        }
      }
    }

    sit.adjacent = w.adjacent_view(w.ego.position_m, kEgoLength, w.ego_lane == 0 ? 1 : 0,
                                   false);
    sit.adjacent.has_lane = sc.traffic_enabled;

    const HlOutput out = hl.tick(sit, sc.dt_s);
    if (out.lane_change_started) w.ego_lane = w.ego_lane == 0 ? 1 : 0;

    // log the pre-step state with this tick's decisions
    TraceRecord rec;
    rec.t_s = t;
    rec.station_m = w.ego.position_m;
    rec.speed_m_s = w.ego.speed_m_s;
    rec.accel_m_s2 = out.accel_cmd_m_s2;
    rec.mode = out.mode;
    rec.command_m_s = out.command_speed_m_s;
    rec.gap_m = ego_gap;
    rec.lead_speed_m_s = ego_lead.found ? ego_lead.speed : 0.0;
    rec.lane = w.ego_lane;
    for (const auto& light : route.lights)
      rec.light_phases.push_back(phase_code(spat_at(light, t).current_phase));
    const double grade = grade_at(route, ego_station);
    rec.fuel_rate_g_s = fuel_rate(
        in.vehicle.fuel, traction_power(in.vehicle.vehicle, w.ego.speed_m_s,
                                        w.ego.accel_m_s2, grade));
    rec.fuel_used_g = w.ego.fuel_used_g;
    trace.records.push_back(std::move(rec));

    // integrate
    const double pre_pos = w.ego.position_m;
    w.ego = step_dynamics(w.ego, out.input, in.vehicle.vehicle, in.vehicle.fuel, grade,
                          sc.dt_s);
    for (auto& a : w.agents) {
      if (!a.active) continue;
      a.speed = std::max(0.0, a.speed + a.accel * sc.dt_s);
      a.pos += a.speed * sc.dt_s;
      if (a.pos - a.spec.length_m > route.length_m) a.active = false;
    }

    // post-step checks
    const auto post_lead = w.leader_in_lane(w.ego.position_m, w.ego_lane, false);
    if (post_lead.found && post_lead.rear_pos - w.ego.position_m <= kSensingRange) {
      const double g = post_lead.rear_pos - w.ego.position_m;
      if (!report.min_gap_m || g < *report.min_gap_m) report.min_gap_m = g;
      if (g <= 0.0) {
        report.collision = true;
        finished = true;
        TraceRecord crash = trace.records.back();
        crash.t_s = t + sc.dt_s;
        crash.station_m = w.ego.position_m;
        crash.speed_m_s = w.ego.speed_m_s;
        crash.gap_m = 0.0;  // trace marks the contact tick
        trace.records.push_back(std::move(crash));
        if (std::getenv("ECODRIVE_DEBUG_COLLISION")) {
          std::fprintf(stderr, "[collision] t=%.1f ego lane=%d pos=%.2f v=%.2f\n",
                       t + sc.dt_s, w.ego_lane, w.ego.position_m, w.ego.speed_m_s);
          for (const auto& a : w.agents) {
            if (!a.active || std::abs(a.pos - w.ego.position_m) > 80.0) continue;
            std::fprintf(stderr, "  id=%d lane=%d pos=%.2f rear=%.2f v=%.2f a=%.2f\n",
                         a.spec.id, a.spec.lane, a.pos, a.pos - a.spec.length_m, a.speed,
                         a.accel);
          }
        }
      }
    }
    for (const auto& light : route.lights) {
      if (pre_pos < light.location_m && w.ego.position_m >= light.location_m) {
        if (spat_at(light, t).current_phase != Phase::Green) ++report.red_violations;
      }
    }

    if (w.ego.speed_m_s >= 0.5) ego_was_moving = true;
    if (ego_was_moving && w.ego.speed_m_s < 0.1) {
      ++report.stop_count;
      ego_was_moving = false;
    }

    if (w.ego.position_m >= route.length_m) finished = true;
    report.travel_time_s = t + sc.dt_s;
  }

  report.total_fuel_g = w.ego.fuel_used_g;
  report.distance_m = std::min(w.ego.position_m, route.length_m);
  return {std::move(trace), std::move(report)};
}

EventSummary detect_events(const SimTrace& trace, const RouteProfile& route) {
  EventSummary ev;
  const auto& rec = trace.records;

  for (size_t i = 0; i < rec.size(); ++i) {
    if (rec[i].gap_m >= 0.0 && rec[i].gap_m <= 1e-9) {
      if (ev.collisions == 0) ev.first_collision_t_s = rec[i].t_s;
      ++ev.collisions;
    }
    if (i + 1 == rec.size()) break;
    // ego crossing a light station between ticks
    for (size_t li = 0; li < route.lights.size(); ++li) {
      const double loc = route.lights[li].location_m;
      if (rec[i].station_m < loc && rec[i + 1].station_m >= loc) {
        if (rec[i].light_phases.size() > li && rec[i].light_phases[li] != 'G')
          ++ev.red_violations;
      }
    }
  }

  for (const auto& sign : route.stop_signs) {
    double dwell = 0.0, best = 0.0;
    for (const auto& r : rec) {
      if (std::abs(r.station_m - sign.location_m) <= 1.0 && r.speed_m_s < 0.1)
        dwell += trace.dt_s;
      else
        dwell = 0.0;
      best = std::max(best, dwell);
    }
    ev.sign_dwell_s.push_back(best);
    // only signs the run actually reached count against compliance
    const bool reached = !rec.empty() && rec.back().station_m >= sign.location_m;
    if (reached && best < 5.0) ev.stop_compliance = false;
  }
  return ev;
}

std::vector<ComparisonRow> compare_cases(const std::map<int, SimReport>& reports) {
  std::string missing;
  for (int c = 1; c <= 5; ++c) {
    if (!reports.count(c)) missing += (missing.empty() ? "" : ", ") + std::to_string(c);
  }
  if (!missing.empty())
    throw std::invalid_argument("compare_cases: missing case(s) " + missing);

  const double base = reports.at(3).total_fuel_g;
  std::vector<ComparisonRow> rows;
  for (int c = 1; c <= 5; ++c) {
    const SimReport& r = reports.at(c);
    ComparisonRow row{c, r.scenario_name, r.total_fuel_g, std::nullopt};
    if (c != 3) row.reduction_vs_case3_pct = 100.0 * (base - r.total_fuel_g) / base;
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* SimTrace::csv_header() {
  return "t_s,station_m,speed_m_s,accel_m_s2,mode,command_m_s,gap_m,lead_speed_m_s,lane,"
         "light_phases,fuel_rate_g_s,fuel_used_g";
}

std::string SimTrace::to_csv() const {
  std::ostringstream out;
  out << csv_header() << "\n";
  char buf[320];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf),
                  "%.1f,%.6f,%.6f,%.6f,%s,%.6f,%.6f,%.6f,%d,%s,%.9f,%.9f\n", r.t_s,
                  r.station_m, r.speed_m_s, r.accel_m_s2, mode_name(r.mode), r.command_m_s,
                  r.gap_m, r.lead_speed_m_s, r.lane, r.light_phases.c_str(), r.fuel_rate_g_s,
                  r.fuel_used_g);
    out << buf;
  }
  return out.str();
}

SimTrace SimTrace::from_csv(const std::string& text) {
  SimTrace trace;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace csv: empty");
  double prev_t = 0.0;
  bool have_two = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (cols.size() != 12) throw std::invalid_argument("trace csv: bad row");
    TraceRecord r;
    r.t_s = std::stod(cols[0]);
    r.station_m = std::stod(cols[1]);
    r.speed_m_s = std::stod(cols[2]);
    r.accel_m_s2 = std::stod(cols[3]);
    for (int m = 0; m <= static_cast<int>(DrivingMode::TransitionDown); ++m) {
      if (cols[4] == mode_name(static_cast<DrivingMode>(m))) {
        r.mode = static_cast<DrivingMode>(m);
        break;
      }
    }
    r.command_m_s = std::stod(cols[5]);
    r.gap_m = std::stod(cols[6]);
    r.lead_speed_m_s = std::stod(cols[7]);
    r.lane = std::stoi(cols[8]);
    r.light_phases = cols[9];
    r.fuel_rate_g_s = std::stod(cols[10]);
    r.fuel_used_g = std::stod(cols[11]);
    if (!trace.records.empty() && !have_two) {
      trace.dt_s = r.t_s - prev_t;
      have_two = true;
    }
    prev_t = r.t_s;
    trace.records.push_back(std::move(r));
  }
  return trace;
}

std::string SimReport::to_json() const {
  nlohmann::json j;
  j["case_id"] = case_id;
  j["scenario_name"] = scenario_name;
  j["seed"] = seed;
  j["total_fuel_g"] = total_fuel_g;
  j["travel_time_s"] = travel_time_s;
  j["distance_m"] = distance_m;
  j["stop_count"] = stop_count;
  if (min_gap_m) j["min_gap_m"] = *min_gap_m;
  else j["min_gap_m"] = nullptr;
  j["red_violations"] = red_violations;
  j["collision"] = collision;
  j["route_hash"] = route_hash;
  return j.dump(2);
}

SimReport SimReport::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SimReport r;
  r.case_id = j.at("case_id").get<int>();
  r.scenario_name = j.at("scenario_name").get<std::string>();
  r.seed = j.at("seed").get<unsigned>();
  r.total_fuel_g = j.at("total_fuel_g").get<double>();
  r.travel_time_s = j.at("travel_time_s").get<double>();
  r.distance_m = j.at("distance_m").get<double>();
  r.stop_count = j.at("stop_count").get<int>();
  if (!j.at("min_gap_m").is_null()) r.min_gap_m = j.at("min_gap_m").get<double>();
  r.red_violations = j.at("red_violations").get<int>();
  r.collision = j.at("collision").get<bool>();
  r.route_hash = j.value("route_hash", "");
  return r;
}

}  // namespace ecodrive
