#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecodrive/controller.hpp"
#include "ecodrive/route.hpp"
#include "ecodrive/vehicle.hpp"

namespace ecodrive {

struct TrafficVehicle {
  int id = 0;
  double spawn_time_s = 0.0;
  double spawn_station_m = 0.0;
  int lane = 0;
  double desired_speed_m_s = 10.0;
  double time_headway_s = 1.4;
  double max_accel_m_s2 = 1.5;
  double comfort_decel_m_s2 = 2.0;
  double min_gap_m = 2.0;
  double accel_exponent = 4.0;
  double length_m = 4.5;
};

struct Scenario {
  int case_id = 1;  // 1..5, or 0 for user-defined
  std::string name;
  bool v2i_enabled = true;
  FollowPolicy follow_policy = FollowPolicy::Auto;
  bool v2v_connected = false;   // traffic broadcasts acceleration
  bool traffic_enabled = false;
  std::vector<TrafficVehicle> spawn_table;
  unsigned seed = 42;
  double duration_s = 1500.0;
  double dt_s = 0.1;

  void validate() const;
};

// The five-case experiment: 1 cruise-only baseline, 2 adds V2I, 3-5 add traffic with
// ACC / CACC / Eco-CACC following. Cases 3-5 share the identical spawn table per seed.
Scenario make_case_scenario(int case_id, unsigned seed, const RouteProfile& route);
std::vector<TrafficVehicle> default_spawn_table(unsigned seed, const RouteProfile& route);

struct TraceRecord {
  double t_s = 0.0;
  double station_m = 0.0;
  double speed_m_s = 0.0;
  double accel_m_s2 = 0.0;
  DrivingMode mode = DrivingMode::EcoCruise;
  double command_m_s = 0.0;
  double gap_m = -1.0;  // < 0: no leader in sensing range
  double lead_speed_m_s = 0.0;
  int lane = 0;
  std::string light_phases;  // one code per route light, at t_s
  double fuel_rate_g_s = 0.0;
  double fuel_used_g = 0.0;
};

struct SimTrace {
  std::vector<TraceRecord> records;
  double dt_s = 0.1;

  std::string to_csv() const;
  static SimTrace from_csv(const std::string& text);
  static const char* csv_header();
};

struct SimReport {
  int case_id = 0;
  std::string scenario_name;
  unsigned seed = 0;
  double total_fuel_g = 0.0;
  double travel_time_s = 0.0;
  double distance_m = 0.0;
  int stop_count = 0;
  std::optional<double> min_gap_m;  // absent when no vehicle was ever in range
  int red_violations = 0;
  bool collision = false;
  std::string route_hash;

  std::string to_json() const;
  static SimReport from_json(const std::string& text);
};

// Intelligent-Driver-Model acceleration; gap < 0 means free road. Clamped to
// [-2.5 * comfort_decel, max_accel].
double traffic_follow_accel(const TrafficVehicle& v, double speed_m_s, double gap_m,
                            double lead_speed_m_s, double local_limit_m_s);

struct NeighborView {
  bool has_leader = false;
  double leader_gap_m = 0.0;
  double leader_speed_m_s = 0.0;
  AdjacentLaneGaps adjacent;
};

// Gap-acceptance lane change for background traffic; returns the (possibly unchanged)
// lane index.
int traffic_lane_change(const TrafficVehicle& v, double speed_m_s, const NeighborView& view,
                        int lane_count);

struct SimInputs {
  std::shared_ptr<const RouteProfile> route;
  VehicleConfig vehicle;
  HlConfig hl;              // follow policy / v2i flags are overridden per scenario
  SpeedProfile eco_profile; // solved once per route+vehicle and reused across runs
  std::string route_hash;
};

std::pair<SimTrace, SimReport> run_scenario(const Scenario& scenario, const SimInputs& inputs);

struct EventSummary {
  int collisions = 0;
  double first_collision_t_s = -1.0;
  int red_violations = 0;
  bool stop_compliance = true;  // every STOP sign: v < 0.1 within 1 m, dwell >= 5 s
  std::vector<double> sign_dwell_s;
};

EventSummary detect_events(const SimTrace& trace, const RouteProfile& route);

struct ComparisonRow {
  int case_id = 0;
  std::string name;
  double fuel_g = 0.0;
  std::optional<double> reduction_vs_case3_pct;
};

// Table-1-shaped comparison: percent fuel reduction of each case versus case 3.
// Throws when any of the five cases is missing.
std::vector<ComparisonRow> compare_cases(const std::map<int, SimReport>& reports);

}  // namespace ecodrive
