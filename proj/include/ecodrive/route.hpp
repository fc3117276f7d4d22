#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ecodrive {

enum class Phase { Green, Yellow, Red };

char phase_code(Phase p);           // 'G' / 'Y' / 'R'
Phase phase_from_code(char c);      // throws on anything else

struct TrafficLight {
  double location_m = 0.0;
  std::vector<std::pair<Phase, double>> phase_cycle;  // ordered (phase, duration_s)
  double cycle_offset_s = 0.0;

  double cycle_length_s() const;
};

struct StopSign {
  double location_m = 0.0;
};

struct SpatMessage {
  double light_location_m = 0.0;
  Phase current_phase = Phase::Red;
  double time_to_change_s = 0.0;  // in (0, current phase duration]
  Phase next_phase = Phase::Green;
  double timestamp_s = 0.0;
};

struct RouteProfile {
  double length_m = 0.0;
  std::vector<std::pair<double, double>> grade_table;        // (station_m, grade_rad)
  std::vector<std::pair<double, double>> speed_limit_table;  // (station_m, limit_m_s)
  std::vector<TrafficLight> lights;
  std::vector<StopSign> stop_signs;

  void validate() const;  // throws std::invalid_argument naming the violated invariant
  double max_speed_limit() const;
};

// Piecewise-linear grade lookup; throws std::out_of_range off the route.
double grade_at(const RouteProfile& route, double station_m);

// Step-function limit lookup (a limit holds from its station until the next entry).
double speed_limit_at(const RouteProfile& route, double station_m);

// Deterministic SPaT snapshot of one light at an absolute time.
SpatMessage spat_at(const TrafficLight& light, double time_s);

// Future Green windows of a light as absolute [start, end) intervals, covering
// [from_time, from_time + horizon] (the last interval may extend past the horizon).
std::vector<std::pair<double, double>> green_intervals(const TrafficLight& light,
                                                       double from_time_s, double horizon_s);

enum class InfraKind { Light, StopSign };

struct InfraAhead {
  InfraKind kind = InfraKind::Light;
  double location_m = 0.0;
  int index = 0;  // into route.lights or route.stop_signs
};

// Nearest infrastructure element strictly ahead of `station`, if any.
std::optional<InfraAhead> next_infrastructure(const RouteProfile& route, double station_m);

RouteProfile load_route(const std::string& path);
RouteProfile parse_route(const std::string& json_text);
std::string route_to_json(const RouteProfile& route);

}  // namespace ecodrive
