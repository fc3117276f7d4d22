#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecodrive/route.hpp"
#include "ecodrive/vehicle.hpp"

namespace ecodrive {

// Distance-based fuel-minimization problem on a fixed speed grid.
struct DPProblem {
  double start_station_m = 0.0;
  double end_station_m = 0.0;
  double distance_step_m = 10.0;
  std::vector<double> speed_grid;  // sorted, nonnegative
  double initial_speed_m_s = 0.0;
  double terminal_speed_m_s = 0.0;
  double terminal_speed_tolerance_m_s = 0.25;
  // Lowest speed admitted at interior stages; keeps cruise solutions off the
  // degenerate stall nodes while start/end may still sit at zero.
  double interior_speed_floor_m_s = 0.0;
  PowertrainLimits limits;
  VehicleParams vehicle;
  FuelModelParams fuel;
  const RouteProfile* route = nullptr;

  void validate() const;
};

struct SpeedProfile {
  std::vector<double> stations_m;
  std::vector<double> target_speed_m_s;
  double total_fuel_g = 0.0;

  bool empty() const { return stations_m.empty(); }
  // Arc-consistent sampling: within an arc speed follows v^2' = v^2 + 2a*ds.
  double speed_at(double station_m) const;
  // Constant acceleration of the arc containing station_m (0 outside).
  double accel_at(double station_m) const;
  double end_station() const { return stations_m.empty() ? 0.0 : stations_m.back(); }
};

struct DPGrid {
  std::vector<double> stations_m;              // stage stations, first = start, last = end
  std::vector<std::vector<double>> cost_to_go; // [stage][node], +inf = infeasible
  std::vector<std::vector<int>> successor;     // [stage][node], -1 where none
};

class DPInfeasible : public std::runtime_error {
 public:
  DPInfeasible(const std::string& what, int stage) : std::runtime_error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// Fuel (grams) to traverse one arc of length `problem.distance_step_m` starting at `station`,
// moving from v_from to v_to under constant acceleration. Returns nullopt when the arc
// violates the acceleration box, the local speed limit, or cannot cover distance (v_mid ~ 0).
std::optional<double> stage_cost(const DPProblem& problem, double station_m, double v_from,
                                 double v_to);

// Backward induction over all stages; exposed for Bellman-consistency checks.
DPGrid solve_grid(const DPProblem& problem);

// Minimum-fuel profile from initial to terminal speed. Throws DPInfeasible with the first
// unreachable stage when no path exists.
SpeedProfile solve(const DPProblem& problem);

// Approach profile ending at rest at the stop line. The problem template supplies
// grid/limits/route; start/end/speeds are overridden.
SpeedProfile solve_eco_stop(const VehicleState& current, double stop_location_m,
                            const DPProblem& problem_template);

// Launch profile from rest to `target_speed` over `horizon_m` beyond from_station.
SpeedProfile solve_eco_departure(double from_station_m, double target_speed_m_s,
                                 const DPProblem& problem_template, double horizon_m = 300.0);

// Forward re-summation of a profile's arc costs; the independent check of solve's total.
double evaluate_profile(const SpeedProfile& profile, const VehicleParams& vehicle,
                        const FuelModelParams& fuel, const RouteProfile& route,
                        const PowertrainLimits& limits);

// Uniform grid 0..max_speed inclusive.
std::vector<double> make_speed_grid(double max_speed_m_s, double step_m_s = 0.5);

std::string profile_to_csv(const SpeedProfile& profile);
SpeedProfile profile_from_csv(const std::string& text);

}  // namespace ecodrive
