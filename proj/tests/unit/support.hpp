#pragma once

// Test-side oracles, written independently of the library implementation so the
// numbers they produce can be trusted as references.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ecodrive/dp.hpp"
#include "ecodrive/route.hpp"
#include "ecodrive/vehicle.hpp"

namespace oracle {

// Straight transcriptions of the road-load / power / fuel formulas.
inline double road_load(double m, double g, double r0, double rho, double af, double cd,
                        double v, double alpha) {
  return m * g * r0 * std::cos(alpha) + 0.5 * rho * af * cd * v * v + m * g * std::sin(alpha);
}

inline double traction_power(double me, double a, double rl, double v) {
  return (me * a + rl) * v;
}

inline double fuel_rate(double eta_t, double eta_e, double p_acc, double lhv, double power) {
  const double engine = (power > 0.0 ? power : 0.0) / eta_t + p_acc;
  return engine / (eta_e * lhv);
}

// Arc cost contract for the distance-based solver, re-derived here.
inline std::optional<double> arc_cost(const ecodrive::DPProblem& p, double station, double ds,
                                      double v_from, double v_to) {
  const double v_mid = 0.5 * (v_from + v_to);
  if (v_mid < 1e-3) return std::nullopt;
  const double a = (v_to * v_to - v_from * v_from) / (2.0 * ds);
  if (a > p.limits.accel_max_m_s2 + 1e-9 || a < -p.limits.decel_max_m_s2 - 1e-9)
    return std::nullopt;
  const double arrival = std::min(station + ds, p.route->length_m);
  if (v_to > ecodrive::speed_limit_at(*p.route, arrival) + 1e-9) return std::nullopt;
  const double grade = ecodrive::grade_at(*p.route, std::min(station, p.route->length_m));
  const double rl = road_load(p.vehicle.mass_kg, p.vehicle.gravity_m_s2,
                              p.vehicle.rolling_coeff, p.vehicle.air_density_kg_m3,
                              p.vehicle.frontal_area_m2, p.vehicle.drag_coeff, v_mid, grade);
  const double power = traction_power(p.vehicle.effective_mass_kg, a, rl, v_mid);
  const double rate = fuel_rate(p.fuel.trans_efficiency, p.fuel.engine_efficiency,
                                p.fuel.accessory_power_W, p.fuel.fuel_lhv_J_per_g, power);
  return rate * ds / v_mid;
}

struct EnumResult {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> path;
};

// Exhaustive minimum-cost path search over all grid sequences.
inline EnumResult enumerate_best(const ecodrive::DPProblem& p) {
  std::vector<double> stations;
  for (double s = p.start_station_m; s < p.end_station_m - 1e-9; s += p.distance_step_m)
    stations.push_back(s);
  stations.push_back(p.end_station_m);
  const int stages = static_cast<int>(stations.size());
  const int nodes = static_cast<int>(p.speed_grid.size());

  auto node_ok = [&](int stage, int node) {
    const double v = p.speed_grid[node];
    if (v > ecodrive::speed_limit_at(*p.route, stations[stage]) + 1e-9) return false;
    if (stage > 0 && stage + 1 < stages && v < p.interior_speed_floor_m_s - 1e-12) return false;
    return true;
  };

  int start = 0;
  for (int i = 1; i < nodes; ++i)
    if (std::abs(p.speed_grid[i] - p.initial_speed_m_s) <
        std::abs(p.speed_grid[start] - p.initial_speed_m_s))
      start = i;

  EnumResult best;
  std::vector<int> path(stages, start);

  struct Frame {
    int stage;
    double cost;
  };
  // depth-first over all successor choices
  std::function<void(int, double)> dfs = [&](int stage, double cost) {
    if (cost >= best.cost) return;
    if (stage == stages - 1) {
      if (std::abs(p.speed_grid[path[stage]] - p.terminal_speed_m_s) <=
          p.terminal_speed_tolerance_m_s) {
        best.cost = cost;
        best.path = path;
      }
      return;
    }
    const double ds = stations[stage + 1] - stations[stage];
    for (int j = 0; j < nodes; ++j) {
      if (!node_ok(stage + 1, j)) continue;
      const auto c = arc_cost(p, stations[stage], ds, p.speed_grid[path[stage]],
                              p.speed_grid[j]);
      if (!c) continue;
      path[stage + 1] = j;
      dfs(stage + 1, cost + *c);
    }
  };
  if (node_ok(0, start)) dfs(0, 0.0);
  return best;
}

// deterministic uniform helpers (stable across standard libraries)
inline double uniform(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 5) * (1.0 / 134217728.0));
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
}

}  // namespace oracle

namespace testutil {

inline ecodrive::RouteProfile flat_route(double length = 2000.0, double limit = 20.0,
                                         double grade = 0.0) {
  ecodrive::RouteProfile r;
  r.length_m = length;
  r.grade_table = {{0.0, grade}};
  r.speed_limit_table = {{0.0, limit}};
  ecodrive::TrafficLight light;  // validators demand none or valid; keep none
  (void)light;
  return r;
}

inline ecodrive::VehicleConfig default_vehicle() { return ecodrive::VehicleConfig{}; }

inline std::string data_path(const std::string& name) {
  return std::string(ECODRIVE_DATA_DIR) + "/" + name;
}

}  // namespace testutil
