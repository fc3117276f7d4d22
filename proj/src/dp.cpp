#include "ecodrive/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ecodrive {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinMidSpeed = 1e-3;  // m/s; an arc slower than this cannot cover distance
constexpr double kAccelSlack = 1e-9;
constexpr double kLimitSlack = 1e-9;

// Stage stations: uniform steps from start, final (possibly shorter) arc lands on end.
std::vector<double> stage_stations(const DPProblem& p) {
  std::vector<double> s;
  for (double x = p.start_station_m; x < p.end_station_m - 1e-9; x += p.distance_step_m)
    s.push_back(x);
  s.push_back(p.end_station_m);
  return s;
}

struct ArcContext {
  const DPProblem& p;
  double station;
  double ds;
};

// Shared arc cost used by both the backward pass and evaluate_profile, so the two
// totals agree to float noise.
std::optional<double> arc_cost(const ArcContext& ctx, double v_from, double v_to) {
  const DPProblem& p = ctx.p;
  const double v_mid = 0.5 * (v_from + v_to);
  if (v_mid < kMinMidSpeed) return std::nullopt;
  const double a = (v_to * v_to - v_from * v_from) / (2.0 * ctx.ds);
  if (a > p.limits.accel_max_m_s2 + kAccelSlack) return std::nullopt;
  if (a < -p.limits.decel_max_m_s2 - kAccelSlack) return std::nullopt;
  const double arrival = std::min(ctx.station + ctx.ds, p.route->length_m);
  if (v_to > speed_limit_at(*p.route, arrival) + kLimitSlack) return std::nullopt;
  const double dt = ctx.ds / v_mid;
  const double grade = grade_at(*p.route, std::min(ctx.station, p.route->length_m));
  return fuel_rate(p.fuel, traction_power(p.vehicle, v_mid, a, grade)) * dt;
}

int nearest_node(const std::vector<double>& grid, double v) {
  int best = 0;
  for (size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - v) < std::abs(grid[best] - v)) best = static_cast<int>(i);
  return best;
}

}  // namespace

void DPProblem::validate() const {
  if (route == nullptr) throw std::invalid_argument("DPProblem: route is null");
  if (end_station_m <= start_station_m)
    throw std::invalid_argument("DPProblem: end must be beyond start");
  if (distance_step_m <= 0) throw std::invalid_argument("DPProblem: distance step must be positive");
  if (speed_grid.empty()) throw std::invalid_argument("DPProblem: speed grid empty");
  for (size_t i = 0; i < speed_grid.size(); ++i) {
    if (speed_grid[i] < 0) throw std::invalid_argument("DPProblem: negative grid speed");
    if (i > 0 && speed_grid[i] <= speed_grid[i - 1])
      throw std::invalid_argument("DPProblem: speed grid must be strictly increasing");
  }
}

std::optional<double> stage_cost(const DPProblem& problem, double station_m, double v_from,
                                 double v_to) {
  return arc_cost({problem, station_m, problem.distance_step_m}, v_from, v_to);
}

DPGrid solve_grid(const DPProblem& p) {
  p.validate();
  const auto stations = stage_stations(p);
  const int n_stages = static_cast<int>(stations.size());
  const int n_nodes = static_cast<int>(p.speed_grid.size());

  DPGrid grid;
  grid.stations_m = stations;
  grid.cost_to_go.assign(n_stages, std::vector<double>(n_nodes, kInf));
  grid.successor.assign(n_stages, std::vector<int>(n_nodes, -1));

  auto node_ok = [&](int stage, int node) {
    const double v = p.speed_grid[node];
    if (v > speed_limit_at(*p.route, stations[stage]) + kLimitSlack) return false;
    const bool interior = stage > 0 && stage + 1 < n_stages;
    if (interior && v < p.interior_speed_floor_m_s - 1e-12) return false;
    return true;
  };

  // Terminal stage: hard constraint at v_f within tolerance.
  for (int j = 0; j < n_nodes; ++j) {
    if (!node_ok(n_stages - 1, j)) continue;
    if (std::abs(p.speed_grid[j] - p.terminal_speed_m_s) <= p.terminal_speed_tolerance_m_s)
      grid.cost_to_go[n_stages - 1][j] = 0.0;
  }

  // Backward propagation; ascending successor scan keeps ties on the lowest speed node.
  for (int k = n_stages - 2; k >= 0; --k) {
    const ArcContext ctx{p, stations[k], stations[k + 1] - stations[k]};
    for (int i = 0; i < n_nodes; ++i) {
      if (!node_ok(k, i)) continue;
      double best = kInf;
      int best_j = -1;
      for (int j = 0; j < n_nodes; ++j) {
        const double tail = grid.cost_to_go[k + 1][j];
        if (tail == kInf) continue;
        const auto c = arc_cost(ctx, p.speed_grid[i], p.speed_grid[j]);
        if (!c) continue;
        const double total = *c + tail;
        if (total < best) {
          best = total;
          best_j = j;
        }
      }
      grid.cost_to_go[k][i] = best;
      grid.successor[k][i] = best_j;
    }
  }
  return grid;
}

namespace {

// On failure, walk reachability forward to name the first stage no arc can enter.
[[noreturn]] void report_infeasible(const DPProblem& p, const DPGrid& grid, int start_node) {
  const auto& stations = grid.stations_m;
  const int n_stages = static_cast<int>(stations.size());
  const int n_nodes = static_cast<int>(p.speed_grid.size());
  std::vector<char> reach(n_nodes, 0);
  reach[start_node] = 1;
  for (int k = 0; k + 1 < n_stages; ++k) {
    const ArcContext ctx{p, stations[k], stations[k + 1] - stations[k]};
    std::vector<char> next(n_nodes, 0);
    bool any = false;
    for (int i = 0; i < n_nodes; ++i) {
      if (!reach[i]) continue;
      for (int j = 0; j < n_nodes; ++j) {
        if (next[j]) continue;
        if (p.speed_grid[j] > speed_limit_at(*p.route, std::min(stations[k + 1], p.route->length_m)) + kLimitSlack)
          continue;
        if (arc_cost(ctx, p.speed_grid[i], p.speed_grid[j])) {
          next[j] = 1;
          any = true;
        }
      }
    }
    if (!any) {
      std::ostringstream msg;
      msg << "no feasible arc into stage " << (k + 1) << " (station " << stations[k + 1] << " m)";
      throw DPInfeasible(msg.str(), k + 1);
    }
    reach = std::move(next);
  }
  std::ostringstream msg;
  msg << "terminal speed " << p.terminal_speed_m_s << " m/s unreachable at stage "
      << (n_stages - 1) << " (station " << stations.back() << " m)";
  throw DPInfeasible(msg.str(), n_stages - 1);
}

}  // namespace

SpeedProfile solve(const DPProblem& p) {
  const DPGrid grid = solve_grid(p);
  const int start_node = nearest_node(p.speed_grid, p.initial_speed_m_s);
  if (std::abs(p.speed_grid[start_node] - p.initial_speed_m_s) > p.terminal_speed_tolerance_m_s + 1e-12)
    throw std::invalid_argument("solve: initial speed not representable on the grid");

  if (grid.cost_to_go[0][start_node] == kInf) report_infeasible(p, grid, start_node);

  SpeedProfile profile;
  profile.total_fuel_g = grid.cost_to_go[0][start_node];
  int node = start_node;
  for (size_t k = 0; k < grid.stations_m.size(); ++k) {
    profile.stations_m.push_back(grid.stations_m[k]);
    profile.target_speed_m_s.push_back(p.speed_grid[node]);
    if (k + 1 < grid.stations_m.size()) node = grid.successor[k][node];
  }
  return profile;
}

SpeedProfile solve_eco_stop(const VehicleState& current, double stop_location_m,
                            const DPProblem& tmpl) {
  const double span = stop_location_m - current.position_m;
  if (span <= 1e-6) {
    // Already at the line; a single resting point.
    SpeedProfile p;
    p.stations_m = {stop_location_m};
    p.target_speed_m_s = {0.0};
    return p;
  }
  DPProblem p = tmpl;
  p.start_station_m = current.position_m;
  p.end_station_m = stop_location_m;
  p.initial_speed_m_s = current.speed_m_s;
  p.terminal_speed_m_s = 0.0;
  p.interior_speed_floor_m_s = 0.0;
  // Short approaches need finer arcs than the route-scale default.
  p.distance_step_m = std::clamp(span / 6.0, 1.0, tmpl.distance_step_m);
  return solve(p);
}

SpeedProfile solve_eco_departure(double from_station_m, double target_speed_m_s,
                                 const DPProblem& tmpl, double horizon_m) {
  if (target_speed_m_s <= 1e-9) {
    SpeedProfile p;
    p.stations_m = {from_station_m};
    p.target_speed_m_s = {0.0};
    return p;
  }
  DPProblem p = tmpl;
  p.start_station_m = from_station_m;
  p.end_station_m = std::min(from_station_m + horizon_m, tmpl.route->length_m);
  p.initial_speed_m_s = 0.0;
  p.terminal_speed_m_s = target_speed_m_s;
  p.interior_speed_floor_m_s = 0.0;
  p.distance_step_m = std::clamp((p.end_station_m - p.start_station_m) / 6.0, 1.0,
                                 tmpl.distance_step_m);
  return solve(p);
}

double evaluate_profile(const SpeedProfile& profile, const VehicleParams& vehicle,
                        const FuelModelParams& fuel, const RouteProfile& route,
                        const PowertrainLimits& limits) {
  if (profile.stations_m.size() != profile.target_speed_m_s.size())
    throw std::invalid_argument("evaluate_profile: station/speed size mismatch");
  if (profile.stations_m.size() < 2) return 0.0;

  DPProblem shim;  // carries params through the shared arc-cost path
  shim.vehicle = vehicle;
  shim.fuel = fuel;
  shim.limits = limits;
  shim.route = &route;

  double total = 0.0;
  for (size_t k = 0; k + 1 < profile.stations_m.size(); ++k) {
    const double s0 = profile.stations_m[k];
    const double ds = profile.stations_m[k + 1] - s0;
    if (ds <= 0) throw std::invalid_argument("evaluate_profile: stations not increasing");
    const double v0 = profile.target_speed_m_s[k];
    const double v1 = profile.target_speed_m_s[k + 1];
    if (v0 < 0 || v1 < 0) throw std::invalid_argument("evaluate_profile: negative speed");
    const auto c = arc_cost({shim, s0, ds}, v0, v1);
    if (!c) throw std::invalid_argument("evaluate_profile: infeasible arc in profile");
    total += *c;
  }
  return total;
}

std::vector<double> make_speed_grid(double max_speed_m_s, double step_m_s) {
  std::vector<double> grid;
  for (double v = 0.0; v < max_speed_m_s + step_m_s * 0.5; v += step_m_s)
    grid.push_back(std::min(v, max_speed_m_s));
  if (grid.size() > 1 && grid.back() == grid[grid.size() - 2]) grid.pop_back();
  return grid;
}

double SpeedProfile::speed_at(double station_m) const {
  if (stations_m.empty()) return 0.0;
  if (station_m <= stations_m.front()) return target_speed_m_s.front();
  if (station_m >= stations_m.back()) return target_speed_m_s.back();
  auto it = std::upper_bound(stations_m.begin(), stations_m.end(), station_m);
  const size_t k = static_cast<size_t>(it - stations_m.begin()) - 1;
  const double ds = stations_m[k + 1] - stations_m[k];
  const double v0 = target_speed_m_s[k];
  const double v1 = target_speed_m_s[k + 1];
  const double a = (v1 * v1 - v0 * v0) / (2.0 * ds);
  const double v2 = v0 * v0 + 2.0 * a * (station_m - stations_m[k]);
  return std::sqrt(std::max(0.0, v2));
}

double SpeedProfile::accel_at(double station_m) const {
  if (stations_m.size() < 2) return 0.0;
  if (station_m < stations_m.front() || station_m >= stations_m.back()) return 0.0;
  auto it = std::upper_bound(stations_m.begin(), stations_m.end(), station_m);
  const size_t k = static_cast<size_t>(it - stations_m.begin()) - 1;
  const double ds = stations_m[k + 1] - stations_m[k];
  const double v0 = target_speed_m_s[k];
  const double v1 = target_speed_m_s[k + 1];
  return (v1 * v1 - v0 * v0) / (2.0 * ds);
}

std::string profile_to_csv(const SpeedProfile& profile) {
  std::ostringstream out;
  out << "station_m,target_speed_m_s\n";
  out.precision(9);
  for (size_t i = 0; i < profile.stations_m.size(); ++i)
    out << profile.stations_m[i] << "," << profile.target_speed_m_s[i] << "\n";
  return out.str();
}

SpeedProfile profile_from_csv(const std::string& text) {
  SpeedProfile p;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("profile csv: empty");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("profile csv: bad row");
    p.stations_m.push_back(std::stod(line.substr(0, comma)));
    p.target_speed_m_s.push_back(std::stod(line.substr(comma + 1)));
  }
  return p;
}

}  // namespace ecodrive
