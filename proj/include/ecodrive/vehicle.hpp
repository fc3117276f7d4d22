#pragma once

#include <functional>
#include <string>
#include <utility>

namespace ecodrive {

// Physical constants of the longitudinal model. All SI, grades in radians.
struct VehicleParams {
  double mass_kg = 1500.0;
  double effective_mass_kg = 1590.0;  // includes rotating-inertia factor, >= mass_kg
  double gravity_m_s2 = 9.81;
  double rolling_coeff = 0.009;
  double air_density_kg_m3 = 1.206;
  double frontal_area_m2 = 2.2;
  double drag_coeff = 0.30;
  double torque_gain = 0.0081152;   // accel per unit engine torque, 1/(kg*m)
  double brake_gain = 0.000628931;  // accel per unit brake force, 1/kg

  void validate() const;  // throws std::invalid_argument naming the bad field
};

struct FuelModelParams {
  double trans_efficiency = 0.92;
  double engine_efficiency = 0.30;
  double accessory_power_W = 500.0;
  double fuel_lhv_J_per_g = 43000.0;

  void validate() const;
  double idle_rate_g_s() const { return accessory_power_W / (engine_efficiency * fuel_lhv_J_per_g); }
};

// Constant actuator bounds used to build speed-dependent PowertrainLimits.
struct LimitSpec {
  double engine_torque_min_Nm = -30.0;
  double engine_torque_max_Nm = 250.0;
  double engine_power_max_W = 90e3;  // caps wheel power at speed
  double brake_force_max_N = 6000.0;
  double accel_max_m_s2 = 2.0;
  double decel_max_m_s2 = 3.0;  // magnitude
  double jerk_max_m_s3 = 2.0;

  void validate() const;
};

struct PowertrainLimits {
  // speed (m/s) -> (T_e,min, T_e,max) N*m
  std::function<std::pair<double, double>(double)> engine_torque_range;
  // speed (m/s) -> F_b,max N
  std::function<double(double)> brake_force_max;
  double accel_max_m_s2 = 2.0;
  double decel_max_m_s2 = 3.0;
  double jerk_max_m_s3 = 2.0;
};

PowertrainLimits make_limits(const LimitSpec& spec, const VehicleParams& params);

struct VehicleState {
  double position_m = 0.0;
  double speed_m_s = 0.0;
  double accel_m_s2 = 0.0;
  double time_s = 0.0;
  double fuel_used_g = 0.0;
};

struct ControlInput {
  double engine_torque_Nm = 0.0;
  double brake_force_N = 0.0;
};

// Rolling resistance + aero drag + grade force, Newtons. Negative on steep downgrades.
double road_load(const VehicleParams& p, double speed_m_s, double grade_rad);

// Power at the tires needed to hold `accel` at `speed` against road load. Zero at standstill.
double traction_power(const VehicleParams& p, double speed_m_s, double accel_m_s2, double grade_rad);

// Fuel mass flow, g/s. Negative traction power is floored at zero (no fuel-cutoff model);
// the result never drops below the accessory idle floor.
double fuel_rate(const FuelModelParams& f, double traction_power_W);

// Clip both inputs into their speed-dependent bounds. Idempotent.
ControlInput clamp_input(const ControlInput& input, const PowertrainLimits& limits, double speed_m_s);

// One semi-implicit Euler step: a from torque/brake/road load, v' = max(0, v + a*dt),
// s' = s + v'*dt. Fuel advances by fuel_rate(traction_power)*dt. Throws on dt <= 0.
VehicleState step_dynamics(const VehicleState& state, const ControlInput& input,
                           const VehicleParams& p, const FuelModelParams& f,
                           double grade_rad, double dt_s);

// Invert the force balance: torque (or brake) that realizes `desired_accel` at the wheel,
// before actuator clamping. Never commands power against brake.
ControlInput inputs_for_accel(const VehicleParams& p, double speed_m_s, double grade_rad,
                              double desired_accel_m_s2);

struct VehicleConfig {
  VehicleParams vehicle;
  FuelModelParams fuel;
  LimitSpec limit_spec;

  PowertrainLimits limits() const { return make_limits(limit_spec, vehicle); }
};

// Loads {"vehicle": {...}, "fuel": {...}, "limits": {...}} with snake_case SI field names.
VehicleConfig load_vehicle_config(const std::string& path);
VehicleConfig parse_vehicle_config(const std::string& json_text);
std::string vehicle_config_to_json(const VehicleConfig& cfg);

}  // namespace ecodrive
