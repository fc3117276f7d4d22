#include "ecodrive/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecodrive {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void VehicleParams::validate() const {
  require(mass_kg > 0, "mass_kg must be positive");
  require(effective_mass_kg > 0, "effective_mass_kg must be positive");
  require(effective_mass_kg >= mass_kg, "effective_mass_kg must be >= mass_kg");
  require(gravity_m_s2 > 0, "gravity_m_s2 must be positive");
  require(rolling_coeff > 0, "rolling_coeff must be positive");
  require(air_density_kg_m3 > 0, "air_density_kg_m3 must be positive");
  require(frontal_area_m2 > 0, "frontal_area_m2 must be positive");
  require(drag_coeff > 0, "drag_coeff must be positive");
  require(torque_gain > 0, "torque_gain must be positive");
  require(brake_gain > 0, "brake_gain must be positive");
}

void FuelModelParams::validate() const {
  require(trans_efficiency > 0 && trans_efficiency <= 1, "trans_efficiency must be in (0,1]");
  require(engine_efficiency > 0 && engine_efficiency <= 1, "engine_efficiency must be in (0,1]");
  require(accessory_power_W >= 0, "accessory_power_W must be >= 0");
  require(fuel_lhv_J_per_g > 0, "fuel_lhv_J_per_g must be positive");
}

void LimitSpec::validate() const {
  require(engine_torque_min_Nm <= 0, "engine_torque_min_Nm must be <= 0");
  require(engine_torque_max_Nm >= 0, "engine_torque_max_Nm must be >= 0");
  require(engine_power_max_W > 0, "engine_power_max_W must be positive");
  require(brake_force_max_N >= 0, "brake_force_max_N must be >= 0");
  require(accel_max_m_s2 > 0, "accel_max_m_s2 must be positive");
  require(decel_max_m_s2 > 0, "decel_max_m_s2 must be positive");
  require(jerk_max_m_s3 > 0, "jerk_max_m_s3 must be positive");
}

PowertrainLimits make_limits(const LimitSpec& spec, const VehicleParams& params) {
  spec.validate();
  params.validate();
  PowertrainLimits lim;
  const double torque_to_force = params.effective_mass_kg * params.torque_gain;  // N per N*m
  lim.engine_torque_range = [spec, torque_to_force](double speed) {
    // wheel power cap: F*v <= P_max
    const double v = std::max(speed, 0.5);
    const double t_power = spec.engine_power_max_W / (torque_to_force * v);
    return std::make_pair(spec.engine_torque_min_Nm, std::min(spec.engine_torque_max_Nm, t_power));
  };
  lim.brake_force_max = [spec](double) { return spec.brake_force_max_N; };
  lim.accel_max_m_s2 = spec.accel_max_m_s2;
  lim.decel_max_m_s2 = spec.decel_max_m_s2;
  lim.jerk_max_m_s3 = spec.jerk_max_m_s3;
  return lim;
}

double road_load(const VehicleParams& p, double speed_m_s, double grade_rad) {
  const double rolling = p.mass_kg * p.gravity_m_s2 * p.rolling_coeff * std::cos(grade_rad);
  const double aero = 0.5 * p.air_density_kg_m3 * p.frontal_area_m2 * p.drag_coeff *
                      speed_m_s * speed_m_s;
  const double grade = p.mass_kg * p.gravity_m_s2 * std::sin(grade_rad);
  return rolling + aero + grade;
}

double traction_power(const VehicleParams& p, double speed_m_s, double accel_m_s2,
                      double grade_rad) {
  return (p.effective_mass_kg * accel_m_s2 + road_load(p, speed_m_s, grade_rad)) * speed_m_s;
}

double fuel_rate(const FuelModelParams& f, double traction_power_W) {
  const double engine_power = std::max(traction_power_W, 0.0) / f.trans_efficiency +
                              f.accessory_power_W;
  return engine_power / (f.engine_efficiency * f.fuel_lhv_J_per_g);
}

ControlInput clamp_input(const ControlInput& input, const PowertrainLimits& limits,
                         double speed_m_s) {
  const auto [t_min, t_max] = limits.engine_torque_range(speed_m_s);
  const double fb_max = limits.brake_force_max(speed_m_s);
  ControlInput out;
  out.engine_torque_Nm = std::clamp(input.engine_torque_Nm, t_min, t_max);
  out.brake_force_N = std::clamp(input.brake_force_N, 0.0, fb_max);
  return out;
}

VehicleState step_dynamics(const VehicleState& state, const ControlInput& input,
                           const VehicleParams& p, const FuelModelParams& f,
                           double grade_rad, double dt_s) {
  if (dt_s <= 0.0) throw std::invalid_argument("step_dynamics: dt must be positive");
  const double v = state.speed_m_s;
  const double accel = p.torque_gain * input.engine_torque_Nm -
                       p.brake_gain * input.brake_force_N -
                       road_load(p, v, grade_rad) / p.mass_kg;

  VehicleState next = state;
  next.accel_m_s2 = accel;
  next.speed_m_s = std::max(0.0, v + accel * dt_s);
  next.position_m = state.position_m + next.speed_m_s * dt_s;
  next.time_s = state.time_s + dt_s;
  next.fuel_used_g = state.fuel_used_g + fuel_rate(f, traction_power(p, v, accel, grade_rad)) * dt_s;
  return next;
}

ControlInput inputs_for_accel(const VehicleParams& p, double speed_m_s, double grade_rad,
                              double desired_accel_m_s2) {
  // specific force the powertrain has to supply on top of road load
  const double net = desired_accel_m_s2 + road_load(p, speed_m_s, grade_rad) / p.mass_kg;
  ControlInput u;
  if (net >= 0.0) {
    u.engine_torque_Nm = net / p.torque_gain;
  } else {
    u.brake_force_N = -net / p.brake_gain;
  }
  return u;
}

namespace {

using nlohmann::json;

VehicleParams vehicle_params_from_json(const json& j) {
  VehicleParams p;
  p.mass_kg = j.at("mass_kg").get<double>();
  p.effective_mass_kg = j.at("effective_mass_kg").get<double>();
  p.gravity_m_s2 = j.at("gravity_m_s2").get<double>();
  p.rolling_coeff = j.at("rolling_coeff").get<double>();
  p.air_density_kg_m3 = j.at("air_density_kg_m3").get<double>();
  p.frontal_area_m2 = j.at("frontal_area_m2").get<double>();
  p.drag_coeff = j.at("drag_coeff").get<double>();
  p.torque_gain = j.at("torque_gain").get<double>();
  p.brake_gain = j.at("brake_gain").get<double>();
  p.validate();
  return p;
}

FuelModelParams fuel_params_from_json(const json& j) {
  FuelModelParams f;
  f.trans_efficiency = j.at("trans_efficiency").get<double>();
  f.engine_efficiency = j.at("engine_efficiency").get<double>();
  f.accessory_power_W = j.at("accessory_power_W").get<double>();
  f.fuel_lhv_J_per_g = j.at("fuel_lhv_J_per_g").get<double>();
  f.validate();
  return f;
}

LimitSpec limit_spec_from_json(const json& j) {
  LimitSpec s;
  s.engine_torque_min_Nm = j.value("engine_torque_min_Nm", s.engine_torque_min_Nm);
  s.engine_torque_max_Nm = j.value("engine_torque_max_Nm", s.engine_torque_max_Nm);
  s.engine_power_max_W = j.value("engine_power_max_W", s.engine_power_max_W);
  s.brake_force_max_N = j.value("brake_force_max_N", s.brake_force_max_N);
  s.accel_max_m_s2 = j.value("accel_max_m_s2", s.accel_max_m_s2);
  s.decel_max_m_s2 = j.value("decel_max_m_s2", s.decel_max_m_s2);
  s.jerk_max_m_s3 = j.value("jerk_max_m_s3", s.jerk_max_m_s3);
  s.validate();
  return s;
}

}  // namespace

VehicleConfig parse_vehicle_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("vehicle config parse error: ") + e.what());
  }
  VehicleConfig cfg;
  try {
    cfg.vehicle = vehicle_params_from_json(j.contains("vehicle") ? j.at("vehicle") : j);
    cfg.fuel = fuel_params_from_json(j.contains("fuel") ? j.at("fuel") : j);
    if (j.contains("limits")) cfg.limit_spec = limit_spec_from_json(j.at("limits"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("vehicle config: ") + e.what());
  }
  return cfg;
}

VehicleConfig load_vehicle_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open vehicle config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_vehicle_config(ss.str());
}

std::string vehicle_config_to_json(const VehicleConfig& cfg) {
  json j;
  j["vehicle"] = {
      {"mass_kg", cfg.vehicle.mass_kg},
      {"effective_mass_kg", cfg.vehicle.effective_mass_kg},
      {"gravity_m_s2", cfg.vehicle.gravity_m_s2},
      {"rolling_coeff", cfg.vehicle.rolling_coeff},
      {"air_density_kg_m3", cfg.vehicle.air_density_kg_m3},
      {"frontal_area_m2", cfg.vehicle.frontal_area_m2},
      {"drag_coeff", cfg.vehicle.drag_coeff},
      {"torque_gain", cfg.vehicle.torque_gain},
      {"brake_gain", cfg.vehicle.brake_gain},
  };
  j["fuel"] = {
      {"trans_efficiency", cfg.fuel.trans_efficiency},
      {"engine_efficiency", cfg.fuel.engine_efficiency},
      {"accessory_power_W", cfg.fuel.accessory_power_W},
      {"fuel_lhv_J_per_g", cfg.fuel.fuel_lhv_J_per_g},
  };
  j["limits"] = {
      {"engine_torque_min_Nm", cfg.limit_spec.engine_torque_min_Nm},
      {"engine_torque_max_Nm", cfg.limit_spec.engine_torque_max_Nm},
      {"engine_power_max_W", cfg.limit_spec.engine_power_max_W},
      {"brake_force_max_N", cfg.limit_spec.brake_force_max_N},
      {"accel_max_m_s2", cfg.limit_spec.accel_max_m_s2},
      {"decel_max_m_s2", cfg.limit_spec.decel_max_m_s2},
      {"jerk_max_m_s3", cfg.limit_spec.jerk_max_m_s3},
  };
  return j.dump(2);
}

}  // namespace ecodrive
