#pragma once

#include <memory>
#include <optional>
#include <string>

#include "ecodrive/dp.hpp"
#include "ecodrive/following.hpp"
#include "ecodrive/pag.hpp"
#include "ecodrive/route.hpp"
#include "ecodrive/vehicle.hpp"

namespace ecodrive {

enum class DrivingMode {
  EcoCruise,
  PaG,
  EcoStop,
  StopWait,
  EcoDeparture,
  ACC,
  CACC,
  EcoCACC,
  LaneChange,
  TransitionUp,
  TransitionDown,
};

const char* mode_name(DrivingMode m);

// Variables of the cubic speed blend smoothing mode switches.
struct TransitionState {
  double v_trig_m_s = 0.0;   // speed when the transition started
  double t_trig_s = 0.0;     // time when the transition started
  double v_lim_m_s = 0.0;    // up-transition target
  double v_lim_low_m_s = 0.0;  // down-transition target
};

// Both curves run over a duration of 4*|target - v_trig| seconds and hold the
// target afterwards.
double transition_up_duration_s(const TransitionState& ts);
double transition_down_duration_s(const TransitionState& ts);
double transition_speed_up(const TransitionState& ts, double t_act_s);
double transition_speed_down(const TransitionState& ts, double t_act_s);
double transition_accel_up(const TransitionState& ts, double t_act_s);
double transition_accel_down(const TransitionState& ts, double t_act_s);

struct AdjacentLaneGaps {
  bool has_lane = false;
  double forward_gap_m = 0.0;   // to the adjacent leader's rear bumper
  double forward_speed_m_s = 0.0;
  double rear_gap_m = 0.0;      // from the adjacent follower's front to the ego rear
  double rear_speed_m_s = 0.0;
};

// Everything the supervisor looks at in one tick.
struct Situation {
  VehicleState ego;
  double local_speed_limit_m_s = 0.0;
  double eco_cruise_target_m_s = 0.0;
  double eco_cruise_accel_m_s2 = 0.0;
  std::optional<InfraAhead> next_infra;
  std::optional<SpatMessage> spat;           // only when a light is within broadcast range
  const TrafficLight* spat_light = nullptr;  // schedule behind the SPaT message
  std::optional<Phase> visible_phase;        // next light's current phase (line of sight)
  std::optional<LeadObservation> lead;
  bool lead_erratic = false;
  double stop_wait_elapsed_s = 0.0;
  AdjacentLaneGaps adjacent;
  bool departure_active = false;
  bool lane_change_active = false;
  bool lane_change_safe = false;
  bool slow_leader = false;
};

enum class FollowPolicy { Auto, ForceACC, ForceCACC, ForceEcoCACC };

struct HlConfig {
  GapPolicy gap_policy;
  FollowGains gains;
  PagConfig pag;
  double spat_range_m = 300.0;
  double eco_stop_horizon_m = 250.0;
  double stop_dwell_s = 5.0;
  double stop_margin_m = 0.5;          // aim stops slightly short of the line
  double departure_exit_tol_m_s = 0.5;
  double transition_enter_m_s = 1.0;
  double transition_exit_m_s = 0.25;
  double tracker_gain = 0.8;           // 1/s, speed loop
  double lane_change_duration_s = 3.0;
  double lane_change_cooldown_s = 10.0;
  double slow_leader_factor = 0.7;
  double slow_leader_time_s = 5.0;
  double baseline_decel_m_s2 = 1.5;    // non-eco stop ramp
  double baseline_accel_m_s2 = 1.0;    // non-eco departure ramp
  double wall_decel_m_s2 = 2.5;        // safety backstop toward stop lines
  double wall_range_m = 150.0;
  double filter_cutoff_hz = 0.2;
  FollowPolicy follow_policy = FollowPolicy::Auto;
  bool v2i_enabled = true;
  bool lane_change_enabled = true;
};

// Pure mode arbitration; highest priority first: car following, STOP handling,
// PaG, transition blending, Eco-Cruise.
DrivingMode select_mode(DrivingMode prev_mode, const Situation& sit, const HlConfig& cfg);

// Gap-acceptance rule shared by the ego and background lane changes.
bool lane_change_decision(const VehicleState& ego, const AdjacentLaneGaps& adjacent,
                          const GapPolicy& policy);

// Per-tick sub-controller outputs feeding the command multiplexer. NaN marks
// "not produced"; sampling a missing source is a programming error.
struct CommandBasis {
  double advisory_speed_m_s;
  double advisory_accel_m_s2;
  double plan_speed_m_s;
  double plan_accel_m_s2;
  double follow_accel_m_s2;
  double transition_speed_m_s;
  double transition_accel_m_s2;

  CommandBasis();
};

struct SpeedCommand {
  bool is_accel = false;
  double speed_m_s = 0.0;    // target speed (speed modes), clipped by the local limit
  double accel_ff_m_s2 = 0.0;
  double accel_m_s2 = 0.0;   // raw follow command (accel modes)
};

SpeedCommand command_speed(DrivingMode mode, const Situation& sit, const CommandBasis& basis);

struct HlOutput {
  DrivingMode mode = DrivingMode::EcoCruise;
  double command_speed_m_s = 0.0;  // final arbitrated target, rate-limited tick to tick
  double accel_cmd_m_s2 = 0.0;
  ControlInput input;
  bool lane_change_started = false;
};

// Stateful supervisor: owns transition state, stop/departure plans, the PaG advisory,
// the erratic classifier and the Eco-CACC filter for one ego vehicle.
class HlController {
 public:
  HlController(HlConfig cfg, VehicleConfig veh, std::shared_ptr<const RouteProfile> route,
               SpeedProfile eco_profile);

  HlOutput tick(const Situation& raw, double dt_s);

  DrivingMode mode() const { return mode_; }
  const HlConfig& config() const { return cfg_; }
  const SpeedProfile& eco_profile() const { return eco_profile_; }
  // Eco-Cruise target at a station (profile sample clipped by the local limit).
  double eco_target_at(double station_m) const;
  double eco_accel_at(double station_m) const;

 private:
  struct StopTask {
    double line_station_m = 0.0;     // aim point (already includes the stop margin)
    double infra_location_m = 0.0;
    InfraKind kind = InfraKind::StopSign;
    SpeedProfile plan;
    bool released = false;
    double dwell_s = 0.0;
  };

  Situation enrich(const Situation& raw, double dt_s);
  void manage_tasks(const Situation& sit, double dt_s);
  CommandBasis build_basis(const Situation& sit, DrivingMode mode, double dt_s);
  SpeedProfile stop_plan(const VehicleState& ego, double line_station) const;
  SpeedProfile departure_plan(double from_station) const;

  HlConfig cfg_;
  VehicleConfig veh_;
  PowertrainLimits limits_;
  std::shared_ptr<const RouteProfile> route_;
  SpeedProfile eco_profile_;

  DrivingMode mode_ = DrivingMode::EcoCruise;
  bool first_tick_ = true;
  double prev_command_m_s = 0.0;
  std::optional<TransitionState> transition_;
  std::optional<StopTask> stop_task_;
  std::optional<SpeedProfile> departure_plan_;
  std::optional<SpeedAdvisory> advisory_;
  LeadAccelFilter lead_filter_;
  ErraticClassifier erratic_;
  bool had_lead_ = false;
  double slow_leader_s_ = 0.0;
  double lane_change_elapsed_s = -1.0;  // < 0: inactive
  double lane_change_cooldown_s_ = 0.0;
  double served_before_m_ = -1.0;  // infra at or before this station is done with
};

}  // namespace ecodrive
