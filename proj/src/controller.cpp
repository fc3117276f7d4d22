#include "ecodrive/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecodrive {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStandstill = 0.1;  // m/s

double checked(double v, const char* what) {
  if (std::isnan(v)) throw std::logic_error(std::string("command_speed: missing ") + what);
  return v;
}

}  // namespace

const char* mode_name(DrivingMode m) {
  switch (m) {
    case DrivingMode::EcoCruise: return "EcoCruise";
    case DrivingMode::PaG: return "PaG";
    case DrivingMode::EcoStop: return "EcoStop";
    case DrivingMode::StopWait: return "StopWait";
    case DrivingMode::EcoDeparture: return "EcoDeparture";
    case DrivingMode::ACC: return "ACC";
    case DrivingMode::CACC: return "CACC";
    case DrivingMode::EcoCACC: return "EcoCACC";
    case DrivingMode::LaneChange: return "LaneChange";
    case DrivingMode::TransitionUp: return "TransitionUp";
    case DrivingMode::TransitionDown: return "TransitionDown";
  }
  return "?";
}

double transition_up_duration_s(const TransitionState& ts) {
  return 4.0 * (ts.v_lim_m_s - ts.v_trig_m_s);
}

double transition_down_duration_s(const TransitionState& ts) {
  return 4.0 * std::abs(ts.v_lim_low_m_s - ts.v_trig_m_s);
}

double transition_speed_up(const TransitionState& ts, double t_act_s) {
  const double dv = ts.v_lim_m_s - ts.v_trig_m_s;
  if (dv <= 0.0) return ts.v_lim_m_s;
  const double u = (t_act_s - ts.t_trig_s) / (4.0 * dv);
  if (u <= 0.0) return ts.v_trig_m_s;
  if (u >= 1.0) return ts.v_lim_m_s;
  const double c = u - 1.0;
  return ts.v_trig_m_s + dv * (c * c * c + 1.0);
}

double transition_speed_down(const TransitionState& ts, double t_act_s) {
  // Eq. form mirrored with the magnitude of the speed change in both the amplitude
  // and the time normalization, so the curve lands on the lower target.
  const double dv = ts.v_trig_m_s - ts.v_lim_low_m_s;
  if (dv <= 0.0) return ts.v_lim_low_m_s;
  const double u = (t_act_s - ts.t_trig_s) / (4.0 * dv);
  if (u <= 0.0) return ts.v_trig_m_s;
  if (u >= 1.0) return ts.v_lim_low_m_s;
  const double c = u - 1.0;
  return ts.v_trig_m_s - dv * (c * c * c + 1.0);
}

double transition_accel_up(const TransitionState& ts, double t_act_s) {
  const double dv = ts.v_lim_m_s - ts.v_trig_m_s;
  if (dv <= 0.0) return 0.0;
  const double u = (t_act_s - ts.t_trig_s) / (4.0 * dv);
  if (u <= 0.0 || u >= 1.0) return u >= 1.0 ? 0.0 : 0.75;
  const double c = u - 1.0;
  return 0.75 * c * c;
}

double transition_accel_down(const TransitionState& ts, double t_act_s) {
  const double dv = ts.v_trig_m_s - ts.v_lim_low_m_s;
  if (dv <= 0.0) return 0.0;
  const double u = (t_act_s - ts.t_trig_s) / (4.0 * dv);
  if (u <= 0.0 || u >= 1.0) return u >= 1.0 ? 0.0 : -0.75;
  const double c = u - 1.0;
  return -0.75 * c * c;
}

bool lane_change_decision(const VehicleState& ego, const AdjacentLaneGaps& adjacent,
                          const GapPolicy& policy) {
  if (!adjacent.has_lane) return false;
  const double desired = policy.standstill_gap_m + policy.time_gap_s * ego.speed_m_s;
  if (adjacent.forward_gap_m < desired) return false;
  return adjacent.rear_gap_m >= 2.0 * adjacent.rear_speed_m_s;
}

DrivingMode select_mode(DrivingMode prev_mode, const Situation& sit, const HlConfig& cfg) {
  // (1) a lead vehicle in range overrides everything else
  if (sit.lead &&
      gap(sit.ego, *sit.lead) <= cfg.gap_policy.follow_engage_distance_m) {
    if (sit.lane_change_active) return DrivingMode::LaneChange;
    const bool connected = sit.lead->connected;
    const bool erratic = connected && sit.lead_erratic;
    const bool wants_out = cfg.lane_change_enabled && (erratic || sit.slow_leader);
    if (wants_out && sit.lane_change_safe) return DrivingMode::LaneChange;
    switch (cfg.follow_policy) {
      case FollowPolicy::ForceACC: return DrivingMode::ACC;
      case FollowPolicy::ForceCACC: return connected ? DrivingMode::CACC : DrivingMode::ACC;
      case FollowPolicy::ForceEcoCACC:
        return connected ? DrivingMode::EcoCACC : DrivingMode::ACC;
      case FollowPolicy::Auto: break;
    }
    if (!connected) return DrivingMode::ACC;
    return erratic ? DrivingMode::EcoCACC : DrivingMode::CACC;
  }
  if (sit.lane_change_active) return DrivingMode::LaneChange;

  // (2) mandatory stops: STOP signs always, traffic lights when V2I is unavailable
  if (sit.next_infra) {
    const bool stoppable = sit.next_infra->kind == InfraKind::StopSign || !cfg.v2i_enabled;
    const double dist = sit.next_infra->location_m - sit.ego.position_m;
    if (stoppable && dist > 0.0 && dist <= cfg.eco_stop_horizon_m) {
      if (prev_mode == DrivingMode::StopWait) return DrivingMode::StopWait;
      if (prev_mode == DrivingMode::EcoStop && sit.ego.speed_m_s < kStandstill &&
          dist < 2.5 + cfg.stop_margin_m)
        return DrivingMode::StopWait;
      return DrivingMode::EcoStop;
    }
  }
  if (sit.departure_active) return DrivingMode::EcoDeparture;

  // (3) signalized approach
  if (cfg.v2i_enabled && sit.spat) {
    const double dist = sit.spat->light_location_m - sit.ego.position_m;
    if (dist > 0.0 && dist <= cfg.spat_range_m) return DrivingMode::PaG;
  }

  // (4) blend toward the Eco-Cruise speed after constraints clear
  const double diff = sit.eco_cruise_target_m_s - sit.ego.speed_m_s;
  if (prev_mode == DrivingMode::TransitionUp && diff > cfg.transition_exit_m_s)
    return DrivingMode::TransitionUp;
  if (prev_mode == DrivingMode::TransitionDown && diff < -cfg.transition_exit_m_s)
    return DrivingMode::TransitionDown;
  if (diff > cfg.transition_enter_m_s) return DrivingMode::TransitionUp;
  if (diff < -cfg.transition_enter_m_s) return DrivingMode::TransitionDown;

  // (5) default
  return DrivingMode::EcoCruise;
}

CommandBasis::CommandBasis()
    : advisory_speed_m_s(kNaN),
      advisory_accel_m_s2(kNaN),
      plan_speed_m_s(kNaN),
      plan_accel_m_s2(kNaN),
      follow_accel_m_s2(kNaN),
      transition_speed_m_s(kNaN),
      transition_accel_m_s2(kNaN) {}

SpeedCommand command_speed(DrivingMode mode, const Situation& sit, const CommandBasis& basis) {
  SpeedCommand cmd;
  switch (mode) {
    case DrivingMode::EcoCruise:
    case DrivingMode::LaneChange:
      cmd.speed_m_s = sit.eco_cruise_target_m_s;
      cmd.accel_ff_m_s2 = sit.eco_cruise_accel_m_s2;
      break;
    case DrivingMode::PaG:
      cmd.speed_m_s = checked(basis.advisory_speed_m_s, "PaG advisory");
      cmd.accel_ff_m_s2 = checked(basis.advisory_accel_m_s2, "PaG advisory accel");
      break;
    case DrivingMode::EcoStop:
    case DrivingMode::EcoDeparture:
      cmd.speed_m_s = checked(basis.plan_speed_m_s, "stop/departure plan");
      cmd.accel_ff_m_s2 = checked(basis.plan_accel_m_s2, "stop/departure plan accel");
      break;
    case DrivingMode::StopWait:
      cmd.speed_m_s = 0.0;
      break;
    case DrivingMode::ACC:
    case DrivingMode::CACC:
    case DrivingMode::EcoCACC:
      cmd.is_accel = true;
      cmd.accel_m_s2 = checked(basis.follow_accel_m_s2, "follow command");
      return cmd;
    case DrivingMode::TransitionUp:
    case DrivingMode::TransitionDown:
      cmd.speed_m_s = checked(basis.transition_speed_m_s, "transition state");
      cmd.accel_ff_m_s2 = checked(basis.transition_accel_m_s2, "transition accel");
      break;
  }
  if (cmd.speed_m_s > sit.local_speed_limit_m_s) {
    cmd.speed_m_s = sit.local_speed_limit_m_s;
    cmd.accel_ff_m_s2 = std::min(cmd.accel_ff_m_s2, 0.0);
  }
  return cmd;
}

HlController::HlController(HlConfig cfg, VehicleConfig veh,
                           std::shared_ptr<const RouteProfile> route, SpeedProfile eco_profile)
    : cfg_(cfg),
      veh_(veh),
      limits_(veh.limits()),
      route_(std::move(route)),
      eco_profile_(std::move(eco_profile)),
      lead_filter_(cfg.filter_cutoff_hz) {}

double HlController::eco_target_at(double station_m) const {
  const double s = std::clamp(station_m, 0.0, route_->length_m);
  return std::min(eco_profile_.speed_at(s), speed_limit_at(*route_, s));
}

double HlController::eco_accel_at(double station_m) const {
  return eco_profile_.accel_at(std::clamp(station_m, 0.0, route_->length_m));
}

SpeedProfile HlController::stop_plan(const VehicleState& ego, double line_station) const {
  if (cfg_.v2i_enabled) {
    DPProblem tmpl;
    tmpl.speed_grid = make_speed_grid(route_->max_speed_limit());
    tmpl.limits = limits_;
    tmpl.vehicle = veh_.vehicle;
    tmpl.fuel = veh_.fuel;
    tmpl.route = route_.get();
    try {
      return solve_eco_stop(ego, line_station, tmpl);
    } catch (const DPInfeasible&) {
      // too close for a planned glide; fall through to the hard ramp
    }
  }
  // Kinematic ramp v(s) = sqrt(2 b (line - s)), capped at the current cruise target.
  const double b = cfg_.v2i_enabled ? limits_.decel_max_m_s2 : cfg_.baseline_decel_m_s2;
  const double cap = std::max(eco_target_at(ego.position_m), ego.speed_m_s);
  SpeedProfile plan;
  const double span = std::max(line_station - ego.position_m, 0.5);
  const int n = 40;
  for (int i = 0; i <= n; ++i) {
    const double s = ego.position_m + span * i / n;
    const double d = std::max(line_station - s, 0.0);
    plan.stations_m.push_back(s);
    plan.target_speed_m_s.push_back(std::min(cap, std::sqrt(2.0 * b * d)));
  }
  return plan;
}

SpeedProfile HlController::departure_plan(double from_station) const {
  const double horizon = 300.0;
  const double end = std::min(from_station + horizon, route_->length_m);
  const double raw_target = eco_target_at(end);
  const double target = std::round(raw_target / 0.5) * 0.5;
  if (cfg_.v2i_enabled) {
    DPProblem tmpl;
    tmpl.speed_grid = make_speed_grid(route_->max_speed_limit());
    tmpl.limits = limits_;
    tmpl.vehicle = veh_.vehicle;
    tmpl.fuel = veh_.fuel;
    tmpl.route = route_.get();
    try {
      return solve_eco_departure(from_station, target, tmpl, end - from_station);
    } catch (const DPInfeasible&) {
    }
  }
  // Ramp v(s) = sqrt(2 a (s - s0)) up to the target speed.
  const double a = cfg_.v2i_enabled ? limits_.accel_max_m_s2 : cfg_.baseline_accel_m_s2;
  SpeedProfile plan;
  const double span = end - from_station;
  const int n = 40;
  for (int i = 0; i <= n; ++i) {
    const double s = from_station + span * i / n;
    plan.stations_m.push_back(s);
    plan.target_speed_m_s.push_back(std::min(target, std::sqrt(2.0 * a * (s - from_station))));
  }
  return plan;
}

Situation HlController::enrich(const Situation& raw, double dt_s) {
  Situation sit = raw;

  // Served infrastructure no longer exists for mode selection.
  while (sit.next_infra && sit.next_infra->location_m <= served_before_m_ + 1e-6)
    sit.next_infra = next_infrastructure(*route_, sit.next_infra->location_m);

  // Erratic classification and the Eco-CACC filter track the connected lead stream.
  if (sit.lead && sit.lead->connected) {
    if (!had_lead_) {
      erratic_.reset();
      lead_filter_.reset();
    }
    erratic_.update(sit.lead->lead_accel_m_s2, dt_s);
    had_lead_ = true;
  } else if (!sit.lead) {
    had_lead_ = false;
  }
  sit.lead_erratic = erratic_.erratic();

  // Slow-leader bookkeeping for the lane-change trigger.
  if (sit.lead &&
      sit.lead->lead_speed_m_s < cfg_.slow_leader_factor * sit.eco_cruise_target_m_s)
    slow_leader_s_ += dt_s;
  else
    slow_leader_s_ = 0.0;
  sit.slow_leader = slow_leader_s_ > cfg_.slow_leader_time_s;

  sit.lane_change_active = lane_change_elapsed_s >= 0.0;
  // Safe gaps alone are not enough: the move must buy room or speed, or the ego
  // would swap one slow queue for another.
  bool beneficial = true;
  if (sit.lead) {
    const double lead_gap = gap(sit.ego, *sit.lead);
    beneficial = sit.adjacent.forward_gap_m > std::max(2.0 * lead_gap, 80.0) ||
                 sit.adjacent.forward_speed_m_s > sit.lead->lead_speed_m_s + 1.0;
  }
  sit.lane_change_safe = lane_change_cooldown_s_ <= 0.0 && beneficial &&
                         lane_change_decision(sit.ego, sit.adjacent, cfg_.gap_policy);
  sit.departure_active = departure_plan_.has_value();
  sit.stop_wait_elapsed_s = stop_task_ ? stop_task_->dwell_s : 0.0;
  return sit;
}

void HlController::manage_tasks(const Situation& sit, double dt_s) {
  const VehicleState& ego = sit.ego;

  // Retire a passed stop task.
  if (stop_task_ && ego.position_m > stop_task_->infra_location_m + 2.0) stop_task_.reset();

  // Adopt the next mandatory stop.
  if (sit.next_infra) {
    const bool stoppable =
        sit.next_infra->kind == InfraKind::StopSign || !cfg_.v2i_enabled;
    const double dist = sit.next_infra->location_m - ego.position_m;
    if (stoppable && dist > 0.0 && dist <= cfg_.eco_stop_horizon_m &&
        (!stop_task_ || stop_task_->infra_location_m != sit.next_infra->location_m)) {
      StopTask task;
      task.infra_location_m = sit.next_infra->location_m;
      task.kind = sit.next_infra->kind;
      task.line_station_m = task.infra_location_m - cfg_.stop_margin_m;
      task.plan = stop_plan(ego, task.line_station_m);
      stop_task_ = std::move(task);
    }
  }

  if (stop_task_ && !stop_task_->released) {
    StopTask& task = *stop_task_;
    // Re-plan if following traffic pulled the ego well off the glide.
    if (std::abs(task.plan.speed_at(ego.position_m) - ego.speed_m_s) > 1.5 &&
        ego.position_m < task.line_station_m - 1.0)
      task.plan = stop_plan(ego, task.line_station_m);

    const bool at_line = std::abs(ego.position_m - task.line_station_m) <= 2.0;
    if (ego.speed_m_s < kStandstill && at_line)
      task.dwell_s += dt_s;
    else if (ego.speed_m_s > 0.3)
      task.dwell_s = 0.0;

    const bool released =
        task.kind == InfraKind::StopSign
            ? task.dwell_s >= cfg_.stop_dwell_s
            : task.dwell_s > 0.0 && sit.visible_phase && *sit.visible_phase == Phase::Green;
    if (released) {
      task.released = true;
      served_before_m_ = std::max(served_before_m_, task.infra_location_m);
      departure_plan_ = departure_plan(ego.position_m);
    }
  }

  // Departure finishes once the cruise speed is re-acquired (or the plan runs out).
  if (departure_plan_) {
    const double diff = std::abs(sit.eco_cruise_target_m_s - ego.speed_m_s);
    if ((diff <= cfg_.departure_exit_tol_m_s && ego.speed_m_s > 0.5) ||
        ego.position_m > departure_plan_->end_station())
      departure_plan_.reset();
  }

  if (lane_change_cooldown_s_ > 0.0) lane_change_cooldown_s_ -= dt_s;
}

CommandBasis HlController::build_basis(const Situation& sit, DrivingMode mode, double dt_s) {
  CommandBasis basis;
  const double now = sit.ego.time_s;
  bool filter_ticked = false;

  switch (mode) {
    case DrivingMode::PaG: {
      const double dist = sit.spat->light_location_m - sit.ego.position_m;
      const PagDecision decision =
          classify_pass(sit.ego, *sit.spat_light, now, dist, limits_,
                        sit.local_speed_limit_m_s, cfg_.pag);
      advisory_ = advisory_profile(decision, sit.ego, *sit.spat_light, now, dist, limits_,
                                   sit.local_speed_limit_m_s, cfg_.pag);
      basis.advisory_speed_m_s = advisory_->speed_at(now + dt_s);
      basis.advisory_accel_m_s2 = advisory_->accel_at(now + dt_s);
      break;
    }
    case DrivingMode::EcoStop:
      basis.plan_speed_m_s = stop_task_->plan.speed_at(sit.ego.position_m);
      basis.plan_accel_m_s2 = stop_task_->plan.accel_at(sit.ego.position_m);
      break;
    case DrivingMode::EcoDeparture:
      basis.plan_speed_m_s = departure_plan_->speed_at(sit.ego.position_m);
      basis.plan_accel_m_s2 = departure_plan_->accel_at(sit.ego.position_m);
      break;
    case DrivingMode::ACC:
      basis.follow_accel_m_s2 =
          acc_command(sit.ego, *sit.lead, cfg_.gap_policy, cfg_.gains, limits_).accel_m_s2;
      break;
    case DrivingMode::CACC:
      basis.follow_accel_m_s2 =
          cacc_command(sit.ego, *sit.lead, cfg_.gap_policy, cfg_.gains, limits_).accel_m_s2;
      break;
    case DrivingMode::EcoCACC:
      basis.follow_accel_m_s2 =
          eco_cacc_command(sit.ego, *sit.lead, lead_filter_, dt_s, cfg_.gap_policy, cfg_.gains,
                           limits_)
              .accel_m_s2;
      filter_ticked = true;
      break;
    case DrivingMode::LaneChange:
      // the new lane's leader still binds while the maneuver runs
      if (sit.lead)
        basis.follow_accel_m_s2 =
            acc_command(sit.ego, *sit.lead, cfg_.gap_policy, cfg_.gains, limits_).accel_m_s2;
      break;
    case DrivingMode::TransitionUp:
      basis.transition_speed_m_s = transition_speed_up(*transition_, now);
      basis.transition_accel_m_s2 = transition_accel_up(*transition_, now);
      break;
    case DrivingMode::TransitionDown:
      basis.transition_speed_m_s = transition_speed_down(*transition_, now);
      basis.transition_accel_m_s2 = transition_accel_down(*transition_, now);
      break;
    default:
      break;
  }

  // Keep the Eco-CACC filter warm while a connected lead is streaming.
  if (!filter_ticked && sit.lead && sit.lead->connected)
    lead_filter_.update(sit.lead->lead_accel_m_s2, dt_s);
  return basis;
}

HlOutput HlController::tick(const Situation& raw, double dt_s) {
  Situation sit = enrich(raw, dt_s);
  manage_tasks(sit, dt_s);
  sit.departure_active = departure_plan_.has_value();
  sit.stop_wait_elapsed_s = stop_task_ ? stop_task_->dwell_s : 0.0;

  const VehicleState& ego = sit.ego;
  const double now = ego.time_s;
  if (first_tick_) {
    prev_command_m_s = ego.speed_m_s;
    first_tick_ = false;
  }

  DrivingMode next = select_mode(mode_, sit, cfg_);

  // Lane-change lifecycle.
  HlOutput out;
  if (next == DrivingMode::LaneChange && lane_change_elapsed_s < 0.0) {
    lane_change_elapsed_s = 0.0;
    lane_change_cooldown_s_ = cfg_.lane_change_cooldown_s;
    out.lane_change_started = true;
  }
  if (lane_change_elapsed_s >= 0.0) {
    lane_change_elapsed_s += dt_s;
    if (lane_change_elapsed_s >= cfg_.lane_change_duration_s) lane_change_elapsed_s = -1.0;
  }

  // Transition state anchoring (fresh entry or re-anchor after completion).
  if (next == DrivingMode::TransitionUp) {
    const double target = std::min(sit.eco_cruise_target_m_s, sit.local_speed_limit_m_s);
    const bool stale = !transition_ || transition_->v_lim_m_s <= transition_->v_trig_m_s ||
                       mode_ != DrivingMode::TransitionUp;
    const bool done = transition_ && now >= transition_->t_trig_s +
                                                transition_up_duration_s(*transition_);
    if (stale || (done && target - ego.speed_m_s > cfg_.transition_enter_m_s))
      transition_ = TransitionState{ego.speed_m_s, now, target, 0.0};
  } else if (next == DrivingMode::TransitionDown) {
    const double target = sit.eco_cruise_target_m_s;
    const bool stale = !transition_ || mode_ != DrivingMode::TransitionDown;
    const bool done = transition_ && now >= transition_->t_trig_s +
                                                transition_down_duration_s(*transition_);
    if (stale || (done && ego.speed_m_s - target > cfg_.transition_enter_m_s))
      transition_ = TransitionState{ego.speed_m_s, now, 0.0, target};
  } else {
    transition_.reset();
  }

  const CommandBasis basis = build_basis(sit, next, dt_s);
  const SpeedCommand cmd = command_speed(next, sit, basis);

  // Candidate target speeds; the binding (lowest) one wins.
  double target = cmd.is_accel ? ego.speed_m_s + cmd.accel_m_s2 * dt_s : cmd.speed_m_s;
  double ff = cmd.is_accel ? cmd.accel_m_s2 : cmd.accel_ff_m_s2;
  const bool follow_raw = cmd.is_accel;
  bool follow_binding = follow_raw;

  auto cap = [&](double speed, double accel) {
    if (speed < target) {
      target = speed;
      ff = accel;
      follow_binding = false;
    }
  };

  // During a lane change the ego keeps following its (new) leader.
  if (next == DrivingMode::LaneChange && !std::isnan(basis.follow_accel_m_s2))
    cap(ego.speed_m_s + basis.follow_accel_m_s2 * dt_s, basis.follow_accel_m_s2);

  // Mandatory-stop wall: ramp onto the line, hold until released.
  if (stop_task_ && !stop_task_->released) {
    const double d = stop_task_->line_station_m - ego.position_m;
    cap(d <= 0.0 ? 0.0 : std::sqrt(2.0 * cfg_.wall_decel_m_s2 * d), -cfg_.wall_decel_m_s2);
  }

  // Signal wall: never roll across a line the SPaT stream says will not be green.
  if (cfg_.v2i_enabled && sit.spat && sit.spat_light) {
    const double d = sit.spat->light_location_m - cfg_.stop_margin_m - ego.position_m;
    if (d > 0.0 && d <= cfg_.wall_range_m) {
      const double eta = d / std::max(ego.speed_m_s, 1.0);
      const Phase at_arrival = spat_at(*sit.spat_light, now + eta).current_phase;
      if (sit.spat->current_phase != Phase::Green || at_arrival != Phase::Green)
        cap(std::sqrt(2.0 * cfg_.wall_decel_m_s2 * d), -cfg_.wall_decel_m_s2);
    }
  }

  // Speed limit and tick-to-tick rate limiting (continuity across mode switches).
  if (target > sit.local_speed_limit_m_s) {
    target = sit.local_speed_limit_m_s;
    ff = std::min(ff, 0.0);
    follow_binding = false;
  }
  const double slew_lo = prev_command_m_s - limits_.decel_max_m_s2 * dt_s;
  const double slew_hi = prev_command_m_s + limits_.accel_max_m_s2 * dt_s;
  if (target < slew_lo) {
    target = slew_lo;
    ff = -limits_.decel_max_m_s2;
    follow_binding = false;
  } else if (target > slew_hi) {
    target = slew_hi;
    ff = limits_.accel_max_m_s2;
    follow_binding = false;
  }
  target = std::max(target, 0.0);

  double accel_cmd;
  if (follow_binding) {
    accel_cmd = cmd.accel_m_s2;  // untouched follow command passes straight through
  } else {
    accel_cmd = ff + cfg_.tracker_gain * (target - ego.speed_m_s);
  }
  accel_cmd = std::clamp(accel_cmd, -limits_.decel_max_m_s2, limits_.accel_max_m_s2);

  out.mode = next;
  out.command_speed_m_s = target;
  out.accel_cmd_m_s2 = accel_cmd;
  out.input = clamp_input(
      inputs_for_accel(veh_.vehicle, ego.speed_m_s, grade_at(*route_, std::clamp(ego.position_m, 0.0, route_->length_m)), accel_cmd),
      limits_, ego.speed_m_s);

  prev_command_m_s = target;
  mode_ = next;
  return out;
}

}  // namespace ecodrive
