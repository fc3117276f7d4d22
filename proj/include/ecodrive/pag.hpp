#pragma once

#include <vector>

#include "ecodrive/route.hpp"
#include "ecodrive/vehicle.hpp"

namespace ecodrive {

enum class PagAction { PassAccelerate, PassConstant, PassDecelerate, EcoApproach };

struct PagDecision {
  PagAction action = PagAction::PassConstant;
  double target_speed_m_s = 0.0;  // cruise target for Pass* decisions
  double arrival_time_s = 0.0;    // absolute planned crossing (Pass*) / green-onset goal (EcoApproach)
};

struct PagConfig {
  double pass_speed_floor_m_s = 3.0;
  int horizon_cycles = 2;
  // keep planned crossings clear of phase boundaries
  double green_margin_s = 0.3;
  // arrive just after the green onset rather than grazing it
  double idle_margin_s = 0.1;
};

struct AdvisorySegment {
  double duration_s = 0.0;
  double jerk_m_s3 = 0.0;
  double accel0_m_s2 = 0.0;  // acceleration at segment start
};

// Piecewise constant-jerk speed plan anchored at one (station, time, speed) sample.
// Beyond the last segment the final speed is held.
struct SpeedAdvisory {
  double anchor_station_m = 0.0;
  double anchor_time_s = 0.0;
  double initial_speed_m_s = 0.0;
  std::vector<AdvisorySegment> segments;

  double duration_s() const;
  double speed_at(double time_s) const;
  double accel_at(double time_s) const;
  double distance_at(double time_s) const;     // travelled since anchor
  double final_speed() const;
  // First time the plan has covered `distance`; +inf if it never does.
  double time_at_distance(double distance_m) const;
};

// Jerk-limited speed change from v0 to v1 within the accel/decel/jerk box.
std::vector<AdvisorySegment> speed_change_segments(double v0, double v1,
                                                   const PowertrainLimits& limits);

// Earliest / latest stop-line arrival: flat-out to the local limit vs. easing down to the
// pass-speed floor. t_latest is +inf for an ego at rest.
std::pair<double, double> arrival_window(const VehicleState& ego, double distance_m,
                                         const PowertrainLimits& limits, double local_limit_m_s,
                                         const PagConfig& cfg = {});

// Decide how to treat the upcoming light given its full phase schedule at `now`.
PagDecision classify_pass(const VehicleState& ego, const TrafficLight& light, double now_s,
                          double distance_m, const PowertrainLimits& limits,
                          double local_limit_m_s, const PagConfig& cfg = {});

// Advisory realizing a decision; falls back to the Eco-Approach plan when the target
// cannot be reached under the limits.
SpeedAdvisory advisory_profile(const PagDecision& decision, const VehicleState& ego,
                               const TrafficLight& light, double now_s, double distance_m,
                               const PowertrainLimits& limits, double local_limit_m_s,
                               const PagConfig& cfg = {});

// Timed deceleration so the ego reaches the stop line just as the light turns green,
// or a stop-at-line plan when that cannot be timed.
SpeedAdvisory eco_approach(const VehicleState& ego, const TrafficLight& light, double now_s,
                           double distance_m, const PowertrainLimits& limits,
                           const PagConfig& cfg = {});

}  // namespace ecodrive
