#pragma once

#include <cstddef>
#include <deque>

#include "ecodrive/vehicle.hpp"

namespace ecodrive {

struct LeadObservation {
  double lead_position_m = 0.0;  // rear bumper of the leader
  double lead_speed_m_s = 0.0;
  double lead_accel_m_s2 = 0.0;  // meaningful only when connected
  bool connected = false;
  double timestamp_s = 0.0;
};

struct GapPolicy {
  double time_gap_s = 1.5;
  double standstill_gap_m = 3.0;
  double follow_engage_distance_m = 50.0;
};

struct FollowGains {
  double k_gap = 0.23;       // 1/s^2, on gap error
  double k_speed = 0.8;      // 1/s, on speed difference
  double k_feedforward = 1.0;
  double eco_soften = 0.6;   // feedback scale under Eco-CACC
  double stale_after_s = 0.5;
};

struct FollowCommand {
  double accel_m_s2 = 0.0;
};

// First-order low-pass with unit DC gain; per-ego state.
class LeadAccelFilter {
 public:
  explicit LeadAccelFilter(double cutoff_hz = 0.2);
  double update(double input, double dt_s);
  double value() const { return state_; }
  void reset(double value = 0.0) { state_ = value; }
  double cutoff_hz() const { return cutoff_hz_; }

 private:
  double cutoff_hz_;
  double state_ = 0.0;
};

// Signed bumper gap; <= 0 means the vehicles touch (collision).
double gap(const VehicleState& ego, const LeadObservation& lead);

// Constant-time-gap PD law on sensor data alone.
FollowCommand acc_command(const VehicleState& ego, const LeadObservation& lead,
                          const GapPolicy& policy, const FollowGains& gains,
                          const PowertrainLimits& limits);

// ACC feedback plus broadcast lead acceleration; degrades to ACC on stale data.
FollowCommand cacc_command(const VehicleState& ego, const LeadObservation& lead,
                           const GapPolicy& policy, const FollowGains& gains,
                           const PowertrainLimits& limits);

// CACC with the feedforward low-passed and feedback softened, so the ego does not
// chase the leader's high-frequency accelerations.
FollowCommand eco_cacc_command(const VehicleState& ego, const LeadObservation& lead,
                               LeadAccelFilter& filter, double dt_s, const GapPolicy& policy,
                               const FollowGains& gains, const PowertrainLimits& limits);

// Rolling std-dev classifier with hysteresis; erratic sets above `raise`, clears below `fall`.
class ErraticClassifier {
 public:
  ErraticClassifier(double window_s = 10.0, double raise_threshold = 0.75,
                    double fall_threshold = 0.6, std::size_t min_samples = 10);
  bool update(double lead_accel_m_s2, double dt_s);
  bool erratic() const { return erratic_; }
  double stddev() const;
  void reset();

 private:
  double window_s_;
  double raise_;
  double fall_;
  std::size_t min_samples_;
  std::deque<double> samples_;
  std::size_t capacity_ = 0;
  bool erratic_ = false;
};

}  // namespace ecodrive
