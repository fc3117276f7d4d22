#include "ecodrive/following.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ecodrive {

namespace {

double clamp_accel(double a, const PowertrainLimits& limits) {
  return std::clamp(a, -limits.decel_max_m_s2, limits.accel_max_m_s2);
}

double feedback_accel(const VehicleState& ego, const LeadObservation& lead,
                      const GapPolicy& policy, const FollowGains& gains, double scale) {
  const double desired = policy.standstill_gap_m + policy.time_gap_s * ego.speed_m_s;
  const double gap_err = gap(ego, lead) - desired;
  const double speed_err = lead.lead_speed_m_s - ego.speed_m_s;
  return scale * (gains.k_gap * gap_err + gains.k_speed * speed_err);
}

bool stale(const VehicleState& ego, const LeadObservation& lead, const FollowGains& gains) {
  return ego.time_s - lead.timestamp_s > gains.stale_after_s;
}

}  // namespace

double gap(const VehicleState& ego, const LeadObservation& lead) {
  return lead.lead_position_m - ego.position_m;
}

FollowCommand acc_command(const VehicleState& ego, const LeadObservation& lead,
                          const GapPolicy& policy, const FollowGains& gains,
                          const PowertrainLimits& limits) {
  return {clamp_accel(feedback_accel(ego, lead, policy, gains, 1.0), limits)};
}

FollowCommand cacc_command(const VehicleState& ego, const LeadObservation& lead,
                           const GapPolicy& policy, const FollowGains& gains,
                           const PowertrainLimits& limits) {
  if (!lead.connected || stale(ego, lead, gains)) return acc_command(ego, lead, policy, gains, limits);
  const double a = feedback_accel(ego, lead, policy, gains, 1.0) +
                   gains.k_feedforward * lead.lead_accel_m_s2;
  return {clamp_accel(a, limits)};
}

FollowCommand eco_cacc_command(const VehicleState& ego, const LeadObservation& lead,
                               LeadAccelFilter& filter, double dt_s, const GapPolicy& policy,
                               const FollowGains& gains, const PowertrainLimits& limits) {
  if (!lead.connected || stale(ego, lead, gains)) return acc_command(ego, lead, policy, gains, limits);
  const double smoothed = filter.update(lead.lead_accel_m_s2, dt_s);
  const double a = feedback_accel(ego, lead, policy, gains, gains.eco_soften) +
                   gains.k_feedforward * smoothed;
  return {clamp_accel(a, limits)};
}

LeadAccelFilter::LeadAccelFilter(double cutoff_hz) : cutoff_hz_(cutoff_hz) {}

double LeadAccelFilter::update(double input, double dt_s) {
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz_);
  const double alpha = dt_s / (tau + dt_s);
  state_ += alpha * (input - state_);
  return state_;
}

ErraticClassifier::ErraticClassifier(double window_s, double raise_threshold,
                                     double fall_threshold, std::size_t min_samples)
    : window_s_(window_s), raise_(raise_threshold), fall_(fall_threshold),
      min_samples_(min_samples) {}

bool ErraticClassifier::update(double lead_accel_m_s2, double dt_s) {
  capacity_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(window_s_ / dt_s)));
  samples_.push_back(lead_accel_m_s2);
  while (samples_.size() > capacity_) samples_.pop_front();

  if (samples_.size() < min_samples_) {
    erratic_ = false;
    return erratic_;
  }
  const double sd = stddev();
  if (!erratic_ && sd > raise_) erratic_ = true;
  else if (erratic_ && sd < fall_) erratic_ = false;
  return erratic_;
}

double ErraticClassifier::stddev() const {
  if (samples_.empty()) return 0.0;
  double mean = 0.0;
  for (double s : samples_) mean += s;
  mean /= static_cast<double>(samples_.size());
  double var = 0.0;
  for (double s : samples_) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples_.size());
  return std::sqrt(var);
}

void ErraticClassifier::reset() {
  samples_.clear();
  erratic_ = false;
}

}  // namespace ecodrive
