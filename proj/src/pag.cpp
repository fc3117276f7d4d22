#include "ecodrive/pag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecodrive {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStandstill = 0.05;  // m/s

struct SegmentState {
  double t = 0.0;  // since anchor
  double v = 0.0;
  double s = 0.0;
};

SegmentState advance(const SegmentState& in, const AdvisorySegment& seg, double tau) {
  SegmentState out;
  out.t = in.t + tau;
  out.v = in.v + seg.accel0_m_s2 * tau + 0.5 * seg.jerk_m_s3 * tau * tau;
  out.s = in.s + in.v * tau + 0.5 * seg.accel0_m_s2 * tau * tau +
          seg.jerk_m_s3 * tau * tau * tau / 6.0;
  return out;
}

}  // namespace

double SpeedAdvisory::duration_s() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.duration_s;
  return total;
}

double SpeedAdvisory::speed_at(double time_s) const {
  double tau = time_s - anchor_time_s;
  SegmentState st{0.0, initial_speed_m_s, 0.0};
  if (tau <= 0.0) return st.v;
  for (const auto& seg : segments) {
    if (tau <= seg.duration_s) return advance(st, seg, tau).v;
    st = advance(st, seg, seg.duration_s);
    tau -= seg.duration_s;
  }
  return st.v;
}

double SpeedAdvisory::accel_at(double time_s) const {
  double tau = time_s - anchor_time_s;
  if (tau < 0.0) return 0.0;
  for (const auto& seg : segments) {
    if (tau <= seg.duration_s) return seg.accel0_m_s2 + seg.jerk_m_s3 * tau;
    tau -= seg.duration_s;
  }
  return 0.0;
}

double SpeedAdvisory::distance_at(double time_s) const {
  double tau = time_s - anchor_time_s;
  if (tau <= 0.0) return 0.0;
  SegmentState st{0.0, initial_speed_m_s, 0.0};
  for (const auto& seg : segments) {
    if (tau <= seg.duration_s) return advance(st, seg, tau).s;
    st = advance(st, seg, seg.duration_s);
    tau -= seg.duration_s;
  }
  return st.s + st.v * tau;  // hold final speed
}

double SpeedAdvisory::final_speed() const {
  SegmentState st{0.0, initial_speed_m_s, 0.0};
  for (const auto& seg : segments) st = advance(st, seg, seg.duration_s);
  return st.v;
}

double SpeedAdvisory::time_at_distance(double distance_m) const {
  if (distance_m <= 0.0) return anchor_time_s;
  SegmentState st{0.0, initial_speed_m_s, 0.0};
  for (const auto& seg : segments) {
    const SegmentState end = advance(st, seg, seg.duration_s);
    if (end.s >= distance_m) {
      // bisect within the segment (distance is nondecreasing)
      double lo = 0.0, hi = seg.duration_s;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (advance(st, seg, mid).s < distance_m) lo = mid;
        else hi = mid;
      }
      return anchor_time_s + st.t + 0.5 * (lo + hi);
    }
    st = end;
  }
  if (st.v <= kStandstill) return kInf;
  return anchor_time_s + st.t + (distance_m - st.s) / st.v;
}

std::vector<AdvisorySegment> speed_change_segments(double v0, double v1,
                                                   const PowertrainLimits& limits) {
  const double dv = v1 - v0;
  std::vector<AdvisorySegment> segs;
  if (std::abs(dv) < 1e-12) return segs;
  const double dir = dv > 0 ? 1.0 : -1.0;
  const double a_cap = dv > 0 ? limits.accel_max_m_s2 : limits.decel_max_m_s2;
  const double j = limits.jerk_max_m_s3;
  const double a_pk = std::min(a_cap, std::sqrt(std::abs(dv) * j));
  const double t_ramp = a_pk / j;
  const double t_hold = (std::abs(dv) - a_pk * a_pk / j) / a_pk;
  segs.push_back({t_ramp, dir * j, 0.0});
  if (t_hold > 1e-12) segs.push_back({t_hold, 0.0, dir * a_pk});
  segs.push_back({t_ramp, -dir * j, dir * a_pk});
  return segs;
}

namespace {

SpeedAdvisory make_advisory(const VehicleState& ego, std::vector<AdvisorySegment> segs) {
  SpeedAdvisory adv;
  adv.anchor_station_m = ego.position_m;
  adv.anchor_time_s = ego.time_s;
  adv.initial_speed_m_s = ego.speed_m_s;
  adv.segments = std::move(segs);
  return adv;
}

// Arrival time (absolute) at `distance` when changing speed to `target` then holding.
double arrival_with_target(const VehicleState& ego, double target, double distance,
                           const PowertrainLimits& limits) {
  return make_advisory(ego, speed_change_segments(ego.speed_m_s, target, limits))
      .time_at_distance(distance);
}

// Solve the cruise target whose arrival equals `goal` (absolute). Arrival is monotone
// decreasing in the target speed, so plain bisection suffices.
double solve_target_for_arrival(const VehicleState& ego, double lo, double hi, double distance,
                                double goal, const PowertrainLimits& limits) {
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (arrival_with_target(ego, mid, distance, limits) > goal) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> arrival_window(const VehicleState& ego, double distance_m,
                                         const PowertrainLimits& limits, double local_limit_m_s,
                                         const PagConfig& cfg) {
  const double t_earliest = arrival_with_target(ego, local_limit_m_s, distance_m, limits);
  const double v_slow = std::min(ego.speed_m_s, cfg.pass_speed_floor_m_s);
  const double t_latest = v_slow <= kStandstill
                              ? kInf
                              : arrival_with_target(ego, v_slow, distance_m, limits);
  return {t_earliest - ego.time_s, std::max(t_latest - ego.time_s, t_earliest - ego.time_s)};
}

PagDecision classify_pass(const VehicleState& ego, const TrafficLight& light, double now_s,
                          double distance_m, const PowertrainLimits& limits,
                          double local_limit_m_s, const PagConfig& cfg) {
  const double horizon = cfg.horizon_cycles * light.cycle_length_s();
  const auto greens = green_intervals(light, now_s, horizon + 2.0 * light.cycle_length_s());
  const double m = cfg.green_margin_s;

  const double v = ego.speed_m_s;
  const double t_cs = v > kStandstill ? now_s + distance_m / v : kInf;

  // Constant speed already crosses inside a green window.
  for (const auto& [g0, g1] : greens) {
    if (g0 > now_s + horizon) break;
    if (t_cs >= g0 + m && t_cs <= g1 - m)
      return {PagAction::PassConstant, v, t_cs};
  }

  const auto [t_e_rel, t_l_rel] = arrival_window(ego, distance_m, limits, local_limit_m_s, cfg);
  const double t_e = now_s + t_e_rel;
  const double t_l = t_l_rel == kInf ? kInf : now_s + t_l_rel;

  double acc_instant = -kInf;  // nearest achievable instant before t_cs
  double dec_instant = kInf;   // nearest achievable instant after t_cs
  for (const auto& [g0, g1] : greens) {
    if (g0 > now_s + horizon) break;
    const double lo = std::max(g0 + m, t_e);
    const double hi = std::min(g1 - m, t_l);
    if (lo > hi) continue;
    if (lo < t_cs) acc_instant = std::max(acc_instant, std::min(hi, t_cs));
    if (hi > t_cs) dec_instant = std::min(dec_instant, std::max(lo, t_cs));
  }

  const bool has_acc = acc_instant > -kInf;
  const bool has_dec = dec_instant < kInf;
  if (has_acc || has_dec) {
    bool decelerate = has_dec;
    if (has_acc && has_dec)
      decelerate = (dec_instant - t_cs) <= (t_cs - acc_instant);  // tie favors decelerating
    if (decelerate) {
      const double target = solve_target_for_arrival(ego, cfg.pass_speed_floor_m_s, v,
                                                     distance_m, dec_instant, limits);
      return {PagAction::PassDecelerate, target, dec_instant};
    }
    const double target = solve_target_for_arrival(ego, v, local_limit_m_s, distance_m,
                                                   acc_instant, limits);
    return {PagAction::PassAccelerate, target, acc_instant};
  }

  // No reachable green: aim for the first onset past the achievable window.
  double goal = kInf;
  for (const auto& [g0, g1] : greens) {
    if (t_l == kInf || g0 > t_l) {
      goal = g0;
      break;
    }
  }
  if (goal == kInf && !greens.empty()) goal = greens.back().first + light.cycle_length_s();
  return {PagAction::EcoApproach, 0.0, goal};
}

SpeedAdvisory eco_approach(const VehicleState& ego, const TrafficLight& light, double now_s,
                           double distance_m, const PowertrainLimits& limits,
                           const PagConfig& cfg) {
  const double v = ego.speed_m_s;
  const double m = cfg.green_margin_s;
  const auto greens = green_intervals(light, now_s, 4.0 * light.cycle_length_s());

  if (v <= kStandstill) {
    // Stopped: hold until the next onset; departure logic takes over once green.
    double onset = now_s;
    for (const auto& [g0, g1] : greens) {
      if (g1 > now_s) {
        onset = std::max(g0, now_s);
        break;
      }
    }
    return make_advisory(ego, {{std::max(onset - now_s, 0.0) + cfg.idle_margin_s, 0.0, 0.0}});
  }

  // First green window still open when the ego, holding speed, could be at the line.
  const double t_hold = arrival_with_target(ego, v, distance_m, limits);
  double onset = kInf;
  for (const auto& [g0, g1] : greens) {
    if (g1 - m >= t_hold) {
      onset = g0;
      break;
    }
  }
  if (onset == kInf && !greens.empty()) onset = greens.back().first + light.cycle_length_s();
  const double goal = std::max(onset + cfg.idle_margin_s, now_s);

  if (t_hold >= goal) return make_advisory(ego, {});  // already timed; hold speed

  // Timed glide: ease down to an arrival speed whose hold reaches the line at goal.
  const double crawl = 0.05;
  if (arrival_with_target(ego, crawl, distance_m, limits) >= goal) {
    const double v_arr = solve_target_for_arrival(ego, crawl, v, distance_m, goal, limits);
    return make_advisory(ego, speed_change_segments(v, v_arr, limits));
  }

  // Cannot shed enough time while rolling: stop at the line and idle until green.
  auto stop_segs = speed_change_segments(v, 0.0, limits);
  SpeedAdvisory stop_only = make_advisory(ego, stop_segs);
  const double d_stop = stop_only.distance_at(now_s + stop_only.duration_s());
  std::vector<AdvisorySegment> segs;
  if (d_stop < distance_m && v > kStandstill)
    segs.push_back({(distance_m - d_stop) / v, 0.0, 0.0});  // hold, then brake onto the line
  segs.insert(segs.end(), stop_segs.begin(), stop_segs.end());
  return make_advisory(ego, std::move(segs));
}

SpeedAdvisory advisory_profile(const PagDecision& decision, const VehicleState& ego,
                               const TrafficLight& light, double now_s, double distance_m,
                               const PowertrainLimits& limits, double local_limit_m_s,
                               const PagConfig& cfg) {
  switch (decision.action) {
    case PagAction::PassConstant: {
      const double hold = ego.speed_m_s > kStandstill
                              ? distance_m / ego.speed_m_s + 5.0
                              : 5.0;
      return make_advisory(ego, {{hold, 0.0, 0.0}});
    }
    case PagAction::PassAccelerate:
    case PagAction::PassDecelerate: {
      const double target = std::clamp(decision.target_speed_m_s, 0.0, local_limit_m_s);
      auto segs = speed_change_segments(ego.speed_m_s, target, limits);
      SpeedAdvisory adv = make_advisory(ego, std::move(segs));
      const double t_arr = adv.time_at_distance(distance_m);
      if (t_arr == kInf) return eco_approach(ego, light, now_s, distance_m, limits, cfg);
      // hold through the crossing
      adv.segments.push_back({std::max(t_arr - now_s - adv.duration_s(), 0.0) + 2.0, 0.0, 0.0});
      return adv;
    }
    case PagAction::EcoApproach:
      return eco_approach(ego, light, now_s, distance_m, limits, cfg);
  }
  return make_advisory(ego, {});
}

}  // namespace ecodrive
