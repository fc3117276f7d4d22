#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ecodrive/following.hpp"
#include "support.hpp"

using namespace ecodrive;

namespace {

PowertrainLimits limits() { return VehicleConfig{}.limits(); }

VehicleState ego_at(double pos, double v, double t = 0.0) {
  VehicleState s;
  s.position_m = pos;
  s.speed_m_s = v;
  s.time_s = t;
  return s;
}

LeadObservation lead_at(double pos, double v, double a = 0.0, bool connected = false,
                        double t = 0.0) {
  LeadObservation o;
  o.lead_position_m = pos;
  o.lead_speed_m_s = v;
  o.lead_accel_m_s2 = a;
  o.connected = connected;
  o.timestamp_s = t;
  return o;
}

// identical closed-loop harness for all three laws
struct LoopResult {
  double min_gap = 1e9;
  double rms_accel = 0.0;
  double fuel_g = 0.0;
};

template <typename Law>
LoopResult closed_loop(const std::vector<double>& lead_accels, double v0, double gap0,
                       Law law) {
  const VehicleConfig cfg;
  const double dt = 0.1;
  double lead_pos = gap0, lead_v = v0;
  VehicleState ego = ego_at(0.0, v0);
  LoopResult out;
  double sum_sq = 0.0;
  for (size_t i = 0; i < lead_accels.size(); ++i) {
    double la = lead_accels[i];
    if (lead_v + la * dt < 0.0) la = -lead_v / dt;  // leaders do not reverse
    const LeadObservation obs = lead_at(lead_pos, lead_v, la, true, ego.time_s);
    const double a = law(ego, obs);
    sum_sq += a * a;
    out.fuel_g += fuel_rate(cfg.fuel, traction_power(cfg.vehicle, ego.speed_m_s, a, 0.0)) * dt;
    // kinematic ego update (the law is what is under test, not the powertrain)
    ego.speed_m_s = std::max(0.0, ego.speed_m_s + a * dt);
    ego.position_m += ego.speed_m_s * dt;
    ego.time_s += dt;
    lead_v = std::max(0.0, lead_v + la * dt);
    lead_pos += lead_v * dt;
    out.min_gap = std::min(out.min_gap, lead_pos - ego.position_m);
  }
  out.rms_accel = std::sqrt(sum_sq / lead_accels.size());
  return out;
}

}  // namespace

TEST_CASE("gap is the position difference") {
  CHECK(gap(ego_at(60.0, 10.0), lead_at(100.0, 10.0)) == 40.0);
  CHECK(gap(ego_at(100.0, 10.0), lead_at(100.0, 10.0)) == 0.0);
  CHECK(gap(ego_at(120.0, 10.0), lead_at(100.0, 10.0)) < 0.0);
}

TEST_CASE("acc is quiet at equilibrium and follows its gains") {
  const GapPolicy pol;
  const FollowGains g;
  const PowertrainLimits lim = limits();
  const double v = 10.0;
  const double desired = pol.standstill_gap_m + pol.time_gap_s * v;

  CHECK(acc_command(ego_at(0.0, v), lead_at(desired, v), pol, g, lim).accel_m_s2 ==
        doctest::Approx(0.0));

  // 10 m short of the desired gap at matched speeds
  const double a = acc_command(ego_at(0.0, v), lead_at(desired - 10.0, v), pol, g, lim)
                       .accel_m_s2;
  CHECK(a == doctest::Approx(-2.3).epsilon(1e-9));

  // closing hard on a stopped leader saturates the brake clamp
  const double panic =
      acc_command(ego_at(0.0, 20.0), lead_at(10.0, 0.0), pol, g, lim).accel_m_s2;
  CHECK(panic == doctest::Approx(-lim.decel_max_m_s2));
}

TEST_CASE("cacc adds feedforward and degrades when stale") {
  const GapPolicy pol;
  const FollowGains g;
  const PowertrainLimits lim = limits();
  const double v = 10.0;
  const double desired = pol.standstill_gap_m + pol.time_gap_s * v;

  // zero lead accel: identical to acc
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    const VehicleState ego = ego_at(0.0, oracle::uniform(rng, 0.0, 20.0));
    const LeadObservation obs =
        lead_at(oracle::uniform(rng, 5.0, 60.0), oracle::uniform(rng, 0.0, 20.0), 0.0, true);
    CHECK(cacc_command(ego, obs, pol, g, lim).accel_m_s2 ==
          doctest::Approx(acc_command(ego, obs, pol, g, lim).accel_m_s2));
  }

  // pure feedforward at equilibrium
  CHECK(cacc_command(ego_at(0.0, v), lead_at(desired, v, 1.0, true), pol, g, lim).accel_m_s2 ==
        doctest::Approx(1.0));

  // stale broadcast falls back to the sensor-only law
  LeadObservation stale = lead_at(desired, v, 1.0, true, 0.0);
  VehicleState ego_later = ego_at(0.0, v, 1.0);
  CHECK(cacc_command(ego_later, stale, pol, g, lim).accel_m_s2 ==
        doctest::Approx(acc_command(ego_later, stale, pol, g, lim).accel_m_s2));
}

TEST_CASE("lead accel filter has unit dc gain and attenuates above cutoff") {
  LeadAccelFilter f(0.2);
  const double dt = 0.1;
  for (int i = 0; i < 400; ++i) f.update(1.5, dt);
  CHECK(f.value() == doctest::Approx(1.5).epsilon(1e-6));

  // sine at 5x the cutoff: at least 12 dB down after settling
  LeadAccelFilter f2(0.2);
  double peak = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = i * dt;
    const double y = f2.update(std::sin(2.0 * M_PI * 1.0 * t), dt);
    if (t > 50.0) peak = std::max(peak, std::abs(y));
  }
  CHECK(peak <= 0.25);  // -12 dB
}

TEST_CASE("eco-cacc keeps the square-wave feedforward quiet") {
  const GapPolicy pol;
  FollowGains g;
  const PowertrainLimits lim = limits();
  const double dt = 0.1;
  const double v = 10.0;
  const double desired = pol.standstill_gap_m + pol.time_gap_s * v;

  // zero-mean 1 Hz square wave of +/-2 through the filter alone
  LeadAccelFilter f(0.2);
  double sum_sq = 0.0;
  int n = 0;
  for (int i = 0; i < 1200; ++i) {
    const double t = i * dt;
    const double u = std::fmod(t, 1.0) < 0.5 ? 2.0 : -2.0;
    const double y = f.update(u, dt);
    if (t > 20.0) {
      sum_sq += y * y;
      ++n;
    }
  }
  const double rms = std::sqrt(sum_sq / n);
  CHECK(rms < 0.3 * 2.0);

  // with the soften factor at 1 and zero accel history, eco-cacc equals cacc
  g.eco_soften = 1.0;
  LeadAccelFilter quiet(0.2);
  std::mt19937 rng(17);
  for (int i = 0; i < 50; ++i) {
    const VehicleState ego = ego_at(0.0, oracle::uniform(rng, 0.0, 18.0));
    const LeadObservation obs =
        lead_at(oracle::uniform(rng, 5.0, 50.0), oracle::uniform(rng, 0.0, 18.0), 0.0, true);
    const double eco = eco_cacc_command(ego, obs, quiet, dt, pol, g, lim).accel_m_s2;
    CHECK(eco == doctest::Approx(cacc_command(ego, obs, pol, g, lim).accel_m_s2));
  }

  // at default softening both are exactly zero at equilibrium
  g.eco_soften = 0.6;
  LeadAccelFilter f3(0.2);
  CHECK(eco_cacc_command(ego_at(0.0, v), lead_at(desired, v, 0.0, true), f3, dt, pol, g, lim)
            .accel_m_s2 == doctest::Approx(0.0));
}

TEST_CASE("erratic classification uses a windowed std-dev with hysteresis") {
  ErraticClassifier c;
  const double dt = 0.1;

  for (int i = 0; i < 200; ++i) CHECK(!c.update(0.0, dt));

  // +/-2 alternating each sample: std-dev 2, well past the threshold
  ErraticClassifier c2;
  bool flagged = false;
  for (int i = 0; i < 200; ++i) flagged = c2.update(i % 2 ? 2.0 : -2.0, dt);
  CHECK(flagged);

  // decaying amplitude: the flag persists until the std-dev drops under 0.6
  for (int i = 0; i < 60; ++i) {
    c2.update(i % 2 ? 0.7 : -0.7, dt);
    CHECK(c2.erratic());  // std-dev 0.7 sits inside the hysteresis band
  }
  for (int i = 0; i < 200; ++i) c2.update(0.0, dt);
  CHECK(!c2.erratic());

  // too few samples: conservative default
  ErraticClassifier c3;
  for (int i = 0; i < 5; ++i) CHECK(!c3.update(5.0, dt));
}

TEST_CASE("commands always stay inside the clamp box") {
  const GapPolicy pol;
  const FollowGains g;
  const PowertrainLimits lim = limits();
  std::mt19937 rng(23);
  LeadAccelFilter f(0.2);
  for (int i = 0; i < 500; ++i) {
    const VehicleState ego = ego_at(0.0, oracle::uniform(rng, 0.0, 25.0));
    const LeadObservation obs =
        lead_at(oracle::uniform(rng, -5.0, 120.0), oracle::uniform(rng, 0.0, 25.0),
                oracle::uniform(rng, -4.0, 4.0), true);
    for (double a : {acc_command(ego, obs, pol, g, lim).accel_m_s2,
                     cacc_command(ego, obs, pol, g, lim).accel_m_s2,
                     eco_cacc_command(ego, obs, f, 0.1, pol, g, lim).accel_m_s2}) {
      CHECK(a <= lim.accel_max_m_s2 + 1e-12);
      CHECK(a >= -lim.decel_max_m_s2 - 1e-12);
    }
  }
}

TEST_CASE("no collision across randomized bounded leader traces") {
  const GapPolicy pol;
  const FollowGains g;
  const PowertrainLimits lim = limits();
  std::mt19937 rng(31);

  for (int trial = 0; trial < 50; ++trial) {
    const double v0 = oracle::uniform(rng, 3.0, 22.0);
    const double gap0 = pol.standstill_gap_m + pol.time_gap_s * v0 +
                        oracle::uniform(rng, 0.0, 15.0);
    std::vector<double> accels;
    double phase_left = 0.0, level = 0.0;
    for (int i = 0; i < 600; ++i) {
      if (phase_left <= 0.0) {
        phase_left = oracle::uniform(rng, 0.5, 4.0);
        level = oracle::uniform(rng, -lim.decel_max_m_s2, lim.accel_max_m_s2);
      }
      accels.push_back(level);
      phase_left -= 0.1;
    }
    const LoopResult r = closed_loop(accels, v0, gap0, [&](const VehicleState& ego,
                                                           const LeadObservation& obs) {
      return acc_command(ego, obs, pol, g, lim).accel_m_s2;
    });
    CHECK(r.min_gap > 0.0);
  }
}

TEST_CASE("eco-cacc rides an erratic leader more smoothly and cheaply than cacc") {
  const GapPolicy pol;
  const FollowGains g;
  const PowertrainLimits lim = limits();

  // scripted erratic leader: 1 Hz square wave, +/-2 m/s^2
  std::vector<double> accels;
  for (int i = 0; i < 600; ++i) accels.push_back(std::fmod(i * 0.1, 1.0) < 0.5 ? 2.0 : -2.0);

  const double v0 = 12.0;
  const double gap0 = pol.standstill_gap_m + pol.time_gap_s * v0;

  const LoopResult cacc = closed_loop(accels, v0, gap0, [&](const VehicleState& ego,
                                                            const LeadObservation& obs) {
    return cacc_command(ego, obs, pol, g, lim).accel_m_s2;
  });
  LeadAccelFilter f(0.2);
  const LoopResult eco = closed_loop(accels, v0, gap0, [&](const VehicleState& ego,
                                                           const LeadObservation& obs) {
    return eco_cacc_command(ego, obs, f, 0.1, pol, g, lim).accel_m_s2;
  });

  CHECK(eco.min_gap > 0.0);
  CHECK(cacc.min_gap > 0.0);
  CHECK(eco.rms_accel <= 0.7 * cacc.rms_accel);
  CHECK(eco.fuel_g < cacc.fuel_g);

  // comfort dominance across random oscillatory traces
  std::mt19937 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> trace;
    const double amp = oracle::uniform(rng, 0.5, 2.5);
    const double period = oracle::uniform(rng, 0.6, 3.0);
    for (int i = 0; i < 500; ++i)
      trace.push_back(std::fmod(i * 0.1, period) < period / 2 ? amp : -amp);
    const LoopResult c2 = closed_loop(trace, v0, gap0, [&](const VehicleState& ego,
                                                           const LeadObservation& obs) {
      return cacc_command(ego, obs, pol, g, lim).accel_m_s2;
    });
    LeadAccelFilter f2(0.2);
    const LoopResult e2 = closed_loop(trace, v0, gap0, [&](const VehicleState& ego,
                                                           const LeadObservation& obs) {
      return eco_cacc_command(ego, obs, f2, 0.1, pol, g, lim).accel_m_s2;
    });
    CHECK(e2.rms_accel <= c2.rms_accel + 1e-9);
  }
}
