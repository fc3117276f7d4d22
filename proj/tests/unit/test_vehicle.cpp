#include <doctest.h>

#include <cmath>
#include <random>

#include "ecodrive/vehicle.hpp"
#include "support.hpp"

using namespace ecodrive;

TEST_CASE("road load at standstill on the flat is the rolling term alone") {
  VehicleParams p;
  CHECK(road_load(p, 0.0, 0.0) == doctest::Approx(1500.0 * 9.81 * 0.009).epsilon(1e-12));
  CHECK(road_load(p, 0.0, 0.0) == doctest::Approx(132.435).epsilon(1e-9));
}

TEST_CASE("road load matches an independent evaluation") {
  VehicleParams p;
  const double expect = oracle::road_load(1500.0, 9.81, 0.009, 1.206, 2.2, 0.30, 20.0, 0.02);
  CHECK(road_load(p, 20.0, 0.02) == doctest::Approx(expect).epsilon(1e-12));
  // can go negative on a steep downgrade
  CHECK(road_load(p, 0.0, -0.1) < 0.0);
}

TEST_CASE("road load is monotone in speed at fixed grade") {
  VehicleParams p;
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    const double g = oracle::uniform(rng, 0.0, 0.05);
    const double v1 = oracle::uniform(rng, 0.0, 30.0);
    const double v2 = v1 + oracle::uniform(rng, 0.01, 5.0);
    CHECK(road_load(p, v2, g) > road_load(p, v1, g));
  }
}

TEST_CASE("traction power vanishes at standstill and at steady cruise equals load power") {
  VehicleParams p;
  CHECK(traction_power(p, 0.0, 3.0, 0.0) == 0.0);
  const double v = 17.0;
  CHECK(traction_power(p, v, 0.0, 0.01) ==
        doctest::Approx(road_load(p, v, 0.01) * v).epsilon(1e-12));
  const double expect =
      oracle::traction_power(1590.0, 1.0, oracle::road_load(1500.0, 9.81, 0.009, 1.206, 2.2,
                                                            0.30, 10.0, 0.0), 10.0);
  CHECK(traction_power(p, 10.0, 1.0, 0.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("fuel rate floors at the accessory idle rate") {
  FuelModelParams f;
  const double idle = 500.0 / (0.30 * 43000.0);
  CHECK(fuel_rate(f, 0.0) == doctest::Approx(idle).epsilon(1e-12));
  CHECK(fuel_rate(f, -5000.0) == doctest::Approx(idle).epsilon(1e-12));
  const double expect = oracle::fuel_rate(0.92, 0.30, 500.0, 43000.0, 20000.0);
  CHECK(fuel_rate(f, 20000.0) == doctest::Approx(expect).epsilon(1e-12));

  std::mt19937 rng(11);
  for (int i = 0; i < 500; ++i)
    CHECK(fuel_rate(f, oracle::uniform(rng, -5e4, 8e4)) >= idle - 1e-15);
}

TEST_CASE("clamp_input is idempotent and enforces the box") {
  VehicleConfig cfg;
  const PowertrainLimits limits = cfg.limits();
  ControlInput inside{100.0, 500.0};
  const ControlInput c1 = clamp_input(inside, limits, 10.0);
  CHECK(c1.engine_torque_Nm == 100.0);
  CHECK(c1.brake_force_N == 500.0);

  CHECK(clamp_input({0.0, -100.0}, limits, 5.0).brake_force_N == 0.0);
  CHECK(clamp_input({1e4, 0.0}, limits, 5.0).engine_torque_Nm ==
        limits.engine_torque_range(5.0).second);

  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    const ControlInput u{oracle::uniform(rng, -500.0, 500.0),
                         oracle::uniform(rng, -2e4, 2e4)};
    const double v = oracle::uniform(rng, 0.0, 30.0);
    const ControlInput once = clamp_input(u, limits, v);
    const ControlInput twice = clamp_input(once, limits, v);
    CHECK(once.engine_torque_Nm == twice.engine_torque_Nm);
    CHECK(once.brake_force_N == twice.brake_force_N);
  }
}

TEST_CASE("step_dynamics holds a stopped vehicle and coasts down a moving one") {
  VehicleConfig cfg;
  VehicleState s;
  const VehicleState next = step_dynamics(s, {0.0, 0.0}, cfg.vehicle, cfg.fuel, 0.0, 0.1);
  CHECK(next.speed_m_s == 0.0);
  CHECK(next.position_m == 0.0);
  CHECK(next.fuel_used_g > 0.0);  // idle burn

  VehicleState moving;
  moving.speed_m_s = 15.0;
  const VehicleState coasted =
      step_dynamics(moving, {0.0, 0.0}, cfg.vehicle, cfg.fuel, 0.0, 0.1);
  CHECK(coasted.speed_m_s < 15.0);
  CHECK(coasted.accel_m_s2 < 0.0);

  CHECK_THROWS_AS(step_dynamics(s, {0.0, 0.0}, cfg.vehicle, cfg.fuel, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("one step versus two half steps differ at second order") {
  VehicleConfig cfg;
  VehicleState s;
  s.speed_m_s = 12.0;
  const ControlInput u{120.0, 0.0};

  auto run = [&](double dt, int n) {
    VehicleState st = s;
    for (int i = 0; i < n; ++i) st = step_dynamics(st, u, cfg.vehicle, cfg.fuel, 0.01, dt);
    return st;
  };

  const double d1 = std::abs(run(0.1, 1).speed_m_s - run(0.05, 2).speed_m_s);
  const double d2 = std::abs(run(0.05, 1).speed_m_s - run(0.025, 2).speed_m_s);
  CHECK(d1 > 0.0);
  // halving dt shrinks the single-step defect by about 4x
  CHECK(d2 < d1 / 2.5);
  CHECK(d2 > d1 / 6.0);
}

TEST_CASE("speed and position never go backwards over random trajectories") {
  VehicleConfig cfg;
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    VehicleState s;
    s.speed_m_s = oracle::uniform(rng, 0.0, 20.0);
    double last_pos = s.position_m;
    double last_fuel = 0.0;
    for (int i = 0; i < 200; ++i) {
      const ControlInput u{oracle::uniform(rng, -30.0, 250.0),
                           oracle::uniform(rng, 0.0, 6000.0)};
      s = step_dynamics(s, clamp_input(u, cfg.limits(), s.speed_m_s), cfg.vehicle, cfg.fuel,
                        oracle::uniform(rng, -0.02, 0.02), 0.1);
      CHECK(s.speed_m_s >= 0.0);
      CHECK(s.position_m >= last_pos);
      CHECK(s.fuel_used_g >= last_fuel);
      last_pos = s.position_m;
      last_fuel = s.fuel_used_g;
    }
  }
}

TEST_CASE("transmission and engine losses never create energy") {
  VehicleConfig cfg;
  std::mt19937 rng(29);
  VehicleState s;
  s.speed_m_s = 10.0;
  double positive_work = 0.0;
  for (int i = 0; i < 3000; ++i) {
    const ControlInput u = clamp_input({oracle::uniform(rng, -30.0, 250.0),
                                        oracle::uniform(rng, 0.0, 2000.0)},
                                       cfg.limits(), s.speed_m_s);
    const double grade = oracle::uniform(rng, -0.02, 0.02);
    const VehicleState next = step_dynamics(s, u, cfg.vehicle, cfg.fuel, grade, 0.1);
    positive_work += std::max(0.0, traction_power(cfg.vehicle, s.speed_m_s, next.accel_m_s2,
                                                  grade)) * 0.1;
    s = next;
  }
  const double chemical = s.fuel_used_g * cfg.fuel.fuel_lhv_J_per_g *
                          cfg.fuel.engine_efficiency * cfg.fuel.trans_efficiency;
  CHECK(chemical >= positive_work - 1e-6);
}

TEST_CASE("inputs_for_accel inverts the force balance without power against brake") {
  VehicleConfig cfg;
  std::mt19937 rng(31);
  for (int i = 0; i < 300; ++i) {
    const double v = oracle::uniform(rng, 0.0, 25.0);
    const double grade = oracle::uniform(rng, -0.03, 0.03);
    const double want = oracle::uniform(rng, -3.0, 2.0);
    const ControlInput u = inputs_for_accel(cfg.vehicle, v, grade, want);
    CHECK(!(u.engine_torque_Nm > 1e-9 && u.brake_force_N > 1e-9));
    // realized acceleration (unclamped) reproduces the request
    const double a = cfg.vehicle.torque_gain * u.engine_torque_Nm -
                     cfg.vehicle.brake_gain * u.brake_force_N -
                     road_load(cfg.vehicle, v, grade) / cfg.vehicle.mass_kg;
    CHECK(a == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("vehicle config round-trips through json") {
  const VehicleConfig cfg = load_vehicle_config(testutil::data_path("vehicle_midsize.json"));
  CHECK(cfg.vehicle.mass_kg == 1500.0);
  CHECK(cfg.vehicle.effective_mass_kg == 1590.0);
  CHECK(cfg.fuel.accessory_power_W == 500.0);
  const VehicleConfig again = parse_vehicle_config(vehicle_config_to_json(cfg));
  CHECK(again.vehicle.torque_gain == cfg.vehicle.torque_gain);
  CHECK(again.limit_spec.brake_force_max_N == cfg.limit_spec.brake_force_max_N);

  CHECK_THROWS_AS(parse_vehicle_config("{\"vehicle\":{}}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_vehicle_config("not json"), std::invalid_argument);
}
