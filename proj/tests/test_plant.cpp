#include <doctest.h>

#include <cmath>
#include <vector>

#include "seatwin/plant.hpp"

using namespace seatwin;

namespace {

NonlinearityConfig quiet_config() {
  NonlinearityConfig nl;
  nl.force_noise_rms = 0.0;
  nl.angle_noise_rms = 0.0;
  return nl;
}

NonlinearityConfig ideal_config() {
  NonlinearityConfig nl = quiet_config();
  nl.stiction_enabled = false;
  nl.backlash_enabled = false;
  return nl;
}

PlantParams lossless_params() {
  PlantParams p;
  p.viscous_coeff = 0.0;
  p.coulomb_force = 0.0;
  p.breakaway_force = 0.0;
  p.joint_damping = 0.0;
  return p;
}

}  // namespace

TEST_CASE("spring force: relaxed spring reads zero") {
  PlantParams p;
  PlantState s;
  s.q = 0.07;
  s.motor_pos = p.lever_radius * s.q;
  CHECK(spring_force(s, p) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("spring force: linear law") {
  PlantParams p;
  p.spring_stiffness = 1e5;
  PlantState s;
  s.q = 0.0;
  s.motor_pos = 5e-4;
  CHECK(spring_force(s, p) == doctest::Approx(50.0));
}

TEST_CASE("spring force: odd in deflection") {
  PlantParams p;
  PlantState s;
  s.q = 0.02;
  s.motor_pos = p.lever_radius * s.q + 3e-4;
  const double f_pos = spring_force(s, p);
  s.q = -0.02;
  s.motor_pos = p.lever_radius * s.q - 3e-4;
  CHECK(spring_force(s, p) == doctest::Approx(-f_pos));
}

TEST_CASE("gravity torque: zero, hand value, odd") {
  PlantParams p;
  CHECK(gravity_torque(0.0, p) == 0.0);
  CHECK(gravity_torque(std::numbers::pi / 2.0, p) ==
        doctest::Approx(22.6 * 9.81 * 0.3).epsilon(1e-12));
  CHECK(gravity_torque(-0.25, p) == doctest::Approx(-gravity_torque(0.25, p)));
}

TEST_CASE("friction: at rest with no load") {
  PlantParams p;
  CHECK(friction_force(0.0, 0.0, p, true) == 0.0);
}

TEST_CASE("friction: sticks below breakaway") {
  PlantParams p;
  p.breakaway_force = 40.0;
  p.coulomb_force = 20.0;
  CHECK(friction_force(0.0, 30.0, p, true) == doctest::Approx(-30.0));
  CHECK(friction_force(0.0, -30.0, p, true) == doctest::Approx(30.0));
}

TEST_CASE("friction: pure viscous when stiction disabled") {
  PlantParams p;
  p.viscous_coeff = 100.0;
  p.coulomb_force = 0.0;
  p.breakaway_force = 0.0;
  CHECK(friction_force(0.1, 0.0, p, false) == doctest::Approx(-10.0));
}

TEST_CASE("friction: Stribeck falls from breakaway toward coulomb") {
  PlantParams p;
  const double f_slow =
      std::abs(friction_force(1e-4, 0.0, p, true) + p.viscous_coeff * 1e-4);
  const double f_fast =
      std::abs(friction_force(10.0 * p.stribeck_velocity, 0.0, p, true) +
               p.viscous_coeff * 10.0 * p.stribeck_velocity);
  CHECK(f_slow > f_fast);
  CHECK(f_slow <= p.breakaway_force + 1e-9);
  CHECK(f_fast >= p.coulomb_force - 1e-9);
}

TEST_CASE("step: equilibrium is a fixed point") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng rng(1);
  PlantState s = reset_state(p);
  for (int i = 0; i < 400; ++i) s = step(s, 0.0, nl, p, rng);
  CHECK(std::abs(s.q) < 1e-12);
  CHECK(std::abs(s.q_dot) < 1e-12);
  CHECK(std::abs(s.motor_pos) < 1e-12);
  CHECK(std::abs(s.motor_vel) < 1e-12);
}

TEST_CASE("step: rejects non-finite input") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng rng(1);
  PlantState s = reset_state(p);
  CHECK_THROWS_AS(step(s, std::nan(""), nl, p, rng), std::invalid_argument);
  s.q = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(step(s, 0.0, nl, p, rng), std::invalid_argument);
}

// Energy oracle with all dissipation disabled: spring + gravity + kinetic
// summed each step must show no secular drift over 10 s.
TEST_CASE("step: lossless energy has no secular drift over 10 s") {
  PlantParams p = lossless_params();
  NonlinearityConfig nl = ideal_config();
  Rng rng(1);

  PlantState s = reset_state(p);
  s.q = 0.1;
  s.motor_pos = p.lever_radius * s.q;

  auto energy = [&](const PlantState& st) {
    const double inertia = p.pendulum_mass * p.arm_length * p.arm_length;
    const double defl = st.motor_pos - st.backlash_offset - p.lever_radius * st.q;
    return 0.5 * p.motor_reflected_mass * st.motor_vel * st.motor_vel +
           0.5 * inertia * st.q_dot * st.q_dot +
           0.5 * p.spring_stiffness * defl * defl +
           p.pendulum_mass * p.gravity * p.arm_length * (1.0 - std::cos(st.q));
  };

  const int steps = static_cast<int>(std::round(10.0 / p.micro_dt));
  const int window = static_cast<int>(std::round(1.0 / p.micro_dt));
  const double e0 = energy(s);
  double first_window = 0.0, last_window = 0.0, peak_dev = 0.0;
  for (int i = 0; i < steps; ++i) {
    s = step(s, 0.0, nl, p, rng);
    const double e = energy(s);
    peak_dev = std::max(peak_dev, std::abs(e - e0) / e0);
    if (i < window) first_window += e;
    if (i >= steps - window) last_window += e;
  }
  first_window /= window;
  last_window /= window;
  const double drift = std::abs(last_window - first_window) / e0;
  CAPTURE(peak_dev);
  CHECK(drift < 0.005);
  // Bounded symplectic oscillation, not a blow-up.
  CHECK(peak_dev < 0.05);
}

TEST_CASE("step: stuck motor stays exactly at rest below breakaway") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng rng(1);
  PlantState s = reset_state(p);
  // 0.05 A * 400 N/A = 20 N applied, below the 35 N breakaway.
  for (int i = 0; i < 2000; ++i) {
    s = step(s, 0.05, nl, p, rng);
    REQUIRE(s.motor_vel == 0.0);
  }
  CHECK(s.motor_pos == 0.0);
}

TEST_CASE("step: determinism is bit-exact") {
  PlantParams p;
  NonlinearityConfig nl;
  nl.force_noise_rms = 2.0;
  nl.angle_noise_rms = 1e-4;
  nl.encoder_slip = {30.0, 0.01};

  auto run = [&]() {
    Rng rng(42);
    PlantState s = reset_state(p);
    std::vector<double> trace;
    for (int i = 0; i < 4000; ++i) {
      const double current = 0.5 * std::sin(0.01 * i);
      s = step(s, current, nl, p, rng);
      trace.push_back(s.q);
      trace.push_back(s.motor_vel);
      trace.push_back(s.encoder_offset);
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("backlash dead band: cycling within the gap never changes force") {
  PlantParams p = lossless_params();
  p.pendulum_mass = 1e9;  // pins the joint
  p.viscous_coeff = 5000.0;
  p.backlash_gap = 2e-4;
  NonlinearityConfig nl = quiet_config();
  nl.stiction_enabled = false;
  Rng rng(1);

  PlantState s = reset_state(p);
  // Engage once so the play state starts at an edge.
  for (int i = 0; i < 800; ++i) s = step(s, 0.3, nl, p, rng);

  const double f_ref = spring_force(s, p);
  const double q_ref = s.q;
  double lo = s.motor_pos, hi = s.motor_pos;
  // Cycle the motor with a current square wave sized to stay in the gap.
  for (int cycle = 0; cycle < 6; ++cycle) {
    const double amp = (cycle % 2 == 0) ? -0.035 : 0.035;
    for (int i = 0; i < 12; ++i) {
      s = step(s, 0.3 + amp, nl, p, rng);
      lo = std::min(lo, s.motor_pos);
      hi = std::max(hi, s.motor_pos);
      CHECK(spring_force(s, p) == doctest::Approx(f_ref).epsilon(1e-6));
    }
  }
  REQUIRE(std::abs(s.q - q_ref) < 1e-5);  // joint really was held
  REQUIRE(hi - lo > 1e-5);                // the motor really moved
  REQUIRE(hi - lo < p.backlash_gap);      // ...but stayed inside the gap
}

TEST_CASE("backlash: single sub-gap move from centered engagement") {
  PlantParams p;
  p.backlash_gap = 2e-4;
  NonlinearityConfig nl = quiet_config();

  PlantState a;
  a.motor_pos = 0.0;
  a.backlash_offset = 0.0;
  const double f0 = spring_force(a, p);

  // The engagement state absorbs a movement smaller than the half gap.
  PlantState b = a;
  b.motor_pos = 1e-4;
  b.backlash_offset = 1e-4;  // what step() tracks for this move
  CHECK(spring_force(b, p) == doctest::Approx(f0));
}

TEST_CASE("step: odd symmetry of mirrored trajectories") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng action_rng(7);

  std::vector<double> currents;
  for (int i = 0; i < 2000; ++i)
    currents.push_back(action_rng.uniform(-0.75, 0.75));

  Rng rng_a(1), rng_b(1);
  PlantState a = reset_state(p);
  a.q = 0.05;
  a.q_dot = -0.2;
  a.motor_pos = p.lever_radius * a.q + 2e-4;
  PlantState b;
  b.q = -a.q;
  b.q_dot = -a.q_dot;
  b.motor_pos = -a.motor_pos;
  b.motor_vel = -a.motor_vel;

  for (double c : currents) {
    a = step(a, c, nl, p, rng_a);
    b = step(b, -c, nl, p, rng_b);
    REQUIRE(b.q == -a.q);
    REQUIRE(b.q_dot == -a.q_dot);
    REQUIRE(b.motor_pos == -a.motor_pos);
    REQUIRE(b.motor_vel == -a.motor_vel);
    REQUIRE(b.backlash_offset == -a.backlash_offset);
  }
}

TEST_CASE("measure: exact without noise, offset adds to angle") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng rng(1);
  PlantState s = reset_state(p);
  s.q = 0.123;
  s.motor_pos = p.lever_radius * s.q;
  RawSensors m = measure(s, nl, p, rng);
  CHECK(m.q_meas == s.q);
  CHECK(m.f_meas == 0.0);

  s.encoder_offset = 0.1;
  m = measure(s, nl, p, rng);
  CHECK(m.q_meas == doctest::Approx(s.q + 0.1));
}

TEST_CASE("measure: force noise statistics") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  nl.force_noise_rms = 5.0;
  Rng rng(123);
  PlantState s = reset_state(p);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = measure(s, nl, p, rng).f_meas;
    sum += f;
    sumsq += f * f;
  }
  const double mean = sum / n;
  const double stddev = std::sqrt(sumsq / n - mean * mean);
  CHECK(stddev == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("encoder slip: compound process accumulates only via events") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng rng(5);
  PlantState s = reset_state(p);
  for (int i = 0; i < 1000; ++i) s = step(s, 0.1, nl, p, rng);
  CHECK(s.encoder_offset == 0.0);  // rate 0: never moves

  nl.encoder_slip = {240.0, 0.02};  // high rate so events certainly occur
  int events = 0;
  double prev = s.encoder_offset;
  for (int i = 0; i < 4000; ++i) {
    s = step(s, 0.1, nl, p, rng);
    if (s.encoder_offset != prev) ++events;
    prev = s.encoder_offset;
  }
  // 240/min * 10 s = 40 expected events.
  CHECK(events > 15);
  CHECK(events < 80);
}

TEST_CASE("params: invariants are enforced") {
  PlantParams p;
  p.breakaway_force = p.coulomb_force - 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = PlantParams{};
  p.spring_stiffness = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = PlantParams{};
  p.spring_stiffness = p.motor_reflected_mass * std::pow(2.0 / p.micro_dt, 2.0) * 1.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(PlantParams{}.validate());
}

// Tracking-feasibility probe: saturated current against a pinned joint
// must hold at least 150 N of steady spring force.
TEST_CASE("calibration: 0.75 A yields >= 150 N steady force at q = 0") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();
  Rng rng(1);
  PlantState s = reset_state(p);
  for (int i = 0; i < 4000; ++i) {
    s = step(s, 0.75, nl, p, rng);
    s.q = 0.0;  // pinned joint
    s.q_dot = 0.0;
  }
  CHECK(spring_force(s, p) >= 150.0);
  CHECK(s.motor_vel == 0.0);  // settled
}

TEST_CASE("gear slip: discrete events displace the motor position") {
  PlantParams p;
  p.breakaway_force = 1e5;  // pin the motor so only slip moves it
  p.coulomb_force = 1e5;
  NonlinearityConfig nl = quiet_config();
  nl.gear_slip = {240.0, 1e-4};
  Rng rng(9);
  PlantState s = reset_state(p);
  int events = 0;
  for (int i = 0; i < 8000; ++i) {
    const double before = s.motor_pos;
    s = step(s, 0.0, nl, p, rng);
    if (s.motor_pos != before) ++events;
  }
  // 240/min over 20 s: about 80 expected.
  CHECK(events > 30);
  CHECK(events < 160);
  CHECK(s.encoder_offset == 0.0);  // gear slip does not touch the encoder
}

// Misbehavior probes behind the e-stop design: a compromised drive at
// the supply-clamp current must be able to reach both hard limits.
TEST_CASE("calibration: supply-clamp misbehavior reaches the e-stop limits") {
  PlantParams p;
  NonlinearityConfig nl = quiet_config();

  // Static push past the position bound.
  {
    Rng rng(1);
    PlantState s = reset_state(p);
    double q_max = 0.0;
    for (int i = 0; i < 20000; ++i) {
      s = step(s, 1.5, nl, p, rng);
      q_max = std::max(q_max, std::abs(s.q));
    }
    CHECK(q_max > 0.35);
  }

  // Square-wave drive at the motor-spring resonance past the force
  // bound.
  {
    Rng rng(1);
    PlantState s = reset_state(p);
    const double omega = std::sqrt(p.spring_stiffness / p.motor_reflected_mass);
    double f_max = 0.0;
    for (int i = 0; i < 8000; ++i) {
      const double u = std::sin(omega * s.sim_time) >= 0.0 ? 1.5 : -1.5;
      s = step(s, u, nl, p, rng);
      f_max = std::max(f_max, std::abs(spring_force(s, p)));
    }
    CHECK(f_max > 1700.0);
  }
}
