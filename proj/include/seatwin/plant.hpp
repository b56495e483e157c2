#pragma once

#include "seatwin/rng.hpp"

namespace seatwin {

// Physical parameters of the linear-SEA-driving-a-pendulum testbed.
// The actuator is a motor/ballscrew (modeled as a mass reflected to
// linear motion) pushing the pendulum arm at lever_radius through a
// series spring; the inline sensor reads the spring force.
struct PlantParams {
  double pendulum_mass = 22.6;        // kg, at the end of the arm
  double arm_length = 0.3;            // m
  double lever_radius = 0.05;         // m, actuator moment arm about joint
  double spring_stiffness = 1.0e5;    // N/m, series elasticity
  double motor_reflected_mass = 2.0;  // kg, rotor+screw reflected to linear
  double current_to_force_gain = 400.0;  // N/A, lumped motor+transmission
  double viscous_coeff = 120.0;       // N.s/m on the screw
  double coulomb_force = 20.0;        // N, kinetic friction floor
  double breakaway_force = 27.0;      // N, static friction, >= coulomb
  double stribeck_velocity = 0.08;    // m/s, stiction-to-coulomb falloff
  double backlash_gap = 2.0e-4;       // m, total transmission dead band
  double joint_damping = 28.0;        // N.m.s/rad, pendulum pivot
  double gravity = 9.81;              // m/s^2
  double micro_dt = 0.0025;           // s, low-level integration step

  // Throws std::invalid_argument on violated invariants. Also checks the
  // symplectic-Euler stability bound: spring_stiffness must stay below
  // motor_reflected_mass * (2 / micro_dt)^2.
  void validate() const;
};

struct SlipProcess {
  double rate_per_min = 0.0;   // expected events per minute
  double magnitude_rms = 0.0;  // rad (encoder) or m (gear), per event
};

// Switchable stand-ins for the hardware's mechanical/sensing defects.
struct NonlinearityConfig {
  bool stiction_enabled = true;
  bool backlash_enabled = true;
  SlipProcess encoder_slip;  // discrete offsets added to the measured angle
  SlipProcess gear_slip;     // discrete offsets added to motor position
  double force_noise_rms = 2.0;  // N
  double angle_noise_rms = 0.0;  // rad

  void validate() const;
};

struct PlantState {
  double q = 0.0;                // rad, true joint angle (0 = hanging down)
  double q_dot = 0.0;            // rad/s
  double motor_pos = 0.0;        // m, nut position along the screw
  double motor_vel = 0.0;        // m/s
  double backlash_offset = 0.0;  // m, engagement state in [-gap/2, +gap/2]
  double encoder_offset = 0.0;   // rad, accumulated measurement slip
  double sim_time = 0.0;         // s
};

struct RawSensors {
  double q_meas = 0.0;  // rad
  double f_meas = 0.0;  // N
};

// Force the inline sensor would read before noise:
// k * (motor_pos - backlash_offset - lever_radius * q).
double spring_force(const PlantState& state, const PlantParams& params);

// m * g * L * sin(q)
double gravity_torque(double q, const PlantParams& params);

// Friction on the screw. With stiction enabled and the motor at rest
// under less than the breakaway force, returns exactly -applied (the
// motor sticks); otherwise Coulomb+Stribeck+viscous opposing motion.
// With stiction disabled, pure viscous.
double friction_force(double motor_vel, double applied,
                      const PlantParams& params, bool stiction_enabled);

// One micro_dt semi-implicit Euler step of the two-mass dynamics, plus
// stochastic slip events per cfg. Deterministic given (state, current,
// cfg, params, rng state). Throws std::invalid_argument on non-finite
// current or state.
PlantState step(const PlantState& state, double current_a,
                const NonlinearityConfig& cfg, const PlantParams& params,
                Rng& rng);

// Sensor readout: q + encoder_offset + angle noise, spring force + force
// noise. Draws from rng only when the corresponding noise is nonzero.
RawSensors measure(const PlantState& state, const NonlinearityConfig& cfg,
                   const PlantParams& params, Rng& rng);

// Initial state: at rest at the gravity equilibrium with a relaxed
// spring and centered backlash. Keeps encoder_offset from `carry_over`
// (slip survives episode resets, like the hardware).
PlantState reset_state(const PlantParams& params, double carry_encoder_offset = 0.0,
                       double q_jitter = 0.0, Rng* rng = nullptr);

}  // namespace seatwin
