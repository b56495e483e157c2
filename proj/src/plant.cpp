#include "seatwin/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seatwin {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("plant: ") + what);
}

// Velocity below which the motor is treated as at rest for the stick
// test. step() zeroes the velocity exactly on reversal, so this only
// absorbs float dust from external callers.
constexpr double kStickVel = 1e-9;

double kinetic_friction_magnitude(double speed, const PlantParams& params) {
  const double s = speed / params.stribeck_velocity;
  return params.coulomb_force +
         (params.breakaway_force - params.coulomb_force) * std::exp(-s * s);
}

}  // namespace

void PlantParams::validate() const {
  require(pendulum_mass > 0.0, "pendulum_mass must be > 0");
  require(arm_length > 0.0, "arm_length must be > 0");
  require(lever_radius > 0.0, "lever_radius must be > 0");
  require(spring_stiffness > 0.0, "spring_stiffness must be > 0");
  require(motor_reflected_mass > 0.0, "motor_reflected_mass must be > 0");
  require(current_to_force_gain > 0.0, "current_to_force_gain must be > 0");
  require(viscous_coeff >= 0.0, "viscous_coeff must be >= 0");
  require(coulomb_force >= 0.0, "coulomb_force must be >= 0");
  require(breakaway_force >= coulomb_force,
          "breakaway_force must be >= coulomb_force");
  require(stribeck_velocity > 0.0, "stribeck_velocity must be > 0");
  require(backlash_gap > 0.0, "backlash_gap must be > 0");
  require(joint_damping >= 0.0, "joint_damping must be >= 0");
  require(gravity > 0.0, "gravity must be > 0");
  require(micro_dt > 0.0, "micro_dt must be > 0");
  const double bound = motor_reflected_mass * (2.0 / micro_dt) * (2.0 / micro_dt);
  require(spring_stiffness < bound,
          "spring_stiffness exceeds the symplectic stability bound "
          "mass*(2/dt)^2");
}

void NonlinearityConfig::validate() const {
  require(encoder_slip.rate_per_min >= 0.0, "encoder_slip.rate must be >= 0");
  require(encoder_slip.magnitude_rms >= 0.0,
          "encoder_slip.magnitude_rms must be >= 0");
  require(gear_slip.rate_per_min >= 0.0, "gear_slip.rate must be >= 0");
  require(gear_slip.magnitude_rms >= 0.0, "gear_slip.magnitude_rms must be >= 0");
  require(force_noise_rms >= 0.0, "force_noise_rms must be >= 0");
  require(angle_noise_rms >= 0.0, "angle_noise_rms must be >= 0");
}

double spring_force(const PlantState& state, const PlantParams& params) {
  const double deflection =
      state.motor_pos - state.backlash_offset - params.lever_radius * state.q;
  return params.spring_stiffness * deflection;
}

double gravity_torque(double q, const PlantParams& params) {
  return params.pendulum_mass * params.gravity * params.arm_length * std::sin(q);
}

double friction_force(double motor_vel, double applied,
                      const PlantParams& params, bool stiction_enabled) {
  if (!stiction_enabled) return -params.viscous_coeff * motor_vel;
  if (std::abs(motor_vel) < kStickVel) {
    if (std::abs(applied) < params.breakaway_force) return -applied;
    // Breaking away: kinetic friction at zero speed equals breakaway.
    return applied > 0.0 ? -params.breakaway_force : params.breakaway_force;
  }
  const double kinetic = kinetic_friction_magnitude(std::abs(motor_vel), params);
  const double sign = motor_vel > 0.0 ? 1.0 : -1.0;
  return -sign * kinetic - params.viscous_coeff * motor_vel;
}

PlantState step(const PlantState& state, double current_a,
                const NonlinearityConfig& cfg, const PlantParams& params,
                Rng& rng) {
  require(std::isfinite(current_a), "non-finite commanded current");
  require(std::isfinite(state.q) && std::isfinite(state.q_dot) &&
              std::isfinite(state.motor_pos) && std::isfinite(state.motor_vel),
          "non-finite plant state");

  const double dt = params.micro_dt;
  PlantState next = state;

  const double f_spring = spring_force(state, params);

  // Motor mass: semi-implicit Euler, velocity first. The stick branch
  // keeps the velocity at exactly zero while the net applied force stays
  // below breakaway; a velocity reversal within a step also lands on
  // exactly zero so the stick test can re-engage next step.
  const double f_applied = params.current_to_force_gain * current_a - f_spring;
  const bool stuck = cfg.stiction_enabled &&
                     std::abs(state.motor_vel) < kStickVel &&
                     std::abs(f_applied) < params.breakaway_force;
  if (stuck) {
    next.motor_vel = 0.0;
  } else {
    // Coulomb/Stribeck explicit (bounded), viscous implicit in the new
    // velocity so stiff damping stays stable at this dt.
    double f_nv = 0.0;
    if (cfg.stiction_enabled && state.motor_vel != 0.0) {
      const double kinetic =
          kinetic_friction_magnitude(std::abs(state.motor_vel), params);
      f_nv = state.motor_vel > 0.0 ? -kinetic : kinetic;
    } else if (cfg.stiction_enabled) {
      // Breaking away from rest under >= breakaway load.
      f_nv = f_applied > 0.0 ? -params.breakaway_force : params.breakaway_force;
    }
    double v = (state.motor_vel +
                dt * (f_applied + f_nv) / params.motor_reflected_mass) /
               (1.0 + dt * params.viscous_coeff / params.motor_reflected_mass);
    if (cfg.stiction_enabled && state.motor_vel != 0.0 &&
        ((state.motor_vel > 0.0 && v < 0.0) || (state.motor_vel < 0.0 && v > 0.0))) {
      v = 0.0;  // crossed zero within the step: candidate stick
    }
    next.motor_vel = v;
  }
  next.motor_pos = state.motor_pos + dt * next.motor_vel;

  // Pendulum: torque from the spring through the lever, gravity, pivot
  // damping. Inertia is the point mass at the arm end.
  const double inertia =
      params.pendulum_mass * params.arm_length * params.arm_length;
  const double torque = params.lever_radius * f_spring -
                        gravity_torque(state.q, params) -
                        params.joint_damping * state.q_dot;
  next.q_dot = state.q_dot + dt * torque / inertia;
  next.q = state.q + dt * next.q_dot;

  // Backlash engagement tracks the relative motion across the dead band;
  // motion absorbed by the gap leaves the spring deflection unchanged.
  if (cfg.backlash_enabled) {
    const double half = 0.5 * params.backlash_gap;
    const double ds = (next.motor_pos - params.lever_radius * next.q) -
                      (state.motor_pos - params.lever_radius * state.q);
    next.backlash_offset =
        std::clamp(state.backlash_offset + ds, -half, half);
  } else {
    next.backlash_offset = 0.0;
  }

  // Slip events: Bernoulli thinning of a Poisson process at micro_dt.
  if (cfg.encoder_slip.rate_per_min > 0.0) {
    const double p = cfg.encoder_slip.rate_per_min / 60.0 * dt;
    if (rng.bernoulli(p))
      next.encoder_offset += rng.normal(0.0, cfg.encoder_slip.magnitude_rms);
  }
  if (cfg.gear_slip.rate_per_min > 0.0) {
    const double p = cfg.gear_slip.rate_per_min / 60.0 * dt;
    if (rng.bernoulli(p))
      next.motor_pos += rng.normal(0.0, cfg.gear_slip.magnitude_rms);
  }

  next.sim_time = state.sim_time + dt;
  return next;
}

RawSensors measure(const PlantState& state, const NonlinearityConfig& cfg,
                   const PlantParams& params, Rng& rng) {
  RawSensors out;
  out.q_meas = state.q + state.encoder_offset;
  if (cfg.angle_noise_rms > 0.0) out.q_meas += rng.normal(0.0, cfg.angle_noise_rms);
  out.f_meas = spring_force(state, params);
  if (cfg.force_noise_rms > 0.0) out.f_meas += rng.normal(0.0, cfg.force_noise_rms);
  return out;
}

PlantState reset_state(const PlantParams& params, double carry_encoder_offset,
                       double q_jitter, Rng* rng) {
  PlantState s;
  if (q_jitter > 0.0 && rng != nullptr) s.q = rng->uniform(-q_jitter, q_jitter);
  s.motor_pos = params.lever_radius * s.q;  // relaxed spring
  s.encoder_offset = carry_encoder_offset;
  return s;
}

}  // namespace seatwin
