#pragma once

#include "seatwin/env.hpp"

namespace seatwin {

struct PidConfig {
  double kp = 0.02;    // A/N
  double ki = 0.002;   // A/(N*s)
  double kd = 0.0;     // A*s/N
  double filter_cutoff_hz = 1.0;  // first-order low-pass on the error
  double output_sat_a = 0.75;
  double integrator_clamp_a = 0.75;  // bound on |ki * integral|
  bool anti_windup = true;

  void validate() const;
};

struct PidState {
  double filtered_error_n = 0.0;
  double integral_ns = 0.0;
  double prev_filtered_error_n = 0.0;
  bool primed = false;  // derivative history exists
};

// y += alpha * (x - y) with alpha = dt / (dt + 1/(2*pi*cutoff)); unit DC
// gain (backward-Euler pole mapping).
double lpf_step(double y, double x, double dt, double cutoff_hz);

struct PidOutput {
  double current_a = 0.0;
  PidState state;
};

// Filtered error -> PI(D) with clamping anti-windup: the integrator is
// frozen while the output is saturated and the error would deepen the
// saturation, and |ki * integral| is clamped to integrator_clamp_a.
PidOutput pid_step(const PidState& s, double f_des_n, double f_n, double dt,
                   const PidConfig& cfg);

// ActionSource adapter so PID episodes run through the same
// environment/transport/safety stack as the learned policy.
class PidController final : public ActionSource {
 public:
  PidController(const PidConfig& cfg, double dt) : cfg_(cfg), dt_(dt) {
    cfg_.validate();
  }

  Action act(const Observation& obs) override {
    const PidOutput out = pid_step(state_, obs.f_des, obs.f, dt_, cfg_);
    state_ = out.state;
    return Action{out.current_a};
  }

  void reset() { state_ = PidState{}; }

 private:
  PidConfig cfg_;
  double dt_;
  PidState state_;
};

}  // namespace seatwin
