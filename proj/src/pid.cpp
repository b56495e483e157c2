#include "seatwin/pid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace seatwin {

void PidConfig::validate() const {
  if (kp < 0.0 || ki < 0.0 || kd < 0.0)
    throw std::invalid_argument("pid: gains must be >= 0");
  if (!(filter_cutoff_hz > 0.0))
    throw std::invalid_argument("pid: filter_cutoff_hz must be > 0");
  if (!(output_sat_a > 0.0))
    throw std::invalid_argument("pid: output_sat_a must be > 0");
  if (!(integrator_clamp_a > 0.0))
    throw std::invalid_argument("pid: integrator_clamp_a must be > 0");
}

double lpf_step(double y, double x, double dt, double cutoff_hz) {
  if (!(dt > 0.0)) throw std::invalid_argument("lpf_step: dt must be > 0");
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  const double alpha = dt / (dt + tau);
  return y + alpha * (x - y);
}

PidOutput pid_step(const PidState& s, double f_des_n, double f_n, double dt,
                   const PidConfig& cfg) {
  PidOutput out;
  out.state = s;

  const double e = lpf_step(s.filtered_error_n, f_des_n - f_n, dt,
                            cfg.filter_cutoff_hz);
  out.state.filtered_error_n = e;

  const double de = s.primed ? (e - s.prev_filtered_error_n) / dt : 0.0;
  out.state.prev_filtered_error_n = e;
  out.state.primed = true;

  double integral = s.integral_ns + e * dt;
  if (cfg.anti_windup && cfg.ki > 0.0) {
    const double bound = cfg.integrator_clamp_a / cfg.ki;
    integral = std::clamp(integral, -bound, bound);
  }

  const double u_raw = cfg.kp * e + cfg.ki * integral + cfg.kd * de;
  if (std::abs(u_raw) > cfg.output_sat_a) {
    out.current_a = u_raw > 0.0 ? cfg.output_sat_a : -cfg.output_sat_a;
    // Error pushing further into saturation: hold the integrator.
    if (cfg.anti_windup && e * u_raw > 0.0) integral = s.integral_ns;
  } else {
    out.current_a = u_raw;
  }
  out.state.integral_ns = integral;
  return out;
}

}  // namespace seatwin
