// Calibration probe for plant parameter sets: prints the scripted
// checks behind the shipped defaults (static authority, e-stop
// reachability under misbehaving drive, PID stability with and without
// stiction, and the low-speed dwell contrast).

#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "seatwin/config.hpp"
#include "seatwin/harness.hpp"
#include "seatwin/pid.hpp"

using namespace seatwin;

namespace {

double dwell_fraction(const EpisodeLog& log, double thresh = 0.005) {
  std::size_t n = 0;
  for (const auto& s : log.steps)
    if (std::abs(s.q_dot) < thresh) ++n;
  return log.steps.empty() ? 0.0
                           : static_cast<double>(n) / log.steps.size();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plant calibration probes"};
  std::string config_path;
  app.add_option("--config", config_path, "JSON overlay on the desk preset");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg = desk_preset();
  if (!config_path.empty()) cfg = load_config_file(config_path, cfg);

  // Static authority: saturated current against a pinned joint.
  {
    Rng rng(1);
    NonlinearityConfig quiet = cfg.nonlinearities;
    quiet.force_noise_rms = 0.0;
    quiet.angle_noise_rms = 0.0;
    PlantState s = reset_state(cfg.plant);
    for (int i = 0; i < 8000; ++i) {
      s = step(s, cfg.safety.action_sat_a, quiet, cfg.plant, rng);
      s.q = 0.0;
      s.q_dot = 0.0;
    }
    std::printf("static_force_at_sat: %.1f N (need >= 150)\n",
                spring_force(s, cfg.plant));
  }

  // Free static push at the saturated and supply-clamped currents.
  for (double amps : {cfg.safety.action_sat_a, cfg.safety.supply_clamp_a}) {
    Rng rng(1);
    NonlinearityConfig quiet = cfg.nonlinearities;
    quiet.force_noise_rms = 0.0;
    quiet.angle_noise_rms = 0.0;
    PlantState s = reset_state(cfg.plant);
    double q_max = 0.0;
    for (int i = 0; i < 20000; ++i) {
      s = step(s, amps, quiet, cfg.plant, rng);
      q_max = std::max(q_max, std::abs(s.q));
    }
    std::printf("static_q_at_%.2fA: %.3f rad\n", amps, q_max);
  }

  // Misbehaving drive: supply-clamp square wave at the motor-spring
  // resonance, applied at the low-level rate with safety bypassed.
  {
    Rng rng(1);
    NonlinearityConfig quiet = cfg.nonlinearities;
    quiet.force_noise_rms = 0.0;
    quiet.angle_noise_rms = 0.0;
    const double omega = std::sqrt(cfg.plant.spring_stiffness /
                                   cfg.plant.motor_reflected_mass);
    PlantState s = reset_state(cfg.plant);
    double f_max = 0.0, q_max = 0.0;
    for (int i = 0; i < 8000; ++i) {
      const double u = cfg.safety.supply_clamp_a *
                       (std::sin(omega * s.sim_time) >= 0.0 ? 1.0 : -1.0);
      s = step(s, u, quiet, cfg.plant, rng);
      f_max = std::max(f_max, std::abs(spring_force(s, cfg.plant)));
      q_max = std::max(q_max, std::abs(s.q));
    }
    std::printf(
        "resonant_pump: omega=%.0f rad/s peak|F|=%.0f N (need > %.0f) "
        "peak|q|=%.3f rad\n",
        omega, f_max, cfg.safety.estop_force_n, q_max);
  }

  // PID at 0.05 Hz, stiction on vs off.
  EvalOptions ev;
  ev.spec = TrajectorySpec::sinusoid(50.0, 0.05);
  ev.duration_s = 60.0;
  ev.write_log = false;
  const EvalOutcome on = eval_pid(cfg, ev);
  ExperimentConfig off_cfg = cfg;
  off_cfg.nonlinearities.stiction_enabled = false;
  const EvalOutcome off = eval_pid(off_cfg, ev);
  const double d_on = dwell_fraction(on.log);
  const double d_off = dwell_fraction(off.log);
  std::printf(
      "pid_0.05Hz: mae_on=%.2f mae_off=%.2f dwell_on=%.3f dwell_off=%.3f "
      "ratio=%.2f (need >= 3)\n",
      on.report.mae_n, off.report.mae_n, d_on, d_off,
      d_off > 0.0 ? d_on / d_off : 999.0);

  // PID on the evaluation chirp: binned error profile.
  ev.spec = TrajectorySpec::chirp(50.0, 0.05, 0.35, 60.0);
  const EvalOutcome chirp = eval_pid(cfg, ev);
  std::printf("pid_chirp: mae=%.2f bins:", chirp.report.mae_n);
  for (const auto& b : chirp.report.bins) std::printf(" %.1f", b.mae_n);
  std::printf(" stable=%s\n", chirp.report.stable ? "yes" : "NO");
  return 0;
}
