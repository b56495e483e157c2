#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "seatwin/rng.hpp"

namespace seatwin {

// Desired-force generator: constant-frequency sinusoid or linear chirp.
struct TrajectorySpec {
  enum class Kind { kSinusoid, kChirp };
  Kind kind = Kind::kSinusoid;
  double amplitude_n = 50.0;
  double freq_hz = 0.1;      // sinusoid
  double f0_hz = 0.05;       // chirp start
  double f1_hz = 0.35;       // chirp end
  double duration_s = 60.0;  // chirp sweep time

  void validate() const {
    if (!(amplitude_n > 0.0))
      throw std::invalid_argument("trajectory: amplitude must be > 0");
    if (kind == Kind::kSinusoid) {
      if (!(freq_hz > 0.0))
        throw std::invalid_argument("trajectory: freq must be > 0");
    } else {
      if (!(f0_hz > 0.0 && f0_hz <= f1_hz))
        throw std::invalid_argument("trajectory: need 0 < f0 <= f1");
      if (!(duration_s > 0.0))
        throw std::invalid_argument("trajectory: chirp duration must be > 0");
    }
  }

  static TrajectorySpec sinusoid(double amplitude_n, double freq_hz) {
    TrajectorySpec s;
    s.kind = Kind::kSinusoid;
    s.amplitude_n = amplitude_n;
    s.freq_hz = freq_hz;
    s.validate();
    return s;
  }

  static TrajectorySpec chirp(double amplitude_n, double f0_hz, double f1_hz,
                              double duration_s) {
    TrajectorySpec s;
    s.kind = Kind::kChirp;
    s.amplitude_n = amplitude_n;
    s.f0_hz = f0_hz;
    s.f1_hz = f1_hz;
    s.duration_s = duration_s;
    s.validate();
    return s;
  }
};

// Desired force at time t. Chirp phase is 2*pi*(f0*t + (f1-f0)*t^2/(2T)),
// so the instantaneous frequency sweeps f0 -> f1 linearly over T.
inline double desired_force(const TrajectorySpec& spec, double t) {
  if (t < 0.0 || (spec.kind == TrajectorySpec::Kind::kChirp && t > spec.duration_s))
    throw std::out_of_range("desired_force: t outside trajectory domain");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (spec.kind == TrajectorySpec::Kind::kSinusoid)
    return spec.amplitude_n * std::sin(two_pi * spec.freq_hz * t);
  const double phase =
      two_pi * (spec.f0_hz * t +
                (spec.f1_hz - spec.f0_hz) * t * t / (2.0 * spec.duration_s));
  return spec.amplitude_n * std::sin(phase);
}

// d(phase)/dt / 2pi; used for frequency-binned error metrics.
inline double instantaneous_freq(const TrajectorySpec& spec, double t) {
  if (spec.kind == TrajectorySpec::Kind::kSinusoid) return spec.freq_hz;
  return spec.f0_hz + (spec.f1_hz - spec.f0_hz) * t / spec.duration_s;
}

// Training distribution: 50 N sinusoid, frequency uniform in
// [0.05, 0.35] Hz, held constant through the episode.
inline TrajectorySpec sample_training_spec(Rng& rng) {
  return TrajectorySpec::sinusoid(50.0, rng.uniform(0.05, 0.35));
}

std::string to_string(const TrajectorySpec& spec);

// Parses "sine:<freq>,<amp>" or "chirp:<f0>,<f1>,<T>,<amp>".
TrajectorySpec parse_trajectory(const std::string& text);

}  // namespace seatwin
