#pragma once

#include <span>
#include <string>
#include <vector>

#include "seatwin/env.hpp"
#include "seatwin/trajectory.hpp"

namespace seatwin {

// Mean absolute error; throws on an empty sequence.
double mae(std::span<const double> errors);

// (max|F| - A) / A * 100. Zero when the peak equals the commanded
// amplitude; throws on an empty trace.
double overshoot_pct(std::span<const double> f_trace, double amplitude_n);

struct FreqBin {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  double mae_n = 0.0;
  std::size_t count = 0;
};

inline constexpr double kBinLoHz = 0.05;
inline constexpr double kBinHiHz = 0.35;
inline constexpr double kBinWidthHz = 0.05;

struct EvalReport {
  double mae_n = 0.0;
  double max_overshoot_pct = 0.0;
  double peak_force_n = 0.0;
  std::vector<FreqBin> bins;  // fixed edges over [0.05, 0.35] Hz
  bool stable = true;         // no e-stop during the episode
  std::vector<std::string> episode_refs;
};

// Report over one recorded episode. Binning assigns each sample by the
// trajectory's analytic instantaneous frequency (never spectral
// estimation); samples outside [0.05, 0.35] Hz are left unbinned but
// still count toward the overall MAE.
EvalReport evaluate_log(const EpisodeLog& log, const TrajectorySpec& spec);

std::string eval_report_json(const EvalReport& report);

}  // namespace seatwin
