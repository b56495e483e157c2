#pragma once

#include <string>
#include <vector>

#include "seatwin/env.hpp"
#include "seatwin/ppo.hpp"
#include "seatwin/trajectory.hpp"

namespace seatwin {

// Episode logs and run metrics are tab-separated text with '#' header
// lines; column orders are documented in the README and frozen — parsers
// reject unknown layouts.

void write_episode_log(const std::string& path, const EpisodeLog& log,
                       const TrajectorySpec& spec);

struct LoadedEpisodeLog {
  EpisodeLog log;
  TrajectorySpec spec;
  // Summary values as stored in the header, for cross-checking against
  // recomputation.
  double stored_total_reward = 0.0;
  double stored_mae_n = 0.0;
  double stored_peak_abs_force_n = 0.0;
};

LoadedEpisodeLog read_episode_log(const std::string& path);

class TrainMetricsWriter {
 public:
  explicit TrainMetricsWriter(const std::string& path);
  ~TrainMetricsWriter();
  void append(const TrainMetrics& m);
  void flush();

 private:
  std::FILE* f_ = nullptr;
};

std::vector<TrainMetrics> read_train_metrics(const std::string& path);

struct EvalPoint {
  std::int64_t episode = 0;
  double mae_n = 0.0;
  double total_reward = 0.0;
  bool estop = false;
};

void write_eval_history(const std::string& path,
                        const std::vector<EvalPoint>& points);
std::vector<EvalPoint> read_eval_history(const std::string& path);

std::string format_double(double v);  // round-trippable %.17g

}  // namespace seatwin
