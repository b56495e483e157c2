#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seatwin/checkpoint.hpp"
#include "seatwin/config.hpp"
#include "seatwin/logio.hpp"
#include "seatwin/metrics.hpp"
#include "seatwin/ppo.hpp"

namespace seatwin {

// ActionSource over a Policy: Gaussian sampling during training,
// deterministic mean in evaluation mode. Records the per-step data the
// trainer needs for its batch.
class PolicyAgent final : public ActionSource {
 public:
  PolicyAgent(const Policy& policy, Rng* rng, bool deterministic)
      : policy_(policy), rng_(rng), deterministic_(deterministic) {}

  Action act(const Observation& obs) override;
  void episode_end(const Observation& terminal_obs, bool estopped) override;

  struct Recorded {
    std::vector<std::array<double, kObsDim>> obs;
    std::vector<double> actions;
    std::vector<double> logprobs;
    std::vector<double> values;
    double bootstrap_value = 0.0;
  };
  const Recorded& recorded() const { return rec_; }
  void clear() { rec_ = Recorded{}; }

 private:
  const Policy& policy_;
  Rng* rng_;
  bool deterministic_;
  Recorded rec_;
};

struct TrainOptions {
  std::string out_dir = "out";
  std::optional<std::string> resume_checkpoint;
  bool recalibrate_encoder = false;  // zero the carried encoder offset
  bool reset_lr_schedule = false;    // finetune: restart the decay at 0
  std::optional<int> episodes_override;
  std::optional<double> reward_threshold;  // episodes-to-threshold probe
};

struct TrainResult {
  std::vector<TrainMetrics> metrics;
  std::vector<EvalPoint> evals;
  std::string checkpoint_path;
  std::string best_checkpoint_path;  // best scheduled-eval reward
  std::string metrics_path;
  std::string eval_history_path;
  double wall_seconds = 0.0;
  double sim_seconds = 0.0;
  std::int64_t first_episode = 0;
  std::int64_t episodes_to_threshold = -1;  // -1: no threshold or not reached
  int estop_episodes = 0;
};

TrainResult train(const ExperimentConfig& cfg, const TrainOptions& opts);

struct EvalOptions {
  TrajectorySpec spec;
  double duration_s = 20.0;
  std::string out_dir;
  std::string tag = "eval";  // file name stem
  // Default mirrors deployment: actions sampled from the policy's
  // distribution (from a fixed eval stream). Deterministic mode uses the
  // mean and is mainly a debugging view; on this plant the mean policy
  // loses the sampling dither that works the actuator through stiction.
  bool deterministic = false;
  bool write_log = true;
};

struct EvalOutcome {
  EvalReport report;
  EpisodeLog log;
  std::string log_path;
  std::string report_path;
};

EvalOutcome eval_policy(const ExperimentConfig& cfg, const Checkpoint& ckpt,
                        const EvalOptions& opts);
EvalOutcome eval_pid(const ExperimentConfig& cfg, const EvalOptions& opts);

struct CompareOutcome {
  EvalOutcome drl;
  EvalOutcome pid;
  std::string table_path;  // t, f_inst, |err| for both controllers
};

// Paired run on the 50 N, 0.05->0.35 Hz chirp (or a caller-provided
// chirp spec) with identical plant seeds for both controllers.
CompareOutcome compare_chirp(const ExperimentConfig& cfg, const Checkpoint& ckpt,
                             const std::string& out_dir,
                             std::optional<TrajectorySpec> spec = std::nullopt);

struct ReplayOutcome {
  EvalReport recomputed;
  double stored_total_reward = 0.0;
  double recomputed_total_reward = 0.0;
  double stored_mae_n = 0.0;
  double recomputed_mae_n = 0.0;
  bool reward_mismatch = false;
  bool derivative_mismatch = false;
};

// Recomputes every derived quantity of a stored episode log from its
// raw columns and cross-checks the stored values.
ReplayOutcome replay(const std::string& log_path, double reward_divisor = 1e6);

// Tabular series for external plotting: reward/entropy/KL curves from a
// run's metrics file, and a tracking trace when an episode log is given.
void emit_plot_data(const std::string& run_dir, const std::string& out_dir,
                    const std::optional<std::string>& episode_log = std::nullopt);

// Convergence threshold derived from a reference run: first-20 mean plus
// 90% of the improvement to the best rolling-20 mean.
double reward_threshold_from_metrics(std::span<const TrainMetrics> metrics,
                                     int window = 20);

// Builds the stack/policy plumbing shared by train and the evals.
SimStack make_stack(const ExperimentConfig& cfg, Rng rng);

}  // namespace seatwin
