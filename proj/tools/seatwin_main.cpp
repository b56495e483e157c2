#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seatwin/harness.hpp"

namespace {

using namespace seatwin;

struct CommonArgs {
  std::string preset = "desk";
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::string out_dir = "out";
  std::string trajectory;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_trajectory) {
  cmd->add_option("--preset", args.preset, "Base preset: desk or paper-scale")
      ->check(CLI::IsMember({"desk", "paper-scale"}));
  cmd->add_option("--config", args.config_path,
                  "JSON config overlaid on the preset");
  cmd->add_option("--seed", args.seed, "Master seed (overrides config)");
  cmd->add_option("--episodes", args.episodes, "Episode budget override");
  cmd->add_option("--out", args.out_dir, "Output directory");
  if (with_trajectory)
    cmd->add_option("--trajectory", args.trajectory,
                    "sine:<freq>,<amp> or chirp:<f0>,<f1>,<T>,<amp>");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg = preset_by_name(args.preset);
  if (!args.config_path.empty()) cfg = load_config_file(args.config_path, cfg);
  if (args.seed) cfg.seed = *args.seed;
  if (args.episodes) cfg.episodes = *args.episodes;
  cfg.validate();
  return cfg;
}

EvalOptions make_eval_options(const CommonArgs& args,
                              const ExperimentConfig& cfg,
                              const std::string& tag) {
  EvalOptions ev;
  ev.spec = parse_trajectory(args.trajectory.empty() ? cfg.eval_trajectory
                                                     : args.trajectory);
  ev.duration_s = cfg.eval_duration_s;
  ev.out_dir = args.out_dir;
  ev.tag = tag;
  return ev;
}

int report_eval(const EvalOutcome& oc, const char* name, bool allow_estop) {
  std::printf("%s: mae=%.4f N overshoot=%.2f%% peak=%.2f N stable=%s\n", name,
              oc.report.mae_n, oc.report.max_overshoot_pct,
              oc.report.peak_force_n, oc.report.stable ? "yes" : "NO (e-stop)");
  for (const auto& b : oc.report.bins)
    if (b.count > 0)
      std::printf("  bin %.2f-%.2f Hz: mae=%.4f N (%zu samples)\n", b.lo_hz,
                  b.hi_hz, b.mae_n, b.count);
  if (!oc.report.stable && !allow_estop) {
    std::fprintf(stderr, "%s: episode ended in e-stop\n", name);
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SEA pendulum force-control learning testbed"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string checkpoint_path;
  std::string log_path;
  std::string run_dir;
  bool allow_estop = false;
  bool deterministic_eval = false;
  bool recalibrate = false;
  bool reset_lr = false;
  std::optional<double> reward_threshold;

  auto* c_train = app.add_subcommand("train", "Train a policy from scratch");
  add_common(c_train, args, false);

  auto* c_eval = app.add_subcommand("eval", "Evaluate a trained policy");
  add_common(c_eval, args, true);
  c_eval->add_option("--checkpoint", checkpoint_path, "Policy checkpoint")
      ->required();
  c_eval->add_flag("--allow-estop", allow_estop,
                   "Exit 0 even if the episode e-stops");
  c_eval->add_flag("--deterministic", deterministic_eval,
                   "Use the policy mean instead of sampled actions");

  auto* c_pid = app.add_subcommand("pid-eval", "Evaluate the PID baseline");
  add_common(c_pid, args, true);
  c_pid->add_flag("--allow-estop", allow_estop,
                  "Exit 0 even if the episode e-stops");

  auto* c_cmp = app.add_subcommand(
      "compare-chirp", "Paired DRL/PID run on the 50 N 0.05-0.35 Hz chirp");
  add_common(c_cmp, args, true);
  c_cmp->add_option("--checkpoint", checkpoint_path, "Policy checkpoint")
      ->required();

  auto* c_fine = app.add_subcommand("finetune", "Resume training a checkpoint");
  add_common(c_fine, args, false);
  c_fine->add_option("--checkpoint", checkpoint_path, "Checkpoint to resume")
      ->required();
  c_fine->add_flag("--recalibrate", recalibrate,
                   "Zero the carried encoder offset before training");
  c_fine->add_flag("--reset-lr-schedule", reset_lr,
                   "Restart the learning-rate decay from episode 0");
  c_fine->add_option("--reward-threshold", reward_threshold,
                     "Record episodes until this rolling-20 mean reward");

  auto* c_replay = app.add_subcommand(
      "replay", "Recompute metrics from a stored episode log");
  c_replay->add_option("--log", log_path, "Episode log (TSV)")->required();

  auto* c_plot = app.add_subcommand("emit-plot-data",
                                    "Tabular series for external plotting");
  c_plot->add_option("--run", run_dir, "Run directory with train_metrics.tsv")
      ->required();
  c_plot->add_option("--out", args.out_dir, "Output directory");
  c_plot->add_option("--log", log_path, "Optional episode log for a trace");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_train->parsed() || c_fine->parsed()) {
      const ExperimentConfig cfg = resolve_config(args);
      TrainOptions topts;
      topts.out_dir = args.out_dir;
      if (c_fine->parsed()) {
        topts.resume_checkpoint = checkpoint_path;
        topts.recalibrate_encoder = recalibrate;
        topts.reset_lr_schedule = reset_lr;
        topts.reward_threshold = reward_threshold;
      }
      const TrainResult res = train(cfg, topts);
      double last_mean = 0.0;
      const int tail = std::min<std::size_t>(20, res.metrics.size());
      for (int i = 0; i < tail; ++i)
        last_mean += res.metrics[res.metrics.size() - 1 - i].episode_reward;
      if (tail > 0) last_mean /= tail;
      std::printf(
          "trained %zu episodes in %.1f s (%.1fx real time); last-%d mean "
          "reward %.4f; e-stops %d\n",
          res.metrics.size(), res.wall_seconds,
          res.sim_seconds / std::max(res.wall_seconds, 1e-9), tail, last_mean,
          res.estop_episodes);
      std::printf("checkpoint: %s\nmetrics: %s\n", res.checkpoint_path.c_str(),
                  res.metrics_path.c_str());
      if (reward_threshold)
        std::printf("episodes_to_threshold: %lld\n",
                    static_cast<long long>(res.episodes_to_threshold));
      return 0;
    }
    if (c_eval->parsed()) {
      const ExperimentConfig cfg = resolve_config(args);
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      EvalOptions ev = make_eval_options(args, cfg, "eval");
      ev.deterministic = deterministic_eval;
      const EvalOutcome oc = eval_policy(cfg, ckpt, ev);
      return report_eval(oc, "drl", allow_estop);
    }
    if (c_pid->parsed()) {
      const ExperimentConfig cfg = resolve_config(args);
      const EvalOutcome oc = eval_pid(cfg, make_eval_options(args, cfg, "pid"));
      return report_eval(oc, "pid", allow_estop);
    }
    if (c_cmp->parsed()) {
      const ExperimentConfig cfg = resolve_config(args);
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      std::optional<TrajectorySpec> spec;
      if (!args.trajectory.empty()) spec = parse_trajectory(args.trajectory);
      const CompareOutcome oc = compare_chirp(cfg, ckpt, args.out_dir, spec);
      const int rc_drl = report_eval(oc.drl, "drl", true);
      const int rc_pid = report_eval(oc.pid, "pid", true);
      std::printf("table: %s\n", oc.table_path.c_str());
      if (!oc.drl.report.stable || !oc.pid.report.stable)
        return rc_drl != 0 ? rc_drl : rc_pid;
      return 0;
    }
    if (c_replay->parsed()) {
      const ReplayOutcome oc = replay(log_path);
      std::printf("recomputed: mae=%.6f N reward=%.9f (stored mae=%.6f "
                  "reward=%.9f)\n",
                  oc.recomputed_mae_n, oc.recomputed_total_reward,
                  oc.stored_mae_n, oc.stored_total_reward);
      if (oc.derivative_mismatch)
        std::fprintf(stderr,
                     "replay: derivative columns do not match the measured "
                     "angle sequence\n");
      if (oc.reward_mismatch)
        std::fprintf(stderr,
                     "replay: stored rewards do not match the force columns\n");
      return (oc.reward_mismatch || oc.derivative_mismatch) ? 2 : 0;
    }
    if (c_plot->parsed()) {
      emit_plot_data(run_dir, args.out_dir,
                     log_path.empty() ? std::nullopt
                                      : std::optional<std::string>(log_path));
      std::printf("plot data written to %s\n", args.out_dir.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
