#include "seatwin/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "seatwin/pid.hpp"

namespace seatwin {

namespace fs = std::filesystem;

namespace {

// Fixed stream tags off the master seed; keep stable so runs reproduce.
enum StreamTag : std::uint64_t {
  kTagInit = 0,
  kTagAction = 1,
  kTagTrajectory = 2,
  kTagUpdate = 3,
  kTagStack = 4,
  kTagEvalStack = 100,
  kTagEvalAction = 101,
};

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + dir);
}

EpisodeConfig eval_episode_config(const ExperimentConfig& cfg, double duration) {
  EpisodeConfig e = cfg.env;
  e.duration_s = duration;
  e.reset_jitter_rad = 0.0;
  return e;
}

EvalOutcome run_eval_episode(const ExperimentConfig& cfg, ActionSource& agent,
                             const EvalOptions& opts) {
  // Fixed eval streams: every evaluation sees identical plant noise, so
  // scores are comparable across checkpoints.
  SimStack stack = make_stack(cfg, Rng::stream(cfg.seed, kTagEvalStack));
  TrajectorySpec spec = opts.spec;
  double duration = opts.duration_s;
  if (spec.kind == TrajectorySpec::Kind::kChirp) duration = spec.duration_s;

  EvalOutcome out;
  out.log = run_episode(agent, spec, stack, eval_episode_config(cfg, duration));
  out.report = evaluate_log(out.log, spec);
  if (!opts.out_dir.empty()) {
    ensure_dir(opts.out_dir);
    if (opts.write_log) {
      out.log_path = join(opts.out_dir, opts.tag + "_episode.tsv");
      write_episode_log(out.log_path, out.log, spec);
      out.report.episode_refs.push_back(out.log_path);
    }
    out.report_path = join(opts.out_dir, opts.tag + "_report.json");
    std::ofstream rf(out.report_path);
    rf << eval_report_json(out.report);
  }
  return out;
}

Policy policy_from_checkpoint(const Checkpoint& ckpt) {
  Policy policy(ckpt.policy_config);
  if (ckpt.params.size() != policy.param_count())
    throw std::runtime_error(
        "checkpoint: parameter count does not match its network shape");
  std::copy(ckpt.params.begin(), ckpt.params.end(), policy.params().begin());
  return policy;
}

}  // namespace

SimStack make_stack(const ExperimentConfig& cfg, Rng rng) {
  return SimStack(cfg.plant, cfg.nonlinearities, cfg.safety, cfg.transport, rng);
}

Action PolicyAgent::act(const Observation& obs) {
  double mean = 0.0, std = 0.0;
  policy_.actor_forward(obs, &mean, &std);
  double a, lp;
  if (deterministic_ || rng_ == nullptr) {
    a = mean;
    lp = gaussian_logprob(a, mean, std);
  } else {
    const SampledAction s = sample_action(mean, std, *rng_);
    a = s.a;
    lp = s.logprob;
  }
  rec_.obs.push_back(obs.as_vector());
  rec_.actions.push_back(a);
  rec_.logprobs.push_back(lp);
  rec_.values.push_back(policy_.value(obs));
  return Action{a};
}

void PolicyAgent::episode_end(const Observation& terminal_obs, bool) {
  rec_.bootstrap_value = policy_.value(terminal_obs);
}

TrainResult train(const ExperimentConfig& cfg_in, const TrainOptions& opts) {
  ExperimentConfig cfg = cfg_in;
  if (opts.episodes_override) cfg.episodes = *opts.episodes_override;
  cfg.validate();

  const auto t_start = std::chrono::steady_clock::now();
  ensure_dir(opts.out_dir);
  const std::string episodes_dir = join(opts.out_dir, "episodes");
  if (cfg.log_episodes != "none") ensure_dir(episodes_dir);

  Rng rng_init = Rng::stream(cfg.seed, kTagInit);
  Rng rng_action = Rng::stream(cfg.seed, kTagAction);
  Rng rng_traj = Rng::stream(cfg.seed, kTagTrajectory);
  Rng rng_update = Rng::stream(cfg.seed, kTagUpdate);
  Rng rng_stack = Rng::stream(cfg.seed, kTagStack);

  TrainResult result;
  Policy policy(cfg.policy);
  AdamState opt;
  std::int64_t ep0 = 0;
  double carried_encoder_offset = 0.0;

  if (opts.resume_checkpoint) {
    const Checkpoint ckpt = load_checkpoint(*opts.resume_checkpoint);
    policy = policy_from_checkpoint(ckpt);
    opt = ckpt.opt;
    ep0 = ckpt.episode_counter;
    carried_encoder_offset =
        opts.recalibrate_encoder ? 0.0 : ckpt.encoder_offset_rad;
    rng_action.deserialize(ckpt.rng_action);
    rng_traj.deserialize(ckpt.rng_traj);
    rng_update.deserialize(ckpt.rng_update);
    rng_stack.deserialize(ckpt.rng_stack);
  } else {
    policy.init(rng_init);
    opt.resize(policy.param_count());
  }
  result.first_episode = ep0;

  SimStack stack = make_stack(cfg, rng_stack);
  stack.plant_state_mutable().encoder_offset = carried_encoder_offset;

  result.metrics_path = join(opts.out_dir, "train_metrics.tsv");
  result.eval_history_path = join(opts.out_dir, "eval_history.tsv");
  TrainMetricsWriter metrics_writer(result.metrics_path);
  {
    std::ofstream cf(join(opts.out_dir, "config.json"));
    cf << config_to_json(cfg);
  }

  const TrajectorySpec eval_spec = parse_trajectory(cfg.eval_trajectory);
  double best_eval_reward = -std::numeric_limits<double>::infinity();
  RolloutBatch batch;
  batch.policy_version = policy.version();

  struct PendingEpisode {
    std::int64_t index;
    double reward;
    double mae;
    int steps;
    bool estop;
    std::uint64_t actions_dropped;
    std::uint64_t obs_dropped;
  };
  std::vector<PendingEpisode> pending;
  std::int64_t batch_first_episode = ep0;

  auto flush_update = [&]() {
    if (batch.steps.empty()) return;
    const double lr_index = opts.reset_lr_schedule
                                ? static_cast<double>(batch_first_episode - ep0)
                                : static_cast<double>(batch_first_episode);
    const double lr = cfg.ppo.lr_schedule.at(lr_index);
    const UpdateStats stats =
        train_update(batch, policy, opt, cfg.ppo, lr, rng_update);
    for (const auto& pe : pending) {
      TrainMetrics m;
      m.episode = pe.index;
      m.episode_reward = pe.reward;
      m.episode_mae = pe.mae;
      m.episode_steps = pe.steps;
      m.estop = pe.estop;
      m.policy_loss = stats.policy_loss;
      m.value_loss = stats.value_loss;
      m.entropy = stats.entropy;
      m.approx_kl = stats.approx_kl;
      m.lr = stats.lr;
      m.clip_fraction = stats.clip_fraction;
      m.actions_dropped = pe.actions_dropped;
      m.obs_dropped = pe.obs_dropped;
      m.update_skipped = stats.skipped_non_finite;
      result.metrics.push_back(m);
      metrics_writer.append(m);
    }
    pending.clear();
    batch.clear();
    batch.policy_version = policy.version();
  };

  for (int i = 0; i < cfg.episodes; ++i) {
    const std::int64_t global_ep = ep0 + i;
    if (pending.empty()) batch_first_episode = global_ep;

    const TrajectorySpec spec = sample_training_spec(rng_traj);
    PolicyAgent agent(policy, &rng_action, /*deterministic=*/false);
    const EpisodeLog log = run_episode(agent, spec, stack, cfg.env);
    result.sim_seconds += static_cast<double>(log.steps.size()) *
                          stack.transport_config().policy_dt();
    if (stack.estopped()) {
      ++result.estop_episodes;
      // Twin stand-in for the operator procedure: power off, recalibrate
      // the encoder, re-enable.
      stack.manual_reset(/*recalibrate_encoder=*/true);
    }

    const auto& rec = agent.recorded();
    const std::size_t begin = batch.steps.size();
    for (std::size_t k = 0; k < rec.obs.size(); ++k) {
      RolloutStep rs;
      rs.obs = rec.obs[k];
      rs.action = rec.actions[k];
      rs.logprob_old = rec.logprobs[k];
      rs.value_old = rec.values[k];
      // Reward observed after acting: the next row's same-time reward,
      // closing with the terminal read.
      rs.reward = (k + 1 < log.steps.size()) ? log.steps[k + 1].reward
                                             : log.terminal_reward;
      batch.steps.push_back(rs);
    }
    EpisodeSegment seg;
    seg.begin = begin;
    seg.end = batch.steps.size();
    seg.bootstrap_value = rec.bootstrap_value;
    seg.estop_terminated = log.estop_truncated;
    seg.episode_reward = log.total_reward;
    seg.episode_mae = log.mae_n;
    batch.episodes.push_back(seg);

    pending.push_back({global_ep, log.total_reward, log.mae_n,
                       static_cast<int>(log.steps.size()), log.estop_truncated,
                       log.actions_dropped, log.obs_dropped});

    if (cfg.log_episodes == "all") {
      char name[64];
      std::snprintf(name, sizeof(name), "train_ep%06lld.tsv",
                    static_cast<long long>(global_ep));
      write_episode_log(join(episodes_dir, name), log, spec);
    }

    if (batch.ready(cfg.ppo.train_batch_min_steps)) flush_update();

    if (cfg.eval_every > 0 && (i + 1) % cfg.eval_every == 0) {
      // Evaluate the policy as deployed: stochastic actions from a fixed
      // stream, so eval scores are comparable across checkpoints.
      Rng eval_action_rng = Rng::stream(cfg.seed, kTagEvalAction);
      PolicyAgent eval_agent(policy, &eval_action_rng, /*deterministic=*/false);
      EvalOptions ev;
      ev.spec = eval_spec;
      ev.duration_s = cfg.eval_duration_s;
      ev.write_log = (cfg.log_episodes != "none");
      if (ev.write_log) {
        ev.out_dir = episodes_dir;
        char tag[64];
        std::snprintf(tag, sizeof(tag), "eval_ep%06lld",
                      static_cast<long long>(global_ep + 1));
        ev.tag = tag;
      }
      const EvalOutcome oc = run_eval_episode(cfg, eval_agent, ev);
      result.evals.push_back({global_ep + 1, oc.report.mae_n,
                              oc.log.total_reward, oc.log.estop_truncated});
      if (oc.log.total_reward > best_eval_reward) {
        best_eval_reward = oc.log.total_reward;
        Checkpoint best;
        best.policy_config = cfg.policy;
        best.params.assign(policy.params().begin(), policy.params().end());
        best.opt = opt;
        best.episode_counter = global_ep + 1;
        best.policy_version = policy.version();
        best.encoder_offset_rad = stack.plant_state().encoder_offset;
        best.rng_action = rng_action.serialize();
        best.rng_traj = rng_traj.serialize();
        best.rng_update = rng_update.serialize();
        best.rng_stack = rng_stack.serialize();
        best.seed = cfg.seed;
        result.best_checkpoint_path = join(opts.out_dir, "checkpoint_best.stw");
        save_checkpoint(result.best_checkpoint_path, best);
      }
    }
  }
  flush_update();
  metrics_writer.flush();
  write_eval_history(result.eval_history_path, result.evals);

  Checkpoint ckpt;
  ckpt.policy_config = cfg.policy;
  ckpt.params.assign(policy.params().begin(), policy.params().end());
  ckpt.opt = opt;
  ckpt.episode_counter = ep0 + cfg.episodes;
  ckpt.policy_version = policy.version();
  ckpt.encoder_offset_rad = stack.plant_state().encoder_offset;
  ckpt.rng_action = rng_action.serialize();
  ckpt.rng_traj = rng_traj.serialize();
  ckpt.rng_update = rng_update.serialize();
  ckpt.rng_stack = rng_stack.serialize();
  ckpt.seed = cfg.seed;
  result.checkpoint_path = join(opts.out_dir, "checkpoint_final.stw");
  save_checkpoint(result.checkpoint_path, ckpt);

  if (opts.reward_threshold) {
    const double thr = *opts.reward_threshold;
    const int window = 20;
    for (std::size_t i = 0; i + window <= result.metrics.size(); ++i) {
      double m = 0.0;
      for (int j = 0; j < window; ++j)
        m += result.metrics[i + j].episode_reward;
      if (m / window >= thr) {
        result.episodes_to_threshold =
            result.metrics[i + window - 1].episode - ep0 + 1;
        break;
      }
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  {
    std::ofstream sf(join(opts.out_dir, "run_summary.json"));
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\n  \"episodes\": %d,\n  \"wall_seconds\": %.3f,\n"
                  "  \"sim_seconds\": %.3f,\n  \"estop_episodes\": %d,\n"
                  "  \"episodes_to_threshold\": %lld\n}\n",
                  cfg.episodes, result.wall_seconds, result.sim_seconds,
                  result.estop_episodes,
                  static_cast<long long>(result.episodes_to_threshold));
    sf << buf;
  }
  return result;
}

EvalOutcome eval_policy(const ExperimentConfig& cfg, const Checkpoint& ckpt,
                        const EvalOptions& opts) {
  const Policy policy = policy_from_checkpoint(ckpt);
  Rng action_rng = Rng::stream(cfg.seed, kTagEvalAction);
  PolicyAgent agent(policy, &action_rng, /*deterministic=*/opts.deterministic);
  return run_eval_episode(cfg, agent, opts);
}

EvalOutcome eval_pid(const ExperimentConfig& cfg, const EvalOptions& opts) {
  PidController pid(cfg.pid, cfg.transport.policy_dt());
  return run_eval_episode(cfg, pid, opts);
}

CompareOutcome compare_chirp(const ExperimentConfig& cfg, const Checkpoint& ckpt,
                             const std::string& out_dir,
                             std::optional<TrajectorySpec> spec_opt) {
  const TrajectorySpec spec =
      spec_opt.value_or(TrajectorySpec::chirp(50.0, 0.05, 0.35, 60.0));
  ensure_dir(out_dir);

  CompareOutcome out;
  EvalOptions ev;
  ev.spec = spec;
  ev.out_dir = out_dir;
  ev.tag = "drl_chirp";
  out.drl = eval_policy(cfg, ckpt, ev);
  ev.tag = "pid_chirp";
  out.pid = eval_pid(cfg, ev);

  out.table_path = join(out_dir, "compare_chirp.tsv");
  std::FILE* f = std::fopen(out.table_path.c_str(), "w");
  if (f == nullptr)
    throw std::runtime_error("cannot open " + out.table_path + " for writing");
  std::fprintf(f, "# seatwin-compare-chirp v1\nt\tf_inst\tabs_err_drl\tabs_err_pid\n");
  const std::size_t n =
      std::min(out.drl.log.steps.size(), out.pid.log.steps.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = out.drl.log.steps[i];
    const auto& p = out.pid.log.steps[i];
    std::fprintf(f, "%s\t%s\t%s\t%s\n", format_double(d.t).c_str(),
                 format_double(instantaneous_freq(spec, d.t)).c_str(),
                 format_double(std::abs(d.f_des - d.f)).c_str(),
                 format_double(std::abs(p.f_des - p.f)).c_str());
  }
  std::fclose(f);
  return out;
}

ReplayOutcome replay(const std::string& log_path, double reward_divisor) {
  const LoadedEpisodeLog loaded = read_episode_log(log_path);
  const auto& steps = loaded.log.steps;
  ReplayOutcome out;
  out.stored_total_reward = loaded.stored_total_reward;
  out.stored_mae_n = loaded.stored_mae_n;

  EpisodeLog recomputed = loaded.log;
  recomputed.total_reward = 0.0;
  recomputed.peak_abs_force_n = 0.0;
  double abs_err = 0.0;
  double max_reward_dev = 0.0;
  for (const auto& s : steps) {
    const double r = reward(s.f_des, s.f, reward_divisor);
    max_reward_dev = std::max(max_reward_dev, std::abs(r - s.reward));
    recomputed.total_reward += r;
    abs_err += std::abs(s.f_des - s.f);
    recomputed.peak_abs_force_n =
        std::max(recomputed.peak_abs_force_n, std::abs(s.f));
  }
  recomputed.mae_n = steps.empty() ? 0.0 : abs_err / steps.size();
  out.recomputed_total_reward = recomputed.total_reward;
  out.recomputed_mae_n = recomputed.mae_n;
  out.reward_mismatch =
      max_reward_dev > 1e-9 ||
      std::abs(out.recomputed_total_reward - out.stored_total_reward) > 1e-9;

  // Derivative-chain invariant: q_dot and q_ddot must be the exact
  // difference quotients of the measured-angle column.
  if (steps.size() >= 2) {
    const double dt = steps[1].t - steps[0].t;
    double prev_qdot = steps[0].q_dot;
    for (std::size_t i = 1; i < steps.size(); ++i) {
      const double qd = (steps[i].q_meas - steps[i - 1].q_meas) / dt;
      const double qdd = (qd - prev_qdot) / dt;
      if (qd != steps[i].q_dot || qdd != steps[i].q_ddot) {
        out.derivative_mismatch = true;
        break;
      }
      prev_qdot = qd;
    }
  }

  out.recomputed = evaluate_log(recomputed, loaded.spec);
  return out;
}

void emit_plot_data(const std::string& run_dir, const std::string& out_dir,
                    const std::optional<std::string>& episode_log) {
  ensure_dir(out_dir);
  const auto metrics = read_train_metrics(join(run_dir, "train_metrics.tsv"));

  {
    std::FILE* f = std::fopen(join(out_dir, "plot_reward.tsv").c_str(), "w");
    std::fprintf(f, "episode\treward\trolling20\n");
    double acc = 0.0;
    std::vector<double> window;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      window.push_back(metrics[i].episode_reward);
      acc += metrics[i].episode_reward;
      if (window.size() > 20) {
        acc -= window.front();
        window.erase(window.begin());
      }
      std::fprintf(f, "%lld\t%s\t%s\n",
                   static_cast<long long>(metrics[i].episode),
                   format_double(metrics[i].episode_reward).c_str(),
                   format_double(acc / window.size()).c_str());
    }
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen(join(out_dir, "plot_entropy.tsv").c_str(), "w");
    std::fprintf(f, "episode\tentropy\n");
    for (const auto& m : metrics)
      std::fprintf(f, "%lld\t%s\n", static_cast<long long>(m.episode),
                   format_double(m.entropy).c_str());
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen(join(out_dir, "plot_kl.tsv").c_str(), "w");
    std::fprintf(f, "episode\tapprox_kl\n");
    for (const auto& m : metrics)
      std::fprintf(f, "%lld\t%s\n", static_cast<long long>(m.episode),
                   format_double(m.approx_kl).c_str());
    std::fclose(f);
  }
  if (episode_log) {
    const LoadedEpisodeLog loaded = read_episode_log(*episode_log);
    std::FILE* f = std::fopen(join(out_dir, "plot_tracking.tsv").c_str(), "w");
    std::fprintf(f, "t\tf_des\tf\tabs_err\n");
    for (const auto& s : loaded.log.steps)
      std::fprintf(f, "%s\t%s\t%s\t%s\n", format_double(s.t).c_str(),
                   format_double(s.f_des).c_str(), format_double(s.f).c_str(),
                   format_double(std::abs(s.f_des - s.f)).c_str());
    std::fclose(f);
  }
}

double reward_threshold_from_metrics(std::span<const TrainMetrics> metrics,
                                     int window) {
  if (static_cast<int>(metrics.size()) < window)
    throw std::invalid_argument("reward threshold: history shorter than window");
  double first = 0.0;
  for (int i = 0; i < window; ++i) first += metrics[i].episode_reward;
  first /= window;
  double best = first;
  for (std::size_t i = 0; i + window <= metrics.size(); ++i) {
    double m = 0.0;
    for (int j = 0; j < window; ++j) m += metrics[i + j].episode_reward;
    best = std::max(best, m / window);
  }
  return first + 0.9 * (best - first);
}

}  // namespace seatwin
