// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails. Expensive artifacts (the desk training run) are
// produced once and shared by later criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "seatwin/harness.hpp"
#include "seatwin/pid.hpp"

using namespace seatwin;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, bool pass, const std::string& what) {
  std::printf("C%02d %s  %s\n", index, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable:" + path + ">";
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------- C1
void c1_reward_law() {
  Rng rng(101);
  bool exact = true, nonpositive = true;
  for (int i = 0; i < 10000; ++i) {
    const double fd = rng.uniform(-300.0, 300.0);
    const double f = rng.uniform(-300.0, 300.0);
    const double r = reward(fd, f, 1e6);
    const double expect = -((fd - f) * (fd - f)) / 1e6;
    if (r != expect) exact = false;
    if (r > 0.0) nonpositive = false;
  }
  report(1, exact && nonpositive,
         "reward law: 1e4 random pairs match -(Fd-F)^2/1e6 exactly, all <= 0");
}

// ---------------------------------------------------------------- C2
void c2_gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();

  PolicyConfig pc;
  pc.hidden = {8, 8};
  pc.obs_scale = {1.0, 1.0, 1.0, 1.0, 1.0};
  pc.log_std_init = 0.0;
  Policy policy(pc);
  Rng rng(202);
  policy.init(rng);
  PpoConfig cfg;
  cfg.entropy_coeff = 0.01;

  const int n = 32;
  std::vector<double> obs(5 * n), scaled(5 * n), actions(n), lp_old(n), adv(n),
      ret(n);
  for (double& v : obs) v = rng.uniform(-1.5, 1.5);
  policy.scale_obs(obs, scaled);
  {
    Mlp::Workspace ws;
    std::vector<double> means(n);
    policy.actor_means(scaled, n, means, ws);
    for (int i = 0; i < n; ++i) {
      actions[i] = means[i] + 0.8 * rng.normal();
      lp_old[i] = gaussian_logprob(actions[i], means[i] + 0.03 * rng.normal(),
                                   std::exp(policy.log_std()) * 1.05);
      adv[i] = rng.uniform(-2.0, 2.0);
      ret[i] = rng.uniform(-0.5, 0.5);
    }
  }
  const LossBatch batch{scaled, actions, lp_old, adv, ret};
  std::vector<double> grads(policy.param_count(), 0.0);
  ppo_loss(policy, batch, cfg, grads);

  const double h = 1e-5;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < policy.param_count(); ++i) {
    const double keep = policy.params()[i];
    policy.params()[i] = keep + h;
    const double up = ppo_loss(policy, batch, cfg, {}).total;
    policy.params()[i] = keep - h;
    const double dn = ppo_loss(policy, batch, cfg, {}).total;
    policy.params()[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grads[i]), 1e-7});
    max_rel = std::max(max_rel, std::abs(fd - grads[i]) / denom);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(2, max_rel < 1e-4 && secs < 10.0,
         fmt("PPO gradient vs central differences: max rel err %.3g "
             "(< 1e-4), %.2f s (< 10 s)",
             max_rel, secs));
}

// ---------------------------------------------------------------- C3
void c3_gae_oracle() {
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 20;
    std::vector<double> rewards(n), values(n), adv(n), ret(n);
    for (double& x : rewards) x = rng.uniform(-1.0, 1.0);
    for (double& x : values) x = rng.uniform(-1.0, 1.0);
    const double bootstrap = rng.uniform(-1.0, 1.0);
    const double gamma = rng.uniform(0.8, 1.0);
    compute_gae(rewards, values, bootstrap, gamma, 1.0, adv, ret);
    double acc = bootstrap;
    for (int i = n - 1; i >= 0; --i) {
      acc = rewards[i] + gamma * acc;  // brute-force discounted return
      worst = std::max(worst, std::abs(adv[i] - (acc - values[i])));
    }
  }
  report(3, worst < 1e-10,
         fmt("GAE lambda=1 vs brute-force returns on 20 sequences: max dev "
             "%.2e (< 1e-10)",
             worst));
}

// ---------------------------------------------------------------- C4
void c4_lr_schedule() {
  LrSchedule sched;  // full-scale decay profile
  const bool ends = sched.at(0) == 5e-5 && sched.at(1280) == 5e-6 &&
                    sched.at(2048) == 1e-7 && sched.at(5000) == 1e-7;
  const double mid = sched.at(640);
  const bool midpoint = std::abs(mid - 2.75e-5) <= 1e-13 * 2.75e-5;
  report(4, ends && midpoint,
         fmt("LR schedule: 5e-5/5e-6/1e-7 at 0/1280/2048 exact; episode 640 "
             "-> %.17g",
             mid));
}

// ---------------------------------------------------------------- C5
void c5_safety_soak() {
  const ExperimentConfig cfg = desk_preset();
  SimStack stack = make_stack(cfg, Rng::stream(505, 0));
  Rng policy_rng(506);

  struct RandomPolicy final : ActionSource {
    Rng* rng = nullptr;
    double sat = 0.75;
    Action act(const Observation&) override {
      return Action{rng->uniform(-sat, sat)};
    }
  } policy;
  policy.rng = &policy_rng;
  policy.sat = cfg.safety.action_sat_a;

  bool bounds_ok = true;
  bool estop_seen = false;
  long long excursions = 0, recoveries = 0;
  bool in_recovery = false;
  stack.tick_audit = [&](const TickRecord& r) {
    switch (r.mode) {
      case SafetyMode::kNominal:
        if (!(std::abs(r.applied_a) <= cfg.safety.action_sat_a))
          bounds_ok = false;
        if (in_recovery) {
          in_recovery = false;
          ++recoveries;
        }
        break;
      case SafetyMode::kBoundaryRecovery:
        if (!(std::abs(r.applied_a) <= cfg.safety.restoring_current_a))
          bounds_ok = false;
        if (!in_recovery) {
          in_recovery = true;
          ++excursions;
        }
        break;
      case SafetyMode::kEstopped:
        estop_seen = true;
        if (r.applied_a != 0.0) bounds_ok = false;
        break;
    }
    if (!(std::abs(r.applied_a) <= cfg.safety.supply_clamp_a)) bounds_ok = false;
  };

  Rng traj_rng(507);
  int incomplete = 0;
  bool unrecovered = false;
  for (int ep = 0; ep < 100; ++ep) {
    in_recovery = false;
    const EpisodeLog log =
        run_episode(policy, sample_training_spec(traj_rng), stack, cfg.env);
    if (log.estop_truncated) ++incomplete;
    // An excursion still active at episode end never recovered.
    if (in_recovery) unrecovered = true;
  }
  report(5, bounds_ok && !estop_seen && incomplete == 0 && !unrecovered,
         fmt("safety soak: 100 random episodes, %lld boundary excursions, "
             "%lld recoveries, zero e-stops, per-mode bounds exact",
             excursions, recoveries));
}

// ---------------------------------------------------------------- C6
void c6_estop_latching() {
  const SafetyConfig cfg;
  bool ok = true;

  // Adversarial measured-position ramp past +-0.35 rad.
  {
    SafetyState s;
    for (double q : {0.1, 0.2, 0.3, 0.34, 0.355, 0.37})
      s = supervise(q, 0.0, 0.75, s, cfg).state;
    if (s.mode != SafetyMode::kEstopped) ok = false;
    for (int i = 0; i < 1000; ++i) {
      const auto r = supervise(0.0, 0.0, 0.75, s, cfg);
      if (r.applied_a != 0.0) ok = false;
      s = r.state;
    }
    s = manual_reset(s);
    if (supervise(0.0, 0.0, 0.5, s, cfg).applied_a != 0.5) ok = false;
  }

  // Adversarial force spike past +-1700 N.
  {
    SafetyState s;
    for (double f : {100.0, 900.0, 1500.0, -1750.0})
      s = supervise(0.0, f, 0.1, s, cfg).state;
    if (s.mode != SafetyMode::kEstopped) ok = false;
    for (int i = 0; i < 1000; ++i) {
      const auto r = supervise(0.0, 0.0, -0.75, s, cfg);
      if (r.applied_a != 0.0) ok = false;
      s = r.state;
    }
  }

  // Through the full stack: an encoder-slip jump carries the measured
  // angle over the hard bound; every applied current after the latch is
  // exactly zero until the manual reset.
  {
    ExperimentConfig ecfg = desk_preset();
    SimStack stack = make_stack(ecfg, Rng(606));
    bool post_latch_zero = true;
    bool latched = false;
    stack.tick_audit = [&](const TickRecord& r) {
      if (latched && r.applied_a != 0.0) post_latch_zero = false;
      if (r.mode == SafetyMode::kEstopped) latched = true;
    };
    for (int t = 0; t < 50; ++t) {
      stack.exchange(0.5);
      stack.run_policy_interval();
      if (t == 10) stack.plant_state_mutable().encoder_offset = 0.4;  // slip
    }
    if (!stack.estopped() || !latched || !post_latch_zero) ok = false;
    stack.manual_reset(/*recalibrate_encoder=*/true);
    if (stack.estopped() || stack.plant_state().encoder_offset != 0.0)
      ok = false;
  }

  report(6, ok,
         "e-stop latching: position/force/slip faults zero all subsequent "
         "currents until manual reset");
}

struct DeskArtifacts {
  TrainResult result;
  std::string out_dir;
  ExperimentConfig cfg;
};

// ---------------------------------------------------------------- C7
DeskArtifacts c7_desk_learning(const std::string& root) {
  DeskArtifacts art;
  art.cfg = desk_preset();
  art.out_dir = root + "/desk_run_a";
  TrainOptions opts;
  opts.out_dir = art.out_dir;
  art.result = train(art.cfg, opts);

  const auto& m = art.result.metrics;
  bool ok = m.size() == 300;

  const double realtime_factor =
      art.result.sim_seconds / std::max(art.result.wall_seconds, 1e-9);
  const bool fast_enough =
      art.result.wall_seconds <= 1800.0 && realtime_factor >= 10.0;

  double first20 = 0.0, last20 = 0.0;
  for (std::size_t i = 0; i < 20 && i < m.size(); ++i) {
    first20 += m[i].episode_reward / 20.0;
    last20 += m[m.size() - 20 + i].episode_reward / 20.0;
  }
  const bool reward_improved = std::abs(last20) <= 0.5 * std::abs(first20);

  const auto& evals = art.result.evals;
  bool mae_dropped = false;
  double early_mae = 0.0, late_mae = 0.0;
  if (!evals.empty()) {
    early_mae = evals.front().mae_n;
    late_mae = evals.back().mae_n;
    mae_dropped = late_mae <= 0.6 * early_mae;
  }

  ok = ok && fast_enough && reward_improved && mae_dropped;
  report(7, ok,
         fmt("desk learning: %.0f s wall (%.1fx RT, need >=10x), reward "
             "%.1f -> %.1f (need |last20| <= 0.5|first20|), eval MAE %.2f -> "
             "%.2f N (need <= 0.6x)",
             art.result.wall_seconds, realtime_factor, first20, last20,
             early_mae, late_mae));
  return art;
}

// ---------------------------------------------------------------- C8
// The comparison policy is trained to convergence by the suite itself:
// a desk run plus two low-rate annealing legs that shrink the sampling
// noise while the KL guard holds the policy near its optimum. Each leg
// resumes the previous leg's best checkpoint.
void c8_chirp_comparison(const std::string& root) {
  ExperimentConfig cfg = desk_preset();
  cfg.seed = 1;

  TrainOptions leg1;
  leg1.out_dir = root + "/chirp_policy_leg1";
  const TrainResult r1 = train(cfg, leg1);

  ExperimentConfig anneal2 = cfg;
  anneal2.eval_every = 25;
  anneal2.ppo.lr_schedule.breakpoints = {{0.0, 8e-6}, {2000.0, 8e-6}};
  anneal2.ppo.kl_early_stop = 0.008;
  TrainOptions leg2;
  leg2.out_dir = root + "/chirp_policy_leg2";
  leg2.resume_checkpoint = r1.best_checkpoint_path.empty()
                               ? r1.checkpoint_path
                               : r1.best_checkpoint_path;
  const TrainResult r2 = train(anneal2, leg2);

  ExperimentConfig anneal3 = cfg;
  anneal3.eval_every = 25;
  anneal3.ppo.lr_schedule.breakpoints = {{0.0, 5e-6}, {2000.0, 5e-6}};
  anneal3.ppo.kl_early_stop = 0.006;
  TrainOptions leg3;
  leg3.out_dir = root + "/chirp_policy_leg3";
  leg3.resume_checkpoint = r2.best_checkpoint_path.empty()
                               ? r2.checkpoint_path
                               : r2.best_checkpoint_path;
  const TrainResult r3 = train(anneal3, leg3);

  const Checkpoint ckpt =
      load_checkpoint(r3.best_checkpoint_path.empty()
                          ? r3.checkpoint_path
                          : r3.best_checkpoint_path);
  const CompareOutcome oc = compare_chirp(cfg, ckpt, root + "/compare_chirp");

  bool ok = oc.drl.report.stable && oc.pid.report.stable;
  ok = ok && oc.drl.report.mae_n <= oc.pid.report.mae_n;
  std::string bins_text;
  for (std::size_t b = 0; b < oc.drl.report.bins.size(); ++b) {
    const auto& db = oc.drl.report.bins[b];
    const auto& pb = oc.pid.report.bins[b];
    if (db.lo_hz >= 0.20 - 1e-9) {
      if (!(db.mae_n < pb.mae_n)) ok = false;
      bins_text += fmt(" [%.2f-%.2f: %.2f vs %.2f]", db.lo_hz, db.hi_hz,
                       db.mae_n, pb.mae_n);
    }
  }
  report(8, ok,
         fmt("DRL vs PID chirp: overall MAE %.2f vs %.2f N; bins >= 0.20 Hz "
             "(DRL vs PID)%s",
             oc.drl.report.mae_n, oc.pid.report.mae_n, bins_text.c_str()));
}

// ---------------------------------------------------------------- C9
void c9_stiction_signature(const std::string& root) {
  ExperimentConfig cfg = desk_preset();
  EvalOptions ev;
  ev.spec = TrajectorySpec::sinusoid(50.0, 0.05);
  ev.duration_s = 60.0;
  ev.out_dir = root + "/stiction";
  ev.tag = "pid_stiction_on";
  const EvalOutcome on = eval_pid(cfg, ev);

  ExperimentConfig smooth = cfg;
  smooth.nonlinearities.stiction_enabled = false;
  ev.tag = "pid_stiction_off";
  const EvalOutcome off = eval_pid(smooth, ev);

  auto dwell_fraction = [](const EpisodeLog& log) {
    std::size_t n = 0;
    for (const auto& s : log.steps)
      if (std::abs(s.q_dot) < 0.005) ++n;
    return static_cast<double>(n) / static_cast<double>(log.steps.size());
  };
  const double f_on = dwell_fraction(on.log);
  const double f_off = dwell_fraction(off.log);
  const bool ok = f_on >= 3.0 * f_off && on.report.stable && off.report.stable;
  report(9, ok,
         fmt("stiction signature at 0.05 Hz: dwell fraction %.3f with "
             "stiction vs %.3f without (ratio %.2f, need >= 3)",
             f_on, f_off, f_off > 0.0 ? f_on / f_off : 999.0));
}

// ---------------------------------------------------------------- C10
void c10_filter_response() {
  const double dt = 0.01;
  const double t_target = 1.0 / (2.0 * std::numbers::pi);
  double y = 0.0;
  int n = 0;
  while ((n + 1) * dt < t_target) {
    y = lpf_step(y, 1.0, dt, 1.0);
    ++n;
  }
  y = lpf_step(y, 1.0, dt, 1.0);  // first sample at or past 1/(2*pi) s
  const bool ok = std::abs(y - 0.632) <= 0.01;
  report(10, ok,
         fmt("filter step response: %.4f at t=%.4f s (0.632 +- 0.01)", y,
             (n + 1) * dt));
}

// ---------------------------------------------------------------- C11
void c11_generalization(const DeskArtifacts& art, const std::string& root) {
  const Checkpoint ckpt = load_checkpoint(art.result.checkpoint_path);
  bool ok = true;
  std::string text;
  for (double freq : {0.035, 0.5}) {
    EvalOptions ev;
    ev.spec = TrajectorySpec::sinusoid(50.0, freq);
    ev.duration_s = 60.0;
    ev.out_dir = root + "/generalization";
    ev.tag = fmt("drl_%g_hz", freq);
    const EvalOutcome oc = eval_policy(art.cfg, ckpt, ev);
    const bool full =
        oc.report.stable && oc.log.steps.size() == 6000 && !oc.log.fault;
    ok = ok && full;
    text += fmt(" %g Hz %s (mae %.2f N);", freq, full ? "stable" : "E-STOP",
                oc.report.mae_n);
  }
  report(11, ok, "generalization outside the training band:" + text);
}

// ---------------------------------------------------------------- C12
void c12_divergence_detector(const DeskArtifacts& art) {
  auto synthetic = [](double entropy_slope, int spikes, double reward_slope) {
    std::vector<TrainMetrics> h(90);
    for (int i = 0; i < 90; ++i) {
      h[i].episode = i;
      h[i].entropy = 1.2 + entropy_slope * i;
      h[i].approx_kl = 0.002;
      h[i].episode_reward = -20.0 + reward_slope * i;
    }
    for (int s = 0; s < spikes; ++s) h[12 + 9 * s].approx_kl = 0.03;
    return h;
  };

  struct Fixture {
    std::string name;
    std::vector<TrainMetrics> history;
    bool divergent;
  };
  std::vector<Fixture> fixtures;
  // Recorded healthy stream: the first 90 episodes of the desk run.
  fixtures.push_back(
      {"recorded-desk-run",
       {art.result.metrics.begin(), art.result.metrics.begin() + 90},
       false});
  fixtures.push_back({"entropy-rising", synthetic(+0.004, 0, 0.1), true});
  fixtures.push_back({"three-kl-spikes", synthetic(-0.004, 3, 0.1), true});
  fixtures.push_back({"reward-stagnant", synthetic(-0.004, 0, 0.0), true});
  fixtures.push_back({"two-spikes-ok", synthetic(-0.004, 2, 0.1), false});
  fixtures.push_back({"noisy-improving", synthetic(-0.002, 1, 0.05), false});

  bool ok = true;
  std::string detail;
  for (const auto& f : fixtures) {
    const auto rep = divergence_verdict(f.history, 90);
    const bool correct = rep.likely_divergent == f.divergent;
    ok = ok && correct;
    if (!correct) detail += " " + f.name + "=WRONG";
  }
  report(12, ok,
         "divergence detector: verdicts correct on all 6 fixtures" + detail);
}

// ---------------------------------------------------------------- C13
void c13_determinism(const DeskArtifacts& art, const std::string& root) {
  const std::string out_b = root + "/desk_run_b";
  TrainOptions opts;
  opts.out_dir = out_b;
  (void)train(art.cfg, opts);

  const bool metrics_same = slurp(art.out_dir + "/train_metrics.tsv") ==
                            slurp(out_b + "/train_metrics.tsv");
  const bool evals_same = slurp(art.out_dir + "/eval_history.tsv") ==
                          slurp(out_b + "/eval_history.tsv");
  const bool ckpt_same = slurp(art.out_dir + "/checkpoint_final.stw") ==
                         slurp(out_b + "/checkpoint_final.stw");
  report(13, metrics_same && evals_same && ckpt_same,
         fmt("determinism: repeated desk run bit-identical (metrics %s, "
             "eval history %s, checkpoint %s)",
             metrics_same ? "yes" : "NO", evals_same ? "yes" : "NO",
             ckpt_same ? "yes" : "NO"));
}

}  // namespace

int main() {
  const std::string root = "acceptance_out";
  fs::remove_all(root);
  fs::create_directories(root);

  std::printf("acceptance suite (artifacts in %s/)\n", root.c_str());
  c1_reward_law();
  c2_gradient_fidelity();
  c3_gae_oracle();
  c4_lr_schedule();
  c5_safety_soak();
  c6_estop_latching();
  const DeskArtifacts art = c7_desk_learning(root);
  c8_chirp_comparison(root);
  c9_stiction_signature(root);
  c10_filter_response();
  c11_generalization(art, root);
  c12_divergence_detector(art);
  c13_determinism(art, root);

  if (g_failures == 0) {
    std::printf("all 13 criteria PASS\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
