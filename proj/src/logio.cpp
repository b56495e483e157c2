#include "seatwin/logio.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seatwin {

namespace {

constexpr const char* kEpisodeHeader =
    "t\tf_des\tf\tq_true\tq_meas\tq_dot\tq_ddot\taction_proposed\t"
    "action_applied\treward\tsafety_mode";

constexpr const char* kMetricsHeader =
    "episode\treward\tmae\tsteps\testop\tpolicy_loss\tvalue_loss\tentropy\t"
    "approx_kl\tlr\tclip_fraction\tactions_dropped\tobs_dropped\t"
    "update_skipped";

SafetyMode mode_from_string(const std::string& s) {
  if (s == "NOMINAL") return SafetyMode::kNominal;
  if (s == "BOUNDARY_RECOVERY") return SafetyMode::kBoundaryRecovery;
  if (s == "ESTOPPED") return SafetyMode::kEstopped;
  throw std::runtime_error("episode log: unknown safety mode '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_episode_log(const std::string& path, const EpisodeLog& log,
                       const TrajectorySpec& spec) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr)
    throw std::runtime_error("cannot open episode log for writing: " + path);
  std::fprintf(f, "# seatwin-episode-log v1\n");
  std::fprintf(f, "# trajectory %s\n", to_string(spec).c_str());
  std::fprintf(f, "# total_reward %s\n", format_double(log.total_reward).c_str());
  std::fprintf(f, "# mae %s\n", format_double(log.mae_n).c_str());
  std::fprintf(f, "# peak_abs_force %s\n",
               format_double(log.peak_abs_force_n).c_str());
  std::fprintf(f, "# estop %d\n", log.estop_truncated ? 1 : 0);
  if (log.fault)
    std::fprintf(f, "# fault %s %s %s %s\n", to_string(log.fault->kind),
                 format_double(log.fault->time_s).c_str(),
                 format_double(log.fault->q_meas).c_str(),
                 format_double(log.fault->f_meas).c_str());
  std::fprintf(f, "# actions_dropped %llu\n",
               static_cast<unsigned long long>(log.actions_dropped));
  std::fprintf(f, "# obs_dropped %llu\n",
               static_cast<unsigned long long>(log.obs_dropped));
  std::fprintf(f, "%s\n", kEpisodeHeader);
  for (const auto& s : log.steps)
    std::fprintf(f, "%s\t%s\t%s\t%s\t%s\t%s\t%s\t%s\t%s\t%s\t%s\n",
                 format_double(s.t).c_str(), format_double(s.f_des).c_str(),
                 format_double(s.f).c_str(), format_double(s.q_true).c_str(),
                 format_double(s.q_meas).c_str(), format_double(s.q_dot).c_str(),
                 format_double(s.q_ddot).c_str(),
                 format_double(s.action_proposed_a).c_str(),
                 format_double(s.action_applied_a).c_str(),
                 format_double(s.reward).c_str(), to_string(s.safety_mode));
  std::fclose(f);
}

LoadedEpisodeLog read_episode_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open episode log: " + path);
  LoadedEpisodeLog out;
  std::string line;
  bool header_seen = false;
  bool spec_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string key;
      is >> key;
      if (key == "trajectory") {
        std::string spec_text;
        is >> spec_text;
        out.spec = parse_trajectory(spec_text);
        spec_seen = true;
      } else if (key == "total_reward") {
        is >> out.stored_total_reward;
      } else if (key == "mae") {
        is >> out.stored_mae_n;
      } else if (key == "peak_abs_force") {
        is >> out.stored_peak_abs_force_n;
      } else if (key == "estop") {
        int v = 0;
        is >> v;
        out.log.estop_truncated = (v != 0);
      } else if (key == "actions_dropped") {
        is >> out.log.actions_dropped;
      } else if (key == "obs_dropped") {
        is >> out.log.obs_dropped;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kEpisodeHeader)
        throw std::runtime_error("episode log: unexpected column layout in " +
                                 path);
      header_seen = true;
      continue;
    }
    std::istringstream is(line);
    StepRecord r;
    std::string mode;
    if (!(is >> r.t >> r.f_des >> r.f >> r.q_true >> r.q_meas >> r.q_dot >>
          r.q_ddot >> r.action_proposed_a >> r.action_applied_a >> r.reward >>
          mode))
      throw std::runtime_error("episode log: malformed row in " + path);
    r.safety_mode = mode_from_string(mode);
    out.log.steps.push_back(r);
  }
  if (!header_seen || !spec_seen)
    throw std::runtime_error("episode log: missing header in " + path);
  out.log.total_reward = out.stored_total_reward;
  out.log.mae_n = out.stored_mae_n;
  out.log.peak_abs_force_n = out.stored_peak_abs_force_n;
  return out;
}

TrainMetricsWriter::TrainMetricsWriter(const std::string& path) {
  f_ = std::fopen(path.c_str(), "w");
  if (f_ == nullptr)
    throw std::runtime_error("cannot open metrics file for writing: " + path);
  std::fprintf(f_, "# seatwin-train-metrics v1\n%s\n", kMetricsHeader);
}

TrainMetricsWriter::~TrainMetricsWriter() {
  if (f_ != nullptr) std::fclose(f_);
}

void TrainMetricsWriter::append(const TrainMetrics& m) {
  std::fprintf(f_, "%lld\t%s\t%s\t%d\t%d\t%s\t%s\t%s\t%s\t%s\t%s\t%llu\t%llu\t%d\n",
               static_cast<long long>(m.episode),
               format_double(m.episode_reward).c_str(),
               format_double(m.episode_mae).c_str(), m.episode_steps,
               m.estop ? 1 : 0, format_double(m.policy_loss).c_str(),
               format_double(m.value_loss).c_str(),
               format_double(m.entropy).c_str(),
               format_double(m.approx_kl).c_str(), format_double(m.lr).c_str(),
               format_double(m.clip_fraction).c_str(),
               static_cast<unsigned long long>(m.actions_dropped),
               static_cast<unsigned long long>(m.obs_dropped),
               m.update_skipped ? 1 : 0);
}

void TrainMetricsWriter::flush() {
  if (f_ != nullptr) std::fflush(f_);
}

std::vector<TrainMetrics> read_train_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::vector<TrainMetrics> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kMetricsHeader)
        throw std::runtime_error("metrics file: unexpected column layout in " +
                                 path);
      header_seen = true;
      continue;
    }
    std::istringstream is(line);
    TrainMetrics m;
    int estop = 0, skipped = 0;
    if (!(is >> m.episode >> m.episode_reward >> m.episode_mae >>
          m.episode_steps >> estop >> m.policy_loss >> m.value_loss >>
          m.entropy >> m.approx_kl >> m.lr >> m.clip_fraction >>
          m.actions_dropped >> m.obs_dropped >> skipped))
      throw std::runtime_error("metrics file: malformed row in " + path);
    m.estop = (estop != 0);
    m.update_skipped = (skipped != 0);
    out.push_back(m);
  }
  if (!header_seen)
    throw std::runtime_error("metrics file: missing header in " + path);
  return out;
}

void write_eval_history(const std::string& path,
                        const std::vector<EvalPoint>& points) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr)
    throw std::runtime_error("cannot open eval history for writing: " + path);
  std::fprintf(f, "# seatwin-eval-history v1\nepisode\tmae\treward\testop\n");
  for (const auto& p : points)
    std::fprintf(f, "%lld\t%s\t%s\t%d\n", static_cast<long long>(p.episode),
                 format_double(p.mae_n).c_str(),
                 format_double(p.total_reward).c_str(), p.estop ? 1 : 0);
  std::fclose(f);
}

std::vector<EvalPoint> read_eval_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open eval history: " + path);
  std::vector<EvalPoint> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("episode", 0) == 0)
      continue;
    std::istringstream is(line);
    EvalPoint p;
    int estop = 0;
    if (!(is >> p.episode >> p.mae_n >> p.total_reward >> estop))
      throw std::runtime_error("eval history: malformed row in " + path);
    p.estop = (estop != 0);
    out.push_back(p);
  }
  return out;
}

}  // namespace seatwin
