#pragma once

#include <cstdint>
#include <string>

#include "seatwin/env.hpp"
#include "seatwin/pid.hpp"
#include "seatwin/plant.hpp"
#include "seatwin/policy.hpp"
#include "seatwin/ppo.hpp"
#include "seatwin/safety.hpp"
#include "seatwin/transport.hpp"

namespace seatwin {

// Full description of one experiment. Config files overlay a preset;
// unknown keys anywhere are a hard error so typos in experiment files
// fail loudly instead of silently using defaults.
struct ExperimentConfig {
  std::string run_id = "run";
  std::uint64_t seed = 1;
  int episodes = 300;
  int eval_every = 20;            // 0 disables scheduled evals
  std::string eval_trajectory = "sine:0.1,50";
  std::string log_episodes = "eval";  // none | eval | all
  double eval_duration_s = 20.0;

  PlantParams plant;
  NonlinearityConfig nonlinearities;
  TransportConfig transport;
  SafetyConfig safety;
  EpisodeConfig env;
  PpoConfig ppo;
  PolicyConfig policy;
  PidConfig pid;

  void validate() const;
};

// Desk-scale defaults: 20 s episodes, 300-episode budget, a small
// network, and the decay schedule's breakpoints compressed onto the
// shorter run.
ExperimentConfig desk_preset();

// Full-scale profile: 60 s episodes, [256,256] networks, decay from
// 5e-5 to 5e-6 over 1280 episodes and down to 1e-7 at 2048.
ExperimentConfig paper_scale_preset();

ExperimentConfig preset_by_name(const std::string& name);

// Strict overlay of a JSON config file onto `base`. The file must carry
// a "seed" key; every key must be known.
ExperimentConfig load_config_file(const std::string& path,
                                  const ExperimentConfig& base);

// Overlay from a JSON string (used by tests and for inline overrides).
ExperimentConfig apply_config_json(const std::string& json_text,
                                   const ExperimentConfig& base,
                                   bool require_seed);

std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace seatwin
