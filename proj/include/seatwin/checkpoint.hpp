#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seatwin/adam.hpp"
#include "seatwin/policy.hpp"
#include "seatwin/rng.hpp"

namespace seatwin {

// Everything needed to resume training exactly: network shape and
// parameters, optimizer moments, the episode counter that drives the
// LR schedule, all RNG streams, and the plant's accumulated encoder
// offset. Binary, versioned, native-endian doubles.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  PolicyConfig policy_config;
  std::vector<double> params;
  AdamState opt;
  std::int64_t episode_counter = 0;
  std::uint64_t policy_version = 0;
  double encoder_offset_rad = 0.0;
  std::string rng_action;
  std::string rng_traj;
  std::string rng_update;
  std::string rng_stack;
  std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Throws on a bad magic, unsupported version, or truncated file.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seatwin
