#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "seatwin/plant.hpp"
#include "seatwin/rng.hpp"
#include "seatwin/safety.hpp"

namespace seatwin {

// Timing/quality model of the networking path between the high-level
// policy loop and the low-level controller. Latencies are counted in
// low-level ticks; dropped commands leave the last held value in place,
// dropped observations repeat the last delivered reading.
struct TransportConfig {
  double policy_rate_hz = 100.0;
  double lowlevel_rate_hz = 400.0;
  int action_latency_ticks = 0;
  int obs_latency_ticks = 0;
  double action_drop_prob = 0.0;
  double obs_drop_prob = 0.0;

  void validate() const;
  int ticks_per_policy_step() const;
  double lowlevel_dt() const { return 1.0 / lowlevel_rate_hz; }
  double policy_dt() const { return 1.0 / policy_rate_hz; }
};

struct LinkState {
  double held_current_a = 0.0;          // zero-order hold on the plant side
  RawSensors last_delivered;            // last observation the policy saw
  std::deque<std::pair<std::uint64_t, double>> action_queue;  // (due tick, A)
  std::vector<RawSensors> obs_ring;     // per-tick sensor frames
  std::uint64_t tick = 0;
  std::uint64_t actions_dropped = 0;
  std::uint64_t obs_dropped = 0;
};

// Per-low-level-tick audit record, mainly consumed by soak tests and the
// episode logger.
struct TickRecord {
  std::uint64_t tick = 0;
  double applied_a = 0.0;
  SafetyMode mode = SafetyMode::kNominal;
  RawSensors sensors;
};

// Plant + safety + link on one simulated-time loop. The safety
// supervisor sits on the low-level side and re-evaluates every tick, so
// its reaction latency is one tick regardless of link quality.
class SimStack {
 public:
  SimStack(const PlantParams& plant_params, const NonlinearityConfig& nl,
           const SafetyConfig& safety_cfg, const TransportConfig& transport_cfg,
           Rng rng);

  // Obs side of the per-policy-tick exchange: the delivered sensor frame
  // at this instant (current measurement when obs latency is zero).
  RawSensors poll();

  // Action side: drop-or-enqueue the command, due after action latency.
  void push_action(double current_a);

  // Both sides in one call; the returned frame is sampled before the
  // action takes effect.
  RawSensors exchange(double current_a);

  // Advances the plant one micro step under the held (post-safety)
  // command.
  void tick_lowlevel();

  // Runs the ticks_per_policy_step() low-level ticks of one policy
  // interval.
  void run_policy_interval();

  void reset_episode(double q_jitter = 0.0);

  // E-stop recovery; optionally zeroes the plant's encoder offset, the
  // "recalibrate then reenable" procedure.
  void manual_reset(bool recalibrate_encoder);

  void remote_shutoff();

  bool estopped() const { return safety_.mode == SafetyMode::kEstopped; }
  const SafetyState& safety_state() const { return safety_; }
  const PlantState& plant_state() const { return plant_; }
  PlantState& plant_state_mutable() { return plant_; }
  const LinkState& link() const { return link_; }
  const PlantParams& plant_params() const { return plant_params_; }
  const NonlinearityConfig& nonlinearities() const { return nl_; }
  NonlinearityConfig& nonlinearities_mutable() { return nl_; }
  const TransportConfig& transport_config() const { return transport_; }
  const SafetyConfig& safety_config() const { return safety_cfg_; }
  double last_applied_a() const { return last_applied_a_; }

  // Invoked after every low-level tick when set.
  std::function<void(const TickRecord&)> tick_audit;

 private:
  PlantParams plant_params_;
  NonlinearityConfig nl_;
  SafetyConfig safety_cfg_;
  TransportConfig transport_;
  PlantState plant_;
  SafetyState safety_;
  LinkState link_;
  Rng rng_;
  double last_applied_a_ = 0.0;
};

}  // namespace seatwin
