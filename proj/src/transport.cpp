#include "seatwin/transport.hpp"

#include <cmath>
#include <stdexcept>

namespace seatwin {

void TransportConfig::validate() const {
  if (!(policy_rate_hz > 0.0) || !(lowlevel_rate_hz > 0.0))
    throw std::invalid_argument("transport: rates must be > 0");
  const double ratio = lowlevel_rate_hz / policy_rate_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0)
    throw std::invalid_argument(
        "transport: lowlevel_rate_hz must be an integer multiple of "
        "policy_rate_hz");
  if (action_latency_ticks < 0 || obs_latency_ticks < 0)
    throw std::invalid_argument("transport: latencies must be >= 0");
  if (action_drop_prob < 0.0 || action_drop_prob > 1.0 ||
      obs_drop_prob < 0.0 || obs_drop_prob > 1.0)
    throw std::invalid_argument("transport: drop probabilities must be in [0,1]");
}

int TransportConfig::ticks_per_policy_step() const {
  return static_cast<int>(std::round(lowlevel_rate_hz / policy_rate_hz));
}

SimStack::SimStack(const PlantParams& plant_params, const NonlinearityConfig& nl,
                   const SafetyConfig& safety_cfg,
                   const TransportConfig& transport_cfg, Rng rng)
    : plant_params_(plant_params),
      nl_(nl),
      safety_cfg_(safety_cfg),
      transport_(transport_cfg),
      rng_(rng) {
  plant_params_.validate();
  nl_.validate();
  safety_cfg_.validate();
  transport_.validate();
  plant_ = reset_state(plant_params_);
  link_.obs_ring.assign(static_cast<std::size_t>(transport_.obs_latency_ticks) + 1,
                        measure(plant_, nl_, plant_params_, rng_));
  link_.last_delivered = link_.obs_ring.front();
}

RawSensors SimStack::poll() {
  RawSensors candidate;
  if (transport_.obs_latency_ticks == 0) {
    candidate = measure(plant_, nl_, plant_params_, rng_);
  } else {
    // Frame sampled obs_latency_ticks ago; the ring is seeded with the
    // initial measurement so early polls repeat it.
    const std::size_t n = link_.obs_ring.size();
    candidate = link_.obs_ring[link_.tick % n];
  }
  if (transport_.obs_drop_prob > 0.0 && rng_.bernoulli(transport_.obs_drop_prob)) {
    ++link_.obs_dropped;
  } else {
    link_.last_delivered = candidate;
  }
  return link_.last_delivered;
}

void SimStack::push_action(double current_a) {
  if (transport_.action_drop_prob > 0.0 &&
      rng_.bernoulli(transport_.action_drop_prob)) {
    ++link_.actions_dropped;
    return;
  }
  link_.action_queue.emplace_back(
      link_.tick + static_cast<std::uint64_t>(transport_.action_latency_ticks),
      current_a);
}

RawSensors SimStack::exchange(double current_a) {
  RawSensors s = poll();
  push_action(current_a);
  return s;
}

void SimStack::tick_lowlevel() {
  while (!link_.action_queue.empty() &&
         link_.action_queue.front().first <= link_.tick) {
    link_.held_current_a = link_.action_queue.front().second;
    link_.action_queue.pop_front();
  }

  const RawSensors sensors = measure(plant_, nl_, plant_params_, rng_);
  if (transport_.obs_latency_ticks > 0) {
    // Slot for the frame sampled at this tick; poll() reads it back
    // obs_latency_ticks later.
    const std::size_t n = link_.obs_ring.size();
    link_.obs_ring[(link_.tick + static_cast<std::uint64_t>(
                                     transport_.obs_latency_ticks)) % n] = sensors;
  }

  const SuperviseResult sup =
      supervise(sensors.q_meas, sensors.f_meas, link_.held_current_a, safety_,
                safety_cfg_, plant_.sim_time);
  safety_ = sup.state;
  last_applied_a_ = sup.applied_a;
  plant_ = step(plant_, sup.applied_a, nl_, plant_params_, rng_);

  if (tick_audit)
    tick_audit(TickRecord{link_.tick, sup.applied_a, safety_.mode, sensors});
  ++link_.tick;
}

void SimStack::run_policy_interval() {
  const int n = transport_.ticks_per_policy_step();
  for (int i = 0; i < n; ++i) tick_lowlevel();
}

void SimStack::reset_episode(double q_jitter) {
  plant_ = reset_state(plant_params_, plant_.encoder_offset, q_jitter, &rng_);
  link_.held_current_a = 0.0;
  link_.action_queue.clear();
  const RawSensors init = measure(plant_, nl_, plant_params_, rng_);
  for (auto& frame : link_.obs_ring) frame = init;
  link_.last_delivered = init;
  last_applied_a_ = 0.0;
}

void SimStack::manual_reset(bool recalibrate_encoder) {
  bool warned = false;
  safety_ = seatwin::manual_reset(safety_, &warned);
  if (!warned && recalibrate_encoder) plant_.encoder_offset = 0.0;
}

void SimStack::remote_shutoff() {
  safety_ = seatwin::remote_shutoff(safety_, plant_.sim_time);
}

}  // namespace seatwin
