#pragma once

#include <optional>
#include <string>

namespace seatwin {

struct SafetyConfig {
  double learn_bound_rad = 0.25;   // soft boundary: restoring command inside
  double estop_bound_rad = 0.35;   // hard position limit
  double estop_force_n = 1700.0;   // hard force limit
  double action_sat_a = 0.75;      // policy authority in NOMINAL
  double supply_clamp_a = 1.5;     // power-supply current monitor
  double restoring_current_a = 0.75;   // recovery command magnitude, toward 0
  double recovery_hysteresis_rad = 0.01;  // must re-enter this far to exit

  void validate() const;
};

enum class SafetyMode { kNominal, kBoundaryRecovery, kEstopped };

enum class FaultKind { kPositionLimit, kForceLimit, kNonFinite, kRemote };

struct FaultRecord {
  FaultKind kind = FaultKind::kRemote;
  double time_s = 0.0;
  double q_meas = 0.0;
  double f_meas = 0.0;
};

// E-stop latches until manual_reset; BOUNDARY_RECOVERY overrides the
// proposed command with a constant restoring current toward center.
struct SafetyState {
  SafetyMode mode = SafetyMode::kNominal;
  std::optional<FaultRecord> latched_fault;
};

struct SuperviseResult {
  double applied_a = 0.0;
  SafetyState state;
};

// One supervision pass, intended to run every low-level tick on measured
// values. Latches ESTOPPED on |q|>estop_bound, |F|>estop_force, or any
// non-finite input; once latched the applied current is exactly 0.
SuperviseResult supervise(double q_meas, double f_meas, double proposed_a,
                          const SafetyState& s, const SafetyConfig& cfg,
                          double time_s = 0.0);

// Programmatic kill switch: latches ESTOPPED from any mode. An already
// latched fault is preserved.
SafetyState remote_shutoff(const SafetyState& s, double time_s = 0.0);

// Clears a latched e-stop back to NOMINAL. `recalibrated_encoder` is the
// caller's acknowledgment that it zeroed the plant's encoder offset (the
// supervisor itself owns no plant handle). Resetting a non-estopped
// state is a warning no-op; `warned` reports it.
SafetyState manual_reset(const SafetyState& s, bool* warned = nullptr);

const char* to_string(SafetyMode mode);
const char* to_string(FaultKind kind);

}  // namespace seatwin
