// PID control law with clamped integration, derivative filtering, the
// tanh/circuit-breaker actuator, and the certified-robustness and
// input-smoothing variants. All control arithmetic is Wad fixed-point.
#pragma once

#include "dcbm/wad.hpp"

#include <cstdint>
#include <deque>
#include <optional>

namespace dcbm {

struct Gains {
    Wad kp{};
    Wad ki{};
    Wad kd{};
    // Epoch duration; the controller normalizes time to epochs, so this is
    // 1 unless deliberately rescaled.
    Wad dt{WAD_ONE};
};

enum class DerivativeMode {
    OnError,        // Kd * (e_k - e_{k-1}) / dt, the literal law
    OnMeasurement,  // -Kd * d/dt of the low-pass-filtered log measurement
};

struct ActuatorConfig {
    Wad gamma{Wad(WAD_SCALE / 10)};  // fraction of treasury per epoch, (0,1]
    DerivativeMode derivative_mode = DerivativeMode::OnMeasurement;
    Wad measurement_filter_coeff{Wad(3 * WAD_SCALE / 10)};  // beta_f in [0,1]
    std::uint32_t input_smooth_window = 1;                   // 1 = off
    // When false (default) the integrator also freezes while the previous
    // actuation sat on the tanh knee; true keeps the literal treasury-only rule.
    bool literal_clamp_rule = false;

    void validate() const;
};

struct CertConfig {
    bool enabled = false;
    Wad integral_clamp{};     // I_max > 0 when enabled
    Wad output_rate_limit{};  // L > 0 when enabled

    void validate() const;
};

struct TargetTracker {
    Wad ema{};                              // current target price, > 0
    Wad smoothing{Wad(2 * WAD_SCALE / 31)}; // beta_t in (0,1], ~30-epoch window
};

struct ControllerState {
    Wad integral_acc{};
    Wad prev_error{};
    Wad prev_filtered_measurement{};
    Wad prev_output{};
    bool initialized = false;
    bool prev_saturated = false;
    std::deque<Wad> smooth_buffer;  // recent epoch TWAPs for input smoothing
};

// e = ln(target) - ln(measured); positive when price is below target.
Wad compute_error(Wad target, Wad measured);

void ema_update(TargetTracker& tracker, Wad twap_price);

struct PidResult {
    Wad u;              // raw control intensity
    Wad derivative;     // the d-term contribution before Kd
    Wad integral_used;  // accumulator value entering the law
};

// One PID evaluation. `log_measurement` feeds the on-measurement derivative.
PidResult pid_step(ControllerState& state, const Gains& gains, const ActuatorConfig& cfg,
                   Wad error, Wad log_measurement, bool treasury_positive,
                   std::optional<Wad> integral_clamp = std::nullopt);

// Integral clipping happens inside pid_step (the accumulator is clamped
// before use); this applies the output Lipschitz rate limit.
Wad cert_constrain(Wad u_raw, const ControllerState& state, const CertConfig& cert, Wad dt);

// J = T * gamma * tanh(max(0, u)); strictly below gamma*T for T > 0.
Wad actuate(Wad u, Wad treasury_balance, Wad gamma);

// Per-epoch diagnostics emitted to the harness.
struct ControllerDiagnostics {
    Wad twap{};
    Wad smoothed_input{};
    Wad target{};
    Wad error{};
    Wad u_raw{};
    Wad u_applied{};
    Wad spend{};
};

// The full decision pipeline of one control epoch: input smoothing, EMA
// target update, error, PID, optional cert constraint, actuation.
class DcbmController {
  public:
    DcbmController(Gains gains, ActuatorConfig actuator, CertConfig cert, TargetTracker tracker);

    // Returns the buyback spend J for this epoch; caller executes the buyback
    // and the treasury update, then reports saturation back via the returned
    // diagnostics (handled internally).
    ControllerDiagnostics decide(Wad epoch_twap, Wad treasury_balance);

    const ControllerState& state() const { return state_; }
    const TargetTracker& tracker() const { return tracker_; }
    const Gains& gains() const { return gains_; }
    const ActuatorConfig& actuator() const { return actuator_; }
    const CertConfig& cert() const { return cert_; }

    // Arithmetic operations per control step, the gas proxy.
    std::uint64_t op_count() const { return op_count_; }

  private:
    Gains gains_;
    ActuatorConfig actuator_;
    CertConfig cert_;
    TargetTracker tracker_;
    ControllerState state_;
    std::uint64_t op_count_ = 0;
};

}  // namespace dcbm
