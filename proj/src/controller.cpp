#include "dcbm/controller.hpp"

#include <stdexcept>

namespace dcbm {

namespace {
const Wad SATURATION_KNEE = Wad(99 * WAD_SCALE / 100);  // tanh(u) > 0.99
}

void ActuatorConfig::validate() const {
    if (gamma.raw <= 0 || gamma > WAD_ONE)
        throw std::invalid_argument("actuator: gamma outside (0,1]");
    if (measurement_filter_coeff.raw < 0 || measurement_filter_coeff > WAD_ONE)
        throw std::invalid_argument("actuator: filter coefficient outside [0,1]");
    if (input_smooth_window < 1)
        throw std::invalid_argument("actuator: input smooth window must be >= 1");
}

void CertConfig::validate() const {
    if (!enabled) return;
    if (integral_clamp.raw <= 0) throw std::invalid_argument("cert: I_max must be > 0");
    if (output_rate_limit.raw <= 0) throw std::invalid_argument("cert: rate limit must be > 0");
}

Wad compute_error(Wad target, Wad measured) {
    if (target.raw <= 0 || measured.raw <= 0)
        throw std::domain_error("compute_error: nonpositive price");
    return wad_sub(wad_ln(target), wad_ln(measured));
}

void ema_update(TargetTracker& tracker, Wad twap_price) {
    if (twap_price.raw <= 0) throw std::domain_error("ema_update: nonpositive price");
    if (tracker.smoothing.raw <= 0 || tracker.smoothing > WAD_ONE)
        throw std::invalid_argument("ema_update: smoothing outside (0,1]");
    Wad keep = wad_sub(WAD_ONE, tracker.smoothing);
    tracker.ema = wad_add(wad_mul(tracker.smoothing, twap_price), wad_mul(keep, tracker.ema));
}

PidResult pid_step(ControllerState& state, const Gains& gains, const ActuatorConfig& cfg,
                   Wad error, Wad log_measurement, bool treasury_positive,
                   std::optional<Wad> integral_clamp) {
    if (!state.initialized) {
        state.prev_error = error;  // first-step derivative := 0
        state.prev_filtered_measurement = log_measurement;
        state.initialized = true;
    }

    bool accumulate = treasury_positive;
    if (!cfg.literal_clamp_rule && state.prev_saturated) accumulate = false;
    if (accumulate)
        state.integral_acc = wad_add(state.integral_acc, wad_mul(error, gains.dt));
    if (integral_clamp) {
        Wad lim = *integral_clamp;
        state.integral_acc = wad_clamp(state.integral_acc, wad_neg(lim), lim);
    }

    Wad filtered = wad_add(wad_mul(cfg.measurement_filter_coeff, log_measurement),
                           wad_mul(wad_sub(WAD_ONE, cfg.measurement_filter_coeff),
                                   state.prev_filtered_measurement));

    Wad deriv;
    if (cfg.derivative_mode == DerivativeMode::OnError) {
        deriv = wad_div(wad_sub(error, state.prev_error), gains.dt);
    } else {
        deriv = wad_neg(wad_div(wad_sub(filtered, state.prev_filtered_measurement), gains.dt));
    }

    PidResult r;
    r.derivative = deriv;
    r.integral_used = state.integral_acc;
    r.u = wad_add(wad_add(wad_mul(gains.kp, error), wad_mul(gains.ki, state.integral_acc)),
                  wad_mul(gains.kd, deriv));

    state.prev_error = error;
    state.prev_filtered_measurement = filtered;
    return r;
}

Wad cert_constrain(Wad u_raw, const ControllerState& state, const CertConfig& cert, Wad dt) {
    if (!cert.enabled) return u_raw;
    Wad band = wad_mul(cert.output_rate_limit, dt);
    Wad lo = wad_sub(state.prev_output, band);
    Wad hi = wad_add(state.prev_output, band);
    return wad_clamp(u_raw, lo, hi);
}

Wad actuate(Wad u, Wad treasury_balance, Wad gamma) {
    if (treasury_balance.raw < 0) throw std::invalid_argument("actuate: negative treasury");
    if (gamma.raw <= 0 || gamma > WAD_ONE)
        throw std::invalid_argument("actuate: gamma outside (0,1]");
    if (u.raw <= 0) return WAD_ZERO;
    Wad lambda = wad_mul(gamma, wad_tanh(u));  // <= 1 - 1e-18
    return wad_mul(treasury_balance, lambda);  // truncation keeps J < T
}

DcbmController::DcbmController(Gains gains, ActuatorConfig actuator, CertConfig cert,
                               TargetTracker tracker)
    : gains_(gains), actuator_(actuator), cert_(cert), tracker_(tracker) {
    actuator_.validate();
    cert_.validate();
    if (tracker_.ema.raw <= 0)
        throw std::invalid_argument("controller: target tracker needs a positive seed price");
}

ControllerDiagnostics DcbmController::decide(Wad epoch_twap, Wad treasury_balance) {
    ControllerDiagnostics d;
    d.twap = epoch_twap;

    state_.smooth_buffer.push_back(epoch_twap);
    while (state_.smooth_buffer.size() > actuator_.input_smooth_window)
        state_.smooth_buffer.pop_front();
    int128 sum = 0;
    for (const Wad& p : state_.smooth_buffer) sum += p.raw;
    Wad smoothed = Wad(sum / static_cast<int128>(state_.smooth_buffer.size()));
    d.smoothed_input = smoothed;

    ema_update(tracker_, epoch_twap);
    d.target = tracker_.ema;

    Wad error = compute_error(tracker_.ema, smoothed);
    d.error = error;

    Wad log_meas = wad_ln(smoothed);
    bool treasury_positive = treasury_balance.raw > 0;
    std::optional<Wad> clamp;
    if (cert_.enabled) clamp = cert_.integral_clamp;
    PidResult pid = pid_step(state_, gains_, actuator_, error, log_meas, treasury_positive, clamp);
    d.u_raw = pid.u;

    Wad u_applied = cert_constrain(pid.u, state_, cert_, gains_.dt);
    d.u_applied = u_applied;
    state_.prev_output = u_applied;

    d.spend = actuate(u_applied, treasury_balance, actuator_.gamma);
    state_.prev_saturated =
        u_applied.raw > 0 && wad_tanh(u_applied) > SATURATION_KNEE;

    // Fixed-point operation tally for the gas-cost proxy: smoothing, EMA,
    // error, each active PID term, and the actuator map.
    std::uint64_t ops = 4 /*smooth*/ + 4 /*ema*/ + 3 /*error*/ + 6 /*actuate*/;
    if (gains_.kp.raw != 0) ops += 1;
    if (gains_.ki.raw != 0) ops += 3;
    if (gains_.kd.raw != 0) ops += 5;
    if (cert_.enabled) ops += 4;
    op_count_ = ops;
    return d;
}

}  // namespace dcbm
