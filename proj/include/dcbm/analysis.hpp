// Closed-loop stability analysis (Jury inequalities vs characteristic roots)
// and the evaluation metrics battery.
#pragma once

#include <cstddef>
#include <vector>

namespace dcbm {

struct GainsD {
    double kp = 0.0, ki = 0.0, kd = 0.0;
};

struct StabilityVerdict {
    // The three published inequality criteria: positivity, damping limit,
    // integral limit. Margins are the (should-be-positive) slack of each.
    bool inequalities_satisfied = false;
    double margin_positivity = 0.0;  // kp + ki
    double margin_damping = 0.0;     // (2 - a*kp)/a - kd
    double margin_integral = 0.0;    // (4 - 2a*kp)/a - ki

    // Roots of the characteristic quadratic
    //   z^2 (1+aKp+aKi+aKd) - z (2+aKp+2aKd) + (1+aKd)
    bool roots_inside_unit_circle = false;
    double root_magnitude[2] = {0.0, 0.0};

    // Stable iff both roots are strictly inside the unit circle.
    bool stable = false;
};

// alpha > 0 required; throws on a degenerate leading coefficient.
StabilityVerdict jury_test(const GainsD& gains, double alpha);

// Noise-free linearized closed loop with small-signal (pre-tanh) actuation.
// The control acts within the epoch it is computed, matching the
// characteristic polynomial above: the error update is solved implicitly.
// `disturbance` is added to the error each step. Returns [e_0..e_n].
std::vector<double> linear_loop_sim(const GainsD& gains, double alpha, double disturbance,
                                    std::size_t n, double e0 = 1.0);

// Population standard deviation of log returns; >= 2 prices required.
double volatility(const std::vector<double>& prices);

// Mean |P_t - MA_t| / MA_t; equal nonempty lengths required.
double ma_deviation(const std::vector<double>& prices, const std::vector<double>& ma);

struct StepResponseMetrics {
    double mse = 0.0;
    std::size_t settling_time = 0;  // horizon sentinel if never settled
    double max_overshoot_pct = 0.0;
    double steady_state_error_pct = 0.0;
    double control_variance = 0.0;
};

// band: settling threshold as a fraction of the initial error magnitude.
StepResponseMetrics step_response_metrics(const std::vector<double>& error,
                                          const std::vector<double>& control,
                                          double band = 0.02);

// Percent growth of the series endpoint relative to its start, plus the
// standard deviation of per-step relative changes.
struct TreasuryGrowth {
    double growth_pct = 0.0;
    double stability = 0.0;
};
TreasuryGrowth treasury_growth(const std::vector<double>& series);

}  // namespace dcbm
