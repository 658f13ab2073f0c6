// Comparison buyback policies (no-buyback, fixed-rate, threshold, MPC with
// oracle foresight) and gain tuning (standard grid search and adversarial
// min-max over an attack set).
#pragma once

#include "dcbm/analysis.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dcbm {

struct ScenarioConfig;  // harness

enum class PolicyKind {
    NoBuyback,
    FixedRate,
    Threshold,
    Dcbm,
    MpcOracle,
};

struct PolicyParams {
    double fixed_rate_rho = 0.5;            // fraction of epoch revenue
    double threshold_spend_fraction = 0.05; // fraction of treasury per trigger
    double threshold_hysteresis = 0.0;

    int mpc_horizon = 3;
    int mpc_grid_size = 5;
    double mpc_effort_weight = 1e-6;
    double mpc_max_fraction = 0.3;  // top of the J grid as a fraction of T
};

// The uniform per-epoch decision inputs shared by all policies.
struct EpochView {
    double twap = 0.0;
    double moving_average = 0.0;  // target reference (EMA)
    double treasury = 0.0;
    double revenue = 0.0;   // R_acc of the closing epoch
    double alpha = 0.0;     // plant gain 2/y
    std::span<const double> future_noise;  // oracle foresight (log shocks)
};

double no_buyback(const EpochView& state);
double fixed_rate(const EpochView& state, double rho);
double threshold(const EpochView& state, double spend_fraction, double hysteresis);

// Receding-horizon exhaustive grid search over J plans on the linearized
// log-price plant; returns the first element of the best plan.
double mpc_oracle(const EpochView& state, int horizon, int grid_size, double effort_weight,
                  double max_fraction);

struct TuningSpec {
    std::vector<double> kp_grid;
    std::vector<double> ki_grid;
    std::vector<double> kd_grid;
    double w_vol = 1.0;
    double w_treasury = 0.5;
    std::uint64_t seed = 0;
    int validation_runs = 8;
    // Adversary set for min-max tuning: PGD budgets (fractions of pool depth).
    std::vector<double> adversary_budgets{0.01};
    int attack_trials = 16;
};

enum class TuneMode { Standard, Adversarial };

// Deterministic given (spec, scenario, mode). Throws on an empty grid and
// when no grid point passes the Jury stability filter at the scenario's
// median plant gain.
GainsD tune_gains(const TuningSpec& spec, const ScenarioConfig& scenario, TuneMode mode);

}  // namespace dcbm
