// Adversarial stress harness: single-shot and multi-epoch price
// manipulation against a live world, the minimal-deviation saturation
// search, sandwich extraction around a pending buyback, and attack-success
// aggregation. Every attack runs against a same-seed counterfactual world
// with no attacker, so reported drain and deviation are causal.
#pragma once

#include "dcbm/harness.hpp"
#include "dcbm/market.hpp"

#include <cstdint>
#include <vector>

namespace dcbm {

struct AttackBudget {
    double epsilon = 0.01;            // per-epoch notional cap, fraction of pool depth
    int max_epochs = 5;               // attack window length
    double holding_cost_rate = 5e-4;  // per-epoch carry on open exposure
};

struct AttackOutcome {
    double profit = 0.0;          // attacker P&L in stable, net of carry
    double treasury_drain = 0.0;  // extra controller spend vs counterfactual, / T_0
    double induced_deviation = 0.0;  // |twap_adv - twap_ctl| / twap_ctl at attack close
    bool success = false;            // profit > 0
};

// One-epoch flash manipulation: a single trade of notional epsilon * y placed
// at the last block of the epoch after `warmup_epochs`, in the sign that
// maximizes the next buyback, unwound at the first block of the next epoch.
AttackOutcome fgsm_flash(const ScenarioConfig& cfg, std::uint64_t seed, double epsilon,
                         int warmup_epochs = 30);

// Multi-epoch greedy manipulation: each epoch of the window picks, from a
// signed notional grid subject to the remaining budget, the action whose
// one-epoch lookahead on a cloned world maximizes induced controller spend.
// The chosen sequence is then re-simulated to compute the outcome.
AttackOutcome pgd_sustained(const ScenarioConfig& cfg, std::uint64_t seed,
                            const AttackBudget& budget, int warmup_epochs = 30,
                            int grid_per_side = 1);

// Exhaustive oracle over the same action grid and window; returns the best
// sequence outcome (ties broken by enumeration order). Cost grows as
// (2*grid_per_side+1)^max_epochs.
AttackOutcome pgd_exhaustive(const ScenarioConfig& cfg, std::uint64_t seed,
                             const AttackBudget& budget, int warmup_epochs = 30,
                             int grid_per_side = 1);

struct SaturationSearchResult {
    bool reachable = false;
    double min_deviation = 0.0;  // smallest single-epoch relative push that saturates
};

// Bisects the smallest sustained single-epoch downward price deviation that
// drives the actuator onto the tanh saturation knee.
SaturationSearchResult cw_arbitrage(const ScenarioConfig& cfg, std::uint64_t seed,
                                    double delta_max = 0.9, int warmup_epochs = 30,
                                    double tol = 1e-6);

// Best sandwich (buy before, sell after) around a pending buyback of size J
// on a copy of the pool; swap fees apply to both attacker legs.
AttackOutcome frontrun_sandwich(Wad pending_buyback, const Pool& pool);

struct AsrStats {
    double success_rate = 0.0;  // fraction with profit > 0
    double mean_profit = 0.0;
    double mean_drain = 0.0;
    int n = 0;
};

// Aggregates a batch of outcomes; throws on an empty batch.
AsrStats asr(const std::vector<AttackOutcome>& outcomes);

}  // namespace dcbm
