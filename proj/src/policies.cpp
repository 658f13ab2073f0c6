#include "dcbm/policies.hpp"

#include "dcbm/adversary.hpp"
#include "dcbm/harness.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcbm {

double no_buyback(const EpochView&) { return 0.0; }

double fixed_rate(const EpochView& state, double rho) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("fixed_rate: rho outside [0,1]");
    return rho * state.revenue;
}

double threshold(const EpochView& state, double spend_fraction, double hysteresis) {
    if (spend_fraction <= 0.0 || spend_fraction > 1.0)
        throw std::invalid_argument("threshold: spend fraction outside (0,1]");
    if (hysteresis < 0.0) throw std::invalid_argument("threshold: negative hysteresis");
    if (state.twap < state.moving_average * (1.0 - hysteresis))
        return spend_fraction * state.treasury;
    return 0.0;
}

namespace {

struct MpcSearch {
    double p_bar;
    double alpha;
    double effort_weight;
    int horizon;
    std::span<const double> noise;
    const std::vector<double>* grid;

    double best_cost = std::numeric_limits<double>::infinity();
    double best_first = 0.0;

    void search(int depth, double p, double budget, double cost, double first) {
        if (depth == horizon) {
            if (cost < best_cost) {
                best_cost = cost;
                best_first = first;
            }
            return;
        }
        double xi = depth < static_cast<int>(noise.size()) ? noise[depth] : 0.0;
        for (double j : *grid) {
            if (j > budget) continue;
            double p_next = p + alpha * j + xi;
            double e = p_bar - p_next;
            search(depth + 1, p_next, budget - j, cost + e * e + effort_weight * j * j,
                   depth == 0 ? j : first);
        }
    }
};

}  // namespace

double mpc_oracle(const EpochView& state, int horizon, int grid_size, double effort_weight,
                  double max_fraction) {
    if (horizon < 1) throw std::invalid_argument("mpc: horizon must be >= 1");
    if (grid_size < 1) throw std::invalid_argument("mpc: grid size must be >= 1");
    if (state.treasury <= 0.0) return 0.0;

    std::vector<double> grid;
    if (grid_size == 1) {
        grid.push_back(0.0);
    } else {
        double top = max_fraction * state.treasury;
        for (int i = 0; i < grid_size; ++i)
            grid.push_back(top * static_cast<double>(i) / static_cast<double>(grid_size - 1));
    }

    MpcSearch s;
    s.p_bar = std::log(state.moving_average);
    s.alpha = state.alpha;
    s.effort_weight = effort_weight;
    s.horizon = horizon;
    s.noise = state.future_noise;
    s.grid = &grid;
    s.search(0, std::log(state.twap), state.treasury, 0.0, 0.0);
    return s.best_first;
}

namespace {

// Median pool sensitivity over the run. The stable reserve drifts little
// relative to its initial depth, so the median is the initial depth unless a
// liquidity event rescales the pool before the midpoint.
double median_alpha(const ScenarioConfig& scenario) {
    double y = scenario.pool_stable;
    if (scenario.liquidity_event_epoch >= 0 &&
        scenario.liquidity_event_epoch < static_cast<std::int64_t>(scenario.horizon) / 2)
        y *= scenario.liquidity_event_factor;
    return 2.0 / y;
}

}  // namespace

GainsD tune_gains(const TuningSpec& spec, const ScenarioConfig& scenario, TuneMode mode) {
    if (spec.kp_grid.empty() || spec.ki_grid.empty() || spec.kd_grid.empty())
        throw std::invalid_argument("tune_gains: empty grid");
    if (spec.validation_runs < 1) throw std::invalid_argument("tune_gains: need validation runs");

    double alpha = median_alpha(scenario);

    std::vector<GainsD> grid;
    for (double kp : spec.kp_grid)
        for (double ki : spec.ki_grid)
            for (double kd : spec.kd_grid) grid.push_back(GainsD{kp, ki, kd});

    std::vector<double> losses(grid.size(), std::numeric_limits<double>::infinity());
    std::vector<char> feasible(grid.size(), 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(grid.size()); ++i) {
        const GainsD& g = grid[i];
        StabilityVerdict v = jury_test(g, alpha);
        if (!v.inequalities_satisfied) continue;

        ScenarioConfig candidate = scenario;
        candidate.policy = PolicyKind::Dcbm;
        candidate.gains = g;
        candidate.runs = static_cast<std::uint32_t>(spec.validation_runs);
        candidate.master_seed = spec.seed;

        double loss;
        if (mode == TuneMode::Standard) {
            MonteCarloSummary s = run_monte_carlo_serial(candidate);
            loss = spec.w_vol * s.metrics.at("sigma_p").mean -
                   spec.w_treasury * s.metrics.at("treasury_growth_pct").mean / 100.0;
        } else {
            // Worst loss across the PGD adversary set.
            loss = -std::numeric_limits<double>::infinity();
            for (double budget : spec.adversary_budgets) {
                AttackBudget b;
                b.epsilon = budget;
                double adv_loss = 0.0;
                for (int t = 0; t < spec.attack_trials; ++t) {
                    AttackOutcome o =
                        pgd_sustained(candidate, mix_seed(spec.seed, 1000 + t), b);
                    adv_loss += o.treasury_drain + (o.success ? 1.0 : 0.0);
                }
                adv_loss /= static_cast<double>(spec.attack_trials);
                loss = std::max(loss, adv_loss);
            }
        }
        losses[i] = loss;
        feasible[i] = 1;
    }

    std::size_t best = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!feasible[i]) continue;
        if (best == grid.size() || losses[i] < losses[best]) best = i;
    }
    if (best == grid.size())
        throw std::runtime_error("tune_gains: no Jury-stable grid point (no-feasible-gains)");
    return grid[best];
}

}  // namespace dcbm
