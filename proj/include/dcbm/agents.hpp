// The four agent roles producing order flow, protocol revenue, churn and
// wealth-distribution measurements. Behavioral coefficients are scenario
// configuration, not calibrated estimates.
#pragma once

#include "dcbm/market.hpp"
#include "dcbm/wad.hpp"

#include <cstddef>
#include <deque>
#include <vector>

namespace dcbm {

struct OperatorAgent {
    double cost_per_epoch = 0.0;
    double capacity = 0.0;  // requests servable per epoch
    Wad token_balance{};
    double rolling_profit = 0.0;  // exponential rolling mean
    bool active = true;
    double exit_threshold = 0.0;
    int patience = 10;  // consecutive bad epochs before exit (W_c)
    int bad_streak = 0;
};

struct SpeculatorAgent {
    double momentum_coeff = 0.0;
    double position_limit_tokens = 0.0;
    Wad token_balance{};
    Wad stable_balance{};
};

struct ModelOwnerAgent {
    int deployed_models = 1;
    double deploy_threshold = 0.0;  // on relative revenue trend
    Wad token_balance{};
    int new_deployments = 0;
};

struct PopulationConfig {
    std::size_t n_operators = 50;
    std::size_t n_users = 200;  // scales aggregate demand
    std::size_t n_speculators = 20;
    std::size_t n_model_owners = 10;

    double operator_cost = 1600.0;        // stable per epoch
    double operator_capacity = 4000.0;    // requests per epoch
    double operator_exit_threshold = 0.0; // rolling profit below this => bad epoch
    int operator_patience = 10;
    double operator_tokens = 2000.0;      // initial token grant

    double user_elasticity = 1.5;
    double reference_price = 1.0;  // P_ref for demand elasticity

    double speculator_momentum = 8.0;
    double speculator_tokens = 5000.0;
    double speculator_stable = 5000.0;
    double speculator_position_limit = 20000.0;

    double model_owner_deploy_threshold = 0.05;
    double model_owner_tokens = 1000.0;
};

struct PopulationStepOutcome {
    Wad revenue{};          // protocol revenue R_acc for the epoch (stable)
    double demand_served = 0.0;
    double gross_revenue = 0.0;  // stable value of served demand
    int new_exits = 0;
    int new_deployments = 0;
};

class AgentPopulation {
  public:
    AgentPopulation(const PopulationConfig& cfg);

    // One epoch of agent behavior, in fixed order: users generate served
    // demand and fees, operators accrue profit, speculators trade momentum,
    // model owners react to the revenue trend. `twap_trend` is the relative
    // change of epoch TWAP versus the previous epoch.
    PopulationStepOutcome step(double demand_level, Pool& pool, double fee_rate,
                               double twap_trend, double spot_price);

    // Applies the exit rule and returns the number of exits this epoch.
    int churn_update();

    double churn_rate() const;  // exits / initial operator count
    double innovation_count() const;
    double innovation_rate() const;  // new deployments / total deployed

    std::size_t active_operators() const;
    std::vector<double> token_balances() const;  // per-agent, for Gini
    Wad total_agent_tokens() const;              // exact, for conservation

    const std::vector<OperatorAgent>& operators() const { return operators_; }
    const std::vector<SpeculatorAgent>& speculators() const { return speculators_; }

  private:
    PopulationConfig cfg_;
    std::vector<OperatorAgent> operators_;
    std::vector<SpeculatorAgent> speculators_;
    std::vector<ModelOwnerAgent> model_owners_;
    int exits_ = 0;
    double last_gross_ = 0.0;
    double gross_rolling_ = 0.0;
    bool gross_initialized_ = false;
};

// Standard Gini coefficient over nonnegative balances; at least one strictly
// positive balance required.
double gini(const std::vector<double>& balances);

}  // namespace dcbm
