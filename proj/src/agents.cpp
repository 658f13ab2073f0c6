#include "dcbm/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcbm {

AgentPopulation::AgentPopulation(const PopulationConfig& cfg) : cfg_(cfg) {
    operators_.reserve(cfg.n_operators);
    for (std::size_t i = 0; i < cfg.n_operators; ++i) {
        OperatorAgent op;
        op.cost_per_epoch = cfg.operator_cost;
        op.capacity = cfg.operator_capacity;
        op.exit_threshold = cfg.operator_exit_threshold;
        op.patience = cfg.operator_patience;
        op.token_balance = wad_from_double(cfg.operator_tokens);
        operators_.push_back(op);
    }
    speculators_.reserve(cfg.n_speculators);
    for (std::size_t i = 0; i < cfg.n_speculators; ++i) {
        SpeculatorAgent sp;
        sp.momentum_coeff = cfg.speculator_momentum;
        sp.position_limit_tokens = cfg.speculator_position_limit;
        sp.token_balance = wad_from_double(cfg.speculator_tokens);
        sp.stable_balance = wad_from_double(cfg.speculator_stable);
        speculators_.push_back(sp);
    }
    model_owners_.reserve(cfg.n_model_owners);
    for (std::size_t i = 0; i < cfg.n_model_owners; ++i) {
        ModelOwnerAgent mo;
        mo.deploy_threshold = cfg.model_owner_deploy_threshold;
        mo.token_balance = wad_from_double(cfg.model_owner_tokens);
        model_owners_.push_back(mo);
    }
}

PopulationStepOutcome AgentPopulation::step(double demand_level, Pool& pool, double fee_rate,
                                            double twap_trend, double spot_price) {
    if (demand_level < 0.0) throw std::invalid_argument("agents: negative demand");
    PopulationStepOutcome out;

    // Users: elastic demand, capped by network capacity.
    double capacity = 0.0;
    for (const auto& op : operators_)
        if (op.active) capacity += op.capacity;
    double elastic = demand_level;
    if (spot_price > 0.0 && cfg_.reference_price > 0.0)
        elastic = demand_level * std::pow(cfg_.reference_price / spot_price, cfg_.user_elasticity);
    double served = std::min(elastic, capacity);
    out.demand_served = served;
    out.gross_revenue = served * spot_price;
    out.revenue = wad_from_double(fee_rate * out.gross_revenue);

    // Operators: pro-rata share of post-fee revenue minus fixed cost.
    std::size_t n_active = active_operators();
    double share = n_active > 0 ? out.gross_revenue * (1.0 - fee_rate) / static_cast<double>(n_active)
                                : 0.0;
    for (auto& op : operators_) {
        if (!op.active) continue;
        double profit = share - op.cost_per_epoch;
        if (op.rolling_profit == 0.0 && op.bad_streak == 0)
            op.rolling_profit = profit;
        else
            op.rolling_profit = 0.3 * profit + 0.7 * op.rolling_profit;
    }

    // Speculators: momentum orders clipped to position limits.
    for (auto& sp : speculators_) {
        double notional = sp.momentum_coeff * twap_trend;
        if (notional > 0.0) {
            double spend = std::min(notional * wad_to_double(sp.stable_balance),
                                    wad_to_double(sp.stable_balance));
            double max_buy_tokens =
                sp.position_limit_tokens - wad_to_double(sp.token_balance);
            spend = std::min(spend, std::max(0.0, max_buy_tokens) * spot_price);
            if (spend > 1e-9) {
                Wad in = wad_from_double(spend);
                if (in <= sp.stable_balance && in.raw > 0) {
                    TradeResult r = pool.execute_trade(TradeDirection::BuyToken, in);
                    sp.stable_balance = wad_sub(sp.stable_balance, in);
                    sp.token_balance = wad_add(sp.token_balance, r.amount_out);
                }
            }
        } else if (notional < 0.0) {
            double sell_tokens = std::min(-notional * wad_to_double(sp.token_balance),
                                          wad_to_double(sp.token_balance));
            if (sell_tokens > 1e-9) {
                Wad in = wad_from_double(sell_tokens);
                if (in <= sp.token_balance && in.raw > 0) {
                    TradeResult r = pool.execute_trade(TradeDirection::SellToken, in);
                    sp.token_balance = wad_sub(sp.token_balance, in);
                    sp.stable_balance = wad_add(sp.stable_balance, r.amount_out);
                }
            }
        }
    }

    // Model owners: deploy on a positive revenue trend.
    if (gross_initialized_ && gross_rolling_ > 0.0) {
        double trend = out.gross_revenue / gross_rolling_ - 1.0;
        for (auto& mo : model_owners_) {
            if (trend > mo.deploy_threshold) {
                mo.deployed_models += 1;
                mo.new_deployments += 1;
                out.new_deployments += 1;
            }
        }
    }
    gross_rolling_ = gross_initialized_ ? 0.1 * out.gross_revenue + 0.9 * gross_rolling_
                                        : out.gross_revenue;
    gross_initialized_ = true;
    last_gross_ = out.gross_revenue;
    return out;
}

int AgentPopulation::churn_update() {
    int exits = 0;
    for (auto& op : operators_) {
        if (!op.active) continue;
        if (op.rolling_profit < op.exit_threshold) {
            if (++op.bad_streak >= op.patience) {
                op.active = false;  // no re-entry within a run
                ++exits;
            }
        } else {
            op.bad_streak = 0;
        }
    }
    exits_ += exits;
    return exits;
}

double AgentPopulation::churn_rate() const {
    if (operators_.empty()) return 0.0;
    return static_cast<double>(exits_) / static_cast<double>(operators_.size());
}

double AgentPopulation::innovation_count() const {
    double n = 0.0;
    for (const auto& mo : model_owners_) n += mo.new_deployments;
    return n;
}

double AgentPopulation::innovation_rate() const {
    double total = 0.0;
    for (const auto& mo : model_owners_) total += mo.deployed_models;
    if (total <= 0.0) throw std::invalid_argument("innovation_rate: no deployed models");
    return innovation_count() / total;
}

std::size_t AgentPopulation::active_operators() const {
    std::size_t n = 0;
    for (const auto& op : operators_)
        if (op.active) ++n;
    return n;
}

std::vector<double> AgentPopulation::token_balances() const {
    std::vector<double> b;
    b.reserve(operators_.size() + speculators_.size() + model_owners_.size());
    for (const auto& a : operators_) b.push_back(wad_to_double(a.token_balance));
    for (const auto& a : speculators_) b.push_back(wad_to_double(a.token_balance));
    for (const auto& a : model_owners_) b.push_back(wad_to_double(a.token_balance));
    return b;
}

Wad AgentPopulation::total_agent_tokens() const {
    Wad t{};
    for (const auto& a : operators_) t = wad_add(t, a.token_balance);
    for (const auto& a : speculators_) t = wad_add(t, a.token_balance);
    for (const auto& a : model_owners_) t = wad_add(t, a.token_balance);
    return t;
}

double gini(const std::vector<double>& balances) {
    if (balances.empty()) throw std::invalid_argument("gini: empty input");
    double sum = 0.0;
    bool any_positive = false;
    for (double b : balances) {
        if (b < 0.0) throw std::invalid_argument("gini: negative balance");
        if (b > 0.0) any_positive = true;
        sum += b;
    }
    if (!any_positive) throw std::invalid_argument("gini: all balances zero");
    std::vector<double> sorted = balances;
    std::sort(sorted.begin(), sorted.end());
    double n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        weighted += (2.0 * (static_cast<double>(i) + 1.0) - n - 1.0) * sorted[i];
    return weighted / (n * sum);
}

}  // namespace dcbm
