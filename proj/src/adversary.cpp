#include "dcbm/adversary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcbm {

namespace {

constexpr int kResponseWindow = 2;     // epochs observed after the attack
constexpr double kSaturationFill = 0.99;  // tanh knee as a fraction of gamma*T

void advance_epochs(World& w, int n) {
    for (int i = 0; i < n && !w.done(); ++i) w.step_epoch();
}

double spot(const World& w) { return wad_to_double(w.pool().spot_price()); }

// Sells tokens worth `notional` stable at current spot; returns stable received.
double sell_notional(World& w, double notional) {
    double tokens = notional / spot(w);
    if (tokens <= 0.0) return 0.0;
    TradeResult r = w.attacker_trade(TradeDirection::SellToken, wad_from_double(tokens));
    return wad_to_double(r.amount_out);
}

// Spends `notional` stable buying tokens; returns tokens received.
double buy_notional(World& w, double notional) {
    if (notional <= 0.0) return 0.0;
    TradeResult r = w.attacker_trade(TradeDirection::BuyToken, wad_from_double(notional));
    return wad_to_double(r.amount_out);
}

// Stable needed to buy back `tokens` at the pool's current state (fee φ on
// the input leg), from the closed-form constant-product quote.
double buyback_cost(const World& w, double tokens) {
    double x = wad_to_double(w.pool().token_reserve());
    double y = wad_to_double(w.pool().stable_reserve());
    double k = x * y;
    double phi = wad_to_double(w.pool().fee_rate());
    if (tokens >= x) throw std::invalid_argument("attack unwind exceeds pool reserve");
    double eff = k / (x - tokens) - y;
    return eff / (1.0 - phi);
}

// One attack epoch: run all blocks, placing a signed trade before the final
// block so the manipulated price lands in the epoch's TWAP window. `action`
// is a stable notional fraction of the pool depth: positive sells (price
// down), negative buys. Returns the epoch record; updates the attacker's
// token/stable running position.
EpochRecord attacked_epoch(World& w, double action, double& tokens_pos, double& stable_flow) {
    w.begin_epoch();
    while (!w.epoch_blocks_done()) {
        if (action != 0.0 && w.blocks_remaining() == 1) {
            double notional = std::abs(action) * wad_to_double(w.pool().stable_reserve());
            if (action > 0.0) {
                double tokens = notional / spot(w);
                double got = sell_notional(w, notional);
                tokens_pos -= tokens;
                stable_flow += got;
            } else {
                double got = buy_notional(w, notional);
                tokens_pos += got;
                stable_flow -= notional;
            }
            action = 0.0;
        }
        w.step_block();
    }
    return w.end_epoch();
}

struct SequenceResult {
    AttackOutcome outcome;
    double spend_sum = 0.0;  // controller spend during the attack + response window
};

// Replays a fixed action sequence against a fresh world and a same-seed
// counterfactual with no attacker.
SequenceResult apply_sequence(const ScenarioConfig& cfg, std::uint64_t seed,
                              int warmup_epochs, const std::vector<double>& actions,
                              double holding_cost_rate) {
    World adv(cfg, seed);
    World ctl(cfg, seed);
    advance_epochs(adv, warmup_epochs);
    advance_epochs(ctl, warmup_epochs);

    double t0 = wad_to_double(adv.treasury().balance());
    double tokens_pos = 0.0, stable_flow = 0.0, carry = 0.0;
    double spend_adv = 0.0, spend_ctl = 0.0;
    double dev = 0.0;

    for (double a : actions) {
        EpochRecord ra = attacked_epoch(adv, a, tokens_pos, stable_flow);
        EpochRecord rc = ctl.step_epoch();
        spend_adv += wad_to_double(ra.spend);
        spend_ctl += wad_to_double(rc.spend);
        double tc = wad_to_double(rc.twap);
        dev = std::max(dev, std::abs(wad_to_double(ra.twap) - tc) / tc);
        carry += holding_cost_rate * std::abs(tokens_pos) * spot(adv);
    }

    // Unwind at market.
    if (tokens_pos > 1e-12) {
        TradeResult r = adv.attacker_trade(TradeDirection::SellToken, wad_from_double(tokens_pos));
        stable_flow += wad_to_double(r.amount_out);
        tokens_pos = 0.0;
    } else if (tokens_pos < -1e-12) {
        double cost = buyback_cost(adv, -tokens_pos);
        TradeResult r = adv.attacker_trade(TradeDirection::BuyToken, wad_from_double(cost));
        stable_flow -= cost;
        tokens_pos += wad_to_double(r.amount_out);
    }

    for (int i = 0; i < kResponseWindow; ++i) {
        if (adv.done() || ctl.done()) break;
        spend_adv += wad_to_double(adv.step_epoch().spend);
        spend_ctl += wad_to_double(ctl.step_epoch().spend);
    }

    SequenceResult res;
    res.outcome.profit = stable_flow + tokens_pos * spot(adv) - carry;
    res.outcome.treasury_drain = (spend_adv - spend_ctl) / t0;
    res.outcome.induced_deviation = dev;
    res.outcome.success = res.outcome.profit > 0.0;
    res.spend_sum = spend_adv;
    return res;
}

std::vector<double> action_grid(double step, int grid_per_side) {
    std::vector<double> g{0.0};
    for (int j = 1; j <= grid_per_side; ++j) {
        g.push_back(step * j / grid_per_side);
        g.push_back(-step * j / grid_per_side);
    }
    return g;
}

}  // namespace

AttackOutcome fgsm_flash(const ScenarioConfig& cfg, std::uint64_t seed, double epsilon,
                         int warmup_epochs) {
    if (epsilon <= 0.0) throw std::invalid_argument("fgsm: epsilon must be positive");
    // Estimate the spend gradient sign with small probes in both directions,
    // then commit the full notional in the steeper one.
    double probe = epsilon * 0.1;
    double up, down;
    {
        SequenceResult r = apply_sequence(cfg, seed, warmup_epochs, {probe}, 0.0);
        down = r.spend_sum;
    }
    {
        SequenceResult r = apply_sequence(cfg, seed, warmup_epochs, {-probe}, 0.0);
        up = r.spend_sum;
    }
    double signed_eps = down >= up ? epsilon : -epsilon;
    AttackBudget b;
    SequenceResult r =
        apply_sequence(cfg, seed, warmup_epochs, {signed_eps}, b.holding_cost_rate);
    return r.outcome;
}

AttackOutcome pgd_sustained(const ScenarioConfig& cfg, std::uint64_t seed,
                            const AttackBudget& budget, int warmup_epochs, int grid_per_side) {
    if (budget.max_epochs < 1) throw std::invalid_argument("pgd: window must be >= 1");
    double step = budget.epsilon / budget.max_epochs;
    std::vector<double> grid = action_grid(step, grid_per_side);

    // Greedy: extend the committed prefix one epoch at a time, scoring each
    // candidate by the controller spend of the full replay of prefix +
    // candidate (a one-step lookahead on a cloned world).
    std::vector<double> chosen;
    for (int e = 0; e < budget.max_epochs; ++e) {
        double best_score = -std::numeric_limits<double>::infinity();
        double best_action = 0.0;
        for (double a : grid) {
            std::vector<double> trial = chosen;
            trial.push_back(a);
            SequenceResult r =
                apply_sequence(cfg, seed, warmup_epochs, trial, budget.holding_cost_rate);
            if (r.spend_sum > best_score) {
                best_score = r.spend_sum;
                best_action = a;
            }
        }
        chosen.push_back(best_action);
    }
    return apply_sequence(cfg, seed, warmup_epochs, chosen, budget.holding_cost_rate).outcome;
}

AttackOutcome pgd_exhaustive(const ScenarioConfig& cfg, std::uint64_t seed,
                             const AttackBudget& budget, int warmup_epochs, int grid_per_side) {
    if (budget.max_epochs < 1) throw std::invalid_argument("pgd: window must be >= 1");
    double step = budget.epsilon / budget.max_epochs;
    std::vector<double> grid = action_grid(step, grid_per_side);

    std::vector<double> actions(budget.max_epochs, 0.0);
    std::vector<std::size_t> idx(budget.max_epochs, 0);
    double best_score = -std::numeric_limits<double>::infinity();
    AttackOutcome best;
    for (;;) {
        for (int e = 0; e < budget.max_epochs; ++e) actions[e] = grid[idx[e]];
        SequenceResult r =
            apply_sequence(cfg, seed, warmup_epochs, actions, budget.holding_cost_rate);
        if (r.spend_sum > best_score) {
            best_score = r.spend_sum;
            best = r.outcome;
        }
        int e = budget.max_epochs - 1;
        while (e >= 0 && ++idx[e] == grid.size()) idx[e--] = 0;
        if (e < 0) break;
    }
    return best;
}

SaturationSearchResult cw_arbitrage(const ScenarioConfig& cfg, std::uint64_t seed,
                                    double delta_max, int warmup_epochs, double tol) {
    if (delta_max <= 0.0 || delta_max >= 1.0)
        throw std::invalid_argument("cw: delta_max outside (0,1)");
    World base(cfg, seed);
    advance_epochs(base, warmup_epochs);

    auto saturates = [&](double delta) {
        World w = base;
        double t_pre = wad_to_double(w.treasury().balance());
        double p_ref = spot(w);
        double target = p_ref * (1.0 - delta);
        w.begin_epoch();
        while (!w.epoch_blocks_done()) {
            double p = spot(w);
            if (p > target) {
                // Sell enough tokens to pin the price at the target level.
                double x = wad_to_double(w.pool().token_reserve());
                double y = wad_to_double(w.pool().stable_reserve());
                double k = x * y;
                double phi = wad_to_double(w.pool().fee_rate());
                double x_new = std::sqrt(k / target);
                double tokens = (x_new - x) / (1.0 - phi);
                if (tokens > 0.0)
                    w.attacker_trade(TradeDirection::SellToken, wad_from_double(tokens));
            }
            w.step_block();
        }
        EpochRecord rec = w.end_epoch();
        double gamma_t = cfg.gamma * t_pre;
        return wad_to_double(rec.spend) >= kSaturationFill * gamma_t;
    };

    SaturationSearchResult res;
    if (!saturates(delta_max)) return res;
    double lo = 0.0, hi = delta_max;
    while (hi - lo > tol * delta_max) {
        double mid = 0.5 * (lo + hi);
        if (saturates(mid))
            hi = mid;
        else
            lo = mid;
    }
    res.reachable = true;
    res.min_deviation = hi;
    return res;
}

AttackOutcome frontrun_sandwich(Wad pending_buyback, const Pool& pool) {
    AttackOutcome out;
    if (pending_buyback.raw <= 0) return out;
    double y = wad_to_double(pool.stable_reserve());
    double best = 0.0;
    bool any = false;
    constexpr int kGridPoints = 200;
    for (int i = 0; i < kGridPoints; ++i) {
        double frac = 1e-4 * std::pow(0.5 / 1e-4, static_cast<double>(i) / (kGridPoints - 1));
        double b = frac * y;
        Pool p = pool;
        TradeResult buy = p.execute_trade(TradeDirection::BuyToken, wad_from_double(b));
        p.execute_buyback(pending_buyback);
        TradeResult sell = p.execute_trade(TradeDirection::SellToken, buy.amount_out);
        double profit = wad_to_double(sell.amount_out) - b;
        if (!any || profit > best) {
            best = profit;
            any = true;
        }
    }
    out.profit = best;
    out.success = best > 0.0;
    return out;
}

AsrStats asr(const std::vector<AttackOutcome>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("asr: empty outcome batch");
    AsrStats s;
    s.n = static_cast<int>(outcomes.size());
    for (const AttackOutcome& o : outcomes) {
        if (o.success) s.success_rate += 1.0;
        s.mean_profit += o.profit;
        s.mean_drain += o.treasury_drain;
    }
    s.success_rate /= s.n;
    s.mean_profit /= s.n;
    s.mean_drain /= s.n;
    return s;
}

}  // namespace dcbm
