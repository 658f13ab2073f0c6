// Constant-product AMM plant: trade and buyback execution, per-block price
// recording with an arithmetic TWAP oracle, and the linearized log-price model.
#pragma once

#include "dcbm/wad.hpp"

#include <cstddef>
#include <vector>

namespace dcbm {

enum class TradeDirection { BuyToken, SellToken };

struct TradeResult {
    Wad amount_out{};  // asset received by the trader
    Wad fee_paid{};    // in the input asset
};

// Reserves in Wad; K is held fixed between liquidity events and the token
// reserve is always re-derived from (K, y) so invariant error never
// accumulates. Swap fees are diverted to side buckets rather than folded
// into reserves, keeping K exact.
class Pool {
  public:
    Pool(Wad token_reserve, Wad stable_reserve, Wad fee_rate);

    Wad token_reserve() const { return x_; }
    Wad stable_reserve() const { return y_; }
    Wad invariant() const { return k_; }
    Wad fee_rate() const { return fee_; }
    Wad spot_price() const;  // y / x
    Wad cumulative_burned() const { return burned_; }
    Wad fee_bucket_tokens() const { return fee_tokens_; }
    Wad fee_bucket_stable() const { return fee_stable_; }

    // Buyback of J stablecoins, fee-free by default (fee_override >= 0 uses
    // that rate instead). Purchased tokens are burned.
    Wad execute_buyback(Wad stable_in, Wad fee_override = Wad(-1));

    TradeResult execute_trade(TradeDirection dir, Wad amount_in);

    // Moves the spot price to `target` along the constant-product curve and
    // returns the implied (token_delta, stable_delta) from the counterparty's
    // perspective: positive delta = counterparty received that much.
    struct PriceMoveFlows { Wad tokens_to_counterparty; Wad stable_to_counterparty; };
    PriceMoveFlows move_price_to(Wad target);

    // Liquidity event: scales both reserves by `factor` and re-derives K.
    void scale_liquidity(Wad factor);

    // 2 / y, the small-signal price impact coefficient.
    Wad alpha() const;

  private:
    Wad x_, y_, k_, fee_;
    Wad burned_{};
    Wad fee_tokens_{}, fee_stable_{};
};

// Ring buffer of per-block spot prices; the TWAP of an epoch is the
// arithmetic mean of its N block prices.
class PriceOracle {
  public:
    PriceOracle(std::size_t epoch_length, double block_time_seconds = 12.0);

    void record_block(Wad price);
    Wad twap() const;  // mean of the most recent N prices
    std::size_t epoch_length() const { return n_; }
    std::size_t samples() const { return count_ < n_ ? count_ : n_; }
    double block_time_seconds() const { return block_time_; }

  private:
    std::size_t n_;
    double block_time_;
    std::vector<Wad> ring_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

struct PlantLinearization {
    double alpha = 0.0;      // 2 / y
    double log_price = 0.0;  // ln P
};

PlantLinearization linearize(const Pool& pool);

}  // namespace dcbm
