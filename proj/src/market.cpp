#include "dcbm/market.hpp"

#include <cmath>
#include <stdexcept>

namespace dcbm {

Pool::Pool(Wad token_reserve, Wad stable_reserve, Wad fee_rate)
    : x_(token_reserve), y_(stable_reserve), fee_(fee_rate) {
    if (x_.raw <= 0 || y_.raw <= 0)
        throw std::invalid_argument("pool: reserves must be positive");
    if (fee_.raw < 0 || fee_ > Wad(WAD_SCALE / 100))
        throw std::invalid_argument("pool: fee rate outside [0, 0.01]");
    k_ = wad_mul(x_, y_);
}

Wad Pool::spot_price() const { return wad_div(y_, x_); }

Wad Pool::alpha() const { return wad_div(Wad(2 * WAD_SCALE), y_); }

Wad Pool::execute_buyback(Wad stable_in, Wad fee_override) {
    if (stable_in.raw < 0) throw std::invalid_argument("buyback: negative amount");
    if (stable_in.raw == 0) return WAD_ZERO;
    Wad fee_rate = fee_override.raw >= 0 ? fee_override : WAD_ZERO;
    Wad fee = wad_mul(stable_in, fee_rate);
    Wad y_new = wad_add(y_, wad_sub(stable_in, fee));
    Wad x_new = wad_div(k_, y_new);
    Wad burned = wad_sub(x_, x_new);
    x_ = x_new;
    y_ = y_new;
    burned_ = wad_add(burned_, burned);
    fee_stable_ = wad_add(fee_stable_, fee);
    return burned;
}

TradeResult Pool::execute_trade(TradeDirection dir, Wad amount_in) {
    if (amount_in.raw <= 0) throw std::invalid_argument("trade: amount_in must be positive");
    Wad fee = wad_mul(amount_in, fee_);
    Wad eff = wad_sub(amount_in, fee);
    TradeResult r;
    r.fee_paid = fee;
    if (dir == TradeDirection::BuyToken) {
        Wad y_new = wad_add(y_, eff);
        Wad x_new = wad_div(k_, y_new);
        r.amount_out = wad_sub(x_, x_new);
        x_ = x_new;
        y_ = y_new;
        fee_stable_ = wad_add(fee_stable_, fee);
    } else {
        Wad x_new = wad_add(x_, eff);
        Wad y_new = wad_div(k_, x_new);
        r.amount_out = wad_sub(y_, y_new);
        x_ = x_new;
        y_ = y_new;
        fee_tokens_ = wad_add(fee_tokens_, fee);
    }
    return r;
}

Pool::PriceMoveFlows Pool::move_price_to(Wad target) {
    if (target.raw <= 0) throw std::invalid_argument("move_price_to: nonpositive target");
    Wad y_new = wad_sqrt(wad_mul(k_, target));
    if (y_new.raw <= 0) throw std::invalid_argument("move_price_to: degenerate target");
    Wad x_new = wad_div(k_, y_new);
    PriceMoveFlows f;
    f.tokens_to_counterparty = wad_sub(x_, x_new);    // >0 when price rises
    f.stable_to_counterparty = wad_sub(y_, y_new);    // >0 when price falls
    x_ = x_new;
    y_ = y_new;
    return f;
}

void Pool::scale_liquidity(Wad factor) {
    if (factor.raw <= 0) throw std::invalid_argument("scale_liquidity: nonpositive factor");
    x_ = wad_mul(x_, factor);
    y_ = wad_mul(y_, factor);
    k_ = wad_mul(x_, y_);  // re-derived on liquidity events only
}

PriceOracle::PriceOracle(std::size_t epoch_length, double block_time_seconds)
    : n_(epoch_length), block_time_(block_time_seconds), ring_(epoch_length) {
    if (epoch_length == 0) throw std::invalid_argument("oracle: epoch length must be >= 1");
}

void PriceOracle::record_block(Wad price) {
    if (price.raw <= 0) throw std::invalid_argument("oracle: nonpositive price");
    ring_[head_] = price;
    head_ = (head_ + 1) % n_;
    ++count_;
}

Wad PriceOracle::twap() const {
    if (count_ < n_)
        throw std::runtime_error("oracle: insufficient data for twap");
    int128 sum = 0;
    for (const Wad& p : ring_) sum += p.raw;
    return Wad(sum / static_cast<int128>(n_));
}

PlantLinearization linearize(const Pool& pool) {
    PlantLinearization lin;
    lin.alpha = 2.0 / wad_to_double(pool.stable_reserve());
    lin.log_price = std::log(wad_to_double(pool.spot_price()));
    return lin;
}

}  // namespace dcbm
