#include "dcbm/treasury.hpp"

namespace dcbm {

Treasury::Treasury(Wad initial_balance, AccountingMode mode, Wad ops_cost, Wad dust_floor)
    : balance_(initial_balance), mode_(mode), ops_cost_(ops_cost), dust_floor_(dust_floor) {
    if (balance_.raw < 0) throw std::invalid_argument("treasury: negative initial balance");
    if (ops_cost_.raw < 0) throw std::invalid_argument("treasury: negative ops cost");
}

void Treasury::apply_epoch(Wad revenue, Wad buyback_spend) {
    if (revenue.raw < 0) throw std::invalid_argument("treasury: negative revenue");
    if (buyback_spend.raw < 0) throw std::invalid_argument("treasury: negative spend");
    Wad available = wad_add(balance_, revenue);
    if (mode_ == AccountingMode::Conservation) {
        if (buyback_spend > available)
            throw SolvencyViolation("treasury: J exceeds T + R_acc");
        balance_ = wad_sub(available, buyback_spend);
    } else {
        Wad next = wad_sub(wad_sub(available, buyback_spend), ops_cost_);
        balance_ = wad_max(next, WAD_ZERO);
    }
}

std::vector<double> doomsday_trajectory(double t0, const std::vector<double>& lambdas) {
    if (t0 <= 0.0) throw std::invalid_argument("doomsday: T0 must be positive");
    std::vector<double> path;
    path.reserve(lambdas.size() + 1);
    path.push_back(t0);
    double t = t0;
    for (double l : lambdas) {
        if (l < 0.0 || l >= 1.0) throw std::invalid_argument("doomsday: lambda outside [0,1)");
        t *= (1.0 - l);
        path.push_back(t);
    }
    return path;
}

}  // namespace dcbm
