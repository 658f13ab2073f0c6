// Treasury evolution under the conservation law, optional operational
// expenditure, and the closed-form doomsday trajectory used as the
// non-depletion oracle.
#pragma once

#include "dcbm/wad.hpp"

#include <stdexcept>
#include <vector>

namespace dcbm {

enum class AccountingMode {
    Conservation,  // T' = T + R - J, J <= T + R enforced
    OpsClamped,    // T' = max(0, T + R - J - C_ops)
};

struct SolvencyViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Treasury {
  public:
    Treasury(Wad initial_balance, AccountingMode mode = AccountingMode::Conservation,
             Wad ops_cost = WAD_ZERO, Wad dust_floor = Wad(WAD_SCALE / 1000000));

    Wad balance() const { return balance_; }
    AccountingMode mode() const { return mode_; }
    Wad ops_cost() const { return ops_cost_; }
    bool below_dust_floor() const { return balance_ < dust_floor_; }

    // One epoch of the treasury law. Throws SolvencyViolation in conservation
    // mode when J > T + R (a broken policy, never silently clamped).
    void apply_epoch(Wad revenue, Wad buyback_spend);

  private:
    Wad balance_;
    AccountingMode mode_;
    Wad ops_cost_;
    Wad dust_floor_;
};

// Closed-form geometric trajectory T_n = T_0 * prod(1 - lambda_k), the
// revenue-blackout solvency oracle. Returns the full path [T_0..T_n].
std::vector<double> doomsday_trajectory(double t0, const std::vector<double>& lambdas);

}  // namespace dcbm
