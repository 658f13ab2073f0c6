// Scenario configuration, the closed-loop world stepped epoch by epoch,
// Monte Carlo orchestration (serial reference and OpenMP fan-out), and
// CSV/JSON serialization.
#pragma once

#include "dcbm/agents.hpp"
#include "dcbm/controller.hpp"
#include "dcbm/market.hpp"
#include "dcbm/policies.hpp"
#include "dcbm/stochastic.hpp"
#include "dcbm/treasury.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dcbm {

struct ScenarioConfig {
    std::string scenario = "custom";  // bull|bear|high_vol|demand_shock_pos|
                                      // demand_shock_neg|liquidity_crisis|custom

    JumpDiffusionParams demand_params;
    JumpDiffusionParams shock_params;
    double correlation_rho = 0.3;

    double pool_tokens = 1e6;
    double pool_stable = 1e6;
    double pool_fee = 0.003;
    double buyback_fee = 0.0;

    double treasury_initial = 2e5;
    double ops_cost = 0.0;
    std::string accounting_mode = "conservation";  // or "ops_clamped"

    std::uint32_t epoch_blocks = 50;
    double block_time_seconds = 12.0;
    std::uint32_t horizon = 500;
    double block_noise_sigma = 0.0;  // extra per-block white noise

    PolicyKind policy = PolicyKind::Dcbm;
    PolicyParams policy_params;

    GainsD gains{40.0, 4.0, 10.0};
    double gamma = 0.1;
    std::string derivative_mode = "on_measurement";  // or "on_error"
    double filter_coeff = 0.3;
    std::uint32_t input_smooth_window = 1;
    bool cert_enabled = false;
    double cert_integral_clamp = 0.5;
    double cert_rate_limit = 0.5;
    double ema_beta = 2.0 / 31.0;
    bool literal_clamp_rule = false;

    PopulationConfig population;
    double demand_base = 150000.0;      // mean requests per epoch at P_ref
    double protocol_fee_rate = 0.05;    // fraction of inference value accrued as revenue

    // Scripted events.
    double demand_jump_size = 0.0;  // log jump applied at mid-run
    double liquidity_event_factor = 1.0;
    std::int64_t liquidity_event_epoch = -1;

    std::uint32_t runs = 1;
    std::uint64_t master_seed = 42;

    // When nonempty, replaces the generated exogenous shock path (historical
    // replay); the horizon shrinks to its length. Not part of the JSON form.
    std::vector<double> shock_override;

    void validate() const;
};

// Named scenario presets; "custom" returns defaults.
ScenarioConfig scenario_preset(const std::string& name);

ScenarioConfig config_from_json_file(const std::string& path);
ScenarioConfig config_from_json_string(const std::string& text);
std::string config_to_json_string(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);

struct EpochRecord {
    std::uint32_t k = 0;
    Wad price{};      // spot at epoch close
    Wad twap{};
    Wad target{};
    Wad error{};
    Wad u_raw{};
    Wad u_applied{};
    Wad spend{};      // J
    Wad treasury{};   // T after the epoch
    Wad burned_cum{};
    Wad revenue{};    // R_acc of the epoch
    int churn_events = 0;
};

struct RunReport {
    std::vector<EpochRecord> series;
    double sigma_p = 0.0;
    double eps_ma = 0.0;
    double churn_pct = 0.0;
    double gini_coeff = 0.0;
    double treasury_growth_pct = 0.0;
    double treasury_stability = 0.0;
    double control_mean = 0.0;
    double control_var = 0.0;
    double total_spend = 0.0;
    double innovation = 0.0;
    std::uint64_t op_count_per_epoch = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

// One simulation world; value-copyable so adversaries can probe clones.
class World {
  public:
    World(const ScenarioConfig& cfg, std::uint64_t run_seed);

    void begin_epoch();
    void step_block();       // one block: exogenous move + price recording
    bool epoch_blocks_done() const;
    std::uint32_t blocks_remaining() const;
    EpochRecord end_epoch(); // policy decision, buyback, treasury, churn
    EpochRecord step_epoch();  // begin + all blocks + end

    bool done() const { return epoch_ >= cfg_.horizon; }
    std::uint32_t epoch() const { return epoch_; }

    Pool& pool() { return pool_; }
    const Pool& pool() const { return pool_; }
    Treasury& treasury() { return treasury_; }
    const Treasury& treasury() const { return treasury_; }
    const PriceOracle& oracle() const { return oracle_; }
    const AgentPopulation& population() const { return population_; }
    Wad last_twap() const { return last_twap_; }
    Wad last_u_applied() const { return last_u_applied_; }
    Wad last_spend() const { return last_spend_; }
    // Cumulative controller arithmetic ops (gas proxy); 0 for baselines.
    std::uint64_t controller_op_count() const;
    Wad external_market_tokens() const { return ext_tokens_; }
    Wad initial_token_supply() const { return initial_supply_; }

    // Exogenous log shock scheduled for epoch k (oracle foresight).
    std::span<const double> future_shocks(std::uint32_t from_epoch) const;

    // Token-side conservation: initial supply - burned == pool + agents +
    // external market + injected, exact in fixed point.
    bool tokens_conserved() const;

    // Adversary hook: trade executed at the next block boundary.
    TradeResult attacker_trade(TradeDirection dir, Wad amount_in);

  private:
    Wad decide_spend(Wad epoch_twap);

    ScenarioConfig cfg_;
    Pool pool_;
    PriceOracle oracle_;
    Treasury treasury_;
    AgentPopulation population_;
    std::optional<DcbmController> controller_;
    TargetTracker baseline_ma_;  // moving-average reference for baselines
    std::vector<double> demand_incr_, shock_incr_;
    std::vector<double> block_noise_;
    double demand_level_;
    std::uint32_t epoch_ = 0;
    std::uint32_t block_ = 0;
    double epoch_log_target_ = 0.0;   // exogenous component applied per block
    double epoch_log_step_ = 0.0;
    Wad prev_twap_{};
    Wad last_twap_{};
    Wad last_u_applied_{};
    Wad last_spend_{};
    Wad last_u_raw_{};
    Wad last_error_{};
    Wad last_target_{};
    Wad epoch_revenue_{};
    int epoch_churn_ = 0;
    Wad ext_tokens_{};   // external market token inventory delta sink
    Wad ext_stable_{};
    Wad attacker_tokens_{};
    Wad initial_supply_{};
    std::uint64_t op_count_ = 0;
};

RunReport run_once(const ScenarioConfig& cfg, std::uint32_t run_index);

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct MonteCarloSummary {
    std::map<std::string, MetricStats> metrics;
    std::uint32_t runs = 0;
    std::string config_hash;
};

// Serial reference implementation.
MonteCarloSummary run_monte_carlo_serial(const ScenarioConfig& cfg);
// OpenMP fan-out over independent runs; aggregation is by run index, so the
// result is identical to the serial reference.
MonteCarloSummary run_monte_carlo(const ScenarioConfig& cfg);

// Aggregation helper shared by both paths (and by order-independence tests).
MonteCarloSummary summarize_runs(const std::vector<RunReport>& reports,
                                 const std::string& config_hash);

void write_run_csv(const RunReport& report, std::ostream& os);
std::string summary_to_json(const MonteCarloSummary& summary);

}  // namespace dcbm
