#include "dcbm/harness.hpp"

#include "dcbm/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dcbm {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void ScenarioConfig::validate() const {
    auto bad = [](const std::string& key, const std::string& why) {
        throw std::invalid_argument("config." + key + ": " + why);
    };
    demand_params.validate();
    shock_params.validate();
    CorrelationSpec{correlation_rho}.validate();
    if (pool_tokens <= 0.0) bad("pool.tokens", "must be positive");
    if (pool_stable <= 0.0) bad("pool.stable", "must be positive");
    if (pool_fee < 0.0 || pool_fee > 0.01) bad("pool.fee", "outside [0, 0.01]");
    if (buyback_fee < 0.0 || buyback_fee > 0.01) bad("pool.buyback_fee", "outside [0, 0.01]");
    if (treasury_initial <= 0.0) bad("treasury.initial", "must be positive");
    if (ops_cost < 0.0) bad("treasury.ops_cost", "must be nonnegative");
    if (accounting_mode != "conservation" && accounting_mode != "ops_clamped")
        bad("treasury.mode", "must be conservation or ops_clamped");
    if (epoch_blocks < 1) bad("epoch.blocks", "must be >= 1");
    if (block_time_seconds <= 0.0) bad("epoch.block_time_seconds", "must be positive");
    if (horizon < 1) bad("horizon", "must be >= 1");
    if (block_noise_sigma < 0.0) bad("block_noise_sigma", "must be nonnegative");
    if (gamma <= 0.0 || gamma > 1.0) bad("gamma", "outside (0, 1]");
    if (derivative_mode != "on_measurement" && derivative_mode != "on_error")
        bad("derivative_mode", "must be on_measurement or on_error");
    if (filter_coeff < 0.0 || filter_coeff > 1.0) bad("filter_coeff", "outside [0, 1]");
    if (input_smooth_window < 1) bad("input_smooth_window", "must be >= 1");
    if (cert_enabled && cert_integral_clamp <= 0.0) bad("cert.integral_clamp", "must be positive");
    if (cert_enabled && cert_rate_limit <= 0.0) bad("cert.rate_limit", "must be positive");
    if (ema_beta <= 0.0 || ema_beta > 1.0) bad("ema_beta", "outside (0, 1]");
    if (policy == PolicyKind::FixedRate &&
        (policy_params.fixed_rate_rho < 0.0 || policy_params.fixed_rate_rho > 1.0))
        bad("policy.fixed_rate_rho", "outside [0, 1]");
    if (policy == PolicyKind::Threshold && (policy_params.threshold_spend_fraction <= 0.0 ||
                                            policy_params.threshold_spend_fraction > 1.0))
        bad("policy.threshold_spend_fraction", "outside (0, 1]");
    if (policy_params.threshold_hysteresis < 0.0)
        bad("policy.threshold_hysteresis", "must be nonnegative");
    if (policy == PolicyKind::MpcOracle) {
        if (policy_params.mpc_horizon < 1 || policy_params.mpc_horizon > 4)
            bad("policy.mpc_horizon", "outside [1, 4]");
        if (policy_params.mpc_grid_size < 1 || policy_params.mpc_grid_size > 7)
            bad("policy.mpc_grid_size", "outside [1, 7]");
        if (policy_params.mpc_max_fraction <= 0.0 || policy_params.mpc_max_fraction > 1.0)
            bad("policy.mpc_max_fraction", "outside (0, 1]");
    }
    if (protocol_fee_rate < 0.0 || protocol_fee_rate > 1.0)
        bad("protocol_fee_rate", "outside [0, 1]");
    if (demand_base <= 0.0) bad("demand_base", "must be positive");
    if (liquidity_event_factor <= 0.0) bad("events.liquidity_factor", "must be positive");
    if (runs < 1) bad("runs", "must be >= 1");
}

ScenarioConfig scenario_preset(const std::string& name) {
    ScenarioConfig cfg;
    cfg.scenario = name;
    // Shared baseline regime.
    cfg.demand_params = {.mu = 0.0005, .sigma = 0.05, .jump_intensity = 0.02};
    cfg.shock_params = {.mu = 0.0, .sigma = 0.015, .jump_intensity = 0.02};
    if (name == "custom") {
        return cfg;
    }
    if (name == "bull") {
        cfg.demand_params.mu = 0.004;
        cfg.shock_params.mu = 0.002;
        cfg.shock_params.p_up = 0.7;
    } else if (name == "bear") {
        cfg.demand_params.mu = -0.004;
        cfg.shock_params.mu = -0.002;
        cfg.shock_params.p_up = 0.2;
    } else if (name == "high_vol") {
        cfg.demand_params.sigma = 0.10;
        cfg.shock_params.sigma = 0.04;
        cfg.shock_params.jump_intensity = 0.08;
        cfg.block_noise_sigma = 0.002;
    } else if (name == "demand_shock_pos") {
        cfg.demand_jump_size = 0.8;
    } else if (name == "demand_shock_neg") {
        cfg.demand_jump_size = -0.8;
    } else if (name == "liquidity_crisis") {
        cfg.liquidity_event_factor = 0.25;
        cfg.liquidity_event_epoch = 250;
    } else {
        throw std::invalid_argument("config.scenario: unknown preset '" + name + "'");
    }
    return cfg;
}

namespace {

PolicyKind policy_from_string(const std::string& s) {
    if (s == "no_buyback") return PolicyKind::NoBuyback;
    if (s == "fixed_rate") return PolicyKind::FixedRate;
    if (s == "threshold") return PolicyKind::Threshold;
    if (s == "dcbm") return PolicyKind::Dcbm;
    if (s == "mpc_oracle") return PolicyKind::MpcOracle;
    throw std::invalid_argument("config.policy.kind: unknown policy '" + s + "'");
}

std::string policy_to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::NoBuyback: return "no_buyback";
        case PolicyKind::FixedRate: return "fixed_rate";
        case PolicyKind::Threshold: return "threshold";
        case PolicyKind::Dcbm: return "dcbm";
        case PolicyKind::MpcOracle: return "mpc_oracle";
    }
    throw std::logic_error("unreachable policy kind");
}

void jump_params_from_json(const json& j, const std::string& key, JumpDiffusionParams& p) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    p.mu = v.value("mu", p.mu);
    p.sigma = v.value("sigma", p.sigma);
    p.jump_intensity = v.value("jump_intensity", p.jump_intensity);
    p.p_up = v.value("p_up", p.p_up);
    p.eta_up = v.value("eta_up", p.eta_up);
    p.eta_down = v.value("eta_down", p.eta_down);
}

json jump_params_to_json(const JumpDiffusionParams& p) {
    return json{{"mu", p.mu},       {"sigma", p.sigma}, {"jump_intensity", p.jump_intensity},
                {"p_up", p.p_up},   {"eta_up", p.eta_up}, {"eta_down", p.eta_down}};
}

}  // namespace

ScenarioConfig config_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ScenarioConfig cfg = scenario_preset(j.value("scenario", std::string("custom")));

    jump_params_from_json(j, "demand_params", cfg.demand_params);
    jump_params_from_json(j, "shock_params", cfg.shock_params);
    cfg.correlation_rho = j.value("correlation_rho", cfg.correlation_rho);

    if (j.contains("pool")) {
        const json& p = j.at("pool");
        cfg.pool_tokens = p.value("tokens", cfg.pool_tokens);
        cfg.pool_stable = p.value("stable", cfg.pool_stable);
        cfg.pool_fee = p.value("fee", cfg.pool_fee);
        cfg.buyback_fee = p.value("buyback_fee", cfg.buyback_fee);
    }
    if (j.contains("treasury")) {
        const json& t = j.at("treasury");
        cfg.treasury_initial = t.value("initial", cfg.treasury_initial);
        cfg.ops_cost = t.value("ops_cost", cfg.ops_cost);
        cfg.accounting_mode = t.value("mode", cfg.accounting_mode);
    }
    if (j.contains("epoch")) {
        const json& e = j.at("epoch");
        cfg.epoch_blocks = e.value("blocks", cfg.epoch_blocks);
        cfg.block_time_seconds = e.value("block_time_seconds", cfg.block_time_seconds);
    }
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.block_noise_sigma = j.value("block_noise_sigma", cfg.block_noise_sigma);

    if (j.contains("policy")) {
        const json& p = j.at("policy");
        cfg.policy = policy_from_string(p.value("kind", policy_to_string(cfg.policy)));
        cfg.policy_params.fixed_rate_rho =
            p.value("fixed_rate_rho", cfg.policy_params.fixed_rate_rho);
        cfg.policy_params.threshold_spend_fraction =
            p.value("threshold_spend_fraction", cfg.policy_params.threshold_spend_fraction);
        cfg.policy_params.threshold_hysteresis =
            p.value("threshold_hysteresis", cfg.policy_params.threshold_hysteresis);
        cfg.policy_params.mpc_horizon = p.value("mpc_horizon", cfg.policy_params.mpc_horizon);
        cfg.policy_params.mpc_grid_size =
            p.value("mpc_grid_size", cfg.policy_params.mpc_grid_size);
        cfg.policy_params.mpc_effort_weight =
            p.value("mpc_effort_weight", cfg.policy_params.mpc_effort_weight);
        cfg.policy_params.mpc_max_fraction =
            p.value("mpc_max_fraction", cfg.policy_params.mpc_max_fraction);
    }
    if (j.contains("gains")) {
        const json& g = j.at("gains");
        cfg.gains.kp = g.value("kp", cfg.gains.kp);
        cfg.gains.ki = g.value("ki", cfg.gains.ki);
        cfg.gains.kd = g.value("kd", cfg.gains.kd);
    }
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.derivative_mode = j.value("derivative_mode", cfg.derivative_mode);
    cfg.filter_coeff = j.value("filter_coeff", cfg.filter_coeff);
    cfg.input_smooth_window = j.value("input_smooth_window", cfg.input_smooth_window);
    if (j.contains("cert")) {
        const json& c = j.at("cert");
        cfg.cert_enabled = c.value("enabled", cfg.cert_enabled);
        cfg.cert_integral_clamp = c.value("integral_clamp", cfg.cert_integral_clamp);
        cfg.cert_rate_limit = c.value("rate_limit", cfg.cert_rate_limit);
    }
    cfg.ema_beta = j.value("ema_beta", cfg.ema_beta);
    cfg.literal_clamp_rule = j.value("literal_clamp_rule", cfg.literal_clamp_rule);

    if (j.contains("population")) {
        const json& p = j.at("population");
        PopulationConfig& pc = cfg.population;
        pc.n_operators = p.value("n_operators", pc.n_operators);
        pc.n_users = p.value("n_users", pc.n_users);
        pc.n_speculators = p.value("n_speculators", pc.n_speculators);
        pc.n_model_owners = p.value("n_model_owners", pc.n_model_owners);
        pc.operator_cost = p.value("operator_cost", pc.operator_cost);
        pc.operator_capacity = p.value("operator_capacity", pc.operator_capacity);
        pc.operator_exit_threshold = p.value("operator_exit_threshold", pc.operator_exit_threshold);
        pc.operator_patience = p.value("operator_patience", pc.operator_patience);
        pc.operator_tokens = p.value("operator_tokens", pc.operator_tokens);
        pc.user_elasticity = p.value("user_elasticity", pc.user_elasticity);
        pc.reference_price = p.value("reference_price", pc.reference_price);
        pc.speculator_momentum = p.value("speculator_momentum", pc.speculator_momentum);
        pc.speculator_tokens = p.value("speculator_tokens", pc.speculator_tokens);
        pc.speculator_stable = p.value("speculator_stable", pc.speculator_stable);
        pc.speculator_position_limit =
            p.value("speculator_position_limit", pc.speculator_position_limit);
        pc.model_owner_deploy_threshold =
            p.value("model_owner_deploy_threshold", pc.model_owner_deploy_threshold);
        pc.model_owner_tokens = p.value("model_owner_tokens", pc.model_owner_tokens);
    }
    cfg.demand_base = j.value("demand_base", cfg.demand_base);
    cfg.protocol_fee_rate = j.value("protocol_fee_rate", cfg.protocol_fee_rate);
    if (j.contains("events")) {
        const json& e = j.at("events");
        cfg.demand_jump_size = e.value("demand_jump_size", cfg.demand_jump_size);
        cfg.liquidity_event_factor = e.value("liquidity_factor", cfg.liquidity_event_factor);
        cfg.liquidity_event_epoch = e.value("liquidity_epoch", cfg.liquidity_event_epoch);
    }
    cfg.runs = j.value("runs", cfg.runs);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);

    cfg.validate();
    return cfg;
}

ScenarioConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_string(ss.str());
}

std::string config_to_json_string(const ScenarioConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["demand_params"] = jump_params_to_json(cfg.demand_params);
    j["shock_params"] = jump_params_to_json(cfg.shock_params);
    j["correlation_rho"] = cfg.correlation_rho;
    j["pool"] = {{"tokens", cfg.pool_tokens},
                 {"stable", cfg.pool_stable},
                 {"fee", cfg.pool_fee},
                 {"buyback_fee", cfg.buyback_fee}};
    j["treasury"] = {{"initial", cfg.treasury_initial},
                     {"ops_cost", cfg.ops_cost},
                     {"mode", cfg.accounting_mode}};
    j["epoch"] = {{"blocks", cfg.epoch_blocks}, {"block_time_seconds", cfg.block_time_seconds}};
    j["horizon"] = cfg.horizon;
    j["block_noise_sigma"] = cfg.block_noise_sigma;
    j["policy"] = {{"kind", policy_to_string(cfg.policy)},
                   {"fixed_rate_rho", cfg.policy_params.fixed_rate_rho},
                   {"threshold_spend_fraction", cfg.policy_params.threshold_spend_fraction},
                   {"threshold_hysteresis", cfg.policy_params.threshold_hysteresis},
                   {"mpc_horizon", cfg.policy_params.mpc_horizon},
                   {"mpc_grid_size", cfg.policy_params.mpc_grid_size},
                   {"mpc_effort_weight", cfg.policy_params.mpc_effort_weight},
                   {"mpc_max_fraction", cfg.policy_params.mpc_max_fraction}};
    j["gains"] = {{"kp", cfg.gains.kp}, {"ki", cfg.gains.ki}, {"kd", cfg.gains.kd}};
    j["gamma"] = cfg.gamma;
    j["derivative_mode"] = cfg.derivative_mode;
    j["filter_coeff"] = cfg.filter_coeff;
    j["input_smooth_window"] = cfg.input_smooth_window;
    j["cert"] = {{"enabled", cfg.cert_enabled},
                 {"integral_clamp", cfg.cert_integral_clamp},
                 {"rate_limit", cfg.cert_rate_limit}};
    j["ema_beta"] = cfg.ema_beta;
    j["literal_clamp_rule"] = cfg.literal_clamp_rule;
    const PopulationConfig& pc = cfg.population;
    j["population"] = {{"n_operators", pc.n_operators},
                       {"n_users", pc.n_users},
                       {"n_speculators", pc.n_speculators},
                       {"n_model_owners", pc.n_model_owners},
                       {"operator_cost", pc.operator_cost},
                       {"operator_capacity", pc.operator_capacity},
                       {"operator_exit_threshold", pc.operator_exit_threshold},
                       {"operator_patience", pc.operator_patience},
                       {"operator_tokens", pc.operator_tokens},
                       {"user_elasticity", pc.user_elasticity},
                       {"reference_price", pc.reference_price},
                       {"speculator_momentum", pc.speculator_momentum},
                       {"speculator_tokens", pc.speculator_tokens},
                       {"speculator_stable", pc.speculator_stable},
                       {"speculator_position_limit", pc.speculator_position_limit},
                       {"model_owner_deploy_threshold", pc.model_owner_deploy_threshold},
                       {"model_owner_tokens", pc.model_owner_tokens}};
    j["demand_base"] = cfg.demand_base;
    j["protocol_fee_rate"] = cfg.protocol_fee_rate;
    j["events"] = {{"demand_jump_size", cfg.demand_jump_size},
                   {"liquidity_factor", cfg.liquidity_event_factor},
                   {"liquidity_epoch", cfg.liquidity_event_epoch}};
    j["runs"] = cfg.runs;
    j["master_seed"] = cfg.master_seed;
    return j.dump(2);
}

std::string config_hash(const ScenarioConfig& cfg) {
    // FNV-1a 64 over the canonical JSON form.
    std::string s = config_to_json_string(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// World

namespace {

Gains gains_to_wad(const GainsD& g) {
    return Gains{wad_from_double(g.kp), wad_from_double(g.ki), wad_from_double(g.kd), WAD_ONE};
}

}  // namespace

World::World(const ScenarioConfig& cfg, std::uint64_t run_seed)
    : cfg_(cfg),
      pool_(wad_from_double(cfg.pool_tokens), wad_from_double(cfg.pool_stable),
            wad_from_double(cfg.pool_fee)),
      oracle_(cfg.epoch_blocks, cfg.block_time_seconds),
      treasury_(wad_from_double(cfg.treasury_initial),
                cfg.accounting_mode == "ops_clamped" ? AccountingMode::OpsClamped
                                                     : AccountingMode::Conservation,
                wad_from_double(cfg.ops_cost)),
      population_(cfg.population),
      demand_level_(cfg.demand_base) {
    cfg_.validate();

    if (cfg_.policy == PolicyKind::Dcbm) {
        ActuatorConfig act;
        act.gamma = wad_from_double(cfg_.gamma);
        act.derivative_mode = cfg_.derivative_mode == "on_error" ? DerivativeMode::OnError
                                                                 : DerivativeMode::OnMeasurement;
        act.measurement_filter_coeff = wad_from_double(cfg_.filter_coeff);
        act.input_smooth_window = cfg_.input_smooth_window;
        act.literal_clamp_rule = cfg_.literal_clamp_rule;
        CertConfig cert;
        cert.enabled = cfg_.cert_enabled;
        cert.integral_clamp = wad_from_double(cfg_.cert_integral_clamp);
        cert.output_rate_limit = wad_from_double(cfg_.cert_rate_limit);
        TargetTracker tracker;
        tracker.ema = pool_.spot_price();
        tracker.smoothing = wad_from_double(cfg_.ema_beta);
        controller_.emplace(gains_to_wad(cfg_.gains), act, cert, tracker);
    }
    baseline_ma_.ema = pool_.spot_price();
    baseline_ma_.smoothing = wad_from_double(cfg_.ema_beta);

    if (!cfg_.shock_override.empty())
        cfg_.horizon = std::min<std::uint32_t>(cfg_.horizon,
                                               static_cast<std::uint32_t>(cfg_.shock_override.size()));
    RngStream rng(run_seed, 0);
    CorrelatedPaths paths = gen_correlated(cfg_.demand_params, cfg_.shock_params,
                                           CorrelationSpec{cfg_.correlation_rho}, cfg_.horizon, rng);
    demand_incr_ = std::move(paths.demand);
    shock_incr_ = std::move(paths.shock);
    if (!cfg_.shock_override.empty())
        shock_incr_.assign(cfg_.shock_override.begin(),
                           cfg_.shock_override.begin() + cfg_.horizon);
    if (cfg_.demand_jump_size != 0.0) {
        std::size_t mid = cfg_.horizon / 2;
        demand_incr_[mid] += cfg_.demand_jump_size;
        // The market reprices the demand regime shift directly as well.
        shock_incr_[mid] += 0.5 * cfg_.demand_jump_size;
    }
    block_noise_.assign(static_cast<std::size_t>(cfg_.horizon) * cfg_.epoch_blocks, 0.0);
    if (cfg_.block_noise_sigma > 0.0) {
        RngStream noise_rng(run_seed, 1);
        for (double& v : block_noise_) v = cfg_.block_noise_sigma * noise_rng.next_normal();
    }

    initial_supply_ = wad_add(pool_.token_reserve(), population_.total_agent_tokens());
    prev_twap_ = last_twap_ = pool_.spot_price();
}

void World::begin_epoch() {
    if (static_cast<std::int64_t>(epoch_) == cfg_.liquidity_event_epoch) {
        Wad x_before = pool_.token_reserve();
        Wad y_before = pool_.stable_reserve();
        pool_.scale_liquidity(wad_from_double(cfg_.liquidity_event_factor));
        ext_tokens_ = wad_add(ext_tokens_, wad_sub(x_before, pool_.token_reserve()));
        ext_stable_ = wad_add(ext_stable_, wad_sub(y_before, pool_.stable_reserve()));
    }

    demand_level_ *= std::exp(demand_incr_[epoch_]);

    double trend = 0.0;
    if (epoch_ >= 2 && prev_twap_.raw > 0) {
        trend = wad_to_double(last_twap_) / wad_to_double(prev_twap_) - 1.0;
    }
    PopulationStepOutcome out =
        population_.step(demand_level_, pool_, cfg_.protocol_fee_rate, trend,
                         wad_to_double(pool_.spot_price()));
    epoch_revenue_ = out.revenue;

    epoch_log_step_ = shock_incr_[epoch_] / static_cast<double>(cfg_.epoch_blocks);
    block_ = 0;
}

void World::step_block() {
    std::size_t idx = static_cast<std::size_t>(epoch_) * cfg_.epoch_blocks + block_;
    double factor = std::exp(epoch_log_step_ + block_noise_[idx]);
    Wad target = wad_from_double(wad_to_double(pool_.spot_price()) * factor);
    if (target.raw > 0 && target.raw != pool_.spot_price().raw) {
        Pool::PriceMoveFlows flows = pool_.move_price_to(target);
        ext_tokens_ = wad_add(ext_tokens_, flows.tokens_to_counterparty);
        ext_stable_ = wad_add(ext_stable_, flows.stable_to_counterparty);
    }
    oracle_.record_block(pool_.spot_price());
    ++block_;
}

bool World::epoch_blocks_done() const { return block_ >= cfg_.epoch_blocks; }

std::uint32_t World::blocks_remaining() const {
    return block_ >= cfg_.epoch_blocks ? 0 : cfg_.epoch_blocks - block_;
}

Wad World::decide_spend(Wad epoch_twap) {
    if (cfg_.policy == PolicyKind::Dcbm) {
        ControllerDiagnostics diag = controller_->decide(epoch_twap, treasury_.balance());
        last_target_ = diag.target;
        last_error_ = diag.error;
        last_u_raw_ = diag.u_raw;
        last_u_applied_ = diag.u_applied;
        return diag.spend;
    }

    ema_update(baseline_ma_, epoch_twap);
    last_target_ = baseline_ma_.ema;
    last_error_ = compute_error(baseline_ma_.ema, epoch_twap);
    last_u_raw_ = last_u_applied_ = WAD_ZERO;

    EpochView view;
    view.twap = wad_to_double(epoch_twap);
    view.moving_average = wad_to_double(baseline_ma_.ema);
    view.treasury = wad_to_double(treasury_.balance());
    view.revenue = wad_to_double(epoch_revenue_);
    view.alpha = wad_to_double(pool_.alpha());
    view.future_noise = future_shocks(epoch_ + 1);

    double j = 0.0;
    switch (cfg_.policy) {
        case PolicyKind::NoBuyback: j = no_buyback(view); break;
        case PolicyKind::FixedRate: j = fixed_rate(view, cfg_.policy_params.fixed_rate_rho); break;
        case PolicyKind::Threshold:
            j = threshold(view, cfg_.policy_params.threshold_spend_fraction,
                          cfg_.policy_params.threshold_hysteresis);
            break;
        case PolicyKind::MpcOracle:
            j = mpc_oracle(view, cfg_.policy_params.mpc_horizon, cfg_.policy_params.mpc_grid_size,
                           cfg_.policy_params.mpc_effort_weight,
                           cfg_.policy_params.mpc_max_fraction);
            break;
        case PolicyKind::Dcbm: break;  // handled above
    }
    Wad spend = wad_from_double(j);
    // Spending is limited to funds actually available this epoch.
    Wad available = wad_add(treasury_.balance(), epoch_revenue_);
    return wad_min(wad_max(spend, WAD_ZERO), wad_max(available, WAD_ZERO));
}

EpochRecord World::end_epoch() {
    Wad twap = oracle_.twap();
    Wad spend = decide_spend(twap);
    last_spend_ = spend;

    if (spend.raw > 0) {
        Wad fee_override = cfg_.buyback_fee > 0.0 ? wad_from_double(cfg_.buyback_fee) : Wad(-1);
        pool_.execute_buyback(spend, fee_override);
    }
    treasury_.apply_epoch(epoch_revenue_, spend);
    epoch_churn_ = population_.churn_update();

    EpochRecord rec;
    rec.k = epoch_;
    rec.price = pool_.spot_price();
    rec.twap = twap;
    rec.target = last_target_;
    rec.error = last_error_;
    rec.u_raw = last_u_raw_;
    rec.u_applied = last_u_applied_;
    rec.spend = spend;
    rec.treasury = treasury_.balance();
    rec.burned_cum = pool_.cumulative_burned();
    rec.revenue = epoch_revenue_;
    rec.churn_events = epoch_churn_;

    prev_twap_ = last_twap_;
    last_twap_ = twap;
    ++epoch_;
    return rec;
}

EpochRecord World::step_epoch() {
    begin_epoch();
    while (!epoch_blocks_done()) step_block();
    return end_epoch();
}

std::span<const double> World::future_shocks(std::uint32_t from_epoch) const {
    if (from_epoch >= shock_incr_.size()) return {};
    return std::span<const double>(shock_incr_).subspan(from_epoch);
}

bool World::tokens_conserved() const {
    Wad held = wad_add(pool_.token_reserve(), pool_.fee_bucket_tokens());
    held = wad_add(held, population_.total_agent_tokens());
    held = wad_add(held, ext_tokens_);
    held = wad_add(held, attacker_tokens_);
    Wad expected = wad_sub(initial_supply_, pool_.cumulative_burned());
    return held.raw == expected.raw;
}

std::uint64_t World::controller_op_count() const {
    return controller_ ? controller_->op_count() : 0;
}

TradeResult World::attacker_trade(TradeDirection dir, Wad amount_in) {
    TradeResult r = pool_.execute_trade(dir, amount_in);
    if (dir == TradeDirection::BuyToken) {
        attacker_tokens_ = wad_add(attacker_tokens_, r.amount_out);
    } else {
        attacker_tokens_ = wad_sub(attacker_tokens_, amount_in);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo

RunReport run_once(const ScenarioConfig& cfg, std::uint32_t run_index) {
    std::uint64_t seed = mix_seed(cfg.master_seed, run_index);
    World world(cfg, seed);

    RunReport report;
    report.seed = seed;
    report.config_hash = config_hash(cfg);
    report.series.reserve(cfg.horizon);

    std::vector<double> prices, targets, treasury_series, control;
    prices.reserve(cfg.horizon);
    targets.reserve(cfg.horizon);
    treasury_series.reserve(cfg.horizon + 1);
    control.reserve(cfg.horizon);
    treasury_series.push_back(cfg.treasury_initial);

    while (!world.done()) {
        EpochRecord rec = world.step_epoch();
        prices.push_back(wad_to_double(rec.twap));
        targets.push_back(wad_to_double(rec.target));
        treasury_series.push_back(wad_to_double(rec.treasury));
        control.push_back(wad_to_double(rec.spend) / cfg.treasury_initial);
        report.total_spend += wad_to_double(rec.spend);
        report.series.push_back(std::move(rec));
    }

    report.sigma_p = volatility(prices);
    report.eps_ma = ma_deviation(prices, targets);
    report.churn_pct = 100.0 * world.population().churn_rate();
    report.gini_coeff = gini(world.population().token_balances());
    TreasuryGrowth tg = treasury_growth(treasury_series);
    report.treasury_growth_pct = tg.growth_pct;
    report.treasury_stability = tg.stability;
    double mean = 0.0;
    for (double c : control) mean += c;
    mean /= static_cast<double>(control.size());
    double var = 0.0;
    for (double c : control) var += (c - mean) * (c - mean);
    var /= static_cast<double>(control.size());
    report.control_mean = mean;
    report.control_var = var;
    report.innovation = world.population().innovation_count();
    report.op_count_per_epoch = world.controller_op_count() / report.series.size();
    return report;
}

namespace {

MetricStats stats_of(const std::vector<double>& xs) {
    MetricStats s;
    double n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / (n - 1.0));
    }
    double half = 1.96 * s.stddev / std::sqrt(n);
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

}  // namespace

MonteCarloSummary summarize_runs(const std::vector<RunReport>& reports,
                                 const std::string& hash) {
    if (reports.empty()) throw std::invalid_argument("summarize_runs: no runs");
    auto collect = [&](auto field) {
        std::vector<double> xs;
        xs.reserve(reports.size());
        for (const RunReport& r : reports) xs.push_back(field(r));
        return stats_of(xs);
    };
    MonteCarloSummary s;
    s.runs = static_cast<std::uint32_t>(reports.size());
    s.config_hash = hash;
    s.metrics["sigma_p"] = collect([](const RunReport& r) { return r.sigma_p; });
    s.metrics["eps_ma"] = collect([](const RunReport& r) { return r.eps_ma; });
    s.metrics["churn_pct"] = collect([](const RunReport& r) { return r.churn_pct; });
    s.metrics["gini"] = collect([](const RunReport& r) { return r.gini_coeff; });
    s.metrics["treasury_growth_pct"] =
        collect([](const RunReport& r) { return r.treasury_growth_pct; });
    s.metrics["treasury_stability"] =
        collect([](const RunReport& r) { return r.treasury_stability; });
    s.metrics["control_mean"] = collect([](const RunReport& r) { return r.control_mean; });
    s.metrics["control_var"] = collect([](const RunReport& r) { return r.control_var; });
    s.metrics["total_spend"] = collect([](const RunReport& r) { return r.total_spend; });
    s.metrics["innovation"] = collect([](const RunReport& r) { return r.innovation; });
    return s;
}

MonteCarloSummary run_monte_carlo_serial(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<RunReport> reports(cfg.runs);
    for (std::uint32_t i = 0; i < cfg.runs; ++i) {
        reports[i] = run_once(cfg, i);
        reports[i].series.clear();
    }
    return summarize_runs(reports, config_hash(cfg));
}

MonteCarloSummary run_monte_carlo(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<RunReport> reports(cfg.runs);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(cfg.runs); ++i) {
        reports[i] = run_once(cfg, static_cast<std::uint32_t>(i));
        reports[i].series.clear();
    }
    return summarize_runs(reports, config_hash(cfg));
}

// ---------------------------------------------------------------------------
// Serialization

void write_run_csv(const RunReport& report, std::ostream& os) {
    os << "k,price,twap,target,error,u_raw,u_applied,spend,treasury,burned_cum,revenue,"
          "churn_events\n";
    for (const EpochRecord& r : report.series) {
        os << r.k << ',' << to_decimal_string(r.price) << ',' << to_decimal_string(r.twap) << ','
           << to_decimal_string(r.target) << ',' << to_decimal_string(r.error) << ','
           << to_decimal_string(r.u_raw) << ',' << to_decimal_string(r.u_applied) << ','
           << to_decimal_string(r.spend) << ',' << to_decimal_string(r.treasury) << ','
           << to_decimal_string(r.burned_cum) << ',' << to_decimal_string(r.revenue) << ','
           << r.churn_events << '\n';
    }
}

std::string summary_to_json(const MonteCarloSummary& summary) {
    json j;
    j["runs"] = summary.runs;
    j["config_hash"] = summary.config_hash;
    json metrics = json::object();
    for (const auto& [name, st] : summary.metrics) {
        metrics[name] = {{"mean", st.mean},
                         {"stddev", st.stddev},
                         {"ci_low", st.ci_low},
                         {"ci_high", st.ci_high}};
    }
    j["metrics"] = metrics;
    return j.dump(2);
}

}  // namespace dcbm
