// Command-line front end: closed-loop simulation, policy ablation, attack
// suite, gain tuning, stability checks, and historical CSV replay.
#include "dcbm/adversary.hpp"
#include "dcbm/analysis.hpp"
#include "dcbm/harness.hpp"
#include "dcbm/policies.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> runs;
    std::string out_path;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "Scenario config JSON file");
    cmd->add_option("--seed", o.seed, "Master seed override");
    cmd->add_option("--runs", o.runs, "Monte Carlo run count override");
    cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
    cmd->add_option("--format", o.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

dcbm::ScenarioConfig load_config(const CommonOpts& o) {
    dcbm::ScenarioConfig cfg = o.config_path.empty()
                                   ? dcbm::scenario_preset("custom")
                                   : dcbm::config_from_json_file(o.config_path);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.runs) cfg.runs = *o.runs;
    cfg.validate();
    return cfg;
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(o.out_path);
    if (!out) throw std::runtime_error("cannot open output file '" + o.out_path + "'");
    out << text;
}

std::string summary_csv(const dcbm::MonteCarloSummary& s) {
    std::ostringstream os;
    os << "metric,mean,stddev,ci_low,ci_high\n";
    for (const auto& [name, st] : s.metrics)
        os << name << ',' << st.mean << ',' << st.stddev << ',' << st.ci_low << ',' << st.ci_high
           << '\n';
    return os.str();
}

int cmd_simulate(const CommonOpts& o) {
    dcbm::ScenarioConfig cfg = load_config(o);
    if (o.format == "csv" && cfg.runs == 1) {
        dcbm::RunReport r = dcbm::run_once(cfg, 0);
        std::ostringstream os;
        dcbm::write_run_csv(r, os);
        emit(o, os.str());
        return kExitOk;
    }
    dcbm::MonteCarloSummary s = dcbm::run_monte_carlo(cfg);
    emit(o, o.format == "csv" ? summary_csv(s) : dcbm::summary_to_json(s));
    return kExitOk;
}

int cmd_ablate(const CommonOpts& o) {
    dcbm::ScenarioConfig base = load_config(o);
    const std::pair<std::string, dcbm::PolicyKind> policies[] = {
        {"no_buyback", dcbm::PolicyKind::NoBuyback}, {"fixed_rate", dcbm::PolicyKind::FixedRate},
        {"threshold", dcbm::PolicyKind::Threshold},  {"dcbm", dcbm::PolicyKind::Dcbm},
        {"mpc_oracle", dcbm::PolicyKind::MpcOracle},
    };
    json out = json::object();
    std::ostringstream csv;
    csv << "policy,sigma_p,eps_ma,churn_pct,gini,treasury_growth_pct\n";
    for (const auto& [name, kind] : policies) {
        dcbm::ScenarioConfig cfg = base;
        cfg.policy = kind;
        dcbm::MonteCarloSummary s = dcbm::run_monte_carlo(cfg);
        json row = json::object();
        for (const auto& [metric, st] : s.metrics) row[metric] = st.mean;
        out[name] = row;
        csv << name << ',' << s.metrics.at("sigma_p").mean << ',' << s.metrics.at("eps_ma").mean
            << ',' << s.metrics.at("churn_pct").mean << ',' << s.metrics.at("gini").mean << ','
            << s.metrics.at("treasury_growth_pct").mean << '\n';
    }
    emit(o, o.format == "csv" ? csv.str() : out.dump(2));
    return kExitOk;
}

int cmd_attack(const CommonOpts& o, double epsilon, int window, int trials) {
    dcbm::ScenarioConfig cfg = load_config(o);
    std::vector<dcbm::AttackOutcome> flash, sustained;
    for (int t = 0; t < trials; ++t) {
        std::uint64_t seed = dcbm::mix_seed(cfg.master_seed, 9000 + t);
        flash.push_back(dcbm::fgsm_flash(cfg, seed, epsilon));
        dcbm::AttackBudget b;
        b.epsilon = epsilon;
        b.max_epochs = window;
        sustained.push_back(dcbm::pgd_sustained(cfg, seed, b));
    }
    dcbm::AsrStats fs = dcbm::asr(flash);
    dcbm::AsrStats ps = dcbm::asr(sustained);
    dcbm::SaturationSearchResult sat = dcbm::cw_arbitrage(cfg, cfg.master_seed);

    auto stats_json = [](const dcbm::AsrStats& s) {
        return json{{"success_rate", s.success_rate},
                    {"mean_profit", s.mean_profit},
                    {"mean_drain", s.mean_drain},
                    {"trials", s.n}};
    };
    json out{{"flash", stats_json(fs)},
             {"sustained", stats_json(ps)},
             {"saturation",
              {{"reachable", sat.reachable}, {"min_deviation", sat.min_deviation}}}};
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "attack,success_rate,mean_profit,mean_drain\n";
        csv << "flash," << fs.success_rate << ',' << fs.mean_profit << ',' << fs.mean_drain << '\n';
        csv << "sustained," << ps.success_rate << ',' << ps.mean_profit << ',' << ps.mean_drain
            << '\n';
        emit(o, csv.str());
    } else {
        emit(o, out.dump(2));
    }
    return kExitOk;
}

int cmd_tune(const CommonOpts& o, bool adversarial) {
    dcbm::ScenarioConfig cfg = load_config(o);
    dcbm::TuningSpec spec;
    spec.kp_grid = {5.0, 10.0, 20.0, 40.0, 80.0};
    spec.ki_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
    spec.kd_grid = {0.0, 5.0, 10.0, 20.0};
    spec.seed = cfg.master_seed;
    spec.validation_runs = cfg.runs > 1 ? static_cast<int>(cfg.runs) : 4;
    spec.attack_trials = 4;
    dcbm::GainsD best = dcbm::tune_gains(
        spec, cfg, adversarial ? dcbm::TuneMode::Adversarial : dcbm::TuneMode::Standard);
    json out{{"kp", best.kp}, {"ki", best.ki}, {"kd", best.kd}};
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "kp,ki,kd\n" << best.kp << ',' << best.ki << ',' << best.kd << '\n';
        emit(o, csv.str());
    } else {
        emit(o, out.dump(2));
    }
    return kExitOk;
}

int cmd_stability(const CommonOpts& o, double kp, double ki, double kd, double alpha) {
    dcbm::StabilityVerdict v = dcbm::jury_test(dcbm::GainsD{kp, ki, kd}, alpha);
    json out{{"inequalities_satisfied", v.inequalities_satisfied},
             {"margin_positivity", v.margin_positivity},
             {"margin_damping", v.margin_damping},
             {"margin_integral", v.margin_integral},
             {"roots_inside_unit_circle", v.roots_inside_unit_circle},
             {"root_magnitudes", {v.root_magnitude[0], v.root_magnitude[1]}},
             {"stable", v.stable}};
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "stable,inequalities_satisfied,root_mag_0,root_mag_1\n"
            << v.stable << ',' << v.inequalities_satisfied << ',' << v.root_magnitude[0] << ','
            << v.root_magnitude[1] << '\n';
        emit(o, csv.str());
    } else {
        emit(o, out.dump(2));
    }
    return kExitOk;
}

int cmd_replay(const CommonOpts& o, const std::string& input, const std::string& ts_col,
               const std::string& px_col) {
    dcbm::ScenarioConfig cfg = load_config(o);
    cfg.shock_override = dcbm::replay_csv(input, ts_col, px_col);
    cfg.runs = 1;
    dcbm::RunReport r = dcbm::run_once(cfg, 0);
    if (o.format == "csv") {
        std::ostringstream os;
        dcbm::write_run_csv(r, os);
        emit(o, os.str());
    } else {
        json out{{"epochs", r.series.size()}, {"sigma_p", r.sigma_p},
                 {"eps_ma", r.eps_ma},        {"churn_pct", r.churn_pct},
                 {"gini", r.gini_coeff},      {"treasury_growth_pct", r.treasury_growth_pct},
                 {"total_spend", r.total_spend}};
        emit(o, out.dump(2));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop buyback-and-burn mechanism simulator"};
    app.require_subcommand(1);

    CommonOpts sim_o, abl_o, atk_o, tune_o, stab_o, rep_o;
    auto* sim = app.add_subcommand("simulate", "Run the closed-loop simulation");
    add_common(sim, sim_o);

    auto* abl = app.add_subcommand("ablate", "Compare all buyback policies on one scenario");
    add_common(abl, abl_o);

    auto* atk = app.add_subcommand("attack", "Run the adversarial stress suite");
    add_common(atk, atk_o);
    double epsilon = 0.05;
    int window = 3, trials = 8;
    atk->add_option("--epsilon", epsilon, "Attack notional as a fraction of pool depth");
    atk->add_option("--window", window, "Sustained attack window (epochs)");
    atk->add_option("--trials", trials, "Seeds per attack family");

    auto* tun = app.add_subcommand("tune", "Grid-search PID gains");
    add_common(tun, tune_o);
    bool adversarial = false;
    tun->add_flag("--adversarial", adversarial, "Min-max tuning against the attack set");

    auto* stab = app.add_subcommand("stability", "Stability verdict for one gain point");
    add_common(stab, stab_o);
    double kp = 40.0, ki = 4.0, kd = 10.0, alpha = 2e-6;
    stab->add_option("--kp", kp, "Proportional gain");
    stab->add_option("--ki", ki, "Integral gain");
    stab->add_option("--kd", kd, "Derivative gain");
    stab->add_option("--alpha", alpha, "Plant gain 2/y");

    auto* rep = app.add_subcommand("replay", "Drive the exogenous path from a historical CSV");
    add_common(rep, rep_o);
    std::string input, ts_col = "timestamp", px_col = "price";
    rep->add_option("--input", input, "CSV file with a header row")->required();
    rep->add_option("--timestamp-column", ts_col, "Timestamp column name");
    rep->add_option("--price-column", px_col, "Price column name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_o);
        if (abl->parsed()) return cmd_ablate(abl_o);
        if (atk->parsed()) return cmd_attack(atk_o, epsilon, window, trials);
        if (tun->parsed()) return cmd_tune(tune_o, adversarial);
        if (stab->parsed()) return cmd_stability(stab_o, kp, ki, kd, alpha);
        if (rep->parsed()) return cmd_replay(rep_o, input, ts_col, px_col);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
    return kExitOk;
}
