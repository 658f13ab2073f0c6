#include "dcbm/analysis.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace dcbm {

StabilityVerdict jury_test(const GainsD& gains, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("jury_test: alpha must be positive");
    StabilityVerdict v;

    v.margin_positivity = gains.kp + gains.ki;
    v.margin_damping = (2.0 - alpha * gains.kp) / alpha - gains.kd;
    v.margin_integral = (4.0 - 2.0 * alpha * gains.kp) / alpha - gains.ki;
    v.inequalities_satisfied =
        v.margin_positivity > 0.0 && v.margin_damping > 0.0 && v.margin_integral > 0.0;

    double a2 = 1.0 + alpha * (gains.kp + gains.ki + gains.kd);
    double a1 = -(2.0 + alpha * gains.kp + 2.0 * alpha * gains.kd);
    double a0 = 1.0 + alpha * gains.kd;
    if (std::abs(a2) < 1e-14) throw std::runtime_error("jury_test: degenerate leading coefficient");

    std::complex<double> disc = std::complex<double>(a1 * a1 - 4.0 * a2 * a0, 0.0);
    std::complex<double> sq = std::sqrt(disc);
    std::complex<double> z1 = (-a1 + sq) / (2.0 * a2);
    std::complex<double> z2 = (-a1 - sq) / (2.0 * a2);
    v.root_magnitude[0] = std::abs(z1);
    v.root_magnitude[1] = std::abs(z2);
    v.roots_inside_unit_circle = v.root_magnitude[0] < 1.0 && v.root_magnitude[1] < 1.0;

    v.stable = v.roots_inside_unit_circle;
    return v;
}

std::vector<double> linear_loop_sim(const GainsD& gains, double alpha, double disturbance,
                                    std::size_t n, double e0) {
    if (n < 1) throw std::invalid_argument("linear_loop_sim: n must be >= 1");
    // Implicit update: e' = e - alpha * u(e', S, e) with
    //   u = Kp e' + Ki (S + e') + Kd (e' - e),  S' = S + e'.
    double denom = 1.0 + alpha * (gains.kp + gains.ki + gains.kd);
    if (std::abs(denom) < 1e-14)
        throw std::runtime_error("linear_loop_sim: degenerate implicit update");
    std::vector<double> traj;
    traj.reserve(n + 1);
    double e = e0, s = 0.0;
    traj.push_back(e);
    for (std::size_t k = 0; k < n; ++k) {
        double e_next = (e * (1.0 + alpha * gains.kd) - alpha * gains.ki * s + disturbance) / denom;
        s += e_next;
        e = e_next;
        traj.push_back(e);
        if (!std::isfinite(e)) break;
    }
    return traj;
}

double volatility(const std::vector<double>& prices) {
    if (prices.size() < 2) throw std::invalid_argument("volatility: need at least 2 prices");
    std::vector<double> rets;
    rets.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        if (prices[i] <= 0.0 || prices[i - 1] <= 0.0)
            throw std::invalid_argument("volatility: nonpositive price");
        rets.push_back(std::log(prices[i] / prices[i - 1]));
    }
    double mean = 0.0;
    for (double r : rets) mean += r;
    mean /= static_cast<double>(rets.size());
    double var = 0.0;
    for (double r : rets) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rets.size());  // population
    return std::sqrt(var);
}

double ma_deviation(const std::vector<double>& prices, const std::vector<double>& ma) {
    if (prices.empty() || prices.size() != ma.size())
        throw std::invalid_argument("ma_deviation: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (ma[i] <= 0.0) throw std::invalid_argument("ma_deviation: nonpositive MA");
        acc += std::abs(prices[i] - ma[i]) / ma[i];
    }
    return acc / static_cast<double>(prices.size());
}

StepResponseMetrics step_response_metrics(const std::vector<double>& error,
                                          const std::vector<double>& control, double band) {
    if (error.empty()) throw std::invalid_argument("step_response_metrics: empty trajectory");
    StepResponseMetrics m;

    double mse = 0.0;
    for (double e : error) mse += e * e;
    m.mse = mse / static_cast<double>(error.size());

    double e0 = std::abs(error.front());
    double tol = e0 > 0.0 ? band * e0 : band;

    // First index after which |e| stays within the band; horizon if never.
    std::size_t settle = error.size();
    for (std::size_t i = error.size(); i-- > 0;) {
        if (std::abs(error[i]) > tol) { settle = i + 1; break; }
        settle = i;
    }
    m.settling_time = settle;

    // Max excursion past the zero crossing, as % of the initial step.
    double sign0 = error.front() >= 0.0 ? 1.0 : -1.0;
    double worst = 0.0;
    for (double e : error)
        if (e * sign0 < 0.0) worst = std::max(worst, std::abs(e));
    m.max_overshoot_pct = e0 > 0.0 ? 100.0 * worst / e0 : 0.0;

    std::size_t tail = std::max<std::size_t>(1, error.size() / 10);
    double ess = 0.0;
    for (std::size_t i = error.size() - tail; i < error.size(); ++i) ess += std::abs(error[i]);
    m.steady_state_error_pct = 100.0 * (ess / static_cast<double>(tail));

    if (!control.empty()) {
        double mean = 0.0;
        for (double u : control) mean += u;
        mean /= static_cast<double>(control.size());
        double var = 0.0;
        for (double u : control) var += (u - mean) * (u - mean);
        m.control_variance = var / static_cast<double>(control.size());
    }
    return m;
}

TreasuryGrowth treasury_growth(const std::vector<double>& series) {
    if (series.empty()) throw std::invalid_argument("treasury_growth: empty series");
    TreasuryGrowth g;
    if (series.front() > 0.0)
        g.growth_pct = 100.0 * (series.back() - series.front()) / series.front();
    if (series.size() >= 2) {
        std::vector<double> rel;
        rel.reserve(series.size() - 1);
        for (std::size_t i = 1; i < series.size(); ++i)
            if (series[i - 1] > 0.0) rel.push_back(series[i] / series[i - 1] - 1.0);
        if (!rel.empty()) {
            double mean = 0.0;
            for (double r : rel) mean += r;
            mean /= static_cast<double>(rel.size());
            double var = 0.0;
            for (double r : rel) var += (r - mean) * (r - mean);
            g.stability = std::sqrt(var / static_cast<double>(rel.size()));
        }
    }
    return g;
}

}  // namespace dcbm
