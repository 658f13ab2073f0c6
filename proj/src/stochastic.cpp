#include "dcbm/stochastic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcbm {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index) {
    std::uint64_t sm = seed ^ (0xA0761D6478BD642FULL * (stream_index + 1));
    for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double RngStream::next_exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("rng: exponential rate must be positive");
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return -std::log(u) / rate;
}

std::uint64_t RngStream::next_poisson(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("rng: negative poisson rate");
    if (lambda == 0.0) return 0;
    // Knuth inversion; fine for the per-epoch intensities used here.
    double l = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= next_double();
    } while (p > l);
    return k - 1;
}

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t run_index) {
    std::uint64_t st = master_seed ^ (0x9E3779B97F4A7C15ULL * (run_index + 0x632BE59BD9B4E019ULL));
    return splitmix64(st);
}

void JumpDiffusionParams::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("jump-diffusion: sigma must be >= 0");
    if (jump_intensity < 0.0) throw std::invalid_argument("jump-diffusion: intensity must be >= 0");
    if (p_up < 0.0 || p_up > 1.0) throw std::invalid_argument("jump-diffusion: p_up outside [0,1]");
    if (eta_up <= 1.0) throw std::invalid_argument("jump-diffusion: eta_up must exceed 1");
    if (eta_down <= 0.0) throw std::invalid_argument("jump-diffusion: eta_down must be positive");
}

double JumpDiffusionParams::mean_increment() const {
    return mu - sigma * sigma / 2.0 +
           jump_intensity * (p_up / eta_up - (1.0 - p_up) / eta_down);
}

double JumpDiffusionParams::variance_increment() const {
    return sigma * sigma +
           jump_intensity * (p_up * 2.0 / (eta_up * eta_up) +
                             (1.0 - p_up) * 2.0 / (eta_down * eta_down));
}

void CorrelationSpec::validate() const {
    if (rho < -1.0 || rho > 1.0) throw std::invalid_argument("correlation: |rho| must be <= 1");
}

namespace {

double kou_jump_sum(const JumpDiffusionParams& p, RngStream& rng) {
    std::uint64_t n_jumps = rng.next_poisson(p.jump_intensity);
    double total = 0.0;
    for (std::uint64_t j = 0; j < n_jumps; ++j) {
        if (rng.next_double() < p.p_up)
            total += rng.next_exponential(p.eta_up);
        else
            total -= rng.next_exponential(p.eta_down);
    }
    return total;
}

}  // namespace

std::vector<double> gen_path(const JumpDiffusionParams& params, std::size_t n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("gen_path: n must be >= 1");
    params.validate();
    std::vector<double> incr;
    incr.reserve(n);
    double drift = params.mu - params.sigma * params.sigma / 2.0;
    for (std::size_t k = 0; k < n; ++k) {
        double z = params.sigma > 0.0 ? rng.next_normal() : 0.0;
        incr.push_back(drift + params.sigma * z + kou_jump_sum(params, rng));
    }
    return incr;
}

CorrelatedPaths gen_correlated(const JumpDiffusionParams& demand_params,
                               const JumpDiffusionParams& shock_params,
                               const CorrelationSpec& corr, std::size_t n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("gen_correlated: n must be >= 1");
    demand_params.validate();
    shock_params.validate();
    corr.validate();
    CorrelatedPaths out;
    out.demand.reserve(n);
    out.shock.reserve(n);
    double drift_d = demand_params.mu - demand_params.sigma * demand_params.sigma / 2.0;
    double drift_s = shock_params.mu - shock_params.sigma * shock_params.sigma / 2.0;
    double rho = corr.rho;
    double ortho = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t k = 0; k < n; ++k) {
        // Fixed draw order per epoch: two normals, demand jumps, shock jumps.
        double z1 = rng.next_normal();
        double z2 = rng.next_normal();
        double zd = z1;
        double zs = rho * z1 + ortho * z2;
        double jd = kou_jump_sum(demand_params, rng);
        double js = kou_jump_sum(shock_params, rng);
        out.demand.push_back(drift_d + demand_params.sigma * zd + jd);
        out.shock.push_back(drift_s + shock_params.sigma * zs + js);
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur.push_back('"'); ++i; }
                else quoted = false;
            } else cur.push_back(c);
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no, const std::string& what) {
    std::ostringstream os;
    os << path << ":" << line_no << ": " << what;
    throw std::runtime_error(os.str());
}

}  // namespace

std::vector<double> replay_csv(const std::string& path, const std::string& timestamp_column,
                               const std::string& price_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("replay_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, 1, "missing header row");
    auto header = split_csv_row(line);
    std::size_t ts_idx = header.size(), px_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == timestamp_column) ts_idx = i;
        if (header[i] == price_column) px_idx = i;
    }
    if (ts_idx == header.size()) parse_fail(path, 1, "timestamp column '" + timestamp_column + "' not found");
    if (px_idx == header.size()) parse_fail(path, 1, "price column '" + price_column + "' not found");

    std::vector<double> prices;
    std::string prev_ts;
    double prev_price = 0.0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto row = split_csv_row(line);
        if (row.size() <= std::max(ts_idx, px_idx)) parse_fail(path, line_no, "too few columns");
        const std::string& ts = row[ts_idx];
        if (!prev_ts.empty() && ts <= prev_ts)
            parse_fail(path, line_no, "timestamps not strictly increasing");
        prev_ts = ts;
        const std::string& cell = row[px_idx];
        double px;
        if (cell.empty()) {
            if (prices.empty()) parse_fail(path, line_no, "leading gap in price column");
            px = prev_price;  // forward fill
        } else {
            try {
                std::size_t pos = 0;
                px = std::stod(cell, &pos);
                if (pos != cell.size()) parse_fail(path, line_no, "malformed price '" + cell + "'");
            } catch (const std::invalid_argument&) {
                parse_fail(path, line_no, "malformed price '" + cell + "'");
            }
            if (px <= 0.0) parse_fail(path, line_no, "nonpositive price");
        }
        prices.push_back(px);
        prev_price = px;
    }
    if (prices.size() < 2) parse_fail(path, line_no, "need at least 2 rows");
    std::vector<double> incr;
    incr.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) incr.push_back(std::log(prices[i] / prices[i - 1]));
    return incr;
}

}  // namespace dcbm
