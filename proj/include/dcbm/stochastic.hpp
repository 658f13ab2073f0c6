// Exogenous process generation: correlated Kou jump-diffusion log-increment
// paths plus CSV replay of historical series. The RNG and all samplers are
// self-contained so sequences are identical across platforms and stdlibs.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcbm {

// xoshiro256++ seeded through splitmix64 from (seed, stream index).
// Same (seed, index) always yields the same sequence.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index = 0);

    std::uint64_t next_u64();
    double next_double();  // uniform [0, 1)
    double next_normal();  // standard normal (Box-Muller, two draws per call)
    double next_exponential(double rate);
    std::uint64_t next_poisson(double lambda);  // inversion; lambda modest

  private:
    std::uint64_t s_[4];
};

// Mixes a master seed and a run index into a per-run seed (splitmix64-based).
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t run_index);

struct JumpDiffusionParams {
    double mu = 0.0;               // drift per epoch
    double sigma = 0.0;            // diffusion volatility per sqrt(epoch)
    double jump_intensity = 0.0;   // Poisson jumps per epoch
    double p_up = 0.3;             // upward jump probability
    double eta_up = 10.0;          // upward jump rate, > 1
    double eta_down = 5.0;         // downward jump rate, > 0

    void validate() const;
    // Analytic per-epoch increment moments of the Kou model.
    double mean_increment() const;
    double variance_increment() const;
};

struct CorrelationSpec {
    double rho = 0.0;  // |rho| <= 1

    void validate() const;
};

// One log-increment per epoch:
//   (mu - sigma^2/2) + sigma Z + sum of double-exponential jump sizes.
std::vector<double> gen_path(const JumpDiffusionParams& params, std::size_t n, RngStream& rng);

struct CorrelatedPaths {
    std::vector<double> demand;
    std::vector<double> shock;
};

// Diffusion components share a Brownian factor with correlation rho; jump
// components are independent.
CorrelatedPaths gen_correlated(const JumpDiffusionParams& demand_params,
                               const JumpDiffusionParams& shock_params,
                               const CorrelationSpec& corr, std::size_t n, RngStream& rng);

// Log-increments of a named price column from a CSV file with a header row
// and an ISO-8601 timestamp column. Parse errors carry the line number.
std::vector<double> replay_csv(const std::string& path, const std::string& timestamp_column,
                               const std::string& price_column);

}  // namespace dcbm
