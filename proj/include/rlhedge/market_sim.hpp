#pragma once

// Discrete-time price (and volatility) path generation under GBM, SABR with
// beta = 1, or a mixture of such processes selected once per path.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "rlhedge/rng.hpp"

namespace rlhedge::sim {

/// Trading days per year used to convert day counts to year fractions.
inline constexpr double kTradingDaysPerYear = 252.0;

struct PathGrid {
    double expiry = 0.0;  // years
    int n_steps = 0;      // rebalancing intervals

    double dt() const noexcept { return expiry / n_steps; }
    /// Time to maturity at node i.
    double tau_at(int i) const noexcept { return i >= n_steps ? 0.0 : expiry - i * dt(); }
    void validate() const;

    /// Grid for an option of `maturity_days` trading days rebalanced every
    /// `days_per_rebalance` days; the step count is rounded to the nearest
    /// integer so that the grid always ends exactly at expiry.
    static PathGrid from_days(double maturity_days, double days_per_rebalance);
};

struct GbmSpec {
    double s0 = 100.0;
    double mu = 0.0;
    double sigma = 0.2;
    void validate() const;
};

struct SabrSpec {
    double s0 = 100.0;
    double mu = 0.0;
    double sigma0 = 0.2;
    double vol_of_vol = 0.0;
    double rho = 0.0;
    void validate() const;
};

/// A single diffusion from which a path can be drawn.
using ProcessSpec = std::variant<GbmSpec, SabrSpec>;

struct MixtureComponent {
    double weight = 0.0;
    ProcessSpec model;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    void validate() const;
};

using MarketModel = std::variant<GbmSpec, SabrSpec, MixtureSpec>;

void validate(const ProcessSpec& spec);
void validate(const MarketModel& model);
double initial_price(const ProcessSpec& spec) noexcept;
/// Volatility at time zero (sigma for GBM, sigma0 for SABR).
double initial_vol(const ProcessSpec& spec) noexcept;

struct PricePath {
    std::vector<double> prices;  // n_steps + 1 nodes
    std::vector<double> vols;    // empty for GBM, else n_steps + 1 nodes

    bool has_vols() const noexcept { return !vols.empty(); }
    /// Volatility at node i; `fallback` when the path carries no vols.
    double vol_at(std::size_t i, double fallback) const noexcept { return vols.empty() ? fallback : vols[i]; }
};

/// Exact lognormal stepping: S_{i+1} = S_i exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z_i).
PricePath simulate_gbm_path(const GbmSpec& spec, const PathGrid& grid, CounterRng& rng);

/// Price by log-Euler with the period-start volatility, volatility by exact
/// driftless lognormal stepping. Price shocks are drawn from `rng` exactly as
/// simulate_gbm_path draws them; the independent part of the volatility shock
/// comes from a forked stream, so vol_of_vol = 0 reproduces the GBM path.
PricePath simulate_sabr_path(const SabrSpec& spec, const PathGrid& grid, CounterRng& rng);

/// Selects component k with probability weight_k (one uniform draw).
ProcessSpec sample_mixture(const MixtureSpec& spec, CounterRng& rng);

/// Resolves the process for one path (drawing a mixture component first when
/// needed) and simulates it.
struct SampledPath {
    ProcessSpec process;
    PricePath path;
};
SampledPath simulate_path(const MarketModel& model, const PathGrid& grid, CounterRng& rng);
PricePath simulate_process(const ProcessSpec& process, const PathGrid& grid, CounterRng& rng);

/// Path i is drawn from CounterRng::substream(seed, i); the result does not
/// depend on evaluation order or thread count.
std::vector<PricePath> simulate_batch(const MarketModel& model, const PathGrid& grid, std::size_t n_paths,
                                      std::uint64_t seed, unsigned threads = 1);

/// CSV with header `path_id,step,price,vol` (vol empty when absent).
void write_paths_csv(std::ostream& out, std::span<const PricePath> paths);

}  // namespace rlhedge::sim
