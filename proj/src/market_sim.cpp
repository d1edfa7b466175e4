#include "rlhedge/market_sim.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>

#include "rlhedge/errors.hpp"

namespace rlhedge::sim {

namespace {

template <typename... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void PathGrid::validate() const {
    require(finite(expiry) && expiry > 0.0, "grid.expiry must be > 0");
    require(n_steps >= 1, "grid.n_steps must be >= 1");
}

PathGrid PathGrid::from_days(double maturity_days, double days_per_rebalance) {
    require(maturity_days > 0.0, "maturity_days must be > 0");
    require(days_per_rebalance > 0.0, "days_per_rebalance must be > 0");
    const int steps = std::max(1, static_cast<int>(std::lround(maturity_days / days_per_rebalance)));
    return {maturity_days / kTradingDaysPerYear, steps};
}

void GbmSpec::validate() const {
    require(finite(s0) && s0 > 0.0, "gbm.s0 must be > 0");
    require(finite(mu), "gbm.mu must be finite");
    require(finite(sigma) && sigma >= 0.0, "gbm.sigma must be >= 0");
}

void SabrSpec::validate() const {
    require(finite(s0) && s0 > 0.0, "sabr.s0 must be > 0");
    require(finite(mu), "sabr.mu must be finite");
    require(finite(sigma0) && sigma0 > 0.0, "sabr.sigma0 must be > 0");
    require(finite(vol_of_vol) && vol_of_vol >= 0.0, "sabr.vol_of_vol must be >= 0");
    require(finite(rho) && rho >= -1.0 && rho <= 1.0, "sabr.rho must lie in [-1, 1]");
}

void MixtureSpec::validate() const {
    require(!components.empty(), "mixture.components must be nonempty");
    double total = 0.0;
    for (const auto& c : components) {
        require(finite(c.weight) && c.weight >= 0.0, "mixture.components.weight must be >= 0");
        total += c.weight;
        sim::validate(c.model);
    }
    require(std::fabs(total - 1.0) <= 1e-9, "mixture.components.weight must sum to 1");
}

void validate(const ProcessSpec& spec) {
    std::visit([](const auto& s) { s.validate(); }, spec);
}

void validate(const MarketModel& model) {
    std::visit([](const auto& s) { s.validate(); }, model);
}

double initial_price(const ProcessSpec& spec) noexcept {
    return std::visit([](const auto& s) { return s.s0; }, spec);
}

double initial_vol(const ProcessSpec& spec) noexcept {
    return std::visit(Overloaded{[](const GbmSpec& s) { return s.sigma; }, [](const SabrSpec& s) { return s.sigma0; }},
                      spec);
}

PricePath simulate_gbm_path(const GbmSpec& spec, const PathGrid& grid, CounterRng& rng) {
    spec.validate();
    grid.validate();
    const double dt = grid.dt();
    const double drift = (spec.mu - 0.5 * spec.sigma * spec.sigma) * dt;
    const double diffusion = spec.sigma * std::sqrt(dt);

    PricePath path;
    path.prices.resize(static_cast<std::size_t>(grid.n_steps) + 1);
    path.prices[0] = spec.s0;
    for (int i = 0; i < grid.n_steps; ++i) {
        const double z = rng.normal();
        path.prices[i + 1] = path.prices[i] * std::exp(drift + diffusion * z);
    }
    return path;
}

PricePath simulate_sabr_path(const SabrSpec& spec, const PathGrid& grid, CounterRng& rng) {
    spec.validate();
    grid.validate();
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
    const double vol_drift = -0.5 * spec.vol_of_vol * spec.vol_of_vol * dt;
    CounterRng vol_rng = rng.fork(1);

    const auto n = static_cast<std::size_t>(grid.n_steps) + 1;
    PricePath path;
    path.prices.resize(n);
    path.vols.resize(n);
    path.prices[0] = spec.s0;
    path.vols[0] = spec.sigma0;
    for (int i = 0; i < grid.n_steps; ++i) {
        const double z1 = rng.normal();
        const double w = vol_rng.normal();
        const double z2 = spec.rho * z1 + rho_perp * w;
        const double sigma = path.vols[i];
        path.prices[i + 1] = path.prices[i] * std::exp((spec.mu - 0.5 * sigma * sigma) * dt + sigma * sqrt_dt * z1);
        path.vols[i + 1] = sigma * std::exp(vol_drift + spec.vol_of_vol * sqrt_dt * z2);
    }
    return path;
}

ProcessSpec sample_mixture(const MixtureSpec& spec, CounterRng& rng) {
    spec.validate();
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& c : spec.components) {
        cumulative += c.weight;
        if (u < cumulative && c.weight > 0.0) return c.model;
    }
    // u landed in the rounding slack above the last cumulative weight.
    for (auto it = spec.components.rbegin(); it != spec.components.rend(); ++it)
        if (it->weight > 0.0) return it->model;
    return spec.components.back().model;
}

PricePath simulate_process(const ProcessSpec& process, const PathGrid& grid, CounterRng& rng) {
    return std::visit(Overloaded{[&](const GbmSpec& s) { return simulate_gbm_path(s, grid, rng); },
                                 [&](const SabrSpec& s) { return simulate_sabr_path(s, grid, rng); }},
                      process);
}

SampledPath simulate_path(const MarketModel& model, const PathGrid& grid, CounterRng& rng) {
    ProcessSpec process = std::visit(Overloaded{[](const GbmSpec& s) -> ProcessSpec { return s; },
                                                [](const SabrSpec& s) -> ProcessSpec { return s; },
                                                [&](const MixtureSpec& m) { return sample_mixture(m, rng); }},
                                     model);
    PricePath path = simulate_process(process, grid, rng);
    return {std::move(process), std::move(path)};
}

std::vector<PricePath> simulate_batch(const MarketModel& model, const PathGrid& grid, std::size_t n_paths,
                                      std::uint64_t seed, unsigned threads) {
    require(n_paths >= 1, "n_paths must be >= 1");
    validate(model);
    grid.validate();

    std::vector<PricePath> paths(n_paths);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng = CounterRng::substream(seed, i);
            paths[i] = simulate_path(model, grid, rng).path;
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_paths)));
    if (threads == 1) {
        work(0, n_paths);
        return paths;
    }
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n_paths + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(n_paths, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }
    return paths;
}

void write_paths_csv(std::ostream& out, std::span<const PricePath> paths) {
    out << "path_id,step,price,vol\n";
    out << std::setprecision(17);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& path = paths[p];
        for (std::size_t i = 0; i < path.prices.size(); ++i) {
            out << p << ',' << i << ',' << path.prices[i] << ',';
            if (path.has_vols()) out << path.vols[i];
            out << '\n';
        }
    }
}

}  // namespace rlhedge::sim
