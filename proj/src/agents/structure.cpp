#include "rlhedge/agents/structure.hpp"

#include <cmath>

#include "rlhedge/errors.hpp"

namespace rlhedge::agents {

StructureReport directional_binning(const HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n_paths,
                                    std::uint64_t seed, const StructureOptions& options) {
    env.validate();
    require(options.bin_width > 0.0 && options.range > 0.0, "binning needs positive width and range");
    const auto n_bins = static_cast<std::size_t>(std::ceil(2.0 * options.range / options.bin_width));

    StructureReport report;
    report.bins.resize(n_bins);
    std::vector<double> gap_sum(n_bins, 0.0), hold_sum(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        report.bins[b].lower = -options.range + static_cast<double>(b) * options.bin_width;
        report.bins[b].upper = report.bins[b].lower + options.bin_width;
    }

    constexpr std::size_t kBlock = 512;
    for (std::size_t lo = 0; lo < n_paths; lo += kBlock) {
        const std::size_t hi = std::min(n_paths, lo + kBlock);
        std::vector<env::Episode> eps;
        for (std::size_t i = lo; i < hi; ++i) eps.push_back(env::Episode::from_substream(env, seed, i));
        std::vector<env::HedgeState> states(eps.size());
        std::vector<PricingContext> contexts(eps.size());
        std::vector<double> actions(eps.size());
        for (int step = 0; step < env.grid.n_steps; ++step) {
            for (std::size_t k = 0; k < eps.size(); ++k) {
                states[k] = eps[k].state();
                contexts[k] = make_context(eps[k]);
            }
            policy.act_batch(states, contexts, actions);
            for (std::size_t k = 0; k < eps.size(); ++k) {
                const auto& s = states[k];
                const double sigma = options.delta_sigma > 0.0 ? options.delta_sigma : contexts[k].current_vol;
                const double delta = pricing::bs_delta(s.price, env.option, env.rates, sigma, s.tau);
                const double holding_gap = s.holding_prev - delta;
                const double a = std::clamp(actions[k], 0.0, 1.0);
                eps[k].step(actions[k]);
                if (std::abs(holding_gap) < options.dead_zone) continue;
                const double pos = (holding_gap + options.range) / options.bin_width;
                if (pos < 0.0 || pos >= static_cast<double>(n_bins)) continue;
                const auto b = static_cast<std::size_t>(pos);
                ++report.bins[b].count;
                gap_sum[b] += a - delta;
                hold_sum[b] += holding_gap;
                ++report.states;
            }
        }
    }

    for (std::size_t b = 0; b < n_bins; ++b) {
        auto& bin = report.bins[b];
        if (bin.count < options.min_count) continue;
        bin.populated = true;
        bin.mean_gap = gap_sum[b] / static_cast<double>(bin.count);
        bin.mean_holding_gap = hold_sum[b] / static_cast<double>(bin.count);
        // Under-hedged arrivals should stay at or below delta, over-hedged at or above.
        bin.consistent = bin.mean_holding_gap < 0.0 ? bin.mean_gap <= 0.0 : bin.mean_gap >= 0.0;
        ++report.populated;
        if (bin.consistent) ++report.consistent;
    }
    return report;
}

}  // namespace rlhedge::agents
