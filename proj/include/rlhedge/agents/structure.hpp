#pragma once

// Directional structure of a hedging policy relative to Black-Scholes delta:
// states are binned by holding_prev - delta; a trading-cost-aware policy should
// stay below delta when it arrives under-hedged and above it when over-hedged.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rlhedge/agents/policy.hpp"

namespace rlhedge::agents {

struct StructureBin {
    double lower = 0.0;  // holding_prev - delta, inclusive
    double upper = 0.0;  // exclusive
    std::size_t count = 0;
    double mean_gap = 0.0;               // mean (action - delta)
    double mean_holding_gap = 0.0;       // mean (holding_prev - delta)
    bool populated = false;
    bool consistent = false;
};

struct StructureReport {
    std::vector<StructureBin> bins;
    std::size_t populated = 0;
    std::size_t consistent = 0;
    std::size_t states = 0;

    double fraction() const noexcept {
        return populated == 0 ? 0.0 : static_cast<double>(consistent) / static_cast<double>(populated);
    }
    bool passes(double threshold = 0.8) const noexcept { return populated > 0 && fraction() >= threshold; }
};

struct StructureOptions {
    double bin_width = 0.05;
    double range = 0.5;          // bins cover [-range, range]
    std::size_t min_count = 50;  // fewer states leave a bin unpopulated
    double dead_zone = 1e-9;     // |holding_prev - delta| below this is skipped
    double delta_sigma = 0.0;    // volatility for the reference delta; 0 = current vol
};

/// Bins the states visited when `policy` itself runs on paths
/// substream(seed, 0..n_paths-1). The first decision of each path (no prior
/// holding) is included.
StructureReport directional_binning(const HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n_paths,
                                    std::uint64_t seed, const StructureOptions& options = {});

}  // namespace rlhedge::agents
