#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlhedge/agents/structure.hpp"
#include "rlhedge/eval/config.hpp"
#include "rlhedge/eval/evaluate.hpp"

namespace rlhedge::eval {

struct TrainedPolicy {
    std::string frequency;
    std::shared_ptr<const agents::HedgingPolicy> policy;
    std::vector<agents::LearningCurvePoint> curve;
    std::uint64_t seed = 0;
    std::size_t updates = 0;
};

/// Trains (or loads from training.load_from) the learned policies named in
/// evaluation.policies for one frequency, writing checkpoints, sidecars and
/// learning curves under `out_dir` when it is nonempty.
std::vector<TrainedPolicy> obtain_learned_policies(const RunConfig& config, const Frequency& frequency,
                                                   const std::string& out_dir, std::ostream* log);

/// Policy label of a learned policy trained with `seed` (seeds are only
/// spelled out when several are configured).
std::string learned_label(const RunConfig& config, const std::string& base, std::uint64_t seed);

struct ExperimentResult {
    std::vector<ComparisonRow> rows;
    nlohmann::json report;
};

/// Trains as configured, evaluates every policy on paired paths per
/// frequency and writes table.csv, report.json, checkpoints/ and
/// learning-curve CSVs to `out_dir` (config.output_dir when empty).
ExperimentResult run_experiment(const RunConfig& config, std::string out_dir = "", std::ostream* log = nullptr);

}  // namespace rlhedge::eval
