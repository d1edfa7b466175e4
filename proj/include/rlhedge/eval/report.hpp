#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rlhedge/agents/ddpg.hpp"
#include "rlhedge/eval/evaluate.hpp"

namespace rlhedge::eval {

/// SHA-1 of "blob <size>\0<content>", as git computes object ids (hex).
std::string git_blob_sha1(std::string_view content);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ComparisonRow& row);

/// Columns: frequency, policy, mean_cost_pct, sd_cost_pct, y0_pct, one
/// improvement_vs_<baseline>_pct per baseline, se_mean, se_sd, n_paths, seed.
void write_table_csv(std::ostream& out, std::span<const ComparisonRow> rows);

/// Header `episode,epsilon,mean_cost_pct,sd_cost_pct,y0_pct,critic_loss,validation_f`.
void write_learning_curve_csv(std::ostream& out, std::span<const agents::LearningCurvePoint> curve);

nlohmann::json to_json(const agents::DdpgConfig& config);

}  // namespace rlhedge::eval
