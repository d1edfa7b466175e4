#include "rlhedge/eval/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "rlhedge/errors.hpp"

namespace rlhedge::eval {

using nlohmann::json;

std::string git_blob_sha1(std::string_view content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

json to_json(const EvalReport& r) {
    return {{"label", r.label},
            {"n_paths", r.n_paths},
            {"seed", r.seed},
            {"c", r.c},
            {"mean_cost_pct", r.mean_cost_pct},
            {"sd_cost_pct", r.sd_cost_pct},
            {"y0_pct", r.y0_pct},
            {"se_mean", r.se_mean},
            {"se_sd", r.se_sd},
            {"se_y0", r.se_y0},
            {"path_checksum", r.path_checksum},
            {"clamp_count", r.clamp_count}};
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    try {
        r.label = j.at("label").get<std::string>();
        r.n_paths = j.at("n_paths").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.c = j.at("c").get<double>();
        r.mean_cost_pct = j.at("mean_cost_pct").get<double>();
        r.sd_cost_pct = j.at("sd_cost_pct").get<double>();
        r.y0_pct = j.at("y0_pct").get<double>();
        r.se_mean = j.at("se_mean").get<double>();
        r.se_sd = j.at("se_sd").get<double>();
        r.se_y0 = j.at("se_y0").get<double>();
        r.path_checksum = j.at("path_checksum").get<std::uint64_t>();
        r.clamp_count = j.at("clamp_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return r;
}

json to_json(const ComparisonRow& row) {
    json reports = json::array();
    for (std::size_t p = 0; p < row.reports.size(); ++p) {
        json r = to_json(row.reports[p]);
        json imp = json::object();
        for (std::size_t b = 0; b < row.baselines.size(); ++b) imp[row.baselines[b]] = row.improvement[p][b];
        r["improvement_pct"] = imp;
        reports.push_back(r);
    }
    return {{"frequency", row.frequency}, {"baselines", row.baselines}, {"reports", reports}};
}

void write_table_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
    require(!rows.empty(), "table needs at least one row");
    const auto& baselines = rows.front().baselines;
    out << "frequency,policy,mean_cost_pct,sd_cost_pct,y0_pct";
    for (const auto& b : baselines) out << ",improvement_vs_" << b << "_pct";
    out << ",se_mean,se_sd,n_paths,seed\n";
    std::ostringstream line;
    for (const auto& row : rows) {
        for (std::size_t p = 0; p < row.reports.size(); ++p) {
            const auto& r = row.reports[p];
            line.str("");
            line << std::fixed << std::setprecision(4);
            line << row.frequency << ',' << r.label << ',' << r.mean_cost_pct << ',' << r.sd_cost_pct << ','
                 << r.y0_pct;
            for (std::size_t b = 0; b < baselines.size(); ++b) line << ',' << row.improvement[p][b];
            line << ',' << r.se_mean << ',' << r.se_sd << ',' << r.n_paths << ',' << r.seed << '\n';
            out << line.str();
        }
    }
}

void write_learning_curve_csv(std::ostream& out, std::span<const agents::LearningCurvePoint> curve) {
    out << "episode,epsilon,mean_cost_pct,sd_cost_pct,y0_pct,critic_loss,validation_f\n";
    out << std::setprecision(10);
    for (const auto& p : curve) {
        out << p.episode << ',' << p.epsilon << ',' << p.mean_cost_pct << ',' << p.sd_cost_pct << ',' << p.y0_pct
            << ',' << p.critic_loss << ',' << p.validation_f << '\n';
    }
}

json to_json(const agents::DdpgConfig& a) {
    return {{"hidden", a.hidden},
            {"actor_lr", a.actor_adam.learning_rate},
            {"critic_lr", a.critic_adam.learning_rate},
            {"adam_beta1", a.actor_adam.beta1},
            {"adam_beta2", a.actor_adam.beta2},
            {"adam_epsilon", a.actor_adam.epsilon},
            {"soft_update_tau", a.soft_update_tau},
            {"batch_size", a.batch_size},
            {"buffer_capacity", a.buffer_capacity},
            {"warmup_transitions", a.warmup_transitions},
            {"update_every", a.update_every},
            {"per_alpha", a.per_alpha},
            {"per_beta_start", a.per_beta_start},
            {"per_beta_end", a.per_beta_end},
            {"importance_weights", a.importance_weights},
            {"epsilon_start", a.epsilon_start},
            {"epsilon_end", a.epsilon_end},
            {"epsilon_decay_fraction", a.epsilon_decay_fraction},
            {"final_layer_init", a.final_layer_init},
            {"moneyness_scale", a.moneyness_scale},
            {"normalize_costs", a.normalize_costs}};
}

}  // namespace rlhedge::eval
