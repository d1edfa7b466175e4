#include "rlhedge/eval/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "rlhedge/agents/ddpg.hpp"
#include "rlhedge/agents/qlearn.hpp"
#include "rlhedge/eval/report.hpp"
#include "rlhedge/nn/checkpoint.hpp"
#include "rlhedge/simd/kernels.hpp"

namespace rlhedge::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    return json::parse(in);
}

json normalizer_json(const agents::StateNormalizer& n) {
    return {{"strike", n.strike}, {"expiry", n.expiry}, {"moneyness_scale", n.moneyness_scale}};
}

agents::StateNormalizer normalizer_from(const json& j) {
    return {j.at("strike").get<double>(), j.at("expiry").get<double>(), j.at("moneyness_scale").get<double>()};
}

std::string stem(const std::string& frequency, const std::string& label) { return frequency + "_" + label; }

}  // namespace

std::string learned_label(const RunConfig& config, const std::string& base, std::uint64_t seed) {
    if (config.training.seeds.size() <= 1) return base;
    return base + "_s" + std::to_string(seed);
}

std::vector<TrainedPolicy> obtain_learned_policies(const RunConfig& config, const Frequency& frequency,
                                                   const std::string& out_dir, std::ostream* log) {
    std::vector<TrainedPolicy> out;
    const auto env = config.env_for(frequency);
    const fs::path ckpt_dir = out_dir.empty() ? fs::path() : fs::path(out_dir) / "checkpoints";
    if (!ckpt_dir.empty()) fs::create_directories(ckpt_dir);

    for (const auto& base : config.evaluation.policies) {
        if (base != "rl" && base != "rl_discrete") continue;
        for (const auto seed : config.training.seeds) {
            const std::string label = learned_label(config, base, seed);
            const std::string name = stem(frequency.label, label);
            TrainedPolicy tp;
            tp.frequency = frequency.label;
            tp.seed = seed;

            if (!config.training.enabled) {
                const fs::path dir = fs::path(config.training.load_from) / "checkpoints";
                const json side = read_json(dir / (name + ".json"));
                const auto norm = normalizer_from(side.at("normalizer"));
                if (base == "rl") {
                    auto actor = std::make_shared<nn::Mlp<float>>(nn::load_mlp<float>((dir / (name + "_actor.ckpt")).string()));
                    tp.policy = std::make_shared<agents::ActorPolicy>(actor, norm, label);
                } else {
                    auto q1 = std::make_shared<nn::Mlp<float>>(nn::load_mlp<float>((dir / (name + "_critic1.ckpt")).string()));
                    auto q2 = std::make_shared<nn::Mlp<float>>(nn::load_mlp<float>((dir / (name + "_critic2.ckpt")).string()));
                    tp.policy = std::make_shared<agents::DiscreteQPolicy>(
                        q1, q2, norm, side.at("grid").get<std::vector<double>>(), side.at("c").get<double>(), label);
                }
                out.push_back(std::move(tp));
                continue;
            }

            auto training = config.training.config;
            training.seed = seed;
            if (log) *log << "training " << label << " at " << frequency.label << " (" << training.episodes
                          << " episodes)" << std::endl;
            json side = {{"frequency", frequency.label},
                         {"policy", label},
                         {"training_seed", seed},
                         {"episodes", training.episodes},
                         {"validation_seed", training.validation_seed()},
                         {"keep_best", training.keep_best},
                         {"c", config.objective.c},
                         {"gamma", config.objective.gamma},
                         {"agent", to_json(static_cast<const agents::DdpgConfig&>(config.agent))}};

            if (base == "rl") {
                auto result = agents::ddpg_train<float>(env, config.agent, config.objective, training);
                auto actor = result.agent.actor_snapshot();
                tp.policy = std::make_shared<agents::ActorPolicy>(actor, result.agent.normalizer(), label);
                tp.curve = std::move(result.curve);
                tp.updates = result.updates;
                side["normalizer"] = normalizer_json(result.agent.normalizer());
                side["cost_scale"] = result.agent.cost_scale();
                side["updates"] = result.updates;
                side["selected_episode"] = result.selected_episode;
                if (!ckpt_dir.empty()) {
                    nn::save_mlp((ckpt_dir / (name + "_actor.ckpt")).string(), result.agent.actor());
                    nn::save_mlp((ckpt_dir / (name + "_critic1.ckpt")).string(), result.agent.critic1());
                    nn::save_mlp((ckpt_dir / (name + "_critic2.ckpt")).string(), result.agent.critic2());
                }
            } else {
                auto result = agents::qlearn_train(env, config.agent, config.objective, training);
                tp.policy = result.agent.policy(label);
                tp.curve = std::move(result.curve);
                tp.updates = result.updates;
                side["normalizer"] = normalizer_json(result.agent.normalizer());
                side["grid"] = result.agent.grid();
                side["updates"] = result.updates;
                if (!ckpt_dir.empty()) {
                    nn::save_mlp((ckpt_dir / (name + "_critic1.ckpt")).string(), result.agent.critic1());
                    nn::save_mlp((ckpt_dir / (name + "_critic2.ckpt")).string(), result.agent.critic2());
                }
            }
            if (!ckpt_dir.empty()) {
                write_file(ckpt_dir / (name + ".json"), side.dump(2) + "\n");
                std::ofstream curve(fs::path(out_dir) / ("learning_curve_" + name + ".csv"));
                write_learning_curve_csv(curve, tp.curve);
            }
            out.push_back(std::move(tp));
        }
    }
    return out;
}

ExperimentResult run_experiment(const RunConfig& config, std::string out_dir, std::ostream* log) {
    if (out_dir.empty()) out_dir = config.output_dir;
    fs::create_directories(out_dir);

    std::vector<FrequencyCase> cases;
    json training_log = json::array();
    json structure = json::array();
    for (const auto& f : config.frequencies) {
        FrequencyCase fc;
        fc.label = f.label;
        fc.env = config.env_for(f);
        const auto learned = obtain_learned_policies(config, f, out_dir, log);
        for (const auto& name : config.evaluation.policies) {
            if (name == "rl" || name == "rl_discrete") {
                for (const auto& tp : learned) {
                    if (tp.policy->kind() != agents::policy_kind_from_string(name)) continue;
                    fc.policies.push_back(tp.policy);
                    training_log.push_back({{"frequency", f.label},
                                            {"policy", tp.policy->label()},
                                            {"seed", tp.seed},
                                            {"updates", tp.updates},
                                            {"checkpoints", config.training.enabled}});
                    if (config.evaluation.structure_paths > 0) {
                        const auto s = agents::directional_binning(*tp.policy, fc.env,
                                                                   config.evaluation.structure_paths,
                                                                   mix64(config.evaluation.seed ^ 0x737472ULL));
                        structure.push_back({{"frequency", f.label},
                                             {"policy", tp.policy->label()},
                                             {"populated_bins", s.populated},
                                             {"consistent_bins", s.consistent},
                                             {"fraction", s.fraction()},
                                             {"passes", s.passes()}});
                    }
                }
            } else {
                fc.policies.push_back(agents::make_baseline_policy(agents::policy_kind_from_string(name)));
            }
        }
        cases.push_back(std::move(fc));
    }

    if (log) *log << "evaluating " << config.evaluation.n_paths << " paths per policy" << std::endl;
    ExperimentResult result;
    result.rows = compare(cases, config.evaluation.baselines, config.evaluation.n_paths, config.evaluation.seed,
                          config.objective.c, config.evaluation.threads);

    {
        std::ofstream table(fs::path(out_dir) / "table.csv", std::ios::binary);
        write_table_csv(table, result.rows);
    }

    const json echo = to_json(config);
    json rows = json::array();
    for (const auto& r : result.rows) rows.push_back(to_json(r));
    result.report = {{"config", echo},
                     {"input_hash", git_blob_sha1(echo.dump())},
                     {"evaluation_seed", config.evaluation.seed},
                     {"rows", rows},
                     {"training", training_log},
                     {"structure", structure},
                     {"kernel_isa", simd::active_isa() == simd::Isa::avx2 ? "avx2" : "scalar"}};
    write_file(fs::path(out_dir) / "report.json", result.report.dump(2) + "\n");
    return result;
}

}  // namespace rlhedge::eval
