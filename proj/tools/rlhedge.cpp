// Command-line front end: price, simulate, train, evaluate, compare, slice.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rlhedge/eval/config.hpp"
#include "rlhedge/eval/experiment.hpp"
#include "rlhedge/eval/report.hpp"
#include "rlhedge/market_sim.hpp"
#include "rlhedge/pricing.hpp"

namespace {

using namespace rlhedge;
using nlohmann::json;

struct Globals {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
};

eval::RunConfig load(const Globals& g) {
    if (g.config_path.empty())
        throw eval::ConfigError(eval::ConfigError::Kind::missing_key, "--config", "this command needs --config");
    auto cfg = eval::load_run_config(g.config_path);
    if (g.seed_set) {
        cfg.evaluation.seed = g.seed;
        cfg.training.seeds = {g.seed};
        cfg.training.config.seed = g.seed;
    }
    if (g.threads > 0) cfg.evaluation.threads = g.threads;
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

const eval::Frequency& pick_frequency(const eval::RunConfig& cfg, const std::string& label) {
    if (label.empty()) return cfg.frequencies.front();
    for (const auto& f : cfg.frequencies)
        if (f.label == label) return f;
    throw ValidationError("frequency '" + label + "' is not in hedging.frequencies");
}

std::vector<std::shared_ptr<const agents::HedgingPolicy>> policies_for(const eval::RunConfig& cfg,
                                                                       const eval::Frequency& f,
                                                                       const std::string& only) {
    std::vector<std::shared_ptr<const agents::HedgingPolicy>> out;
    const bool need_learned = only.empty() ? cfg.wants_rl() : (only.rfind("rl", 0) == 0);
    std::vector<eval::TrainedPolicy> learned;
    if (need_learned) {
        auto c = cfg;
        if (!only.empty()) c.evaluation.policies = {only.substr(0, only.find("_s"))};
        learned = eval::obtain_learned_policies(c, f, "", &std::cerr);
    }
    for (const auto& name : cfg.evaluation.policies) {
        if (!only.empty() && name != only && only.rfind(name, 0) != 0) continue;
        if (name == "rl" || name == "rl_discrete") {
            for (const auto& tp : learned)
                if (only.empty() || tp.policy->label() == only || name == only) out.push_back(tp.policy);
        } else {
            out.push_back(agents::make_baseline_policy(agents::policy_kind_from_string(name)));
        }
    }
    if (out.empty() && !only.empty() && cfg.wants_rl() == false)
        out.push_back(agents::make_baseline_policy(agents::policy_kind_from_string(only)));
    if (out.empty()) throw ValidationError("no policy matches '" + only + "'");
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Hedging with reinforcement learning: pricing, simulation, training and evaluation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "experiment configuration (JSON)");
    app.add_option("--out", g.out, "output file or directory");
    app.add_option("--threads", g.threads, "worker threads for evaluation");
    auto* seed_opt = app.add_option("--seed", g.seed, "override evaluation and training seeds");

    // price
    auto* price = app.add_subcommand("price", "option price and hedge ratios");
    double spot = 100, strike = 100, expiry = 1, sigma = 0.2, rate = 0, div = 0, vov = 0, rho = 0;
    price->add_option("--spot", spot);
    price->add_option("--strike", strike);
    price->add_option("--expiry", expiry, "years");
    price->add_option("--sigma", sigma, "volatility (SABR: current volatility)");
    price->add_option("--rate", rate);
    price->add_option("--dividend", div);
    price->add_option("--vol-of-vol", vov, "SABR volatility of volatility");
    price->add_option("--rho", rho, "SABR price-volatility correlation");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "write simulated price paths as CSV");
    std::size_t sim_paths = 10;
    std::string sim_freq;
    simulate->add_option("--n-paths", sim_paths);
    simulate->add_option("--frequency", sim_freq);

    // train
    auto* train = app.add_subcommand("train", "train the learned policies of a configuration");
    std::string train_freq;
    train->add_option("--frequency", train_freq, "train one frequency only");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "evaluate policies and print reports as JSON");
    std::string eval_policy, eval_freq;
    evaluate->add_option("--policy", eval_policy, "evaluate one policy only");
    evaluate->add_option("--frequency", eval_freq);

    // compare / run
    auto* compare = app.add_subcommand("compare", "train, evaluate and write table.csv and report.json");
    compare->alias("run");

    // slice
    auto* slice = app.add_subcommand("slice", "policy action on a price x holding grid");
    std::string slice_policy = "delta", slice_freq;
    double tau_days = 10, lo = 90, hi = 110;
    std::size_t n_prices = 21, n_holdings = 11;
    slice->add_option("--policy", slice_policy);
    slice->add_option("--frequency", slice_freq);
    slice->add_option("--tau-days", tau_days, "time to maturity in trading days");
    slice->add_option("--price-min", lo);
    slice->add_option("--price-max", hi);
    slice->add_option("--n-prices", n_prices);
    slice->add_option("--n-holdings", n_holdings);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    g.seed_set = seed_opt->count() > 0;

    if (price->parsed()) {
        pricing::OptionSpec option{strike, expiry};
        pricing::RateSpec rates{rate, div};
        option.validate();
        rates.validate();
        const pricing::SabrParams sabr{sigma, vov, rho};
        json out = {{"bs_price", pricing::bs_price(spot, option, rates, sigma, expiry)},
                    {"bs_delta", pricing::bs_delta(spot, option, rates, sigma, expiry)},
                    {"sabr_implied_vol", pricing::sabr_implied_vol(spot, option, rates, sabr, expiry)},
                    {"sabr_price", pricing::sabr_price(spot, option, rates, sabr, expiry)},
                    {"practitioner_delta", pricing::practitioner_delta(spot, option, rates, sabr, expiry)},
                    {"bartlett_delta", pricing::bartlett_delta(spot, option, rates, sabr, expiry)}};
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    auto cfg = load(g);

    if (simulate->parsed()) {
        const auto env = cfg.env_for(pick_frequency(cfg, sim_freq));
        const auto paths = sim::simulate_batch(env.model, env.grid, sim_paths, cfg.evaluation.seed,
                                               cfg.evaluation.threads);
        if (g.out.empty()) {
            sim::write_paths_csv(std::cout, paths);
        } else {
            std::ofstream out(g.out);
            sim::write_paths_csv(out, paths);
        }
        return 0;
    }

    if (train->parsed()) {
        if (!cfg.training.enabled) cfg.training.enabled = true;
        for (const auto& f : cfg.frequencies) {
            if (!train_freq.empty() && f.label != train_freq) continue;
            const auto learned = eval::obtain_learned_policies(cfg, f, cfg.output_dir, &std::cerr);
            for (const auto& tp : learned) {
                const auto& last = tp.curve.empty() ? agents::LearningCurvePoint{} : tp.curve.back();
                std::cout << json{{"frequency", tp.frequency},   {"policy", tp.policy->label()},
                                  {"seed", tp.seed},             {"updates", tp.updates},
                                  {"validation_y0_pct", last.y0_pct}}
                                 .dump()
                          << '\n';
            }
        }
        return 0;
    }

    if (evaluate->parsed()) {
        json out = json::array();
        for (const auto& f : cfg.frequencies) {
            if (!eval_freq.empty() && f.label != eval_freq) continue;
            const auto env = cfg.env_for(f);
            for (const auto& p : policies_for(cfg, f, eval_policy)) {
                auto r = eval::evaluate_policy(*p, env, cfg.evaluation.n_paths, cfg.evaluation.seed, cfg.objective.c,
                                               cfg.evaluation.threads);
                json j = eval::to_json(r);
                j["frequency"] = f.label;
                out.push_back(j);
            }
        }
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (compare->parsed()) {
        const auto result = eval::run_experiment(cfg, cfg.output_dir, &std::cerr);
        std::cerr << "wrote " << (std::filesystem::path(cfg.output_dir) / "table.csv").string() << '\n';
        eval::write_table_csv(std::cout, result.rows);
        return 0;
    }

    if (slice->parsed()) {
        if (n_prices < 1 || n_holdings < 2 || !(hi >= lo)) throw ValidationError("slice grid is empty");
        const auto& f = pick_frequency(cfg, slice_freq);
        const auto env = cfg.env_for(f);
        const auto policy = policies_for(cfg, f, slice_policy).front();
        std::vector<double> prices, holdings;
        for (std::size_t i = 0; i < n_prices; ++i)
            prices.push_back(n_prices == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n_prices - 1.0));
        for (std::size_t j = 0; j < n_holdings; ++j) holdings.push_back(static_cast<double>(j) / (n_holdings - 1.0));
        const sim::ProcessSpec process = std::visit(
            [](const auto& m) -> sim::ProcessSpec {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, sim::MixtureSpec>) return m.components.front().model;
                else return m;
            },
            env.model);
        const auto s = eval::policy_slice(*policy, env, process, prices, holdings,
                                          tau_days / sim::kTradingDaysPerYear);
        if (g.out.empty()) {
            eval::write_slice_csv(std::cout, s);
        } else {
            std::ofstream out(g.out);
            eval::write_slice_csv(out, s);
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const rlhedge::eval::ConfigError& e) {
        std::cerr << json{{"error", e.kind_name()}, {"key", e.key()}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const rlhedge::ValidationError& e) {
        std::cerr << json{{"error", "invalid_value"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
}
