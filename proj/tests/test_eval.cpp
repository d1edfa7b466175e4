#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlhedge/eval/config.hpp"
#include "rlhedge/eval/evaluate.hpp"
#include "rlhedge/eval/experiment.hpp"
#include "rlhedge/eval/report.hpp"

using namespace rlhedge;
using namespace rlhedge::eval;
using nlohmann::json;

namespace {

env::EnvConfig daily_gbm(double mu = 0.05, double kappa = 0.01, env::Formulation f = env::Formulation::accounting) {
    env::EnvConfig e;
    e.option = {100.0, 21.0 / 252.0};
    e.model = sim::GbmSpec{100.0, mu, 0.2};
    e.grid = sim::PathGrid::from_days(21, 1);
    e.kappa = kappa;
    e.formulation = f;
    return e;
}

json minimal_config() {
    return json::parse(R"({
        "market": {"model": "gbm", "mu": 0.05, "sigma": 0.2},
        "option": {"strike": 100, "maturity_days": 21},
        "hedging": {"kappa": 0.01, "frequencies": ["weekly", "daily"]},
        "objective": {"c": 1.5},
        "evaluation": {"n_paths": 3000, "seed": 11, "policies": ["delta", "no_hedge"]}
    })");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rlhedge_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("summarize: sample moments, Y(0) identity and standard errors") {
    const std::vector<double> x = {90, 110, 130, 70, 100, 125};
    const auto r = summarize("p", x, 1.5, 3);
    double mean = 0;
    for (double v : x) mean += v;
    mean /= x.size();
    double ss = 0, m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - mean;
        ss += d * d;
        m2 += d * d / x.size();
        m3 += d * d * d / x.size();
        m4 += d * d * d * d / x.size();
    }
    const double sd = std::sqrt(ss / (x.size() - 1));
    CHECK(r.mean_cost_pct == doctest::Approx(mean).epsilon(1e-14));
    CHECK(r.sd_cost_pct == doctest::Approx(sd).epsilon(1e-14));
    CHECK(std::abs(r.y0_pct - (r.mean_cost_pct + 1.5 * r.sd_cost_pct)) <= 1e-12 * r.y0_pct);
    CHECK(r.se_mean == doctest::Approx(sd / std::sqrt(6.0)).epsilon(1e-12));
    const double n = 6.0;
    const double var_sd = (m4 - m2 * m2) / (4 * m2 * n);
    CHECK(r.se_sd == doctest::Approx(std::sqrt(var_sd)).epsilon(1e-6));
    const double cov = m3 / (2 * std::sqrt(m2) * n);
    CHECK(r.se_y0 == doctest::Approx(std::sqrt(r.se_mean * r.se_mean + 2.25 * var_sd + 3.0 * cov)).epsilon(1e-6));
    CHECK(r.seed == 3);
    CHECK_THROWS_AS(summarize("p", std::vector<double>{1.0}, 1.5), ValidationError);
}

TEST_CASE("evaluate: never hedging without costs prices the option") {
    const auto e = daily_gbm(0.0, 0.0, env::Formulation::cashflow);
    const auto r = evaluate_policy(agents::NoHedgePolicy(), e, 100000, 5, 1.5);
    CHECK(std::abs(r.mean_cost_pct - 100.0) < 4.0 * r.se_mean);
    CHECK(r.sd_cost_pct > 0.0);
    CHECK_THROWS_AS(evaluate_policy(agents::NoHedgePolicy(), e, 1, 5, 1.5), ValidationError);
}

TEST_CASE("evaluate: determinism, thread independence and standard-error scaling") {
    const auto e = daily_gbm();
    const auto a = evaluate_policy(agents::DeltaBsPolicy(), e, 4000, 9, 1.5, 1);
    const auto b = evaluate_policy(agents::DeltaBsPolicy(), e, 4000, 9, 1.5, 2);
    CHECK(a == b);
    const auto big = evaluate_policy(agents::DeltaBsPolicy(), e, 16000, 9, 1.5);
    CHECK(a.se_mean / big.se_mean == doctest::Approx(2.0).epsilon(0.1));
    CHECK(a.se_sd / big.se_sd == doctest::Approx(2.0).epsilon(0.15));
    CHECK(a.se_y0 / big.se_y0 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("report: JSON round trip is exact") {
    const auto r = evaluate_policy(agents::DeltaBsPolicy(), daily_gbm(), 500, 1, 1.5);
    CHECK(report_from_json(json::parse(to_json(r).dump())) == r);
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("compare: paired evaluation and zero self-improvement") {
    const std::vector<FrequencyCase> cases = {
        {"daily", daily_gbm(), {agents::make_baseline_policy(agents::PolicyKind::delta_bs),
                                agents::make_baseline_policy(agents::PolicyKind::no_hedge)}}};
    const std::vector<std::string> base = {"delta"};
    const auto rows = compare(cases, base, 2000, 4, 1.5);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].improvement_vs("delta", "delta") == 0.0);
    CHECK(rows[0].report("delta").path_checksum == rows[0].report("no_hedge").path_checksum);
    const double expect = improvement_pct(rows[0].report("delta"), rows[0].report("no_hedge"));
    CHECK(rows[0].improvement_vs("no_hedge", "delta") == expect);

    std::ostringstream out;
    write_table_csv(out, rows);
    CHECK(out.str().rfind("frequency,policy,mean_cost_pct,sd_cost_pct,y0_pct,improvement_vs_delta_pct,se_mean,se_sd,"
                          "n_paths,seed\n",
                          0) == 0);

    const std::vector<FrequencyCase> single = {{"daily", daily_gbm(), {cases[0].policies[0]}}};
    CHECK_THROWS_AS(compare(single, base, 100, 1, 1.5), ValidationError);
}

TEST_CASE("slice: delta ignores the holding and no-hedge is flat zero") {
    const auto e = daily_gbm();
    const std::vector<double> prices = {90, 95, 100, 105, 110}, holdings = {0.0, 0.25, 0.5, 0.75, 1.0};
    const auto process = sim::ProcessSpec(sim::GbmSpec{100, 0.05, 0.2});
    const auto d = policy_slice(agents::DeltaBsPolicy(), e, process, prices, holdings, 10.0 / 252.0);
    REQUIRE(d.actions.size() == 25);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        for (std::size_t j = 0; j < holdings.size(); ++j) CHECK(d.actions[i * 5 + j] == d.actions[i * 5]);
        CHECK(d.actions[i * 5] == doctest::Approx(d.delta[i]));
    }
    const auto z = policy_slice(agents::NoHedgePolicy(), e, process, prices, holdings, 10.0 / 252.0);
    for (double a : z.actions) CHECK(a == 0.0);
    std::ostringstream out;
    write_slice_csv(out, z);
    CHECK(out.str().rfind("price,bs_delta,h=0,h=0.25,h=0.5,h=0.75,h=1\n", 0) == 0);
}

TEST_CASE("config: parsing, defaults and strict key checking") {
    const auto cfg = parse_run_config(minimal_config());
    CHECK(cfg.frequencies.size() == 2);
    CHECK(cfg.frequencies[0].days == 5.0);
    CHECK(cfg.env_for(cfg.frequencies[0]).grid.n_steps == 4);
    CHECK(cfg.env_for(cfg.frequencies[1]).grid.n_steps == 21);
    CHECK(cfg.option.expiry == doctest::Approx(21.0 / 252.0));
    CHECK(cfg.evaluation.baselines == std::vector<std::string>{"delta"});
    CHECK_FALSE(cfg.wants_rl());
    CHECK(parse_run_config(to_json(cfg)).evaluation.n_paths == 3000);

    CHECK(parse_frequency("3day").days == 3.0);
    CHECK_THROWS_AS(parse_frequency("hourly"), ValidationError);

    auto missing = minimal_config();
    missing["option"].erase("strike");
    try {
        parse_run_config(missing);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::missing_key);
        CHECK(e.key() == "option.strike");
    }

    auto typo = minimal_config();
    typo["hedging"]["kapa"] = 0.02;
    try {
        parse_run_config(typo);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::unknown_key);
        CHECK(e.key() == "hedging.kapa");
    }

    auto bad = minimal_config();
    bad["hedging"]["kappa"] = -0.5;
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    bad = minimal_config();
    bad["evaluation"]["policies"] = json::array({"delta", "gamma"});
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("experiment: reruns write byte-identical tables") {
    auto cfg = parse_run_config(minimal_config());
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    run_experiment(cfg, a.string());
    cfg.evaluation.threads = 2;
    run_experiment(cfg, b.string());
    const auto ta = slurp(a / "table.csv");
    CHECK_FALSE(ta.empty());
    CHECK(ta == slurp(b / "table.csv"));
    const auto report = json::parse(slurp(a / "report.json"));
    CHECK(report.contains("input_hash"));
    CHECK(report["rows"].size() == 2);
}

TEST_CASE("cli: configuration errors exit with status 2 and name the key") {
    const auto dir = scratch("cli");
    auto doc = minimal_config();
    doc["objective"].erase("c");
    {
        std::ofstream(dir / "bad.json") << doc.dump();
    }
    const auto err = dir / "err.txt";
    const std::string cmd = std::string(RLHEDGE_CLI_PATH) + " --config " + (dir / "bad.json").string() +
                            " evaluate 2> " + err.string() + " > /dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 2);
    const auto j = json::parse(slurp(err));
    CHECK(j["error"] == "missing_key");
    CHECK(j["key"] == "objective.c");

    const std::string price = std::string(RLHEDGE_CLI_PATH) + " price --spot 100 --strike 100 --expiry 1 --rate 0.02 > " +
                              (dir / "price.json").string();
    REQUIRE(std::system(price.c_str()) == 0);
    const auto p = json::parse(slurp(dir / "price.json"));
    CHECK(p["bs_price"].get<double>() == doctest::Approx(8.916).epsilon(1e-4));
}
