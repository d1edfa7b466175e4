#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rlhedge/errors.hpp"
#include "rlhedge/hedging_env.hpp"

using namespace rlhedge;
using namespace rlhedge::env;

namespace {

EnvConfig one_month(const sim::MarketModel& model, double kappa, Formulation f, PricerChoice pricer = {}) {
    EnvConfig c;
    c.option = {100.0, 21.0 / 252.0};
    c.model = model;
    c.grid = sim::PathGrid::from_days(21, 1);
    c.kappa = kappa;
    c.formulation = f;
    c.pricer = pricer;
    return c;
}

template <typename ActionFn>
double run(Episode ep, ActionFn&& action) {
    while (!ep.terminal()) ep.step(action(ep));
    return ep.total_cost();
}

}  // namespace

TEST_CASE("hedging_env: single-period reward arithmetic") {
    const double acc = accounting_reward(-9.0, -9.5, 0.58, 100.0, 101.0, 0.60, 0.01);
    CHECK(acc == doctest::Approx(0.0598).epsilon(1e-12));
    const double cf = cashflow_reward(101.0, 0.60, 0.58, 0.01);
    CHECK(cf == doctest::Approx(1.9998).epsilon(1e-12));
    CHECK(payoff(120, {100, 1}) == 20.0);
    CHECK(payoff(80, {100, 1}) == 0.0);
}

TEST_CASE("hedging_env: holding the forward replicates a zero-strike claim at no cost") {
    EnvConfig c = one_month(sim::GbmSpec{100, 0.05, 0.3}, 0.0, Formulation::accounting);
    c.option.strike = 1e-9;
    for (int p = 0; p < 50; ++p) {
        auto ep = Episode::from_substream(c, 3, p);
        while (!ep.terminal()) {
            const auto out = ep.step(1.0);
            CHECK(std::abs(out.cost) <= 1e-9);
        }
    }
}

TEST_CASE("hedging_env: never hedging costs the payoff (cash flow) or payoff minus premium (accounting)") {
    const sim::GbmSpec gbm{100, 0.05, 0.2};
    for (int p = 0; p < 200; ++p) {
        auto cf = Episode::from_substream(one_month(gbm, 0.01, Formulation::cashflow), 5, p);
        const double payoff_n = payoff(cf.path().prices.back(), cf.config().option);
        CHECK(run(cf, [](const Episode&) { return 0.0; }) == doctest::Approx(payoff_n).epsilon(1e-12));

        auto acc = Episode::from_substream(one_month(gbm, 0.0, Formulation::accounting), 5, p);
        const double premium = acc.premium();
        CHECK(std::abs(run(acc, [](const Episode&) { return 0.0; }) - (payoff_n - premium)) <= 1e-12 * (1 + premium));
    }
}

TEST_CASE("hedging_env: accounting minus cash-flow totals equals the initial short-option value") {
    const sim::MarketModel models[] = {sim::GbmSpec{100, 0.05, 0.2}, sim::SabrSpec{100, 0.05, 0.2, 0.6, -0.4}};
    for (const auto& model : models) {
        for (const auto pricer : {PricerChoice::matched(), PricerChoice::constant_vol(0.25)}) {
            for (int p = 0; p < 300; ++p) {
                auto acc = Episode::from_substream(one_month(model, 0.01, Formulation::accounting, pricer), 9, p);
                auto cf = Episode::from_substream(one_month(model, 0.01, Formulation::cashflow, pricer), 9, p);
                auto actions = CounterRng::substream(77, p);
                while (!acc.terminal()) {
                    const double a = actions.uniform();
                    acc.step(a);
                    cf.step(a);
                }
                const double diff = acc.total_cost() - cf.total_cost();
                CHECK(std::abs(diff - acc.short_option_value(0)) <= 1e-9 * acc.premium());
                CHECK(acc.short_option_value(0) == -acc.premium());
            }
        }
    }
}

TEST_CASE("hedging_env: premium follows the pricer and the option marks pin to the payoff") {
    const auto c = one_month(sim::GbmSpec{100, 0.0, 0.2}, 0.01, Formulation::accounting);
    const auto ep = Episode::from_substream(c, 1, 0);
    CHECK(ep.premium() == doctest::Approx(pricing::bs_price(100, c.option, {}, 0.2, c.option.expiry)));
    CHECK(ep.short_option_value(c.grid.n_steps) == -payoff(ep.path().prices.back(), c.option));

    const auto s = one_month(sim::SabrSpec{100, 0.0, 0.2, 0.6, -0.4}, 0.01, Formulation::accounting);
    const auto es = Episode::from_substream(s, 1, 0);
    CHECK(es.premium() == doctest::Approx(pricing::sabr_price(100, s.option, {}, {0.2, 0.6, -0.4}, s.option.expiry)));
}

TEST_CASE("hedging_env: total cost is affine in the trading-cost rate") {
    for (const auto f : {Formulation::accounting, Formulation::cashflow}) {
        double totals[3];
        for (int k = 0; k < 3; ++k) {
            auto ep = Episode::from_substream(one_month(sim::GbmSpec{}, 0.01 * k, f), 4, 2);
            auto actions = CounterRng::substream(5, 5);
            totals[k] = run(ep, [&](const Episode&) { return actions.uniform(); });
        }
        CHECK((totals[2] - totals[1]) == doctest::Approx(totals[1] - totals[0]).epsilon(1e-9));
        CHECK(totals[1] > totals[0]);
    }
}

TEST_CASE("hedging_env: frictionless daily delta hedging has zero expected cost under risk neutrality") {
    const auto c = one_month(sim::GbmSpec{100, 0.0, 0.2}, 0.0, Formulation::accounting);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int p = 0; p < n; ++p) {
        const double x = run(Episode::from_substream(c, 12, p), [&](const Episode& ep) {
            return pricing::bs_delta(ep.state().price, c.option, c.rates, 0.2, ep.state().tau);
        });
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("hedging_env: state, clamping and lifecycle errors") {
    auto ep = Episode::from_substream(one_month(sim::GbmSpec{}, 0.01, Formulation::accounting), 1, 0);
    CHECK(ep.state().holding_prev == 0.0);
    CHECK(ep.state().price == 100.0);
    CHECK(ep.state().tau == doctest::Approx(21.0 / 252.0));
    CHECK_THROWS_AS(ep.total_cost(), StateError);
    CHECK_THROWS_AS(ep.step(std::nan("")), ValidationError);

    auto out = ep.step(1.7);
    CHECK(out.next_state.holding_prev == 1.0);
    CHECK(ep.clamp_count() == 1);
    out = ep.step(-0.2);
    CHECK(out.next_state.holding_prev == 0.0);
    CHECK(ep.clamp_count() == 2);
    CHECK(out.next_state.tau == doctest::Approx(19.0 / 252.0));
    while (!ep.terminal()) out = ep.step(0.5);
    CHECK(out.terminal);
    CHECK(out.next_state.tau == 0.0);
    CHECK_NOTHROW(ep.total_cost());
    CHECK_THROWS_AS(ep.step(0.5), StateError);
}

TEST_CASE("hedging_env: discounting and invalid configurations") {
    auto c = one_month(sim::GbmSpec{}, 0.01, Formulation::cashflow);
    c.gamma = 0.9;
    auto ep = Episode::from_substream(c, 2, 3);
    double expected = 0.0, disc = 1.0;
    while (!ep.terminal()) {
        expected += disc * ep.step(0.3).cost;
        disc *= 0.9;
    }
    CHECK(ep.total_cost() == doctest::Approx(expected).epsilon(1e-13));

    auto bad = c;
    bad.kappa = -1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.grid.expiry = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("hedging_env: trace rows and CSV") {
    auto ep = Episode::from_substream(one_month(sim::SabrSpec{100, 0, 0.2, 0.6, -0.4}, 0.01, Formulation::accounting), 1, 1);
    ep.enable_trace(true);
    while (!ep.terminal()) ep.step(0.5);
    REQUIRE(ep.trace().size() == 22);
    CHECK(ep.trace().front().vol == 0.2);
    std::ostringstream out;
    write_trace_csv(out, ep.trace());
    CHECK(out.str().rfind("step,price,vol,holding,cost,option_value\n", 0) == 0);
}
