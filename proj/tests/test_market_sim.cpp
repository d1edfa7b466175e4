#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rlhedge/errors.hpp"
#include "rlhedge/market_sim.hpp"

using namespace rlhedge;
using namespace rlhedge::sim;

TEST_CASE("market_sim: grid validation and day-count conversion") {
    CHECK_THROWS_AS(PathGrid({0.0, 4}).validate(), ValidationError);
    CHECK_THROWS_AS(PathGrid({1.0, 0}).validate(), ValidationError);
    const auto g = PathGrid::from_days(21, 5);
    CHECK(g.n_steps == 4);
    CHECK(g.expiry == doctest::Approx(21.0 / 252.0));
    CHECK(std::abs(g.dt() * g.n_steps - g.expiry) <= 1e-12 * g.expiry);
    CHECK(PathGrid::from_days(21, 3).n_steps == 7);
    CHECK(PathGrid::from_days(21, 2).n_steps == 11);
    CHECK(PathGrid::from_days(21, 1).n_steps == 21);
    CHECK(PathGrid::from_days(63, 5).n_steps == 13);
    CHECK(PathGrid::from_days(63, 2).n_steps == 32);
    CHECK(g.tau_at(g.n_steps) == 0.0);
}

TEST_CASE("market_sim: zero-volatility GBM equals the deterministic exponential") {
    CounterRng rng(1);
    const auto p = simulate_gbm_path({100.0, 0.05, 0.0}, {1.0, 4}, rng);
    REQUIRE(p.prices.size() == 5);
    CHECK_FALSE(p.has_vols());
    const double expected[] = {100.0, 101.25784515406, 102.53151205244, 103.82119970818, 105.12710963760};
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(p.prices[i] - 100.0 * std::exp(0.05 * 0.25 * i)) <= 1e-12 * p.prices[i]);
        CHECK(p.prices[i] == doctest::Approx(expected[i]).epsilon(1e-11));
    }
}

TEST_CASE("market_sim: same seed reproduces a path bit for bit") {
    CounterRng a(99), b(99);
    const auto p = simulate_gbm_path({100.0, 0.05, 0.2}, {1.0, 50}, a);
    const auto q = simulate_gbm_path({100.0, 0.05, 0.2}, {1.0, 50}, b);
    CHECK(p.prices == q.prices);
}

TEST_CASE("market_sim: invalid specs name the offending field") {
    CounterRng rng(1);
    try {
        simulate_gbm_path({-1.0, 0.0, 0.2}, {1.0, 4}, rng);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("s0") != std::string::npos);
    }
    CHECK_THROWS_AS(simulate_gbm_path({100.0, 0.0, -0.1}, {1.0, 4}, rng), ValidationError);
    CHECK_THROWS_AS(simulate_sabr_path({100.0, 0.0, 0.2, -0.1, 0.0}, {1.0, 4}, rng), ValidationError);
    CHECK_THROWS_AS(simulate_sabr_path({100.0, 0.0, 0.2, 0.3, 1.5}, {1.0, 4}, rng), ValidationError);
    CHECK_THROWS_AS(simulate_sabr_path({100.0, 0.0, 0.0, 0.3, 0.0}, {1.0, 4}, rng), ValidationError);
}

TEST_CASE("market_sim: GBM terminal mean matches S0 exp(mu T) over 1e6 paths") {
    const GbmSpec spec{100.0, 0.05, 0.2};
    const PathGrid grid{1.0, 1};
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        auto rng = CounterRng::substream(17, i);
        const double s = simulate_gbm_path(spec, grid, rng).prices.back();
        sum += s;
        sq += s * s;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 100.0 * std::exp(0.05)) < 3.0 * se);
}

TEST_CASE("market_sim: GBM log-increments have the lognormal mean and variance") {
    const double mu = 0.05, sigma = 0.2;
    const PathGrid grid{1.0, 100};
    const double dt = grid.dt();
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (int p = 0; p < 10000; ++p) {
        auto rng = CounterRng::substream(23, p);
        const auto path = simulate_gbm_path({100.0, mu, sigma}, grid, rng);
        for (int i = 0; i < grid.n_steps; ++i) {
            const double x = std::log(path.prices[i + 1] / path.prices[i]);
            sum += x;
            sq += x * x;
            ++n;
        }
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double true_var = sigma * sigma * dt;
    CHECK(std::abs(mean - (mu - 0.5 * sigma * sigma) * dt) < 4.0 * std::sqrt(true_var / n));
    CHECK(std::abs(var - true_var) < 4.0 * true_var * std::sqrt(2.0 / n));
}

TEST_CASE("market_sim: SABR with zero vol-of-vol reproduces the GBM path") {
    CounterRng a(5), b(5);
    const PathGrid grid{0.25, 63};
    const auto sabr = simulate_sabr_path({100.0, 0.05, 0.2, 0.0, -0.4}, grid, a);
    const auto gbm = simulate_gbm_path({100.0, 0.05, 0.2}, grid, b);
    REQUIRE(sabr.vols.size() == 64);
    for (int i = 0; i <= grid.n_steps; ++i) {
        CHECK(sabr.vols[i] == 0.2);
        CHECK(std::abs(sabr.prices[i] - gbm.prices[i]) <= 1e-12 * gbm.prices[i]);
    }
}

TEST_CASE("market_sim: SABR price/vol increments have correlation rho") {
    const double rho = -0.4;
    const PathGrid grid{1.0, 100};
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t n = 0;
    for (int p = 0; p < 10000; ++p) {
        auto rng = CounterRng::substream(31, p);
        const auto path = simulate_sabr_path({100.0, 0.0, 0.2, 0.6, rho}, grid, rng);
        for (int i = 0; i < grid.n_steps; ++i) {
            // Standardise by the period-start vol so increments are exactly the shocks.
            const double dt = grid.dt();
            const double x = (std::log(path.prices[i + 1] / path.prices[i]) + 0.5 * path.vols[i] * path.vols[i] * dt) /
                             (path.vols[i] * std::sqrt(dt));
            const double y = std::log(path.vols[i + 1] / path.vols[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            ++n;
        }
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    const double se = (1.0 - rho * rho) / std::sqrt(double(n));
    CHECK(std::abs(corr - rho) < 3.0 * se);
}

TEST_CASE("market_sim: SABR volatility is a driftless martingale") {
    const PathGrid grid{0.25, 1};
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        auto rng = CounterRng::substream(41, i);
        const double v = simulate_sabr_path({100.0, 0.0, 0.2, 0.6, -0.4}, grid, rng).vols.back();
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.2) < 3.0 * se);
}

TEST_CASE("market_sim: mixture selection frequencies") {
    MixtureSpec single{{{1.0, GbmSpec{100, 0, 0.3}}}};
    CounterRng rng(3);
    for (int i = 0; i < 1000; ++i) CHECK(std::get<GbmSpec>(sample_mixture(single, rng)).sigma == 0.3);

    MixtureSpec half{{{0.5, GbmSpec{100, 0, 0.1}}, {0.5, SabrSpec{100, 0, 0.2, 0.5, 0.0}}}};
    int gbm = 0;
    for (int i = 0; i < 100000; ++i) gbm += std::holds_alternative<GbmSpec>(sample_mixture(half, rng)) ? 1 : 0;
    CHECK(std::abs(gbm / 100000.0 - 0.5) < 0.01);

    MixtureSpec zero{{{0.0, GbmSpec{100, 0, 0.1}}, {1.0, GbmSpec{100, 0, 0.4}}}};
    for (int i = 0; i < 100000; ++i) REQUIRE(std::get<GbmSpec>(sample_mixture(zero, rng)).sigma == 0.4);

    CHECK_THROWS_AS(sample_mixture(MixtureSpec{}, rng), ValidationError);
    CHECK_THROWS_AS(validate(MarketModel(MixtureSpec{{{0.7, GbmSpec{}}, {0.2, GbmSpec{}}}})), ValidationError);
}

TEST_CASE("market_sim: batches are deterministic and independent of thread count") {
    const MarketModel model = SabrSpec{100.0, 0.05, 0.2, 0.6, -0.4};
    const PathGrid grid{21.0 / 252.0, 21};
    const auto a = simulate_batch(model, grid, 257, 8, 1);
    const auto b = simulate_batch(model, grid, 257, 8, 4);
    REQUIRE(a.size() == 257);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].prices == b[i].prices);
        CHECK(a[i].vols == b[i].vols);
    }
    auto rng = CounterRng::substream(8, 0);
    const auto single = simulate_path(model, grid, rng);
    CHECK(single.path.prices == a[0].prices);
    const auto other = simulate_batch(model, grid, 1, 9, 1);
    CHECK(other[0].prices != a[0].prices);
}

TEST_CASE("market_sim: path CSV layout") {
    CounterRng rng(1);
    std::vector<PricePath> paths{simulate_gbm_path({100.0, 0.0, 0.2}, {1.0, 2}, rng)};
    std::ostringstream out;
    write_paths_csv(out, paths);
    const auto text = out.str();
    CHECK(text.rfind("path_id,step,price,vol\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find("0,0,100,\n") != std::string::npos);
}
