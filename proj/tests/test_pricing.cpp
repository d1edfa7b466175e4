#include <doctest.h>

#include <cmath>

#include "rlhedge/errors.hpp"
#include "rlhedge/pricing.hpp"

using namespace rlhedge;
using namespace rlhedge::pricing;

namespace {

double erf_series_cdf(double x) {
    // Maclaurin series of erf, summed until terms vanish; fine for |x| < 3.
    const double z = x / std::sqrt(2.0);
    double term = z, sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z * z / n;
        sum += term / (2 * n + 1);
    }
    return 0.5 + sum / std::sqrt(M_PI);
}

// General-beta lognormal implied volatility as originally published, evaluated
// here with beta = 1; written independently of the library's branch handling.
double hagan_general(double f, double k, double alpha, double beta, double nu, double rho, double t) {
    const double fk = f * k;
    const double omb = 1.0 - beta;
    const double log_fk = std::log(f / k);
    const double pre = std::pow(fk, omb / 2.0);
    const double denom = pre * (1.0 + omb * omb / 24.0 * log_fk * log_fk +
                                std::pow(omb, 4) / 1920.0 * std::pow(log_fk, 4));
    const double z = nu / alpha * pre * log_fk;
    double zx = 1.0;
    if (std::abs(z) > 1e-12) {
        const double xz = std::log((std::sqrt(1.0 - 2.0 * rho * z + z * z) + z - rho) / (1.0 - rho));
        zx = z / xz;
    }
    const double corr = 1.0 + (omb * omb / 24.0 * alpha * alpha / std::pow(fk, omb) +
                               rho * beta * nu * alpha / (4.0 * pre) + (2.0 - 3.0 * rho * rho) / 24.0 * nu * nu) *
                                  t;
    return alpha / denom * zx * corr;
}

struct ChainRule {
    double spot, strike, r, q, sigma0, nu, rho, tau;

    double value() const {
        const double f = spot * std::exp((r - q) * tau);
        const double phi = nu / sigma0 * std::log(f / strike);
        const double b = 1.0 + (rho * nu * sigma0 / 4.0 + (2.0 - 3.0 * rho * rho) * nu * nu / 24.0) * tau;
        const double db_dsigma = rho * nu * tau / 4.0;
        double g, dg;
        if (std::abs(phi) < 1e-9) {
            g = 1.0;
            dg = -rho / 2.0;
        } else {
            const double root = std::sqrt(1.0 - 2.0 * rho * phi + phi * phi);
            const double chi = std::log((root + phi - rho) / (1.0 - rho));
            g = phi / chi;
            dg = (chi - phi / root) / (chi * chi);
        }
        const double vol = sigma0 * b * g;
        const double dvol_df = b * dg * nu / f;
        const double dvol_dsigma = b * g + sigma0 * db_dsigma * g - b * dg * phi;
        const double sd = vol * std::sqrt(tau);
        const double d1 = (std::log(spot / strike) + (r - q + 0.5 * vol * vol) * tau) / sd;
        const double delta = std::exp(-q * tau) * 0.5 * std::erfc(-d1 / std::sqrt(2.0));
        const double vega = spot * std::exp(-q * tau) * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * M_PI) * std::sqrt(tau);
        return delta + vega * (dvol_df * f / spot + dvol_dsigma * rho * nu / spot);
    }
};

}  // namespace

TEST_CASE("pricing: normal CDF against a series oracle") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std_normal_cdf(0.2) == doctest::Approx(0.57926).epsilon(1e-5));
    for (double x = -2.5; x <= 2.5; x += 0.125) {
        CHECK(std::abs(std_normal_cdf(x) - erf_series_cdf(x)) <= 1e-10);
        CHECK(std::abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-15);
    }
}

TEST_CASE("pricing: Black-Scholes price and delta reference points") {
    const RateSpec rates{0.02, 0.0};
    CHECK(std::abs(bs_price(100, {100, 1}, rates, 0.2, 1.0) - 8.916) <= 1e-3);
    CHECK(std::abs(bs_delta(100, {100, 1}, rates, 0.2, 1.0) - 0.579) <= 1e-3);
    CHECK(std::abs(bs_delta(115, {100, 1}, rates, 0.2, 0.5) - 0.871) <= 1e-3);
    CHECK(std::abs(bs_delta(103.5, {100, 1}, rates, 0.2, 5.0 / 12.0) - 0.65) <= 0.01);
    // A 10% rise from 115 after one month evaluates to 0.974 with these inputs.
    const double up = bs_delta(126.5, {100, 1}, rates, 0.2, 5.0 / 12.0);
    const double d1 = (std::log(1.265) + (0.02 + 0.02) * 5.0 / 12.0) / (0.2 * std::sqrt(5.0 / 12.0));
    CHECK(up == doctest::Approx(erf_series_cdf(d1)).epsilon(1e-10));
    CHECK(up == doctest::Approx(0.974).epsilon(1e-3));
}

TEST_CASE("pricing: limits at zero maturity and zero volatility") {
    const RateSpec none{};
    CHECK(bs_price(120, {100, 1}, none, 0.2, 0.0) == 20.0);
    CHECK(bs_price(90, {100, 1}, none, 0.0, 1.0) == 0.0);
    CHECK(bs_delta(120, {100, 1}, none, 0.2, 0.0) == 1.0);
    CHECK(bs_delta(80, {100, 1}, none, 0.2, 0.0) == 0.0);
    CHECK(bs_delta(100, {100, 1}, none, 0.2, 0.0) == 0.5);
    CHECK_THROWS_AS(bs_price(-1, {100, 1}, none, 0.2, 1.0), ValidationError);
    CHECK_THROWS_AS(bs_price(100, {100, 1}, none, 0.2, -1.0), ValidationError);
    CHECK_THROWS_AS(bs_price(100, {100, 1}, none, -0.2, 1.0), ValidationError);
}

TEST_CASE("pricing: no-arbitrage bounds, vega sign and delta as a spot derivative") {
    for (double r : {0.0, 0.03}) {
        for (double q : {0.0, 0.01}) {
            const RateSpec rates{r, q};
            for (double s = 60; s <= 140; s += 10) {
                for (double tau : {0.01, 0.25, 1.0}) {
                    double prev = -1.0;
                    for (double sig = 0.05; sig <= 0.8; sig += 0.05) {
                        const double p = bs_price(s, {100, 1}, rates, sig, tau);
                        CHECK(p >= std::max(s * std::exp(-q * tau) - 100 * std::exp(-r * tau), 0.0) - 1e-12);
                        CHECK(p <= s * std::exp(-q * tau));
                        CHECK(p >= prev);
                        prev = p;
                    }
                    const double h = 1e-4 * s;
                    const double fd =
                        (bs_price(s + h, {100, 1}, rates, 0.2, tau) - bs_price(s - h, {100, 1}, rates, 0.2, tau)) /
                        (2 * h);
                    CHECK(std::abs(fd - bs_delta(s, {100, 1}, rates, 0.2, tau)) <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("pricing: Hagan implied volatility") {
    const double atm = hagan_implied_vol({100, 100, 0.2, 0.6, -0.4, 0.25});
    const double by_hand = 0.2 * (1 + (-0.4 * 0.6 * 0.2 / 4 + (2 - 3 * 0.16) * 0.36 / 24) * 0.25);
    CHECK(atm == doctest::Approx(by_hand).epsilon(1e-14));
    CHECK(atm == doctest::Approx(0.20054).epsilon(1e-5));

    for (double k : {60.0, 80.0, 95.0, 100.0, 105.0, 130.0, 200.0})
        CHECK(hagan_implied_vol({100, k, 0.3, 0.0, -0.4, 0.5}) == doctest::Approx(0.3).epsilon(1e-12));

    for (double f : {70.0, 90.0, 99.0, 101.0, 110.0, 150.0}) {
        for (double rho : {-0.7, -0.4, 0.0, 0.5}) {
            const double ours = hagan_implied_vol({f, 100, 0.2, 0.6, rho, 0.25});
            CHECK(ours == doctest::Approx(hagan_general(f, 100, 0.2, 1.0, 0.6, rho, 0.25)).epsilon(1e-12));
        }
    }

    for (double eps : {1e-8, -1e-8, 1e-9, -1e-9}) {
        const double near = hagan_implied_vol({100 * (1 + eps), 100, 0.2, 0.6, -0.4, 0.25});
        CHECK(std::abs(near - atm) <= 1e-6);
    }
    CHECK_THROWS_AS(hagan_implied_vol({110, 100, 0.2, 0.6, 1.0, 0.25}), ValidationError);
    CHECK_THROWS_AS(sabr_price(100, {100, 1}, {}, {0.2, 0.6, 1.0}, 0.25), ValidationError);
}

TEST_CASE("pricing: SABR price and practitioner delta") {
    const OptionSpec opt{100, 1};
    const RateSpec rates{0.01, 0.0};
    for (double s : {80.0, 100.0, 125.0}) {
        const double bs = bs_price(s, opt, rates, 0.25, 0.3);
        CHECK(std::abs(sabr_price(s, opt, rates, {0.25, 0.0, -0.4}, 0.3) - bs) <= 1e-12 * bs);
        CHECK(practitioner_delta(s, opt, rates, {0.25, 0.0, -0.4}, 0.3) ==
              doctest::Approx(bs_delta(s, opt, rates, 0.25, 0.3)).epsilon(1e-14));
    }
    const double tau = 1.0 / 12.0;
    const double vol = hagan_implied_vol({100, 100, 0.2, 0.6, -0.4, tau});
    CHECK(sabr_price(100, opt, {}, {0.2, 0.6, -0.4}, tau) == doctest::Approx(bs_price(100, opt, {}, vol, tau)));
    CHECK(sabr_price(120, opt, {}, {0.2, 0.6, -0.4}, 0.0) == 20.0);

    CHECK(practitioner_delta(100, opt, {}, {0.2, 0.6, -0.4}, 0.25) == doctest::Approx(0.5200).epsilon(1e-4));
    double prev = 0.0;
    for (double s = 70; s <= 130; s += 1) {
        const double d = practitioner_delta(s, opt, {}, {0.2, 0.6, -0.4}, 0.25);
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("pricing: Bartlett delta reductions and chain-rule oracle") {
    const OptionSpec opt{100, 1};
    for (double s : {85.0, 100.0, 112.0}) {
        for (double tau : {1.0 / 52, 0.25, 1.0}) {
            CHECK(std::abs(bartlett_delta(s, opt, {0.02, 0.0}, {0.2, 0.0, -0.4}, tau) -
                           bs_delta(s, opt, {0.02, 0.0}, 0.2, tau)) <= 1e-8);
            const SabrParams flat{0.2, 0.6, 0.0};
            const double h = 1e-4 * s;
            const auto v = [&](double x) { return sabr_price(x, opt, {}, flat, tau); };
            // Same five-point stencil as the library, spot bumped alone.
            const double fd = (8 * (v(s + h) - v(s - h)) - (v(s + 2 * h) - v(s - 2 * h))) / (12 * h);
            CHECK(std::abs(bartlett_delta(s, opt, {}, flat, tau) - fd) <= 1e-8);
        }
    }
    for (double s : {90.0, 100.0, 110.0}) {
        for (double rho : {-0.4, 0.3}) {
            const ChainRule oracle{s, 100, 0.01, 0.0, 0.2, 0.6, rho, 0.25};
            CHECK(std::abs(bartlett_delta(s, opt, {0.01, 0.0}, {0.2, 0.6, rho}, 0.25) - oracle.value()) <= 1e-5);
        }
    }
    // Negative correlation lowers the hedge relative to the practitioner delta near the money.
    CHECK(bartlett_delta(100, opt, {}, {0.2, 0.6, -0.4}, 0.25) < practitioner_delta(100, opt, {}, {0.2, 0.6, -0.4}, 0.25));
}
