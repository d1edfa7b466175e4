#include "rlhedge/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rlhedge/errors.hpp"

namespace rlhedge::pricing {

namespace {

constexpr double kAtmLogMoneyness = 1e-8;
constexpr double kSeriesPhi = 1e-6;

void check_inputs(double spot, double sigma, double tau) {
    require(std::isfinite(spot) && spot > 0.0, "spot must be > 0");
    require(std::isfinite(tau) && tau >= 0.0, "tau must be >= 0");
    require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be >= 0");
}

void check_sabr(const SabrParams& sabr) {
    require(std::isfinite(sabr.sigma0) && sabr.sigma0 > 0.0, "sabr.sigma0 must be > 0");
    require(std::isfinite(sabr.vol_of_vol) && sabr.vol_of_vol >= 0.0, "sabr.vol_of_vol must be >= 0");
    require(std::isfinite(sabr.rho) && sabr.rho >= -1.0 && sabr.rho < 1.0, "sabr.rho must lie in [-1, 1)");
}

}  // namespace

void OptionSpec::validate() const {
    require(std::isfinite(strike) && strike > 0.0, "option.strike must be > 0");
    require(std::isfinite(expiry) && expiry > 0.0, "option.expiry must be > 0");
}

void RateSpec::validate() const {
    require(std::isfinite(risk_free), "rates.risk_free must be finite");
    require(std::isfinite(dividend_yield), "rates.dividend_yield must be finite");
}

double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_price(double spot, const OptionSpec& option, const RateSpec& rates, double sigma, double tau) {
    check_inputs(spot, sigma, tau);
    const double K = option.strike;
    if (tau == 0.0) return std::max(spot - K, 0.0);

    const double disc_spot = spot * std::exp(-rates.dividend_yield * tau);
    const double disc_strike = K * std::exp(-rates.risk_free * tau);
    const double sd = sigma * std::sqrt(tau);
    if (sd == 0.0) return std::max(disc_spot - disc_strike, 0.0);

    const double d1 = (std::log(spot / K) + (rates.risk_free - rates.dividend_yield + 0.5 * sigma * sigma) * tau) / sd;
    const double d2 = d1 - sd;
    return disc_spot * std_normal_cdf(d1) - disc_strike * std_normal_cdf(d2);
}

double bs_delta(double spot, const OptionSpec& option, const RateSpec& rates, double sigma, double tau) {
    check_inputs(spot, sigma, tau);
    const double K = option.strike;
    const double carry = std::exp(-rates.dividend_yield * tau);
    const double sd = sigma * std::sqrt(tau);
    if (sd == 0.0) {
        const double forward_gap = spot * carry - K * std::exp(-rates.risk_free * tau);
        if (forward_gap > 0.0) return carry;
        if (forward_gap < 0.0) return 0.0;
        return 0.5 * carry;
    }
    const double d1 = (std::log(spot / K) + (rates.risk_free - rates.dividend_yield + 0.5 * sigma * sigma) * tau) / sd;
    return carry * std_normal_cdf(d1);
}

double hagan_implied_vol(const ImpliedVolInputs& in) {
    require(std::isfinite(in.forward) && in.forward > 0.0, "forward must be > 0");
    require(std::isfinite(in.strike) && in.strike > 0.0, "strike must be > 0");
    require(std::isfinite(in.tau) && in.tau >= 0.0, "tau must be >= 0");
    check_sabr({in.sigma0, in.vol_of_vol, in.rho});

    const double s0 = in.sigma0, v = in.vol_of_vol, rho = in.rho;
    const double B = 1.0 + (rho * v * s0 / 4.0 + (2.0 - 3.0 * rho * rho) * v * v / 24.0) * in.tau;
    const double log_moneyness = std::log(in.forward / in.strike);
    if (std::fabs(log_moneyness) < kAtmLogMoneyness) return s0 * B;

    const double phi = v / s0 * log_moneyness;
    double ratio;  // phi / chi
    if (std::fabs(phi) < kSeriesPhi) {
        ratio = 1.0 - 0.5 * rho * phi + (1.0 / 6.0 - 0.25 * rho * rho) * phi * phi;
    } else {
        const double chi = std::log((std::sqrt(1.0 - 2.0 * rho * phi + phi * phi) + phi - rho) / (1.0 - rho));
        ratio = phi / chi;
    }
    return s0 * B * ratio;
}

double sabr_implied_vol(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr,
                        double tau) {
    const double forward = spot * std::exp((rates.risk_free - rates.dividend_yield) * tau);
    return hagan_implied_vol({forward, option.strike, sabr.sigma0, sabr.vol_of_vol, sabr.rho, tau});
}

double sabr_price(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr, double tau) {
    check_inputs(spot, 0.0, tau);
    check_sabr(sabr);
    if (tau == 0.0) return std::max(spot - option.strike, 0.0);
    return bs_price(spot, option, rates, sabr_implied_vol(spot, option, rates, sabr, tau), tau);
}

double practitioner_delta(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr,
                          double tau) {
    check_inputs(spot, 0.0, tau);
    check_sabr(sabr);
    if (tau == 0.0) return bs_delta(spot, option, rates, 0.0, 0.0);
    return bs_delta(spot, option, rates, sabr_implied_vol(spot, option, rates, sabr, tau), tau);
}

double bartlett_delta(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr,
                      double tau) {
    check_inputs(spot, 0.0, tau);
    check_sabr(sabr);
    if (tau == 0.0) return bs_delta(spot, option, rates, 0.0, 0.0);

    const double h = 1e-4 * spot;
    const double vol_per_spot = sabr.rho * sabr.vol_of_vol / spot;
    auto bumped = [&](double steps) {
        SabrParams moved = sabr;
        moved.sigma0 = sabr.sigma0 + steps * h * vol_per_spot;
        return sabr_price(spot + steps * h, option, rates, moved, tau);
    };
    return (-bumped(2.0) + 8.0 * bumped(1.0) - 8.0 * bumped(-1.0) + bumped(-2.0)) / (12.0 * h);
}

}  // namespace rlhedge::pricing
