#pragma once

// Closed-form valuation of a European call: Black-Scholes-Merton price and
// delta, Hagan's SABR (beta = 1) implied-volatility expansion, and the two
// SABR hedge ratios (practitioner and Bartlett).

namespace rlhedge::pricing {

struct OptionSpec {
    double strike = 100.0;
    double expiry = 1.0;  // years
    void validate() const;
};

struct RateSpec {
    double risk_free = 0.0;       // continuous, per year
    double dividend_yield = 0.0;  // continuous, per year
    void validate() const;
};

struct SabrParams {
    double sigma0 = 0.2;  // current volatility
    double vol_of_vol = 0.0;
    double rho = 0.0;
};

struct ImpliedVolInputs {
    double forward = 100.0;
    double strike = 100.0;
    double sigma0 = 0.2;
    double vol_of_vol = 0.0;
    double rho = 0.0;
    double tau = 1.0;
};

/// Standard normal CDF, absolute error below 1e-15.
double std_normal_cdf(double x) noexcept;

/// Call price per share. tau = 0 gives intrinsic value; sigma = 0 gives the
/// discounted intrinsic value of the forward.
double bs_price(double spot, const OptionSpec& option, const RateSpec& rates, double sigma, double tau);

/// e^{-q tau} N(d1). In the tau -> 0 (or sigma -> 0) limit: 1 in the money,
/// 0 out of the money, 0.5 at the kink (times e^{-q tau}).
double bs_delta(double spot, const OptionSpec& option, const RateSpec& rates, double sigma, double tau);

/// sigma0 * B at the money, sigma0 * B * phi / chi otherwise.
double hagan_implied_vol(const ImpliedVolInputs& inputs);

double sabr_implied_vol(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr,
                        double tau);

double sabr_price(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr, double tau);

/// Black-Scholes delta at the current implied volatility, the implied vol
/// being held fixed.
double practitioner_delta(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr,
                          double tau);

/// Derivative of sabr_price along the joint move (spot + h, sigma0 + h rho v / spot),
/// i.e. including the volatility change expected to accompany a spot move.
/// Fourth-order central stencil with h = 1e-4 * spot.
double bartlett_delta(double spot, const OptionSpec& option, const RateSpec& rates, const SabrParams& sabr,
                      double tau);

}  // namespace rlhedge::pricing
