#include "rlhedge/eval/evaluate.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "rlhedge/errors.hpp"

namespace rlhedge::eval {

EvalReport summarize(std::string label, std::span<const double> costs_pct, double c, std::uint64_t seed,
                     std::uint64_t path_checksum) {
    const std::size_t n = costs_pct.size();
    require(n >= 2, "evaluation needs at least 2 paths");
    const auto nd = static_cast<double>(n);
    double sum = 0.0;
    for (double x : costs_pct) sum += x;
    const double mean = sum / nd;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : costs_pct) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double var = m2 / (nd - 1.0);
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;

    EvalReport r;
    r.label = std::move(label);
    r.n_paths = n;
    r.seed = seed;
    r.c = c;
    r.mean_cost_pct = mean;
    r.sd_cost_pct = std::sqrt(var);
    r.y0_pct = r.mean_cost_pct + c * r.sd_cost_pct;
    r.se_mean = r.sd_cost_pct / std::sqrt(nd);
    if (m2 > 0.0) {
        const double var_sd = std::max(m4 - m2 * m2, 0.0) / (4.0 * m2 * nd);
        const double cov = m3 / (2.0 * std::sqrt(m2) * nd);
        r.se_sd = std::sqrt(var_sd);
        r.se_y0 = std::sqrt(std::max(r.se_mean * r.se_mean + c * c * var_sd + 2.0 * c * cov, 0.0));
    } else {
        r.se_y0 = r.se_mean;
    }
    r.path_checksum = path_checksum;
    return r;
}

EvalReport evaluate_policy(const agents::HedgingPolicy& policy, const env::EnvConfig& env, std::size_t n_paths,
                           std::uint64_t seed, double c, unsigned threads) {
    require(n_paths >= 2, "evaluation needs at least 2 paths");
    const auto r = agents::rollout(policy, env, n_paths, seed, threads);
    std::vector<double> pct(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) pct[i] = 100.0 * r.total_costs[i] / r.premiums[i];
    auto report = summarize(policy.label(), pct, c, seed, r.path_checksum);
    report.clamp_count = r.clamp_count;
    return report;
}

double improvement_pct(const EvalReport& base, const EvalReport& other) {
    require(base.y0_pct != 0.0, "baseline Y(0) is zero");
    return (base.y0_pct - other.y0_pct) / base.y0_pct * 100.0;
}

const EvalReport& ComparisonRow::report(const std::string& label) const {
    for (const auto& r : reports)
        if (r.label == label) return r;
    throw ValidationError("no report for policy '" + label + "'");
}

double ComparisonRow::improvement_vs(const std::string& policy, const std::string& baseline) const {
    for (std::size_t p = 0; p < reports.size(); ++p) {
        if (reports[p].label != policy) continue;
        for (std::size_t b = 0; b < baselines.size(); ++b)
            if (baselines[b] == baseline) return improvement[p][b];
    }
    throw ValidationError("no improvement of '" + policy + "' over '" + baseline + "'");
}

std::vector<ComparisonRow> compare(std::span<const FrequencyCase> cases, std::span<const std::string> baselines,
                                   std::size_t n_paths, std::uint64_t seed, double c, unsigned threads) {
    std::vector<ComparisonRow> rows;
    for (const auto& fc : cases) {
        require(fc.policies.size() >= 2, "comparison needs at least two policies");
        ComparisonRow row;
        row.frequency = fc.label;
        row.baselines.assign(baselines.begin(), baselines.end());
        for (const auto& p : fc.policies) row.reports.push_back(evaluate_policy(*p, fc.env, n_paths, seed, c, threads));
        for (const auto& b : row.baselines) row.report(b);  // every baseline must be present
        for (const auto& r : row.reports) {
            std::vector<double> imp;
            for (const auto& b : row.baselines) imp.push_back(improvement_pct(row.report(b), r));
            row.improvement.push_back(std::move(imp));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

PolicySlice policy_slice(const agents::HedgingPolicy& policy, const env::EnvConfig& env,
                         const sim::ProcessSpec& process, std::span<const double> prices,
                         std::span<const double> holdings, double tau) {
    require(!prices.empty() && !holdings.empty(), "slice grids must be nonempty");
    require(tau >= 0.0 && tau <= env.option.expiry, "slice tau must lie in [0, expiry]");
    PolicySlice slice;
    slice.tau = tau;
    slice.prices.assign(prices.begin(), prices.end());
    slice.holdings.assign(holdings.begin(), holdings.end());

    const double vol = sim::initial_vol(process);
    std::vector<env::HedgeState> states;
    for (double p : prices) {
        slice.delta.push_back(pricing::bs_delta(p, env.option, env.rates, vol, tau));
        for (double h : holdings) states.push_back({h, p, tau});
    }
    const std::vector<agents::PricingContext> contexts(states.size(),
                                                       agents::PricingContext{env.option, env.rates, process, vol});
    slice.actions.resize(states.size());
    policy.act_batch(states, contexts, slice.actions);
    return slice;
}

void write_slice_csv(std::ostream& out, const PolicySlice& slice) {
    out << "price,bs_delta";
    for (double h : slice.holdings) out << ",h=" << h;
    out << '\n' << std::setprecision(10);
    const std::size_t nh = slice.holdings.size();
    for (std::size_t i = 0; i < slice.prices.size(); ++i) {
        out << slice.prices[i] << ',' << slice.delta[i];
        for (std::size_t j = 0; j < nh; ++j) out << ',' << slice.actions[i * nh + j];
        out << '\n';
    }
}

}  // namespace rlhedge::eval
