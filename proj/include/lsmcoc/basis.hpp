#pragma once
// Regression feature maps Phi_t. A BasisSet is an ordered list of real-valued
// functions of the state; the first entry is always the constant 1. Evaluation
// writes into a caller buffer so the inner simulation loop stays
// allocation-free. Bases for a horizon-T run are built for t = 1..T-1 and kept
// in a vector indexed by t-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ar_garch.hpp"
#include "life_model.hpp"
#include "model.hpp"
#include "normal.hpp"

namespace lsmcoc {

class BasisSet {
public:
    using Eval = std::function<void(const State&, double*)>;

    BasisSet() = default;
    BasisSet(int t, std::vector<std::string> labels, Eval eval)
        : t_(t), labels_(std::move(labels)), eval_(std::move(eval)) {
        if (labels_.empty() || labels_.front() != "1")
            throw std::invalid_argument("basis: first function must be the constant 1");
        if (!eval_) throw std::invalid_argument("basis: evaluator not set");
    }

    int t() const { return t_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    const std::vector<std::string>& labels() const { return labels_; }

    // out must hold size() slots.
    void evaluate(const State& s, double* out) const { eval_(s, out); }

    std::vector<double> evaluate(const State& s) const {
        std::vector<double> out(size());
        eval_(s, out.data());
        return out;
    }

private:
    int t_ = 0;
    std::vector<std::string> labels_;
    Eval eval_;
};

// ---------------------------------------------------------------------------
// AR-GARCH bases

// {1, L, sigma, L^2, L*sigma, sigma^2} on the state (L_t, sigma_{t+1}).
inline BasisSet build_basis_ar_garch(int t) {
    std::vector<std::string> labels = {"1", "L", "sigma", "L^2", "L*sigma", "sigma^2"};
    return BasisSet(t, std::move(labels), [](const State& s, double* out) {
        double l = s[0], sg = s[1];
        out[0] = 1.0;
        out[1] = l;
        out[2] = sg;
        out[3] = l * l;
        out[4] = l * sg;
        out[5] = sg * sg;
    });
}

// {1} + component levels + component volatilities + quadratic terms of the
// aggregate. Aggregate level is the plain sum; the aggregate volatility is
// sqrt(sum sigma_i^2) since components are independent. The aggregate level
// itself is omitted: it is an exact linear combination of the components.
inline BasisSet build_basis_ar_garch_sum(int t, int components) {
    if (components < 1)
        throw std::invalid_argument("basis: sum model needs at least one component");
    std::vector<std::string> labels = {"1"};
    for (int i = 1; i <= components; ++i) labels.push_back("L" + std::to_string(i));
    for (int i = 1; i <= components; ++i) labels.push_back("sigma" + std::to_string(i));
    labels.insert(labels.end(), {"sigma_agg", "L_agg^2", "L_agg*sigma_agg", "sigma_agg^2"});
    auto k = static_cast<std::size_t>(components);
    return BasisSet(t, std::move(labels), [k](const State& s, double* out) {
        out[0] = 1.0;
        double lsum = 0.0, var = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            out[1 + i] = s[i];
            lsum += s[i];
            double sg = s[k + i];
            out[1 + k + i] = sg;
            var += sg * sg;
        }
        double sagg = std::sqrt(var);
        out[1 + 2 * k] = sagg;
        out[2 + 2 * k] = lsum * lsum;
        out[3 + 2 * k] = lsum * sagg;
        out[4 + 2 * k] = var;
    });
}

// ---------------------------------------------------------------------------
// Call values on the log-normal fund

// E[(F_{t+tau} - K)+ | F_t = f] for geometric Brownian motion with drift mu and
// volatility sigma; no discounting. tau = 0 degenerates to the payoff itself.
inline double call_value(double f, double k, double mu, double sigma, double tau) {
    if (!(f > 0.0)) throw std::invalid_argument("call_value: spot must be positive");
    if (tau < 0.0) throw std::invalid_argument("call_value: negative time to maturity");
    if (tau == 0.0) return std::max(f - k, 0.0);
    double forward = f * std::exp(mu * tau);
    if (k <= 0.0) return forward - k;
    if (sigma <= 0.0) return std::max(forward - k, 0.0);
    double sd = sigma * std::sqrt(tau);
    double d1 = (std::log(f / k) + (mu + 0.5 * sigma * sigma) * tau) / sd;
    return forward * normal_cdf(d1) - k * normal_cdf(d1 - sd);
}

// ---------------------------------------------------------------------------
// Life-model basis

inline std::string format_strike(double k) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", k);
    return buf;
}

// {1} + state coordinates (Y, F, N^1..N^k) + products of {mu, sd, N} with a
// fixed family of financial payoffs. mu and sd are the mean and standard
// deviation of next-period deaths given the current counts; N is the total
// count. callS is the expected terminal survival payoff floor (strike
// survival_benefit, maturity T), callD the one-period death payoff floor
// (strike death_benefit, maturity t+1); both appear alone and times Y.
inline BasisSet build_basis_life(const LifeParams& params, int t, int horizon,
                                 const std::vector<double>& strikes) {
    if (t < 1 || t >= horizon)
        throw std::invalid_argument("basis: life basis defined for 1 <= t <= horizon-1");
    params.validate();
    const std::size_t k = params.cohorts.size();

    std::vector<std::string> fin_labels = {"Y", "F", "Y^2", "F^2", "F^3", "Y*F", "Y*F^2"};
    for (double s : strikes) fin_labels.push_back("(F-" + format_strike(s) + ")+");
    for (double s : strikes) fin_labels.push_back("(F-" + format_strike(s) + ")+*Y");
    fin_labels.insert(fin_labels.end(), {"callS", "callD", "callS*Y", "callD*Y"});

    std::vector<std::string> labels = {"1", "Y", "F"};
    for (std::size_t i = 1; i <= k; ++i) labels.push_back("N" + std::to_string(i));
    for (const char* prefix : {"mu", "sd", "N"})
        for (const auto& fl : fin_labels) labels.push_back(std::string(prefix) + "*" + fl);

    // One-year death probabilities for the period (t, t+1).
    std::vector<double> q(k), qv(k);
    for (std::size_t i = 0; i < k; ++i) {
        q[i] = params.mortality(params.cohorts[i].age + t);
        qv[i] = q[i] * (1.0 - q[i]);
    }

    struct Closure {
        std::size_t k;
        std::vector<double> q, qv, strikes;
        double mu_f, sigma_f, s_star, d_star, tau_s;
        std::size_t fin_count;
    };
    Closure c{k, std::move(q), std::move(qv), strikes,
              params.mu_f, params.sigma_f, params.survival_benefit, params.death_benefit,
              static_cast<double>(horizon - t), 0};
    c.fin_count = 11 + 2 * strikes.size();

    return BasisSet(t, std::move(labels), [c](const State& s, double* out) {
        const double y = s[0], f = s[1];
        double mu = 0.0, var = 0.0, ntot = 0.0;
        for (std::size_t i = 0; i < c.k; ++i) {
            double n = s[2 + i];
            mu += n * c.q[i];
            var += n * c.qv[i];
            ntot += n;
        }
        double sd = std::sqrt(var);

        out[0] = 1.0;
        out[1] = y;
        out[2] = f;
        for (std::size_t i = 0; i < c.k; ++i) out[3 + i] = s[2 + i];

        double* fin = out + 3 + c.k;  // reuse the tail as the payoff scratch
        fin[0] = y;
        fin[1] = f;
        fin[2] = y * y;
        fin[3] = f * f;
        fin[4] = f * f * f;
        fin[5] = y * f;
        fin[6] = y * f * f;
        std::size_t pos = 7;
        for (double strike : c.strikes) fin[pos++] = std::max(f - strike, 0.0);
        for (double strike : c.strikes) fin[pos++] = std::max(f - strike, 0.0) * y;
        double call_s = call_value(f, c.s_star, c.mu_f, c.sigma_f, c.tau_s);
        double call_d = call_value(f, c.d_star, c.mu_f, c.sigma_f, 1.0);
        fin[pos++] = call_s;
        fin[pos++] = call_d;
        fin[pos++] = call_s * y;
        fin[pos++] = call_d * y;

        // Expand in place: third block (N) first so the scratch is still intact,
        // then sd, then mu.
        double* mu_block = fin;
        double* sd_block = fin + c.fin_count;
        double* n_block = fin + 2 * c.fin_count;
        for (std::size_t j = c.fin_count; j-- > 0;) {
            double base = fin[j];
            n_block[j] = ntot * base;
            sd_block[j] = sd * base;
            mu_block[j] = mu * base;
        }
    });
}

// ---------------------------------------------------------------------------
// Strike selection

struct StrikeSelection {
    std::vector<double> strikes;  // chosen strikes, best first
    std::vector<double> r2;       // incremental R^2 per candidate, same order as input
    bool degenerate = false;      // residuals had no variance; input order kept
};

// Ranks candidate strikes by the R^2 of regressing the residuals on
// {1, (F - K)+} and keeps the top `count`.
inline StrikeSelection select_strikes_by_r2(const std::vector<double>& candidates,
                                            std::span<const double> f,
                                            std::span<const double> residuals,
                                            std::size_t count) {
    if (candidates.empty()) throw std::invalid_argument("strike selection: no candidates");
    if (f.size() != residuals.size() || f.empty())
        throw std::invalid_argument("strike selection: sample size mismatch");
    if (count == 0 || count > candidates.size())
        throw std::invalid_argument("strike selection: count must lie in [1, #candidates]");

    const auto n = static_cast<double>(f.size());
    double res_mean = 0.0;
    for (double r : residuals) res_mean += r;
    res_mean /= n;
    double sst = 0.0;
    for (double r : residuals) sst += (r - res_mean) * (r - res_mean);

    StrikeSelection out;
    out.r2.assign(candidates.size(), 0.0);
    if (sst <= 0.0) {
        out.degenerate = true;
        out.strikes.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count));
        return out;
    }

    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double hm = 0.0;
        for (double fv : f) hm += std::max(fv - candidates[c], 0.0);
        hm /= n;
        double shh = 0.0, shr = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double h = std::max(f[i] - candidates[c], 0.0) - hm;
            shh += h * h;
            shr += h * (residuals[i] - res_mean);
        }
        out.r2[c] = shh > 0.0 ? (shr * shr) / (shh * sst) : 0.0;
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.r2[a] > out.r2[b]; });
    for (std::size_t i = 0; i < count; ++i) out.strikes.push_back(candidates[order[i]]);
    return out;
}

}  // namespace lsmcoc
