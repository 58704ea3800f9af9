#pragma once
// Out-of-sample validation of a fitted coefficient table. A fresh seed draws
// Mval outer states per time step; at each one the pair (R, E) is re-estimated
// from nval inner draws against the frozen next-period surface and compared
// with the regression predictions:
//   RMSE_Z  = sqrt(mean (Z_i - Zhat_i)^2),  NRMSE_Z = RMSE_Z / sqrt(mean Z_i^2)
//   ANDP_i  = Fhat_i(Rhat_i)   (inner cdf at the predicted capital)
//   AROC_i  = (1+eta) E_i / Ehat_i   (excluded and counted when Ehat_i <= 0)
// Quantile bands use the same order-statistic convention as the capital
// functional, at 2.5%/97.5% by default.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "errors.hpp"
#include "lsm_engine.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "risk_functionals.hpp"
#include "rng.hpp"

namespace lsmcoc {

struct ValidationConfig {
    std::size_t outer = 10000;   // Mval
    std::size_t inner = 100000;  // nval
    std::uint64_t seed = 2;      // must differ from the training seed
    int threads = 0;
    int bins = 30;               // histogram bins per series
    double band_lo = 0.025;
    double band_hi = 0.975;
    bool keep_samples = false;   // retain per-point samples (tests)

    void validate() const {
        if (outer == 0 || inner == 0)
            throw std::invalid_argument("validation: sample sizes must be positive");
        if (bins < 1) throw std::invalid_argument("validation: need at least one bin");
        if (!(band_lo > 0.0 && band_lo < band_hi && band_hi < 1.0))
            throw std::invalid_argument("validation: quantile band must satisfy 0 < lo < hi < 1");
    }
};

inline double rmse(std::span<const double> targets, std::span<const double> predictions) {
    if (targets.empty() || targets.size() != predictions.size())
        throw std::invalid_argument("rmse: need equal nonzero lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double d = targets[i] - predictions[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(targets.size()));
}

inline double root_mean_square(std::span<const double> values) {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc / static_cast<double>(values.size()));
}

inline double nrmse(std::span<const double> targets, std::span<const double> predictions) {
    double rms = root_mean_square(targets);
    if (rms == 0.0) throw NumericalError("nrmse: targets are identically zero");
    return rmse(targets, predictions) / rms;
}

inline double andp(std::span<const double> inner_sample, double predicted_r) {
    if (inner_sample.empty()) throw std::invalid_argument("andp: empty sample");
    std::size_t below = 0;
    for (double y : inner_sample)
        if (y <= predicted_r) ++below;
    return static_cast<double>(below) / static_cast<double>(inner_sample.size());
}

inline double aroc(double e, double predicted_e, double eta) {
    if (predicted_e == 0.0) throw std::invalid_argument("aroc: predicted shortfall is zero");
    return (1.0 + eta) * e / predicted_e;
}

struct Histogram {
    std::vector<double> lower_edges;
    std::vector<std::size_t> counts;
};

// Equal-width bins spanning [min, max]; the top bin is closed so counts sum to
// the sample size. A constant sample lands entirely in one bin.
inline Histogram histogram(std::span<const double> samples, int bins) {
    if (samples.empty()) throw std::invalid_argument("histogram: empty sample");
    if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
    auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    double mn = *mn_it, mx = *mx_it;
    double width = (mx - mn) / static_cast<double>(bins);
    Histogram h;
    h.lower_edges.resize(static_cast<std::size_t>(bins));
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (int b = 0; b < bins; ++b)
        h.lower_edges[static_cast<std::size_t>(b)] = mn + width * static_cast<double>(b);
    for (double v : samples) {
        std::size_t idx = 0;
        if (width > 0.0) {
            idx = static_cast<std::size_t>((v - mn) / width);
            if (idx >= static_cast<std::size_t>(bins)) idx = static_cast<std::size_t>(bins) - 1;
        }
        ++h.counts[idx];
    }
    return h;
}

struct TimeValidation {
    int t = 0;
    double rmse_r = 0, rmse_e = 0, rmse_v = 0;
    double nrmse_r = 0, nrmse_e = 0, nrmse_v = 0;
    double andp_lo = 0, andp_hi = 0, andp_mean = 0;
    double aroc_lo = 0, aroc_hi = 0, aroc_median = 0;
    std::size_t aroc_excluded = 0;
    Histogram andp_hist, aroc_hist;
    // populated only when ValidationConfig::keep_samples is set
    std::vector<double> targets_r, targets_e, targets_v;
    std::vector<double> pred_r, pred_e, pred_v;
    std::vector<double> andp_samples, aroc_samples;
};

struct ValidationReport {
    int horizon = 0;
    CocParams coc;
    std::vector<TimeValidation> per_time;  // ascending t = 1..horizon-1
};

namespace detail {

// NRMSE with the zero-target guard: a perfectly reproduced all-zero target
// (e.g. a shortfall that is identically zero) reports 0 instead of 0/0.
inline double nrmse_guarded(std::span<const double> targets,
                            std::span<const double> predictions) {
    if (root_mean_square(targets) == 0.0) {
        double err = rmse(targets, predictions);
        if (err == 0.0) return 0.0;
        throw NumericalError("nrmse: nonzero error against identically zero targets");
    }
    return nrmse(targets, predictions);
}

inline double quantile_of_copy(std::vector<double>& buffer, double p) {
    return empirical_quantile(std::span<double>(buffer.data(), buffer.size()), p);
}

}  // namespace detail

template <MarkovModel M>
ValidationReport validate(const M& model, const std::vector<BasisSet>& bases,
                          const CoefficientTable& table, const ValidationConfig& vcfg) {
    vcfg.validate();
    table.coc.validate();
    const int horizon = model.horizon();
    if (table.horizon != horizon)
        throw ConfigError("validate: coefficient table horizon " +
                          std::to_string(table.horizon) + " does not match the model horizon " +
                          std::to_string(horizon));
    if (bases.size() + 1 != static_cast<std::size_t>(horizon))
        throw std::invalid_argument("validate: need one basis per time step t = 1..T-1");
    if (table.per_time.size() != bases.size())
        throw ConfigError("validate: coefficient table rows do not cover t = 1..T-1");
    if (vcfg.seed == table.seed)
        throw ConfigError("validate: validation seed equals the training seed (" +
                          std::to_string(table.seed) + "); choose a different seed");
    if (!bases.empty() && bases.front().labels() != table.labels)
        throw ConfigError("validate: basis labels do not match the coefficient table");
    auto min_inner = static_cast<std::size_t>(std::ceil(1.0 / (1.0 - table.coc.alpha)));
    if (vcfg.inner < min_inner)
        throw std::invalid_argument("validation: inner sample size must be at least " +
                                    std::to_string(min_inner));

    ValidationReport report;
    report.horizon = horizon;
    report.coc = table.coc;
    const double disc = 1.0 + table.coc.eta;

    for (int t = 1; t <= horizon - 1; ++t) {
        const BasisSet& basis_t = bases[static_cast<std::size_t>(t - 1)];
        const TargetCoeffs& coef = table.per_time[static_cast<std::size_t>(t - 1)];
        const bool terminal_next = (t + 1 == horizon);
        const BasisSet* basis_next = terminal_next ? nullptr
                                                   : &bases[static_cast<std::size_t>(t)];
        std::span<const double> beta_v_next;
        if (!terminal_next)
            beta_v_next = table.per_time[static_cast<std::size_t>(t)].v;

        const std::size_t m = vcfg.outer;
        std::vector<double> tr(m), te(m), tv(m), pr(m), pe(m), pv(m), an(m), ar(m);

        struct Scratch {
            State state;
            InnerScratch inner;
            std::vector<double> phi;
        };
        parallel_for(
            m, vcfg.threads,
            [&] { return Scratch{State(), InnerScratch{}, std::vector<double>(basis_t.size())}; },
            [&](std::size_t i, Scratch& sc) {
                RngStream outer_rng(vcfg.seed, StreamRole::outer, t, i);
                draw_marginal(model, t, outer_rng, sc.inner.tmp, sc.state);
                basis_t.evaluate(sc.state, sc.phi.data());
                pr[i] = predict(coef.r, sc.phi);
                pe[i] = predict(coef.e, sc.phi);
                pv[i] = predict(coef.v, sc.phi);
                RngStream inner_rng(vcfg.seed, StreamRole::inner, t, i);
                double andp_i = 0.0;
                CocValue cv = detail::inner_pass(model, t, sc.state, vcfg.inner, table.coc,
                                                 basis_next, beta_v_next, inner_rng, sc.inner,
                                                 &pr[i], &andp_i);
                tr[i] = cv.r;
                te[i] = cv.e;
                tv[i] = cv.v;  // equals cv.r - cv.e/(1+eta) by construction
                an[i] = andp_i;
                ar[i] = pe[i] > 0.0 ? aroc(cv.e, pe[i], table.coc.eta)
                                    : std::numeric_limits<double>::quiet_NaN();
            });

        TimeValidation tvld;
        tvld.t = t;
        tvld.rmse_r = rmse(tr, pr);
        tvld.rmse_e = rmse(te, pe);
        tvld.rmse_v = rmse(tv, pv);
        tvld.nrmse_r = detail::nrmse_guarded(tr, pr);
        tvld.nrmse_e = detail::nrmse_guarded(te, pe);
        tvld.nrmse_v = detail::nrmse_guarded(tv, pv);

        std::vector<double> buf = an;
        tvld.andp_lo = detail::quantile_of_copy(buf, vcfg.band_lo);
        tvld.andp_hi = detail::quantile_of_copy(buf, vcfg.band_hi);
        double mean = 0.0;
        for (double v : an) mean += v;
        tvld.andp_mean = mean / static_cast<double>(m);
        tvld.andp_hist = histogram(an, vcfg.bins);

        std::vector<double> aroc_valid;
        aroc_valid.reserve(m);
        for (double v : ar)
            if (std::isfinite(v)) aroc_valid.push_back(v);
        tvld.aroc_excluded = m - aroc_valid.size();
        if (!aroc_valid.empty()) {
            buf = aroc_valid;
            tvld.aroc_lo = detail::quantile_of_copy(buf, vcfg.band_lo);
            tvld.aroc_hi = detail::quantile_of_copy(buf, vcfg.band_hi);
            tvld.aroc_median = detail::quantile_of_copy(buf, 0.5);
            tvld.aroc_hist = histogram(aroc_valid, vcfg.bins);
        } else {
            tvld.aroc_lo = tvld.aroc_hi = tvld.aroc_median =
                std::numeric_limits<double>::quiet_NaN();
        }

        if (vcfg.keep_samples) {
            tvld.targets_r = std::move(tr);
            tvld.targets_e = std::move(te);
            tvld.targets_v = std::move(tv);
            tvld.pred_r = std::move(pr);
            tvld.pred_e = std::move(pe);
            tvld.pred_v = std::move(pv);
            tvld.andp_samples = std::move(an);
            tvld.aroc_samples = std::move(aroc_valid);
        }
        report.per_time.push_back(std::move(tvld));
    }
    return report;
}

}  // namespace lsmcoc
