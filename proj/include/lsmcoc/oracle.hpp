#pragma once
// Ground-truth references independent of the regression engine: a brute-force
// nested Monte Carlo value for two-period models and closed forms for the
// terminal step of the AR-GARCH model. The nested oracle shares no code with
// the engine's fitting path: it draws its own samples and never regresses.

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ar_garch.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "risk_functionals.hpp"
#include "rng.hpp"

namespace lsmcoc {

struct OracleEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::string method;
};

// Capital functional of a standard normal one period ahead:
//   phi_bar = q - (q Phi(q) + phi(q)) / (1 + eta),  q = Phi^{-1}(alpha),
// using the partial expectation E[(q - Z)+] = q Phi(q) + phi(q).
inline double closed_form_normal_phi(const CocParams& coc) {
    coc.validate();
    boost::math::normal_distribution<double> dist;
    double q = boost::math::quantile(dist, coc.alpha);
    double partial = q * boost::math::cdf(dist, q) + boost::math::pdf(dist, q);
    return q - partial / (1.0 + coc.eta);
}

// Exact value surface one step before the horizon: the next-period cash flow
// is a0 + a1*L + sigma*eps with eps standard normal, so the value is
// a0 + a1*L + sigma*phi_bar.
inline double closed_form_terminal_ar_garch(const ArGarchParams& params, double l, double sigma,
                                            const CocParams& coc) {
    return params.a0 + params.a1 * l + sigma * closed_form_normal_phi(coc);
}

// Two-period nested brute force: V1 estimated pointwise at every first-level
// draw by inner simulation of the terminal cash flow, V0 by the capital
// functional over the first-level sample of L1 + V1hat. The standard error
// comes from batch means of the outer sample (default 20 batches); the outer
// count is rounded down to a multiple of the batch count.
template <MarkovModel M>
OracleEstimate nested_value_T2(const M& model, std::size_t n_outer, std::size_t n_inner,
                               const CocParams& coc, std::uint64_t seed, int batches = 20,
                               int threads = 0) {
    coc.validate();
    if (model.horizon() != 2)
        throw OracleUnsupportedError(
            "nested oracle: requires a two-period model, got horizon " +
            std::to_string(model.horizon()));
    if (batches < 2) throw std::invalid_argument("nested oracle: need at least 2 batches");
    if (n_inner == 0) throw std::invalid_argument("nested oracle: need inner draws");
    const std::size_t per_batch = n_outer / static_cast<std::size_t>(batches);
    if (per_batch == 0)
        throw std::invalid_argument("nested oracle: outer budget below one point per batch");
    const std::size_t total = per_batch * static_cast<std::size_t>(batches);

    State s0;
    model.initial_state(s0);
    std::vector<double> x(total);

    struct Scratch {
        State s1, succ, tmp;
        std::vector<double> y;
    };
    parallel_for(
        total, threads, [&] { return Scratch{}; },
        [&](std::size_t i, Scratch& sc) {
            RngStream outer_rng(seed, StreamRole::oracle_outer, 0, i);
            model.step(0, s0, sc.s1, outer_rng);
            RngStream inner_rng(seed, StreamRole::oracle_inner, 0, i);
            sc.y.resize(n_inner);
            for (std::size_t j = 0; j < n_inner; ++j) {
                model.step(1, sc.s1, sc.succ, inner_rng);
                sc.y[j] = model.cashflow(2, sc.succ);
            }
            CocValue v1 = coc_pair(std::span<double>(sc.y.data(), n_inner), coc);
            x[i] = model.cashflow(1, sc.s1) + v1.v;
        });

    std::vector<double> buf = x;
    double value = coc_pair(std::span<double>(buf.data(), buf.size()), coc).v;

    std::vector<double> batch_values(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        buf.assign(x.begin() + static_cast<std::ptrdiff_t>(per_batch * static_cast<std::size_t>(b)),
                   x.begin() + static_cast<std::ptrdiff_t>(per_batch * static_cast<std::size_t>(b + 1)));
        batch_values[static_cast<std::size_t>(b)] =
            coc_pair(std::span<double>(buf.data(), buf.size()), coc).v;
    }
    double mean = 0.0;
    for (double v : batch_values) mean += v;
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double v : batch_values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(batches - 1);
    double se = std::sqrt(var / static_cast<double>(batches));

    return {value, se, "nested-brute-force"};
}

}  // namespace lsmcoc
