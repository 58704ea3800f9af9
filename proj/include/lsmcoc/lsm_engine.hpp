#pragma once
// Backward least-squares Monte Carlo recursion for the recursive
// cost-of-capital value
//   V_T = 0,   V_t = phi_t(L_{t+1} + V_{t+1}),
// where phi is the capital/shortfall functional from risk_functionals.hpp.
// Each step t draws M outer states from the time-t marginal, estimates the
// pair (R, E) at every outer state from n conditional inner draws against the
// frozen next-period coefficient surface, and regresses R and E separately
// onto the time-t basis; the value surface is beta_V = beta_R - beta_E/(1+eta).
// Time 0 has a constant state, so its regression degenerates to an intercept:
// the average of M independent nested estimates at the initial state.
//
// Determinism: outer point (t, i) uses substreams keyed by (seed, role, t, i),
// every result lands in its own slot, and reductions run in index order, so
// output is bit-identical for any thread count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "ols.hpp"
#include "parallel.hpp"
#include "risk_functionals.hpp"
#include "rng.hpp"

namespace lsmcoc {

struct RunConfig {
    std::size_t outer = 10000;   // M: regression sample size per time step
    std::size_t inner = 100000;  // n: conditional sample size per outer point
    int threads = 0;             // 0 = all hardware threads
    std::uint64_t seed = 1;
    CocParams coc;

    void validate() const {
        coc.validate();
        if (outer == 0) throw std::invalid_argument("run: outer sample size must be positive");
        auto min_inner =
            static_cast<std::size_t>(std::ceil(1.0 / (1.0 - coc.alpha)));
        if (inner < min_inner)
            throw std::invalid_argument(
                "run: inner sample size must be at least ceil(1/(1-alpha)) = " +
                std::to_string(min_inner));
    }
};

struct TargetCoeffs {
    std::vector<double> r, e, v;
};

struct CoefficientTable {
    int horizon = 0;
    CocParams coc;
    std::uint64_t seed = 0;                // training seed; validation must differ
    std::vector<std::string> labels;       // basis labels, shared across t
    std::vector<TargetCoeffs> per_time;    // index t-1 holds time t, t = 1..horizon-1
    CocValue time_zero;
};

inline double value_at_zero(const CoefficientTable& table) { return table.time_zero.v; }

// Reusable per-worker buffers for the conditional inner loop.
struct InnerScratch {
    State succ;
    State tmp;
    std::vector<double> y;
    std::vector<double> phi;
};

namespace detail {

// One conditional inner run at a fixed outer state: simulates n successors,
// forms y_j = g_{t+1}(S_{t+1}) + beta_V' Phi_{t+1}(S_{t+1}) (the basis term is
// absent when t+1 is the terminal date), and applies the capital functional.
// Optionally counts y_j <= *cdf_at for the out-of-sample default statistic.
template <MarkovModel M>
CocValue inner_pass(const M& model, int t, const State& outer_state, std::size_t n,
                    const CocParams& coc, const BasisSet* basis_next,
                    std::span<const double> beta_v_next, RngStream& rng, InnerScratch& sc,
                    const double* cdf_at = nullptr, double* cdf_out = nullptr) {
    if (n == 0) throw std::invalid_argument("inner run: need at least one inner draw");
    const bool use_basis = basis_next != nullptr && !basis_next->empty();
    if (use_basis && beta_v_next.size() != basis_next->size())
        throw std::invalid_argument("inner run: coefficient/basis size mismatch");
    sc.y.resize(n);
    if (use_basis) sc.phi.resize(basis_next->size());
    std::size_t below = 0;
    for (std::size_t j = 0; j < n; ++j) {
        model.step(t, outer_state, sc.succ, rng);
        double y = model.cashflow(t + 1, sc.succ);
        if (use_basis) {
            basis_next->evaluate(sc.succ, sc.phi.data());
            y += predict(beta_v_next, sc.phi);
        }
        sc.y[j] = y;
        if (cdf_at != nullptr && y <= *cdf_at) ++below;
    }
    if (cdf_out != nullptr) *cdf_out = static_cast<double>(below) / static_cast<double>(n);
    return coc_pair(std::span<double>(sc.y.data(), n), coc);
}

}  // namespace detail

// (R, E, V) at one outer state. basis_next must be null exactly when t+1 is
// the terminal date.
template <MarkovModel M>
CocValue inner_targets(const M& model, int t, const State& outer_state, std::size_t n,
                       const CocParams& coc, const BasisSet* basis_next,
                       std::span<const double> beta_v_next, RngStream& rng, InnerScratch& sc) {
    return detail::inner_pass(model, t, outer_state, n, coc, basis_next, beta_v_next, rng, sc);
}

template <MarkovModel M>
CocValue inner_targets(const M& model, int t, const State& outer_state, std::size_t n,
                       const CocParams& coc, const BasisSet* basis_next,
                       std::span<const double> beta_v_next, RngStream& rng) {
    InnerScratch sc;
    return detail::inner_pass(model, t, outer_state, n, coc, basis_next, beta_v_next, rng, sc);
}

// Minimum number of outer draws on which a basis column must be nonzero
// before its coefficient is estimated. A payoff family supported on fewer
// points than it has members interpolates those points exactly, and the
// unconstrained extrapolation can blow up the whole backward recursion.
inline constexpr std::size_t kMinColumnSupport = 32;

struct StepFit {
    std::vector<double> beta_r, beta_e, beta_v;
    std::vector<double> targets_r, targets_e;
    std::vector<double> states_flat;  // M x dim outer states, row-major
    DesignMatrix design;
    std::vector<std::string> dropped;  // columns excluded from the fit
};

// One regression step at time t against the frozen next-period surface.
template <MarkovModel M>
StepFit fit_step(const M& model, const BasisSet& basis_t, const BasisSet* basis_next,
                 std::span<const double> beta_v_next, int t, const RunConfig& cfg) {
    cfg.validate();
    if (t < 1 || t >= model.horizon())
        throw std::invalid_argument("fit_step: t must lie in [1, horizon-1]");
    const std::size_t m = cfg.outer;
    const std::size_t p = basis_t.size();
    if (m < p)
        throw std::invalid_argument("fit_step: outer sample size " + std::to_string(m) +
                                    " is below the basis size " + std::to_string(p));
    const auto dim = static_cast<std::size_t>(model.dim());

    StepFit out;
    out.design.labels = basis_t.labels();
    out.design.x.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
    out.targets_r.resize(m);
    out.targets_e.resize(m);
    out.states_flat.resize(m * dim);

    struct Scratch {
        State state;
        InnerScratch inner;
        std::vector<double> phi;
    };
    parallel_for(
        m, cfg.threads, [&] { return Scratch{State(), InnerScratch{}, std::vector<double>(p)}; },
        [&](std::size_t i, Scratch& sc) {
            RngStream outer_rng(cfg.seed, StreamRole::outer, t, i);
            draw_marginal(model, t, outer_rng, sc.inner.tmp, sc.state);
            basis_t.evaluate(sc.state, sc.phi.data());
            for (std::size_t j = 0; j < p; ++j)
                out.design.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    sc.phi[j];
            for (std::size_t d = 0; d < dim; ++d) out.states_flat[i * dim + d] = sc.state[d];
            RngStream inner_rng(cfg.seed, StreamRole::inner, t, i);
            CocValue cv = detail::inner_pass(model, t, sc.state, cfg.inner, cfg.coc, basis_next,
                                             beta_v_next, inner_rng, sc.inner);
            out.targets_r[i] = cv.r;
            out.targets_e[i] = cv.e;
        });

    // Columns supported on almost no outer draws are excluded before the fit
    // (deep out-of-the-money payoffs at small outer budgets); they would be
    // fitted by interpolation, not regression. The cap at m keeps dense
    // columns alive in tiny designs.
    const std::size_t min_support = std::min(kMinColumnSupport, m);
    std::vector<std::size_t> kept;
    kept.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto nonzero = static_cast<std::size_t>(
            (out.design.x.col(static_cast<Eigen::Index>(j)).array() != 0.0).count());
        if (nonzero < min_support)
            out.dropped.push_back(out.design.labels[j]);
        else
            kept.push_back(j);
    }

    // One factorization serves both targets. Dependent columns among the
    // survivors are pruned to zero coefficients: the prescribed bases are
    // exactly collinear at early time steps (see ols.hpp), and the projection
    // surface is what matters.
    DesignMatrix reduced;
    reduced.x.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(kept.size()));
    reduced.labels.reserve(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        reduced.x.col(static_cast<Eigen::Index>(k)) =
            out.design.x.col(static_cast<Eigen::Index>(kept[k]));
        reduced.labels.push_back(out.design.labels[kept[k]]);
    }
    OlsSolver solver(reduced);
    const std::vector<double> beta_r = solver.solve(out.targets_r);
    const std::vector<double> beta_e = solver.solve(out.targets_e);
    for (const std::string& label : solver.dropped()) out.dropped.push_back(label);
    out.beta_r.assign(p, 0.0);
    out.beta_e.assign(p, 0.0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        out.beta_r[kept[k]] = beta_r[k];
        out.beta_e[kept[k]] = beta_e[k];
    }
    out.beta_v.resize(p);
    const double disc = 1.0 + cfg.coc.eta;
    for (std::size_t j = 0; j < p; ++j) out.beta_v[j] = out.beta_r[j] - out.beta_e[j] / disc;
    return out;
}

struct RunOutput {
    CoefficientTable table;
    std::vector<std::pair<int, double>> step_seconds;  // (t, wall seconds), execution order
    // steps whose design lost columns to pruning, with the column labels
    std::vector<std::pair<int, std::vector<std::string>>> pruned_columns;
};

// Full backward recursion. bases[t-1] is the regression basis at time t; all
// bases must share one label list (their parameters may differ by t).
template <MarkovModel M>
RunOutput lsm_backward(const M& model, const std::vector<BasisSet>& bases, const RunConfig& cfg) {
    cfg.validate();
    const int horizon = model.horizon();
    if (bases.size() + 1 != static_cast<std::size_t>(horizon))
        throw std::invalid_argument("lsm_backward: need one basis per time step t = 1..T-1");
    for (std::size_t i = 1; i < bases.size(); ++i)
        if (bases[i].labels() != bases[0].labels())
            throw std::invalid_argument("lsm_backward: bases must share one label list");

    RunOutput out;
    out.table.horizon = horizon;
    out.table.coc = cfg.coc;
    out.table.seed = cfg.seed;
    out.table.labels =
        bases.empty() ? std::vector<std::string>{"1"} : bases.front().labels();
    out.table.per_time.resize(bases.size());

    using clock = std::chrono::steady_clock;
    std::vector<double> beta_v_next;
    const BasisSet* basis_next = nullptr;
    for (int t = horizon - 1; t >= 1; --t) {
        auto start = clock::now();
        StepFit sf = fit_step(model, bases[static_cast<std::size_t>(t - 1)], basis_next,
                              beta_v_next, t, cfg);
        auto& slot = out.table.per_time[static_cast<std::size_t>(t - 1)];
        slot.r = std::move(sf.beta_r);
        slot.e = std::move(sf.beta_e);
        slot.v = sf.beta_v;
        if (!sf.dropped.empty()) out.pruned_columns.emplace_back(t, std::move(sf.dropped));
        beta_v_next = std::move(sf.beta_v);
        basis_next = &bases[static_cast<std::size_t>(t - 1)];
        out.step_seconds.emplace_back(t, std::chrono::duration<double>(clock::now() - start).count());
    }

    // t = 0: S0 is constant, so the regression degenerates to its intercept.
    // That intercept is the average of the M per-replicate nested estimates,
    // which also keeps the Monte Carlo error of v0 shrinking with the outer
    // budget instead of being pinned at one inner run's worth of noise.
    auto start = clock::now();
    State s0;
    model.initial_state(s0);
    std::vector<double> r0(cfg.outer), e0(cfg.outer);
    parallel_for(
        cfg.outer, cfg.threads, [] { return InnerScratch{}; },
        [&](std::size_t i, InnerScratch& sc) {
            RngStream rng0(cfg.seed, StreamRole::time_zero, 0, i);
            CocValue cv = detail::inner_pass(model, 0, s0, cfg.inner, cfg.coc, basis_next,
                                             beta_v_next, rng0, sc);
            r0[i] = cv.r;
            e0[i] = cv.e;
        });
    double r_bar = 0.0, e_bar = 0.0;
    for (std::size_t i = 0; i < cfg.outer; ++i) {
        r_bar += r0[i];
        e_bar += e0[i];
    }
    r_bar /= static_cast<double>(cfg.outer);
    e_bar /= static_cast<double>(cfg.outer);
    out.table.time_zero = {r_bar, e_bar, r_bar - e_bar / (1.0 + cfg.coc.eta)};
    out.step_seconds.emplace_back(0, std::chrono::duration<double>(clock::now() - start).count());
    return out;
}

}  // namespace lsmcoc
