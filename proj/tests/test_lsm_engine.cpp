#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lsmcoc/ar_garch.hpp"
#include "lsmcoc/basis.hpp"
#include "lsmcoc/life_model.hpp"
#include "lsmcoc/lsm_engine.hpp"
#include "lsmcoc/model.hpp"
#include "lsmcoc/oracle.hpp"
#include "lsmcoc/rng.hpp"

using namespace lsmcoc;

namespace {

RunConfig small_cfg(std::size_t outer, std::size_t inner) {
    RunConfig cfg;
    cfg.outer = outer;
    cfg.inner = inner;
    cfg.threads = 1;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("run config validation") {
    RunConfig cfg = small_cfg(100, 100);  // below ceil(1/(1-alpha)) = 200
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.inner = 200;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.outer = 0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("single-period run averages the per-replicate passes at the initial state") {
    ArGarchModel model(ArGarchParams{}, 1);
    RunConfig cfg = small_cfg(50, 5000);
    RunOutput out = lsm_backward(model, {}, cfg);
    REQUIRE(out.table.horizon == 1);
    REQUIRE(out.table.labels == std::vector<std::string>{"1"});
    REQUIRE(out.table.per_time.empty());

    State s0;
    model.initial_state(s0);
    double r_bar = 0.0, e_bar = 0.0;
    for (std::size_t i = 0; i < cfg.outer; ++i) {
        RngStream rng(cfg.seed, StreamRole::time_zero, 0, i);
        CocValue direct = inner_targets(model, 0, s0, cfg.inner, cfg.coc, nullptr, {}, rng);
        r_bar += direct.r;
        e_bar += direct.e;
    }
    r_bar /= static_cast<double>(cfg.outer);
    e_bar /= static_cast<double>(cfg.outer);
    REQUIRE(out.table.time_zero.r == r_bar);
    REQUIRE(out.table.time_zero.e == e_bar);
    REQUIRE(out.table.time_zero.v == r_bar - e_bar / (1.0 + cfg.coc.eta));
}

TEST_CASE("value estimate is monotone in the capital cost rate") {
    ArGarchModel model(ArGarchParams{}, 1);
    RunConfig lo = small_cfg(10, 2000), hi = lo;
    lo.coc.eta = 0.02;
    hi.coc.eta = 0.06;
    double v_lo = lsm_backward(model, {}, lo).table.time_zero.v;
    double v_hi = lsm_backward(model, {}, hi).table.time_zero.v;
    REQUIRE(v_hi >= v_lo);  // same draws, v = r - e/(1+eta) with e >= 0
}

TEST_CASE("fit_step input validation") {
    ArGarchModel model(ArGarchParams{}, 3);
    BasisSet basis = build_basis_ar_garch(1);
    RunConfig cfg = small_cfg(300, 400);
    REQUIRE_THROWS_AS(fit_step(model, basis, nullptr, {}, 0, cfg), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_step(model, basis, nullptr, {}, 3, cfg), std::invalid_argument);
    cfg.outer = 4;  // fewer rows than the 6 basis functions
    REQUIRE_THROWS_AS(fit_step(model, basis, nullptr, {}, 2, cfg), std::invalid_argument);
}

TEST_CASE("backward recursion rejects inconsistent bases") {
    ArGarchModel model(ArGarchParams{}, 3);
    RunConfig cfg = small_cfg(50, 300);
    std::vector<BasisSet> one = {build_basis_ar_garch(1)};
    REQUIRE_THROWS_AS(lsm_backward(model, one, cfg), std::invalid_argument);

    auto eval2 = [](const State& s, double* out) {
        out[0] = 1.0;
        out[1] = s[0];
    };
    std::vector<BasisSet> mismatched = {BasisSet(1, {"1", "L"}, eval2),
                                        BasisSet(2, {"1", "M"}, eval2)};
    REQUIRE_THROWS_AS(lsm_backward(model, mismatched, cfg), std::invalid_argument);
}

TEST_CASE("coefficients satisfy the capital identity across targets") {
    ArGarchModel model(ArGarchParams{}, 4);
    std::vector<BasisSet> bases = {build_basis_ar_garch(1), build_basis_ar_garch(2),
                                   build_basis_ar_garch(3)};
    RunConfig cfg = small_cfg(400, 500);
    RunOutput out = lsm_backward(model, bases, cfg);
    const double disc = 1.0 + cfg.coc.eta;
    for (const auto& slot : out.table.per_time) {
        REQUIRE(slot.r.size() == 6);
        for (std::size_t j = 0; j < slot.r.size(); ++j)
            REQUIRE(slot.v[j] == Catch::Approx(slot.r[j] - slot.e[j] / disc).epsilon(1e-14));
    }
    REQUIRE(out.table.time_zero.v ==
            Catch::Approx(out.table.time_zero.r - out.table.time_zero.e / disc).epsilon(1e-14));
    REQUIRE(out.step_seconds.size() == 4);  // t = 3, 2, 1 fits plus the time-zero pass
}

TEST_CASE("results are bit-identical across thread counts and reruns") {
    ArGarchModel model(ArGarchParams{}, 3);
    std::vector<BasisSet> bases = {build_basis_ar_garch(1), build_basis_ar_garch(2)};
    RunConfig cfg = small_cfg(300, 400);
    cfg.threads = 1;
    RunOutput a = lsm_backward(model, bases, cfg);
    cfg.threads = 4;
    RunOutput b = lsm_backward(model, bases, cfg);
    RunOutput c = lsm_backward(model, bases, cfg);

    auto same = [](const CoefficientTable& x, const CoefficientTable& y) {
        REQUIRE(x.per_time.size() == y.per_time.size());
        for (std::size_t i = 0; i < x.per_time.size(); ++i) {
            REQUIRE(x.per_time[i].r == y.per_time[i].r);
            REQUIRE(x.per_time[i].e == y.per_time[i].e);
            REQUIRE(x.per_time[i].v == y.per_time[i].v);
        }
        REQUIRE(x.time_zero.r == y.time_zero.r);
        REQUIRE(x.time_zero.e == y.time_zero.e);
        REQUIRE(x.time_zero.v == y.time_zero.v);
    };
    same(a.table, b.table);
    same(b.table, c.table);
}

TEST_CASE("fit_step records outer states and targets per index") {
    ArGarchModel model(ArGarchParams{}, 2);
    BasisSet basis = build_basis_ar_garch(1);
    RunConfig cfg = small_cfg(10, 300);
    cfg.threads = 1;
    StepFit sf1 = fit_step(model, basis, nullptr, {}, 1, cfg);
    cfg.threads = 3;
    StepFit sf3 = fit_step(model, basis, nullptr, {}, 1, cfg);
    REQUIRE(sf1.targets_r == sf3.targets_r);
    REQUIRE(sf1.targets_e == sf3.targets_e);
    REQUIRE(sf1.states_flat == sf3.states_flat);
    REQUIRE(sf1.states_flat.size() == 10 * 2);

    // each recorded state reproduces its design row
    for (std::size_t i = 0; i < 10; ++i) {
        State s{sf1.states_flat[2 * i], sf1.states_flat[2 * i + 1]};
        auto phi = basis.evaluate(s);
        for (std::size_t j = 0; j < phi.size(); ++j)
            REQUIRE(sf1.design.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                    phi[j]);
    }
}

TEST_CASE("support-starved payoff columns are excluded from the fit") {
    LifeParams p;
    p.cohorts = {{1000.0, 50.0}};
    LifeModel model(p, 2);
    // at t = 1 the fund sits near 100: (F-103)+ is dense, while (F-124)+
    // touches only a handful of the 200 outer draws and must not reach the
    // solver, where its six-member product family would interpolate them
    BasisSet basis = build_basis_life(p, 1, 2, {124.0, 103.0});
    RunConfig cfg = small_cfg(200, 300);
    StepFit sf = fit_step(model, basis, nullptr, {}, 1, cfg);

    auto dropped = [&](const std::string& label) {
        return std::find(sf.dropped.begin(), sf.dropped.end(), label) != sf.dropped.end();
    };
    const auto& labels = basis.labels();
    for (std::size_t j = 0; j < labels.size(); ++j) {
        REQUIRE(std::isfinite(sf.beta_v[j]));
        if (labels[j].find("(F-124)+") == std::string::npos) continue;
        INFO("feature " << labels[j]);
        REQUIRE(dropped(labels[j]));
        REQUIRE(sf.beta_r[j] == 0.0);
        REQUIRE(sf.beta_e[j] == 0.0);
        REQUIRE(sf.beta_v[j] == 0.0);
    }
    REQUIRE_FALSE(dropped("sd*(F-103)+"));
}

TEST_CASE("penultimate-step surface tracks the closed form at small scale") {
    ArGarchParams params;
    ArGarchModel model(params, 2);
    std::vector<BasisSet> bases = {build_basis_ar_garch(1)};
    RunConfig cfg = small_cfg(400, 2000);
    RunOutput out = lsm_backward(model, bases, cfg);
    const auto& beta_v = out.table.per_time[0].v;

    // at t = 1 the squared volatility is still an exact affine function of
    // {1, L^2}, so exactly one of those three columns must have been pruned
    REQUIRE(out.pruned_columns.size() == 1);
    REQUIRE(out.pruned_columns[0].first == 1);
    const auto& dropped = out.pruned_columns[0].second;
    REQUIRE(dropped.size() == 1);
    REQUIRE((dropped[0] == "1" || dropped[0] == "L^2" || dropped[0] == "sigma^2"));

    RngStream rng(991);
    State scratch, s;
    double num = 0.0, den = 0.0;
    std::vector<double> phi(bases[0].size());
    for (int i = 0; i < 2000; ++i) {
        draw_marginal(model, 1, rng, scratch, s);
        bases[0].evaluate(s, phi.data());
        double fitted = predict(beta_v, phi);
        double exact = closed_form_terminal_ar_garch(params, s[0], s[1], cfg.coc);
        num += (fitted - exact) * (fitted - exact);
        den += exact * exact;
    }
    REQUIRE(std::sqrt(num / den) < 0.05);
}

TEST_CASE("sum model runs through the full recursion") {
    ArGarchSumModel model(ArGarchParams{}, 2, 2);
    std::vector<BasisSet> bases = {build_basis_ar_garch_sum(1, 2)};
    RunConfig cfg = small_cfg(200, 300);
    RunOutput out = lsm_backward(model, bases, cfg);
    REQUIRE(std::isfinite(out.table.time_zero.v));
    for (double b : out.table.per_time[0].v) REQUIRE(std::isfinite(b));
}
