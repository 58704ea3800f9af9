#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lsmcoc/ar_garch.hpp"
#include "lsmcoc/life_model.hpp"
#include "lsmcoc/model.hpp"
#include "lsmcoc/mortality.hpp"
#include "lsmcoc/rng.hpp"

using namespace lsmcoc;

TEST_CASE("rng substreams are reproducible and role-separated") {
    RngStream a(42, StreamRole::outer, 3, 17);
    RngStream b(42, StreamRole::outer, 3, 17);
    for (int i = 0; i < 8; ++i) REQUIRE(a.normal() == b.normal());

    RngStream c(42, StreamRole::inner, 3, 17);
    RngStream d(42, StreamRole::outer, 3, 18);
    RngStream e(42, StreamRole::outer, 4, 17);
    RngStream base(42, StreamRole::outer, 3, 17);
    double x = base.normal();
    REQUIRE(x != c.normal());
    REQUIRE(x != d.normal());
    REQUIRE(x != e.normal());
}

TEST_CASE("rng streams are copyable and replay from the copy point") {
    RngStream a(7);
    a.normal();
    RngStream b = a;
    for (int i = 0; i < 5; ++i) REQUIRE(a.normal() == b.normal());
}

TEST_CASE("binomial draws respect edge cases and stay integral") {
    RngStream rng(1);
    REQUIRE(rng.binomial(0.0, 0.5) == 0.0);
    REQUIRE(rng.binomial(100.0, 0.0) == 0.0);
    REQUIRE(rng.binomial(100.0, -0.1) == 0.0);
    REQUIRE(rng.binomial(100.0, 1.0) == 100.0);
    for (int i = 0; i < 200; ++i) {
        double v = rng.binomial(37.0, 0.3);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 37.0);
        REQUIRE(v == std::floor(v));
    }
}

TEST_CASE("binomial mean matches n*p") {
    RngStream rng(2);
    double sum = 0.0;
    const int reps = 10000;
    for (int i = 0; i < reps; ++i) sum += rng.binomial(100.0, 0.3);
    REQUIRE(sum / reps == Catch::Approx(30.0).margin(0.5));
}

namespace {

// Composite Simpson quadrature of the Makeham hazard over one year; the
// independent check for the closed-form integrated hazard.
double simpson_hazard(const MakehamParams& p, double age) {
    auto mu = [&](double x) { return p.a + p.b * std::exp(p.c * (x - p.age_shift)); };
    const int n = 200;  // must be even
    double h = 1.0 / n;
    double acc = mu(age) + mu(age + 1.0);
    for (int i = 1; i < n; ++i) acc += mu(age + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("makeham integrated hazard matches quadrature") {
    MakehamParams p;
    for (double age : {0.0, 30.5, 50.0, 65.0, 80.0, 100.0}) {
        double closed = makeham_integrated_hazard(p, age);
        REQUIRE(closed == Catch::Approx(simpson_hazard(p, age)).epsilon(0).margin(1e-12));
    }
    MakehamParams f = p;
    f.age_shift = 6.0;
    REQUIRE(makeham_integrated_hazard(f, 56.0) ==
            Catch::Approx(makeham_integrated_hazard(p, 50.0)).epsilon(1e-15));
}

TEST_CASE("makeham death probabilities match frozen references") {
    auto male = makeham_law(false);
    REQUIRE(male(50.0) == Catch::Approx(0.00299707807454841).epsilon(1e-13));
    REQUIRE(male(80.0) == Catch::Approx(0.04191542227159743).epsilon(1e-13));
    auto female = makeham_law(true);
    REQUIRE(female(56.0) == Catch::Approx(male(50.0)).epsilon(1e-15));
    for (double a = 20.0; a < 100.0; a += 1.0) REQUIRE(male(a + 1.0) > male(a));
}

TEST_CASE("constant mortality validates its argument") {
    REQUIRE_THROWS_AS(constant_mortality(-0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(constant_mortality(1.5), std::invalid_argument);
    REQUIRE(constant_mortality(0.25)(83.0) == 0.25);
}

TEST_CASE("ar-garch parameter validation") {
    ArGarchParams p;
    p.a2 = -0.1;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = ArGarchParams{};
    p.sigma1 = 0.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("ar-garch transition fixture") {
    ArGarchParams p;  // (1, 1, 0.1, 0.1, 0.1)
    double l1 = 0.0, s1 = 0.0;
    ar_garch_step(p, 0.0, 1.0, 0.5, l1, s1);
    REQUIRE(l1 == 1.5);
    REQUIRE(s1 == Catch::Approx(std::sqrt(0.1 + 0.1 * 1.0 + 0.1 * 2.25)).epsilon(1e-15));
}

TEST_CASE("ar-garch model step consumes one normal and matches the raw transition") {
    ArGarchModel model(ArGarchParams{}, 4);
    State s{0.3, 1.2}, out;
    RngStream rng(11, StreamRole::inner, 1, 5);
    RngStream probe = rng;
    double z = probe.normal();
    model.step(1, s, out, rng);
    double l1 = 0.0, s1 = 0.0;
    ar_garch_step(model.params(), s[0], s[1], z, l1, s1);
    REQUIRE(out[0] == l1);
    REQUIRE(out[1] == s1);
    REQUIRE(model.cashflow(2, out) == out[0]);
}

TEST_CASE("ar-garch marginal moments at t=1") {
    ArGarchModel model(ArGarchParams{}, 3);
    RngStream rng(5);
    auto draws = simulate_marginal(model, 1, 20000, rng);
    double mean = 0.0, var = 0.0;
    for (const auto& s : draws) mean += s[0];
    mean /= static_cast<double>(draws.size());
    for (const auto& s : draws) var += (s[0] - mean) * (s[0] - mean);
    var /= static_cast<double>(draws.size());
    // L_1 = a0 + a1*l0 + sigma1*eps ~ N(1, 1)
    REQUIRE(mean == Catch::Approx(1.0).margin(0.05));
    REQUIRE(var == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("sum model stacks independent components") {
    ArGarchParams p;
    ArGarchSumModel model(p, 3, 4);
    REQUIRE(model.dim() == 6);
    State s0;
    model.initial_state(s0);
    REQUIRE(s0 == State{0, 0, 0, 1, 1, 1});

    RngStream rng(9, StreamRole::outer, 2, 0);
    RngStream probe = rng;
    State out;
    model.step(0, s0, out, rng);
    for (int i = 0; i < 3; ++i) {
        double z = probe.normal();
        double l1 = 0.0, s1 = 0.0;
        ar_garch_step(p, s0[static_cast<std::size_t>(i)], s0[static_cast<std::size_t>(3 + i)], z,
                      l1, s1);
        REQUIRE(out[static_cast<std::size_t>(i)] == l1);
        REQUIRE(out[static_cast<std::size_t>(3 + i)] == s1);
    }
    REQUIRE(model.cashflow(1, out) == out[0] + out[1] + out[2]);
}

TEST_CASE("life parameter validation") {
    LifeParams p;
    p.cohorts = {{100.0, 50.0}};
    p.rho = 1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = LifeParams{};
    p.cohorts = {{100.5, 50.0}};
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = LifeParams{};
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);  // no cohorts
}

TEST_CASE("life cashflow fixtures") {
    LifeParams p;
    p.cohorts = {{10.0, 50.0}};
    // death benefit floor 100, survival floor 110, premium offset 1
    REQUIRE(life_cashflow(p, 2, 6, 100.0, 120.0, 2.0, 8.0) == 40.0);
    REQUIRE(life_cashflow(p, 6, 6, 100.0, 120.0, 2.0, 8.0) == 40.0 + (120.0 - 100.0) * 8.0);
    // floors bind when the fund is low
    REQUIRE(life_cashflow(p, 3, 6, 80.0, 70.0, 2.0, 8.0) == (100.0 - 80.0) * 2.0);
    REQUIRE(life_cashflow(p, 6, 6, 80.0, 70.0, 2.0, 8.0) ==
            (100.0 - 80.0) * 2.0 + (110.0 - 80.0) * 8.0);
    REQUIRE_THROWS_AS(life_cashflow(p, 1, 6, 100.0, 100.0, -1.0, 8.0), std::invalid_argument);
}

TEST_CASE("life state evolution keeps cohort bookkeeping consistent") {
    LifeParams p;
    p.cohorts = {{1000.0, 50.0}, {0.0, 60.0}, {500.0, 80.0}};
    LifeModel model(p, 6);
    REQUIRE(model.dim() == 8);

    State s;
    model.initial_state(s);
    REQUIRE(s[0] == 100.0);
    REQUIRE(s[1] == 100.0);
    REQUIRE(s[2] == 1000.0);
    REQUIRE(s[3] == 0.0);
    REQUIRE(s[4] == 500.0);
    REQUIRE(s[5] == 1000.0);
    REQUIRE(s[6] == 0.0);
    REQUIRE(s[7] == 500.0);

    RngStream rng(3);
    State cur = s, nxt;
    for (int t = 0; t < 6; ++t) {
        model.step(t, cur, nxt, rng);
        REQUIRE(nxt[0] > 0.0);
        REQUIRE(nxt[1] > 0.0);
        for (std::size_t i = 0; i < 3; ++i) {
            double prev = cur[2 + i], now = nxt[2 + i];
            REQUIRE(now == std::floor(now));
            REQUIRE(now >= 0.0);
            REQUIRE(now <= prev);          // cohorts only shrink
            REQUIRE(nxt[5 + i] == prev);   // last period's count is carried along
        }
        REQUIRE(nxt[3] == 0.0);  // the empty cohort stays extinct
        REQUIRE(model.cashflow(t + 1, nxt) ==
                life_cashflow(p, t + 1, 6, nxt[0], nxt[1],
                              (cur[2] - nxt[2]) + (cur[3] - nxt[3]) + (cur[4] - nxt[4]),
                              nxt[2] + nxt[3] + nxt[4]));
        cur = nxt;
    }
}

TEST_CASE("life fund dynamics have the exact lognormal moments and correlation") {
    LifeParams p;
    p.cohorts = {{10.0, 50.0}};
    LifeModel model(p, 3);
    State s0;
    model.initial_state(s0);

    const int reps = 20000;
    double my = 0.0, mf = 0.0;
    std::vector<double> ly(reps), lf(reps);
    RngStream rng(17);
    State out;
    for (int i = 0; i < reps; ++i) {
        model.step(0, s0, out, rng);
        my += out[0];
        mf += out[1];
        ly[static_cast<std::size_t>(i)] = std::log(out[0] / 100.0);
        lf[static_cast<std::size_t>(i)] = std::log(out[1] / 100.0);
    }
    my /= reps;
    mf /= reps;
    REQUIRE(my == Catch::Approx(100.0 * std::exp(0.03)).margin(0.5));
    REQUIRE(mf == Catch::Approx(100.0 * std::exp(0.03)).margin(0.5));

    double may = 0.0, maf = 0.0;
    for (int i = 0; i < reps; ++i) {
        may += ly[static_cast<std::size_t>(i)];
        maf += lf[static_cast<std::size_t>(i)];
    }
    may /= reps;
    maf /= reps;
    double cyy = 0.0, cff = 0.0, cyf = 0.0;
    for (int i = 0; i < reps; ++i) {
        double dy = ly[static_cast<std::size_t>(i)] - may;
        double df = lf[static_cast<std::size_t>(i)] - maf;
        cyy += dy * dy;
        cff += df * df;
        cyf += dy * df;
    }
    REQUIRE(cyf / std::sqrt(cyy * cff) == Catch::Approx(0.4).margin(0.05));
}

TEST_CASE("life survival thinning matches the mortality law") {
    LifeParams p;
    p.cohorts = {{1000.0, 50.0}};
    LifeModel model(p, 3);
    REQUIRE(model.death_prob(0, 0) == Catch::Approx(p.mortality(50.0)).epsilon(1e-15));
    REQUIRE(model.death_prob(0, 2) == Catch::Approx(p.mortality(52.0)).epsilon(1e-15));

    State s0, out;
    model.initial_state(s0);
    RngStream rng(23);
    double mean = 0.0;
    const int reps = 5000;
    for (int i = 0; i < reps; ++i) {
        model.step(0, s0, out, rng);
        mean += out[2];
    }
    mean /= reps;
    REQUIRE(mean == Catch::Approx(1000.0 * (1.0 - p.mortality(50.0))).margin(0.2));
}

TEST_CASE("draw_marginal at t=0 returns the initial state") {
    ArGarchModel model(ArGarchParams{}, 3);
    RngStream rng(1);
    State scratch, out;
    draw_marginal(model, 0, rng, scratch, out);
    REQUIRE(out == State{0.0, 1.0});
}
