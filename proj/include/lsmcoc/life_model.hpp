#pragma once
// Joint financial/demographic model for a portfolio of endowment-style
// contracts. The financial pair (Y, F) is a correlated geometric Brownian
// motion sampled exactly on unit time steps; cohort counts thin by independent
// binomial survival draws with one-year death probabilities from a mortality
// law. Each death during (t-1, t] pays max(death_benefit, F_t) - c*Y_t at t;
// survivors at the terminal date receive max(survival_benefit, F_T) - c*Y_T.
//
// The state carries the previous-period counts so the period cash flow is a
// function of the current state alone:
//   state = (Y_t, F_t, N_t^1..N_t^k, N_{t-1}^1..N_{t-1}^k)

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "mortality.hpp"

namespace lsmcoc {

struct Cohort {
    double size = 1000.0;  // initial count, a nonnegative integer
    double age = 50.0;     // age at time 0
};

struct LifeParams {
    double mu_y = 0.03;
    double mu_f = 0.03;
    double sigma_y = 0.1;
    double sigma_f = 0.1;
    double rho = 0.4;
    double y0 = 100.0;
    double f0 = 100.0;
    double death_benefit = 100.0;     // floor of the per-death payout
    double survival_benefit = 110.0;  // floor of the terminal per-survivor payout
    double premium_offset = 1.0;      // c: every payout is reduced by c*Y_t
    std::vector<Cohort> cohorts;
    MortalityLaw mortality = makeham_law(false);

    void validate() const {
        if (!(sigma_y > 0.0) || !(sigma_f > 0.0))
            throw std::invalid_argument("life: sigma_y and sigma_f must be positive");
        if (!(rho > -1.0 && rho < 1.0))
            throw std::invalid_argument("life: rho must lie in (-1, 1)");
        if (!(y0 > 0.0) || !(f0 > 0.0))
            throw std::invalid_argument("life: y0 and f0 must be positive");
        if (cohorts.empty()) throw std::invalid_argument("life: need at least one cohort");
        for (const auto& c : cohorts) {
            if (!(c.size >= 0.0) || c.size != std::floor(c.size))
                throw std::invalid_argument("life: cohort sizes must be nonnegative integers");
        }
        if (!mortality) throw std::invalid_argument("life: mortality law not set");
    }
};

// Period cash flow given the death and survivor counts at time t.
inline double life_cashflow(const LifeParams& p, int t, int horizon, double y, double f,
                            double deaths, double survivors) {
    if (deaths < 0.0)
        throw std::invalid_argument("life_cashflow: negative death count (" +
                                    std::to_string(deaths) + ") at t=" + std::to_string(t));
    double flow = (std::max(p.death_benefit, f) - p.premium_offset * y) * deaths;
    if (t == horizon)
        flow += (std::max(p.survival_benefit, f) - p.premium_offset * y) * survivors;
    return flow;
}

class LifeModel {
public:
    LifeModel(const LifeParams& p, int horizon) : p_(p), horizon_(horizon) {
        p_.validate();
        if (horizon_ < 1) throw std::invalid_argument("life: horizon must be >= 1");
        k_ = p_.cohorts.size();
        // Death probabilities are fixed by age + elapsed time; precompute the
        // full (cohort, period) grid once.
        death_prob_.assign(k_, std::vector<double>(static_cast<std::size_t>(horizon_), 0.0));
        for (std::size_t i = 0; i < k_; ++i) {
            for (int t = 0; t < horizon_; ++t) {
                double q = p_.mortality(p_.cohorts[i].age + t);
                if (!(q >= 0.0 && q <= 1.0))
                    throw std::invalid_argument(
                        "life: mortality law returned a probability outside [0, 1] at age " +
                        std::to_string(p_.cohorts[i].age + t));
                death_prob_[i][static_cast<std::size_t>(t)] = q;
            }
        }
        drift_y_ = p_.mu_y - 0.5 * p_.sigma_y * p_.sigma_y;
        drift_f_ = p_.mu_f - 0.5 * p_.sigma_f * p_.sigma_f;
        rho_c_ = std::sqrt(1.0 - p_.rho * p_.rho);
    }

    int dim() const { return static_cast<int>(2 + 2 * k_); }
    int horizon() const { return horizon_; }
    std::size_t cohort_count() const { return k_; }

    // q for deaths during (t, t+1) of cohort i.
    double death_prob(std::size_t cohort, int t) const {
        return death_prob_[cohort][static_cast<std::size_t>(t)];
    }

    void initial_state(State& s) const {
        s.resize(static_cast<std::size_t>(dim()));
        s[0] = p_.y0;
        s[1] = p_.f0;
        for (std::size_t i = 0; i < k_; ++i) {
            s[2 + i] = p_.cohorts[i].size;
            s[2 + k_ + i] = p_.cohorts[i].size;  // no deaths before time 0
        }
    }

    void step(int t, const State& s, State& out, RngStream& rng) const {
        out.resize(static_cast<std::size_t>(dim()));
        double w1 = rng.normal();
        double w2 = rng.normal();
        out[0] = s[0] * std::exp(drift_y_ + p_.sigma_y * w1);
        out[1] = s[1] * std::exp(drift_f_ + p_.sigma_f * (p_.rho * w1 + rho_c_ * w2));
        for (std::size_t i = 0; i < k_; ++i) {
            double survive = 1.0 - death_prob_[i][static_cast<std::size_t>(t)];
            out[2 + i] = rng.binomial(s[2 + i], survive);
            out[2 + k_ + i] = s[2 + i];
        }
    }

    double cashflow(int t, const State& s) const {
        double deaths = 0.0, survivors = 0.0;
        for (std::size_t i = 0; i < k_; ++i) {
            deaths += s[2 + k_ + i] - s[2 + i];
            survivors += s[2 + i];
        }
        return life_cashflow(p_, t, horizon_, s[0], s[1], deaths, survivors);
    }

    const LifeParams& params() const { return p_; }

private:
    LifeParams p_;
    int horizon_;
    std::size_t k_ = 0;
    std::vector<std::vector<double>> death_prob_;  // [cohort][t]
    double drift_y_ = 0.0, drift_f_ = 0.0, rho_c_ = 1.0;
};

}  // namespace lsmcoc
