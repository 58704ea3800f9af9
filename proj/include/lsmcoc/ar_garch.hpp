#pragma once
// AR(1) level process with a GARCH(1,1)-style conditional variance driven by
// the level:
//   L_{t+1}       = a0 + a1*L_t + sigma_{t+1} * eps_{t+1},   eps iid N(0,1)
//   sigma_{t+2}^2 = a2 + a3*sigma_{t+1}^2 + a4*L_{t+1}^2
// The state at time t is (L_t, sigma_{t+1}): the level just realized and the
// volatility that will drive the next step. The period cash flow is the level.

#include <cmath>
#include <stdexcept>
#include <string>

#include "model.hpp"

namespace lsmcoc {

struct ArGarchParams {
    double a0 = 1.0;
    double a1 = 1.0;
    double a2 = 0.1;
    double a3 = 0.1;
    double a4 = 0.1;
    double l0 = 0.0;      // L_0
    double sigma1 = 1.0;  // sigma_1, the first conditional volatility

    void validate() const {
        if (!(a2 >= 0.0) || !(a3 >= 0.0) || !(a4 >= 0.0))
            throw std::invalid_argument("ar-garch: a2, a3, a4 must be nonnegative");
        if (!(sigma1 > 0.0))
            throw std::invalid_argument("ar-garch: sigma1 must be positive");
    }
};

// One transition given the innovation; deterministic in (state, z).
inline void ar_garch_step(const ArGarchParams& p, double l, double sigma, double z,
                          double& l_next, double& sigma_next) {
    l_next = p.a0 + p.a1 * l + sigma * z;
    sigma_next = std::sqrt(p.a2 + p.a3 * sigma * sigma + p.a4 * l_next * l_next);
}

class ArGarchModel {
public:
    ArGarchModel(const ArGarchParams& p, int horizon) : p_(p), horizon_(horizon) {
        p_.validate();
        if (horizon_ < 1) throw std::invalid_argument("ar-garch: horizon must be >= 1");
    }

    int dim() const { return 2; }
    int horizon() const { return horizon_; }

    void initial_state(State& s) const {
        s.resize(2);
        s[0] = p_.l0;
        s[1] = p_.sigma1;
    }

    void step(int /*t*/, const State& s, State& out, RngStream& rng) const {
        out.resize(2);
        ar_garch_step(p_, s[0], s[1], rng.normal(), out[0], out[1]);
    }

    double cashflow(int /*t*/, const State& s) const { return s[0]; }

    const ArGarchParams& params() const { return p_; }

private:
    ArGarchParams p_;
    int horizon_;
};

// Sum of independent copies; the state stacks all component states as
// (L_1..L_k, sigma_1..sigma_k) and the cash flow is the aggregate level.
class ArGarchSumModel {
public:
    ArGarchSumModel(const ArGarchParams& p, int components, int horizon)
        : p_(p), k_(components), horizon_(horizon) {
        p_.validate();
        if (k_ < 1) throw std::invalid_argument("ar-garch-sum: need at least one component");
        if (horizon_ < 1) throw std::invalid_argument("ar-garch-sum: horizon must be >= 1");
    }

    int dim() const { return 2 * k_; }
    int horizon() const { return horizon_; }
    int components() const { return k_; }

    void initial_state(State& s) const {
        s.assign(static_cast<std::size_t>(2 * k_), 0.0);
        for (int i = 0; i < k_; ++i) {
            s[static_cast<std::size_t>(i)] = p_.l0;
            s[static_cast<std::size_t>(k_ + i)] = p_.sigma1;
        }
    }

    void step(int /*t*/, const State& s, State& out, RngStream& rng) const {
        out.resize(static_cast<std::size_t>(2 * k_));
        for (int i = 0; i < k_; ++i) {
            ar_garch_step(p_, s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(k_ + i)],
                          rng.normal(), out[static_cast<std::size_t>(i)],
                          out[static_cast<std::size_t>(k_ + i)]);
        }
    }

    double cashflow(int /*t*/, const State& s) const {
        double sum = 0.0;
        for (int i = 0; i < k_; ++i) sum += s[static_cast<std::size_t>(i)];
        return sum;
    }

    const ArGarchParams& params() const { return p_; }

private:
    ArGarchParams p_;
    int k_;
    int horizon_;
};

}  // namespace lsmcoc
