#pragma once
// Markov-model interface used by the valuation engine. A model describes a
// discrete-time chain S_0, ..., S_T with a fixed initial state and a per-period
// cash flow g_t(S_t). States are flat real vectors so regression bases can read
// coordinates directly; integer quantities (cohort counts) are stored as exact
// integers in double.

#include <concepts>
#include <cstddef>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace lsmcoc {

using State = std::vector<double>;

template <class M>
concept MarkovModel = requires(const M& m, int t, const State& s, State& out, RngStream& rng) {
    { m.dim() } -> std::convertible_to<int>;
    { m.horizon() } -> std::convertible_to<int>;
    { m.initial_state(out) };
    { m.step(t, s, out, rng) };              // one transition sample S_t -> S_{t+1}
    { m.cashflow(t, s) } -> std::convertible_to<double>;
};

// One draw of S_t obtained by iterating the transition from S_0; O(t) steps.
template <MarkovModel M>
void draw_marginal(const M& model, int t, RngStream& rng, State& scratch, State& out) {
    model.initial_state(out);
    for (int u = 0; u < t; ++u) {
        model.step(u, out, scratch, rng);
        std::swap(scratch, out);
    }
}

template <MarkovModel M>
std::vector<State> simulate_marginal(const M& model, int t, std::size_t count, RngStream& rng) {
    std::vector<State> draws(count);
    State scratch;
    for (std::size_t i = 0; i < count; ++i) draw_marginal(model, t, rng, scratch, draws[i]);
    return draws;
}

}  // namespace lsmcoc
