#pragma once
// One-year death probabilities. A mortality law maps age (in years, at the
// start of the period) to the probability of dying within the year:
//   q(a) = 1 - exp(-\int_a^{a+1} mu_x dx).

#include <cmath>
#include <functional>
#include <stdexcept>

namespace lsmcoc {

// Hazard mu_x = a + b*exp(c*x). The one-year integrated hazard has the closed
// form a + (b/c) * (e^{c(x+1)} - e^{c x}).
struct MakehamParams {
    double a = 0.001;
    double b = 0.000012;
    double c = 0.101314;
    double age_shift = 0.0;  // female mortality: male law shifted back 6 years
};

inline double makeham_integrated_hazard(const MakehamParams& p, double age) {
    double x = age - p.age_shift;
    return p.a + (p.b / p.c) * (std::exp(p.c * (x + 1.0)) - std::exp(p.c * x));
}

inline double makeham_death_prob(const MakehamParams& p, double age) {
    return -std::expm1(-makeham_integrated_hazard(p, age));
}

// Generic law so tests can substitute constant or degenerate mortality.
using MortalityLaw = std::function<double(double age)>;

inline MortalityLaw makeham_law(bool female = false) {
    MakehamParams p;
    if (female) p.age_shift = 6.0;
    return [p](double age) { return makeham_death_prob(p, age); };
}

inline MortalityLaw constant_mortality(double q) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("constant_mortality: q must lie in [0, 1]");
    return [q](double) { return q; };
}

}  // namespace lsmcoc
