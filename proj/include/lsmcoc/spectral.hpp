#pragma once
// Spectral risk measures: rho(sample) = -sum_j w_j y_(j) with weights
// w_j = integral of a nonincreasing density m over ((j-1)/n, j/n]. Expected
// shortfall at level gamma is the plateau density m = (1/gamma) 1{u <= gamma}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lsmcoc {

// Piecewise-constant density on [0, 1]: value v_i on [b_i, b_{i+1}). Must be
// nonnegative, nonincreasing, and integrate to 1.
class SpectralDensity {
public:
    SpectralDensity(std::vector<double> breakpoints, std::vector<double> values)
        : b_(std::move(breakpoints)), v_(std::move(values)) {
        if (b_.size() < 2 || v_.size() + 1 != b_.size())
            throw std::invalid_argument("spectral: need m+1 breakpoints for m values");
        if (b_.front() != 0.0 || b_.back() != 1.0)
            throw std::invalid_argument("spectral: breakpoints must span [0, 1]");
        double integral = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            if (!(b_[i + 1] > b_[i]))
                throw std::invalid_argument("spectral: breakpoints must be strictly increasing");
            if (!(v_[i] >= 0.0))
                throw std::invalid_argument("spectral: density values must be nonnegative");
            if (i > 0 && v_[i] > v_[i - 1] + 1e-12)
                throw std::invalid_argument("spectral: density must be nonincreasing");
            integral += v_[i] * (b_[i + 1] - b_[i]);
        }
        if (std::fabs(integral - 1.0) > 1e-10)
            throw std::invalid_argument("spectral: density must integrate to 1");
    }

    static SpectralDensity expected_shortfall(double gamma) {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("spectral: gamma must lie in (0, 1]");
        if (gamma == 1.0) return SpectralDensity({0.0, 1.0}, {1.0});
        return SpectralDensity({0.0, gamma, 1.0}, {1.0 / gamma, 0.0});
    }

    // Exact integral of the density over [a, b] within [0, 1].
    double integral(double a, double b) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            double lo = std::max(a, b_[i]);
            double hi = std::min(b, b_[i + 1]);
            if (hi > lo) sum += v_[i] * (hi - lo);
        }
        return sum;
    }

private:
    std::vector<double> b_;
    std::vector<double> v_;
};

// Sorts a copy of the sample; exact order-statistic weights, no interpolation.
inline double empirical_spectral(std::span<const double> sample, const SpectralDensity& density) {
    if (sample.empty()) throw std::invalid_argument("empirical_spectral: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        double w = density.integral(static_cast<double>(j) / n, static_cast<double>(j + 1) / n);
        acc -= w * sorted[j];
    }
    return acc;
}

}  // namespace lsmcoc
