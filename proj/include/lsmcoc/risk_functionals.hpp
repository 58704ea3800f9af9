#pragma once
// Capital and cost-of-capital functionals on a fixed inner sample:
//   R = smallest y with empirical cdf >= alpha  (the ceil(alpha*n)-th order
//       statistic, no interpolation)
//   E = (1/n) sum_j (R - y_j)_+
//   V = R - E/(1+eta)
// The quantile convention matches min{y : Fhat(y) >= alpha} exactly, ties and
// all; callers that need the input order preserved must pass a copy, since the
// quantile partially reorders the sample in place.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "errors.hpp"

namespace lsmcoc {

struct CocParams {
    double alpha = 0.995;  // capital confidence level
    double eta = 0.06;     // cost-of-capital rate

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("coc: alpha must lie in (0, 1)");
        if (!(eta >= 0.0)) throw std::invalid_argument("coc: eta must be nonnegative");
    }
};

struct CocValue {
    double r = 0.0;  // capital requirement
    double e = 0.0;  // expected shortfall of the outcome below the capital
    double v = 0.0;  // r - e/(1+eta)
};

inline void check_sample_finite(std::span<const double> sample, const char* where) {
    for (std::size_t j = 0; j < sample.size(); ++j) {
        if (!std::isfinite(sample[j]))
            throw NumericalError(std::string(where) + ": non-finite inner value at index " +
                                 std::to_string(j));
    }
}

// Partially reorders the sample (nth_element); returns the ceil(alpha*n)-th
// smallest value.
inline double empirical_quantile(std::span<double> sample, double alpha) {
    if (sample.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("empirical_quantile: alpha must lie in (0, 1)");
    const std::size_t n = sample.size();
    auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n) k = n;
    std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     sample.end());
    return sample[k - 1];
}

inline double shortfall_term(std::span<const double> sample, double r) {
    if (sample.empty()) throw std::invalid_argument("shortfall_term: empty sample");
    double sum = 0.0;
    for (double y : sample) {
        double d = r - y;
        if (d > 0.0) sum += d;
    }
    return sum / static_cast<double>(sample.size());
}

// The full functional on one inner sample. Rejects non-finite values so a bad
// draw aborts the run with a diagnostic instead of silently poisoning a fit.
inline CocValue coc_pair(std::span<double> sample, const CocParams& coc) {
    coc.validate();
    check_sample_finite(sample, "coc_pair");
    CocValue out;
    out.r = empirical_quantile(sample, coc.alpha);
    out.e = shortfall_term(sample, out.r);
    out.v = out.r - out.e / (1.0 + coc.eta);
    return out;
}

}  // namespace lsmcoc
