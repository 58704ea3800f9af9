#pragma once
// Standard normal density and distribution via the C library erfc; accurate in
// both tails and cheap enough for per-sample basis evaluation.

#include <cmath>

namespace lsmcoc {

inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490393;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818685;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

}  // namespace lsmcoc
