#pragma once

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <cmath>

namespace pyramid {

// One draw from Laplace(0, b) via inverse CDF.
inline double sample_laplace(double scale, Rng& rng) {
    if (!(scale > 0.0)) throw ValueError("laplace scale must be positive");
    double u = rng.uniform01() - 0.5;
    double s = u < 0.0 ? -1.0 : 1.0;
    return -scale * s * std::log(1.0 - 2.0 * std::abs(u));
}

// One draw from a Cauchy with scale gamma: gamma * tan(pi * (u - 1/2)).
inline double cauchy_from_uniform(double gamma, double u) {
    return gamma * std::tan(M_PI * (u - 0.5));
}

inline double sample_cauchy(double gamma, Rng& rng) {
    if (!(gamma > 0.0)) throw ValueError("cauchy scale must be positive");
    return cauchy_from_uniform(gamma, rng.uniform01());
}

// Laplace(0, b) CDF, used by the KS sampler checks.
inline double laplace_cdf(double x, double scale) {
    if (x < 0.0) return 0.5 * std::exp(x / scale);
    return 1.0 - 0.5 * std::exp(-x / scale);
}

}  // namespace pyramid
