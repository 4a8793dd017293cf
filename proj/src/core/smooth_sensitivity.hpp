#pragma once

#include "core/rng.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace pyramid {

// 1-indexed quantile rank on the sorted array: r = ceil(q * n).
size_t quantile_rank(size_t n, double q);

// Exact empirical quantile (value at the quantile rank).
double empirical_quantile(std::vector<double> values, double q);

// Smooth sensitivity of the q-quantile over values in [0, upper], J-List
// style: S = max over t >= 0 of exp(-beta*t) * A(t), with
// A(t) = max over 0 <= s <= t+1 of (x[r+s] - x[r+s-t-1]) on the sorted array
// padded with 0 below and `upper` above. The scan stops at t = n and takes
// one extra term with A = upper so the result stays an upper bound.
double smooth_sensitivity_quantile(const std::vector<double>& values, double q,
                                   double beta, double upper);

// Quantile release with Cauchy noise calibrated to the smooth sensitivity:
// clamp(x_r + (2*S/eps) * eta, 0, upper) with beta = eps/6. The *_with_noise
// variant takes eta directly (test hook); the other draws a standard Cauchy.
double private_quantile_with_noise(const std::vector<double>& values, double q,
                                   double eps, double upper, double eta);
double private_quantile(const std::vector<double>& values, double q, double eps,
                        double upper, Rng& rng);

// Per-feature weights from count quantiles, affinely rescaled onto
// [1, 10000] (min -> 1, max -> 10000; all-equal or single feature -> all 1).
// When eps > 0 the quantiles are released privately with the budget shared
// evenly across features; eps == 0 computes exact (non-private) quantiles.
std::map<std::string, double> compute_weights(
    const std::map<std::string, std::vector<double>>& per_feature_counts, double q,
    double eps, double upper, Rng& rng);

// Affine rescale used by compute_weights, exposed for direct checks.
std::map<std::string, double> rescale_weights(const std::map<std::string, double>& quantiles);

struct WeightEstimate {
    double weight;  // w_i measured on window i
    double lambda;  // noise scale used for that measurement
};

// Precision-weighted mean: sum(w_i / l_i^2) / sum(1 / l_i^2).
double merge_weight_estimates(const std::vector<WeightEstimate>& estimates);

}  // namespace pyramid
