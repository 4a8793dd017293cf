#include "core/smooth_sensitivity.hpp"

#include "core/distributions.hpp"
#include "core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pyramid {

size_t quantile_rank(size_t n, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValueError("quantile must be in (0,1)");
    size_t r = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
    return std::max<size_t>(1, std::min(r, n));
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValueError("quantile of empty values");
    std::sort(values.begin(), values.end());
    return values[quantile_rank(values.size(), q) - 1];
}

namespace {

void check_range(const std::vector<double>& values, double upper) {
    if (values.empty()) throw ValueError("smooth sensitivity of empty values");
    if (!(upper > 0.0)) throw ValueError("upper bound must be positive");
    for (double v : values)
        if (!(v >= 0.0 && v <= upper)) throw ValueError("value outside [0, upper]");
}

// x_i with 1-based index, padded: 0 below the array, upper above it.
double padded(const std::vector<double>& sorted, long long i, double upper) {
    if (i < 1) return 0.0;
    if (i > static_cast<long long>(sorted.size())) return upper;
    return sorted[static_cast<size_t>(i - 1)];
}

}  // namespace

double smooth_sensitivity_quantile(const std::vector<double>& values, double q,
                                   double beta, double upper) {
    check_range(values, upper);
    if (!(beta > 0.0)) throw ValueError("beta must be positive");

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const long long n = static_cast<long long>(sorted.size());
    const long long r = static_cast<long long>(quantile_rank(sorted.size(), q));

    double best = 0.0;
    for (long long t = 0; t <= n; ++t) {
        double a_t = 0.0;
        for (long long s = 0; s <= t + 1; ++s) {
            double gap = padded(sorted, r + s, upper) - padded(sorted, r + s - t - 1, upper);
            a_t = std::max(a_t, gap);
        }
        best = std::max(best, std::exp(-beta * static_cast<double>(t)) * a_t);
    }
    // Beyond t = n every A(t) is the full range; the envelope only decays.
    best = std::max(best, std::exp(-beta * static_cast<double>(n + 1)) * upper);
    return best;
}

double private_quantile_with_noise(const std::vector<double>& values, double q,
                                   double eps, double upper, double eta) {
    if (!(eps > 0.0)) throw ValueError("epsilon must be positive");
    check_range(values, upper);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double x_r = sorted[quantile_rank(sorted.size(), q) - 1];
    double s = smooth_sensitivity_quantile(values, q, eps / 6.0, upper);
    double noisy = x_r + (2.0 * s / eps) * eta;
    return std::clamp(noisy, 0.0, upper);
}

double private_quantile(const std::vector<double>& values, double q, double eps,
                        double upper, Rng& rng) {
    return private_quantile_with_noise(values, q, eps, upper,
                                       cauchy_from_uniform(1.0, rng.uniform01()));
}

std::map<std::string, double> rescale_weights(const std::map<std::string, double>& quantiles) {
    if (quantiles.empty()) throw ValueError("no quantiles to rescale");
    double lo = quantiles.begin()->second;
    double hi = lo;
    for (const auto& [id, v] : quantiles) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    std::map<std::string, double> weights;
    if (hi <= lo) {
        // Degenerate spread: fall back to the even split.
        for (const auto& [id, v] : quantiles) weights[id] = 1.0;
        return weights;
    }
    for (const auto& [id, v] : quantiles)
        weights[id] = 1.0 + (v - lo) / (hi - lo) * 9999.0;
    return weights;
}

std::map<std::string, double> compute_weights(
    const std::map<std::string, std::vector<double>>& per_feature_counts, double q,
    double eps, double upper, Rng& rng) {
    if (per_feature_counts.empty()) throw ValueError("no features to weight");

    double eps_each = eps > 0.0 ? eps / static_cast<double>(per_feature_counts.size()) : 0.0;
    std::map<std::string, double> quantiles;
    for (const auto& [feature, counts] : per_feature_counts) {
        if (counts.empty()) throw ValueError("feature has no counts: " + feature);
        if (eps > 0.0) {
            quantiles[feature] = private_quantile(counts, q, eps_each, upper, rng);
        } else {
            quantiles[feature] = empirical_quantile(counts, q);
        }
    }
    return rescale_weights(quantiles);
}

double merge_weight_estimates(const std::vector<WeightEstimate>& estimates) {
    if (estimates.empty()) throw ValueError("no weight estimates to merge");
    double num = 0.0, den = 0.0;
    for (const auto& e : estimates) {
        if (!(e.lambda > 0.0)) throw ValueError("lambda must be positive");
        double inv_var = 1.0 / (e.lambda * e.lambda);
        num += e.weight * inv_var;
        den += inv_var;
    }
    return num / den;
}

}  // namespace pyramid
