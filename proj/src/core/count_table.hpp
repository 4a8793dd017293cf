#pragma once

#include "core/rng.hpp"
#include "core/sketch.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pyramid {

struct SketchConfig {
    SketchKind kind = SketchKind::CountMin;
    uint32_t depth = 5;
    uint32_t log2_width = 20;

    uint32_t width() const { return 1u << log2_width; }
};

// Back-off knobs for conditional probabilities.
struct BackoffConfig {
    double n_min = 20.0;    // minimum effective denominator
    double v_max = 0.0125;  // maximum binomial plug-in variance of any p-hat
};

// Per-feature (or group) count store: one sketch per label value, sharing
// hash seeds, plus per-label scalar totals. Totals receive one Laplace draw
// at construction alongside the cell noise so the prior they feed is covered
// by the same budget share.
class CountTable {
public:
    CountTable(std::string table_id, size_t label_count, const SketchConfig& cfg,
               uint64_t seed, double noise_scale, Rng& noise_rng);

    CountTable(std::string table_id, std::vector<Sketch> per_label,
               std::vector<double> label_totals);

    void update(std::string_view value_key, size_t label_idx, double p);

    // Noisy count for one (value, label) cell; may be negative.
    double estimate(std::string_view value_key, size_t label_idx) const;

    bool compatible_with(const CountTable& other) const;
    void merge_from(const CountTable& other);
    void add_noise(double scale, Rng& noise_rng);

    const std::string& table_id() const { return table_id_; }
    size_t label_count() const { return per_label_.size(); }
    const std::vector<Sketch>& sketches() const { return per_label_; }
    const std::vector<double>& label_totals() const { return label_totals_; }

private:
    std::string table_id_;
    std::vector<Sketch> per_label_;
    std::vector<double> label_totals_;
};

struct ConditionalResult {
    std::vector<double> probs;  // one per label, sums to 1 unless backed off
    bool backed_off = false;
};

// P(label | value) from clamped noisy counts, falling back to the prior when
// the denominator is too small or the plug-in variance too high.
ConditionalResult conditional_probabilities(const CountTable& table,
                                            std::string_view value_key,
                                            const std::vector<double>& prior,
                                            const BackoffConfig& backoff);

}  // namespace pyramid
