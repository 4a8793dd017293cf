#include "core/count_table.hpp"

#include "core/distributions.hpp"
#include "core/errors.hpp"

#include <cmath>

namespace pyramid {

CountTable::CountTable(std::string table_id, size_t label_count, const SketchConfig& cfg,
                       uint64_t seed, double noise_scale, Rng& noise_rng)
    : table_id_(std::move(table_id)) {
    if (label_count < 2) throw SchemaError("count table needs >= 2 labels");
    per_label_.reserve(label_count);
    label_totals_.reserve(label_count);
    for (size_t i = 0; i < label_count; ++i) {
        // Same seed across labels: rows of one table share hash functions.
        per_label_.emplace_back(cfg.kind, cfg.depth, cfg.width(), seed, noise_scale,
                                noise_rng);
        label_totals_.push_back(noise_scale > 0.0 ? sample_laplace(noise_scale, noise_rng)
                                                  : 0.0);
    }
}

CountTable::CountTable(std::string table_id, std::vector<Sketch> per_label,
                       std::vector<double> label_totals)
    : table_id_(std::move(table_id)),
      per_label_(std::move(per_label)),
      label_totals_(std::move(label_totals)) {
    if (per_label_.size() < 2 || per_label_.size() != label_totals_.size())
        throw DimensionError("count table label arity mismatch");
}

void CountTable::update(std::string_view value_key, size_t label_idx, double p) {
    if (label_idx >= per_label_.size()) throw SchemaError("label index out of range");
    if (!(p > 0.0 && p <= 1.0)) throw ValueError("importance probability must be in (0,1]");
    double delta = 1.0 / p;
    per_label_[label_idx].update(value_key, delta);
    label_totals_[label_idx] += delta;
}

double CountTable::estimate(std::string_view value_key, size_t label_idx) const {
    if (label_idx >= per_label_.size()) throw SchemaError("label index out of range");
    return per_label_[label_idx].estimate(value_key);
}

bool CountTable::compatible_with(const CountTable& other) const {
    if (table_id_ != other.table_id_ || per_label_.size() != other.per_label_.size())
        return false;
    for (size_t i = 0; i < per_label_.size(); ++i)
        if (!per_label_[i].compatible_with(other.per_label_[i])) return false;
    return true;
}

void CountTable::merge_from(const CountTable& other) {
    if (!compatible_with(other)) throw CompatibilityError("count tables not compatible");
    for (size_t i = 0; i < per_label_.size(); ++i) {
        per_label_[i].merge_from(other.per_label_[i]);
        label_totals_[i] += other.label_totals_[i];
    }
}

void CountTable::add_noise(double scale, Rng& noise_rng) {
    for (auto& sketch : per_label_) sketch.add_noise(scale, noise_rng);
    if (scale > 0.0)
        for (double& t : label_totals_) t += sample_laplace(scale, noise_rng);
}

ConditionalResult conditional_probabilities(const CountTable& table,
                                            std::string_view value_key,
                                            const std::vector<double>& prior,
                                            const BackoffConfig& backoff) {
    if (prior.size() != table.label_count())
        throw SchemaError("prior arity does not match table labels");

    const size_t labels = table.label_count();
    std::vector<double> counts(labels);
    double total = 0.0;
    for (size_t i = 0; i < labels; ++i) {
        counts[i] = std::max(0.0, table.estimate(value_key, i));
        total += counts[i];
    }

    ConditionalResult out;
    out.probs.resize(labels);
    bool unstable = total < backoff.n_min;
    if (!unstable) {
        for (size_t i = 0; i < labels; ++i) {
            double p_hat = counts[i] / total;
            if (p_hat * (1.0 - p_hat) / total > backoff.v_max) {
                unstable = true;
                break;
            }
        }
    }
    if (unstable) {
        out.probs = prior;
        out.backed_off = true;
        return out;
    }

    double norm = 0.0;
    for (size_t i = 0; i < labels; ++i) {
        out.probs[i] = std::clamp(counts[i] / total, 0.0, 1.0);
        norm += out.probs[i];
    }
    for (double& p : out.probs) p /= norm;
    return out;
}

}  // namespace pyramid
