#pragma once

#include "core/count_table.hpp"
#include "core/schema.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace pyramid {

struct FeaturizedBlock {
    std::string source;         // feature name or group table id
    std::vector<double> probs;  // one per label value, schema order
    bool backed_off = false;
};

struct RawEntry {
    std::string feature;
    FeatureValue value;
    std::vector<double> dense;  // raw number, or one-hot over the declared domain
};

struct FeaturizedVector {
    std::vector<FeaturizedBlock> blocks;
    std::vector<RawEntry> raw;

    std::vector<double> to_dense() const;
    std::string to_json_text() const;
};

struct WindowMeta {
    uint64_t window_id = 0;
    std::string state;  // "populating" | "sealed" | "expired"
    uint64_t first_timestamp = 0;
    uint64_t last_timestamp = 0;
};

// Immutable featurization snapshot: merged count tables over the sealed
// windows, the label prior, fitted bin boundaries, and the knobs needed to
// featurize. Safe to share across threads; never mutated after construction.
class FeatureView {
public:
    FeatureView(FeatureSchema schema, std::map<std::string, CountTable> tables,
                std::map<std::string, BinBoundaries> boundaries,
                std::vector<std::string> group_ids, BackoffConfig backoff,
                std::vector<WindowMeta> windows, uint64_t version);

    const FeatureSchema& schema() const { return schema_; }
    const std::map<std::string, CountTable>& tables() const { return tables_; }
    const std::map<std::string, BinBoundaries>& boundaries() const { return boundaries_; }
    const std::vector<std::string>& group_ids() const { return group_ids_; }
    const BackoffConfig& backoff() const { return backoff_; }
    const std::vector<double>& prior() const { return prior_; }
    const std::vector<WindowMeta>& windows() const { return windows_; }
    uint64_t version() const { return version_; }

    const CountTable* find_table(const std::string& table_id) const;

    // Noisy count probe for one (table, value, label); used by replication
    // round-trip checks.
    double estimate(const std::string& table_id, const std::string& value_key,
                    const std::string& label_value) const;

    // Count-key for one feature value (bin index string for continuous).
    std::string value_key_for(const FeatureDecl& decl, const FeatureValue& value) const;

private:
    FeatureSchema schema_;
    std::map<std::string, CountTable> tables_;
    std::map<std::string, BinBoundaries> boundaries_;
    std::vector<std::string> group_ids_;
    BackoffConfig backoff_;
    std::vector<double> prior_;
    std::vector<WindowMeta> windows_;
    uint64_t version_;
};

using FeatureViewPtr = std::shared_ptr<const FeatureView>;

// Count-featurizes one value map against a sealed view. Pure function of
// (view, values); missing features raise SchemaError.
FeaturizedVector featurize(const FeatureView& view,
                           const std::map<std::string, FeatureValue>& values);

}  // namespace pyramid
