#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pyramid {

enum class FeatureKind : uint8_t { Categorical, Continuous };

struct FeatureDecl {
    std::string name;
    FeatureKind kind = FeatureKind::Categorical;
    // Declared domain for categorical features; enables raw passthrough when
    // small enough.
    std::vector<std::string> values;
};

struct FeatureSchema {
    std::vector<FeatureDecl> features;
    std::string label_name;
    std::vector<std::string> label_values;
    std::vector<std::vector<std::string>> groups;
    uint32_t bins_per_continuous = 4;
    uint32_t include_raw_below_cardinality = 32;

    void validate() const;

    const FeatureDecl* find_feature(const std::string& name) const;
    int label_index(const std::string& value) const;

    static FeatureSchema from_json_text(const std::string& text);
    std::string to_json_text() const;
};

using FeatureValue = std::variant<std::string, double>;

struct Observation {
    std::map<std::string, FeatureValue> values;
    std::string label;
    double p = 1.0;          // importance probability in (0,1]
    uint64_t timestamp = 0;  // monotonic event time (arrival order)
};

// Percentile bin boundaries for one continuous feature. Boundaries sit at
// the j/bins empirical quantiles; values beyond the extremes clamp to the
// edge bins.
class BinBoundaries {
public:
    BinBoundaries() = default;
    explicit BinBoundaries(std::vector<double> bounds) : bounds_(std::move(bounds)) {}

    static BinBoundaries fit(const std::vector<double>& training_values, uint32_t bins);

    uint32_t apply(double v) const;
    uint32_t bin_count() const { return static_cast<uint32_t>(bounds_.size()) + 1; }
    const std::vector<double>& bounds() const { return bounds_; }

private:
    std::vector<double> bounds_;  // ascending, size bins-1
};

// Key encoding shared by tables and featurization. Group keys join member
// values with a length prefix so ("ab","c") cannot collide with ("a","bc").
std::string encode_value_key(const std::string& value);
std::string encode_group_key(const std::vector<std::string>& member_values);
std::string group_table_id(const std::vector<std::string>& members);

}  // namespace pyramid
