#include "core/schema.hpp"

#include "core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace pyramid {

using nlohmann::json;

void FeatureSchema::validate() const {
    if (features.empty()) throw SchemaError("schema declares no features");
    std::set<std::string> names;
    for (const auto& f : features) {
        if (f.name.empty()) throw SchemaError("feature with empty name");
        if (!names.insert(f.name).second) throw SchemaError("duplicate feature: " + f.name);
    }
    if (names.count(label_name)) throw SchemaError("label collides with a feature name");
    if (label_values.size() < 2) throw SchemaError("label needs at least 2 values");
    std::set<std::string> labels(label_values.begin(), label_values.end());
    if (labels.size() != label_values.size()) throw SchemaError("duplicate label values");

    std::set<std::vector<std::string>> seen_groups;
    for (const auto& g : groups) {
        if (g.size() < 2) throw SchemaError("groups need at least 2 members");
        for (const auto& m : g)
            if (!names.count(m)) throw SchemaError("group member not a feature: " + m);
        auto sorted = g;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw SchemaError("group repeats a member");
        if (!seen_groups.insert(sorted).second) throw SchemaError("duplicate group");
    }
    if (bins_per_continuous < 2) throw SchemaError("bins_per_continuous must be >= 2");
}

const FeatureDecl* FeatureSchema::find_feature(const std::string& name) const {
    for (const auto& f : features)
        if (f.name == name) return &f;
    return nullptr;
}

int FeatureSchema::label_index(const std::string& value) const {
    for (size_t i = 0; i < label_values.size(); ++i)
        if (label_values[i] == value) return static_cast<int>(i);
    return -1;
}

FeatureSchema FeatureSchema::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
    }

    FeatureSchema schema;
    try {
        for (const auto& f : doc.at("features")) {
            FeatureDecl decl;
            decl.name = f.at("name").get<std::string>();
            std::string kind = f.value("kind", "categorical");
            if (kind == "categorical") {
                decl.kind = FeatureKind::Categorical;
            } else if (kind == "continuous") {
                decl.kind = FeatureKind::Continuous;
            } else {
                throw SchemaError("unknown feature kind: " + kind);
            }
            if (f.contains("values"))
                decl.values = f.at("values").get<std::vector<std::string>>();
            schema.features.push_back(std::move(decl));
        }
        const auto& label = doc.at("label");
        schema.label_name = label.at("name").get<std::string>();
        schema.label_values = label.at("values").get<std::vector<std::string>>();
        if (doc.contains("groups"))
            schema.groups = doc.at("groups").get<std::vector<std::vector<std::string>>>();
        schema.bins_per_continuous = doc.value("bins_per_continuous", 4u);
        schema.include_raw_below_cardinality =
            doc.value("include_raw_below_cardinality", 32u);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("schema field error: ") + e.what());
    }
    schema.validate();
    return schema;
}

std::string FeatureSchema::to_json_text() const {
    json doc;
    doc["features"] = json::array();
    for (const auto& f : features) {
        json jf;
        jf["name"] = f.name;
        jf["kind"] = f.kind == FeatureKind::Categorical ? "categorical" : "continuous";
        if (!f.values.empty()) jf["values"] = f.values;
        doc["features"].push_back(jf);
    }
    doc["label"] = {{"name", label_name}, {"values", label_values}};
    doc["groups"] = groups;
    doc["bins_per_continuous"] = bins_per_continuous;
    doc["include_raw_below_cardinality"] = include_raw_below_cardinality;
    return doc.dump();
}

BinBoundaries BinBoundaries::fit(const std::vector<double>& training_values, uint32_t bins) {
    if (training_values.empty()) throw ValueError("cannot fit bins on empty values");
    if (bins < 2) throw ValueError("bins must be >= 2");

    std::vector<double> sorted = training_values;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();

    std::vector<double> bounds;
    bounds.reserve(bins - 1);
    for (uint32_t j = 1; j < bins; ++j) {
        // Rank ceil(j*n/bins), 1-indexed.
        size_t rank = (static_cast<size_t>(j) * n + bins - 1) / bins;
        rank = std::max<size_t>(1, std::min(rank, n));
        bounds.push_back(sorted[rank - 1]);
    }
    return BinBoundaries(std::move(bounds));
}

uint32_t BinBoundaries::apply(double v) const {
    auto it = std::lower_bound(bounds_.begin(), bounds_.end(), v);
    return static_cast<uint32_t>(it - bounds_.begin());
}

std::string encode_value_key(const std::string& value) { return value; }

std::string encode_group_key(const std::vector<std::string>& member_values) {
    std::string key;
    for (const auto& v : member_values) {
        key += std::to_string(v.size());
        key += ':';
        key += v;
    }
    return key;
}

std::string group_table_id(const std::vector<std::string>& members) {
    std::string id = "group:";
    for (size_t i = 0; i < members.size(); ++i) {
        if (i) id += '+';
        id += members[i];
    }
    return id;
}

}  // namespace pyramid
