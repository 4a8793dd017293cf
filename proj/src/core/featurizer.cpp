#include "core/featurizer.hpp"

#include "core/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace pyramid {

using nlohmann::json;

std::vector<double> FeaturizedVector::to_dense() const {
    std::vector<double> out;
    for (const auto& b : blocks) out.insert(out.end(), b.probs.begin(), b.probs.end());
    for (const auto& r : raw) out.insert(out.end(), r.dense.begin(), r.dense.end());
    return out;
}

std::string FeaturizedVector::to_json_text() const {
    json doc;
    doc["blocks"] = json::array();
    for (const auto& b : blocks) {
        doc["blocks"].push_back(
            {{"source", b.source}, {"probs", b.probs}, {"backed_off", b.backed_off}});
    }
    doc["raw"] = json::array();
    for (const auto& r : raw) {
        json jr;
        jr["feature"] = r.feature;
        if (std::holds_alternative<double>(r.value)) {
            jr["value"] = std::get<double>(r.value);
        } else {
            jr["value"] = std::get<std::string>(r.value);
        }
        jr["dense"] = r.dense;
        doc["raw"].push_back(jr);
    }
    doc["dense"] = to_dense();
    return doc.dump();
}

FeatureView::FeatureView(FeatureSchema schema, std::map<std::string, CountTable> tables,
                         std::map<std::string, BinBoundaries> boundaries,
                         std::vector<std::string> group_ids, BackoffConfig backoff,
                         std::vector<WindowMeta> windows, uint64_t version)
    : schema_(std::move(schema)),
      tables_(std::move(tables)),
      boundaries_(std::move(boundaries)),
      group_ids_(std::move(group_ids)),
      backoff_(backoff),
      windows_(std::move(windows)),
      version_(version) {
    // Prior over labels from the (clamped) totals pooled across all tables.
    prior_.assign(schema_.label_values.size(), 0.0);
    for (const auto& [id, table] : tables_) {
        for (size_t i = 0; i < prior_.size() && i < table.label_totals().size(); ++i)
            prior_[i] += std::max(0.0, table.label_totals()[i]);
    }
    double total = 0.0;
    for (double v : prior_) total += v;
    if (total > 0.0) {
        for (double& v : prior_) v /= total;
    } else {
        for (double& v : prior_) v = 1.0 / static_cast<double>(prior_.size());
    }
}

const CountTable* FeatureView::find_table(const std::string& table_id) const {
    auto it = tables_.find(table_id);
    return it == tables_.end() ? nullptr : &it->second;
}

double FeatureView::estimate(const std::string& table_id, const std::string& value_key,
                             const std::string& label_value) const {
    const CountTable* table = find_table(table_id);
    if (!table) throw StateError("no such table: " + table_id);
    int label = schema_.label_index(label_value);
    if (label < 0) throw SchemaError("unknown label value: " + label_value);
    return table->estimate(value_key, static_cast<size_t>(label));
}

std::string FeatureView::value_key_for(const FeatureDecl& decl,
                                       const FeatureValue& value) const {
    if (decl.kind == FeatureKind::Categorical) {
        if (!std::holds_alternative<std::string>(value))
            throw SchemaError("categorical feature needs a string value: " + decl.name);
        return encode_value_key(std::get<std::string>(value));
    }
    if (!std::holds_alternative<double>(value))
        throw SchemaError("continuous feature needs a numeric value: " + decl.name);
    auto it = boundaries_.find(decl.name);
    if (it == boundaries_.end())
        throw StateError("bin boundaries not fitted for feature: " + decl.name);
    return std::to_string(it->second.apply(std::get<double>(value)));
}

namespace {

FeaturizedBlock block_for(const FeatureView& view, const std::string& source,
                          const std::string& value_key) {
    FeaturizedBlock block;
    block.source = source;
    const CountTable* table = view.find_table(source);
    if (!table) {
        // No sealed data yet for this source: back off to the prior.
        block.probs = view.prior();
        block.backed_off = true;
        return block;
    }
    ConditionalResult cond =
        conditional_probabilities(*table, value_key, view.prior(), view.backoff());
    block.probs = std::move(cond.probs);
    block.backed_off = cond.backed_off;
    return block;
}

}  // namespace

FeaturizedVector featurize(const FeatureView& view,
                           const std::map<std::string, FeatureValue>& values) {
    const FeatureSchema& schema = view.schema();
    FeaturizedVector out;
    out.blocks.reserve(schema.features.size() + view.group_ids().size());

    std::map<std::string, std::string> keys;
    for (const auto& decl : schema.features) {
        auto it = values.find(decl.name);
        if (it == values.end()) throw SchemaError("missing feature: " + decl.name);
        keys[decl.name] = view.value_key_for(decl, it->second);
        out.blocks.push_back(block_for(view, decl.name, keys[decl.name]));
    }

    for (const auto& group_id : view.group_ids()) {
        const CountTable* table = view.find_table(group_id);
        // Group members are recovered from the table id ("group:a+b").
        std::vector<std::string> members;
        std::string rest = group_id.substr(std::string("group:").size());
        size_t pos = 0;
        while (pos <= rest.size()) {
            size_t next = rest.find('+', pos);
            if (next == std::string::npos) {
                members.push_back(rest.substr(pos));
                break;
            }
            members.push_back(rest.substr(pos, next - pos));
            pos = next + 1;
        }
        std::vector<std::string> member_keys;
        member_keys.reserve(members.size());
        for (const auto& m : members) {
            auto it = keys.find(m);
            if (it == keys.end()) throw SchemaError("group member missing: " + m);
            member_keys.push_back(it->second);
        }
        (void)table;
        out.blocks.push_back(block_for(view, group_id, encode_group_key(member_keys)));
    }

    // Raw passthrough: continuous values ride along when their bin count is
    // below the cardinality threshold; small declared categorical domains are
    // one-hot encoded.
    uint32_t limit = schema.include_raw_below_cardinality;
    if (limit > 0) {
        for (const auto& decl : schema.features) {
            const FeatureValue& value = values.at(decl.name);
            if (decl.kind == FeatureKind::Continuous) {
                if (schema.bins_per_continuous <= limit)
                    out.raw.push_back({decl.name, value, {std::get<double>(value)}});
            } else if (!decl.values.empty() && decl.values.size() <= limit) {
                std::vector<double> one_hot(decl.values.size(), 0.0);
                const std::string& v = std::get<std::string>(value);
                for (size_t i = 0; i < decl.values.size(); ++i)
                    if (decl.values[i] == v) one_hot[i] = 1.0;
                out.raw.push_back({decl.name, value, std::move(one_hot)});
            }
        }
    }
    return out;
}

}  // namespace pyramid
