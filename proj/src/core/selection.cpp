#include "core/selection.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace pyramid {

double empirical_mi(const JointCounts& joint_counts) {
    if (joint_counts.empty()) throw ValueError("mutual information of empty counts");

    double total = 0.0;
    std::map<std::string, double> x_marginal;
    std::map<int, double> l_marginal;
    for (const auto& [key, c] : joint_counts) {
        if (c < 0.0) continue;
        total += c;
        x_marginal[key.first] += c;
        l_marginal[key.second] += c;
    }
    if (!(total > 0.0)) throw ValueError("mutual information needs positive total count");

    double mi = 0.0;
    for (const auto& [key, c] : joint_counts) {
        if (!(c > 0.0)) continue;
        double p_xl = c / total;
        double p_x = x_marginal[key.first] / total;
        double p_l = l_marginal[key.second] / total;
        mi += p_xl * std::log(p_xl / (p_x * p_l));
    }
    return mi;
}

namespace {

constexpr char kOverflowKey[] = "\x01other";

// Count-key per observation and feature, with rare values collapsed into an
// overflow bucket so high-cardinality features stay tractable.
std::vector<std::vector<std::string>> build_keys(
    const std::vector<Observation>& hot, const FeatureSchema& schema,
    const std::map<std::string, BinBoundaries>& bounds, uint32_t value_cap) {
    std::vector<std::vector<std::string>> keys(schema.features.size());
    for (size_t f = 0; f < schema.features.size(); ++f) {
        const FeatureDecl& decl = schema.features[f];
        auto& col = keys[f];
        col.reserve(hot.size());
        for (const auto& obs : hot) {
            auto it = obs.values.find(decl.name);
            if (it == obs.values.end()) throw SchemaError("missing feature: " + decl.name);
            if (decl.kind == FeatureKind::Categorical) {
                col.push_back(std::get<std::string>(it->second));
            } else {
                auto bit = bounds.find(decl.name);
                double v = std::get<double>(it->second);
                col.push_back(std::to_string(bit == bounds.end() ? 0u : bit->second.apply(v)));
            }
        }
        std::unordered_map<std::string, uint32_t> freq;
        for (const auto& k : col) ++freq[k];
        if (freq.size() > value_cap) {
            std::vector<std::pair<std::string, uint32_t>> ranked(freq.begin(), freq.end());
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
            std::set<std::string> kept;
            for (uint32_t i = 0; i < value_cap; ++i) kept.insert(ranked[i].first);
            for (auto& k : col)
                if (!kept.count(k)) k = kOverflowKey;
        }
    }
    return keys;
}

double group_mi(const std::vector<size_t>& member_idx,
                const std::vector<std::vector<std::string>>& keys,
                const std::vector<int>& labels) {
    JointCounts joint;
    std::vector<std::string> tuple(member_idx.size());
    for (size_t row = 0; row < labels.size(); ++row) {
        for (size_t m = 0; m < member_idx.size(); ++m) tuple[m] = keys[member_idx[m]][row];
        joint[{encode_group_key(tuple), labels[row]}] += 1.0;
    }
    return empirical_mi(joint);
}

}  // namespace

std::vector<GroupCandidate> select_groups(const std::vector<Observation>& hot_window,
                                          const FeatureSchema& schema,
                                          const std::map<std::string, BinBoundaries>& bounds,
                                          const SelectionConfig& cfg) {
    if (hot_window.empty()) throw StateError("group selection needs a nonempty hot window");
    if (cfg.max_group_size < 2) throw ConfigError("max_group_size must be >= 2");
    if (cfg.max_groups == 0) return {};

    const size_t d = schema.features.size();
    auto keys = build_keys(hot_window, schema, bounds, cfg.value_cap);
    std::vector<int> labels;
    labels.reserve(hot_window.size());
    for (const auto& obs : hot_window) {
        int idx = schema.label_index(obs.label);
        if (idx < 0) throw SchemaError("unknown label value: " + obs.label);
        labels.push_back(idx);
    }

    std::vector<double> single_mi(d);
    for (size_t f = 0; f < d; ++f) single_mi[f] = group_mi({f}, keys, labels);

    // Candidate pool keyed by sorted member indices.
    std::map<std::vector<size_t>, double> pool;
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = i + 1; j < d; ++j) {
            double mi = group_mi({i, j}, keys, labels);
            if (mi > std::max(single_mi[i], single_mi[j]) + cfg.mi_margin)
                pool[{i, j}] = mi;
        }
    }

    // Greedy growth: extend surviving groups with any feature that still
    // improves MI, up to the size cap.
    std::vector<std::pair<std::vector<size_t>, double>> frontier(pool.begin(), pool.end());
    while (!frontier.empty()) {
        std::vector<std::pair<std::vector<size_t>, double>> next;
        for (const auto& [members, mi] : frontier) {
            if (members.size() >= cfg.max_group_size) continue;
            for (size_t f = 0; f < d; ++f) {
                if (std::find(members.begin(), members.end(), f) != members.end()) continue;
                std::vector<size_t> grown = members;
                grown.push_back(f);
                std::sort(grown.begin(), grown.end());
                if (pool.count(grown)) continue;
                double grown_mi = group_mi(grown, keys, labels);
                if (grown_mi > mi + cfg.mi_margin) {
                    pool[grown] = grown_mi;
                    next.push_back({grown, grown_mi});
                }
            }
        }
        frontier = std::move(next);
    }

    std::vector<GroupCandidate> candidates;
    candidates.reserve(pool.size());
    for (const auto& [members, mi] : pool) {
        GroupCandidate c;
        for (size_t f : members) c.members.push_back(schema.features[f].name);
        std::sort(c.members.begin(), c.members.end());
        c.mi_score = mi;
        c.status = GroupStatus::Trial;
        candidates.push_back(std::move(c));
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.mi_score != b.mi_score) return a.mi_score > b.mi_score;
        return a.members < b.members;
    });
    if (candidates.size() > cfg.max_groups) candidates.resize(cfg.max_groups);
    return candidates;
}

}  // namespace pyramid
