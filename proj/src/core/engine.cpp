#include "core/engine.hpp"

#include "core/distributions.hpp"
#include "core/dyadic.hpp"
#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/smooth_sensitivity.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unordered_map>

namespace pyramid {

using nlohmann::json;

uint64_t unix_millis() {
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::system_clock::now().time_since_epoch())
                                     .count());
}

void RetentionPolicy::validate() const {
    if (hot_capacity == 0) throw ConfigError("hot window capacity must be positive");
    if (retention == 0) throw ConfigError("retention must be >= 1 window");
}

std::string RetrainEvent::to_json_text() const {
    json doc;
    doc["reason"] = reason;
    doc["expired_window_ids"] = expired_window_ids;
    doc["sealed_window_id"] = sealed_window_id;
    doc["engine_version"] = engine_version;
    doc["emitted_at"] = emitted_at;
    return doc.dump();
}

EngineConfig EngineConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    EngineConfig cfg;
    try {
        cfg.schema = FeatureSchema::from_json_text(doc.at("schema").dump());
        if (doc.contains("policy")) {
            const auto& p = doc["policy"];
            cfg.policy.hot_capacity = p.value("hot_window", cfg.policy.hot_capacity);
            cfg.policy.window_length = p.value("window_length", cfg.policy.window_length);
            cfg.policy.retention = p.value("retention", cfg.policy.retention);
            std::string mode = p.value("mode", "flat");
            if (mode == "flat") {
                cfg.policy.mode = RetentionMode::Flat;
            } else if (mode == "dyadic") {
                cfg.policy.mode = RetentionMode::DyadicTree;
            } else {
                throw ConfigError("unknown retention mode: " + mode);
            }
        }
        if (doc.contains("privacy")) {
            const auto& p = doc["privacy"];
            cfg.privacy.epsilon = p.value("epsilon", cfg.privacy.epsilon);
            cfg.privacy.k = p.value("k", cfg.privacy.k);
            cfg.privacy.p_min = p.value("p_min", cfg.privacy.p_min);
        }
        if (doc.contains("sketch")) {
            const auto& s = doc["sketch"];
            std::string kind = s.value("kind", "count_min");
            if (kind == "count_min") {
                cfg.sketch.kind = SketchKind::CountMin;
            } else if (kind == "count_median") {
                cfg.sketch.kind = SketchKind::CountMedian;
            } else {
                throw ConfigError("unknown sketch kind: " + kind);
            }
            cfg.sketch.depth = s.value("depth", cfg.sketch.depth);
            cfg.sketch.log2_width = s.value("log2_width", cfg.sketch.log2_width);
        }
        if (doc.contains("backoff")) {
            cfg.backoff.n_min = doc["backoff"].value("n_min", cfg.backoff.n_min);
            cfg.backoff.v_max = doc["backoff"].value("v_max", cfg.backoff.v_max);
        }
        if (doc.contains("selection")) {
            const auto& s = doc["selection"];
            cfg.selection.max_groups = s.value("max_groups", cfg.selection.max_groups);
            cfg.selection.max_group_size =
                s.value("max_group_size", cfg.selection.max_group_size);
            cfg.selection.budget_fraction =
                s.value("budget_fraction", cfg.selection.budget_fraction);
            cfg.selection.mi_margin = s.value("mi_margin", cfg.selection.mi_margin);
            cfg.selection.value_cap = s.value("value_cap", cfg.selection.value_cap);
        }
        cfg.noise_enabled = doc.value("noise_enabled", true);
        cfg.retrain_on_seal = doc.value("retrain_on_seal", true);
        cfg.weight_quantile = doc.value("weight_quantile", cfg.weight_quantile);
        cfg.private_weight_quantile =
            doc.value("private_weight_quantile", cfg.private_weight_quantile);
        cfg.weight_budget_fraction =
            doc.value("weight_budget_fraction", cfg.weight_budget_fraction);
        if (doc.contains("weights"))
            cfg.weights = doc["weights"].get<std::map<std::string, double>>();
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.webhook_attempts = doc.value("webhook_attempts", cfg.webhook_attempts);
        cfg.webhook_backoff_ms = doc.value("webhook_backoff_ms", cfg.webhook_backoff_ms);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    if (const char* env_seed = std::getenv("PYRAMID_SEED")) {
        cfg.seed = std::strtoull(env_seed, nullptr, 10);
    }
    return cfg;
}

std::string EngineConfig::to_json_text() const {
    json doc;
    doc["schema"] = json::parse(schema.to_json_text());
    doc["policy"] = {{"hot_window", policy.hot_capacity},
                     {"window_length", policy.window_length},
                     {"retention", policy.retention},
                     {"mode", policy.mode == RetentionMode::Flat ? "flat" : "dyadic"}};
    doc["privacy"] = {{"epsilon", privacy.epsilon}, {"k", privacy.k}, {"p_min", privacy.p_min}};
    doc["sketch"] = {
        {"kind", sketch.kind == SketchKind::CountMin ? "count_min" : "count_median"},
        {"depth", sketch.depth},
        {"log2_width", sketch.log2_width}};
    doc["backoff"] = {{"n_min", backoff.n_min}, {"v_max", backoff.v_max}};
    doc["selection"] = {{"max_groups", selection.max_groups},
                        {"max_group_size", selection.max_group_size},
                        {"budget_fraction", selection.budget_fraction},
                        {"mi_margin", selection.mi_margin},
                        {"value_cap", selection.value_cap}};
    doc["noise_enabled"] = noise_enabled;
    doc["retrain_on_seal"] = retrain_on_seal;
    doc["weight_quantile"] = weight_quantile;
    doc["private_weight_quantile"] = private_weight_quantile;
    doc["weight_budget_fraction"] = weight_budget_fraction;
    doc["weights"] = weights;
    doc["seed"] = seed;
    doc["webhook_attempts"] = webhook_attempts;
    doc["webhook_backoff_ms"] = webhook_backoff_ms;
    return doc.dump();
}

Engine::Engine(EngineConfig cfg)
    : cfg_(std::move(cfg)), noise_rng_(derive_seed(cfg_.seed, 0x4e4f495345ULL)) {
    cfg_.schema.validate();
    cfg_.policy.validate();
    cfg_.privacy.h = cfg_.sketch.depth;  // sensitivity follows the sketch depth
    cfg_.privacy.validate();

    bool has_continuous = false;
    for (const auto& f : cfg_.schema.features)
        if (f.kind == FeatureKind::Continuous) has_continuous = true;
    boundaries_fitted_ = !has_continuous;

    populating_ = make_window_locked(0);
}

void Engine::set_retrain_callback(std::function<void(const RetrainEvent&)> cb) {
    std::lock_guard lock(mu_);
    retrain_cb_ = std::move(cb);
}

uint32_t Engine::tree_levels() const {
    uint32_t levels = 1;
    while ((1ULL << levels) <= cfg_.policy.retention) ++levels;
    return levels;  // block sizes 1 .. 2^(levels-1) cover any retained range
}

std::vector<std::string> Engine::all_table_ids_locked() const {
    std::vector<std::string> ids;
    for (const auto& f : cfg_.schema.features) ids.push_back(f.name);
    for (const auto& g : cfg_.schema.groups) ids.push_back(group_table_id(g));
    for (const auto& c : confirmed_) ids.push_back(group_table_id(c.members));
    for (const auto& t : trials_) ids.push_back(group_table_id(t.members));
    return ids;
}

std::vector<std::pair<std::string, double>> Engine::plan_weights_locked() const {
    // Feature tables share 1 - budget_fraction of the window budget, group
    // tables the rest; within each side the configured per-table weights
    // apply. With no groups the features take everything.
    std::vector<std::pair<std::string, double>> feature_w, group_w;
    for (const auto& id : all_table_ids_locked()) {
        auto it = cfg_.weights.find(id);
        double w = it == cfg_.weights.end() ? 1.0 : it->second;
        if (id.rfind("group:", 0) == 0) {
            group_w.push_back({id, w});
        } else {
            feature_w.push_back({id, w});
        }
    }

    std::vector<std::pair<std::string, double>> combined;
    double feature_share = group_w.empty() ? 1.0 : 1.0 - cfg_.selection.budget_fraction;
    double fsum = 0.0, gsum = 0.0;
    for (const auto& [id, w] : feature_w) fsum += w;
    for (const auto& [id, w] : group_w) gsum += w;
    for (const auto& [id, w] : feature_w)
        combined.push_back({id, feature_share * w / fsum});
    for (const auto& [id, w] : group_w)
        combined.push_back({id, cfg_.selection.budget_fraction * w / gsum});
    return combined;
}

NoisePlan Engine::plan_locked(double epsilon_budget) const {
    PrivacyConfig window_cfg = cfg_.privacy;
    window_cfg.epsilon = epsilon_budget;
    return build_noise_plan(window_cfg, plan_weights_locked());
}

NoisePlan Engine::current_plan() const {
    std::lock_guard lock(mu_);
    double eps = cfg_.privacy.epsilon;
    if (cfg_.policy.mode == RetentionMode::DyadicTree)
        eps /= static_cast<double>(tree_levels());
    return plan_locked(eps);
}

Engine::Window Engine::make_window_locked(uint64_t id) {
    double eps = cfg_.privacy.epsilon;
    if (cfg_.policy.mode == RetentionMode::DyadicTree)
        eps /= static_cast<double>(tree_levels());
    NoisePlan plan = plan_locked(eps);

    Window win;
    win.id = id;
    win.plan_epsilon = eps;
    for (const auto& entry : plan.per_table) {
        uint64_t table_seed = derive_seed(cfg_.seed, hash_key(0x5441424c45ULL, entry.table_id));
        double scale = cfg_.noise_enabled ? entry.scale : 0.0;
        win.tables.emplace(entry.table_id,
                           CountTable(entry.table_id, cfg_.schema.label_values.size(),
                                      cfg_.sketch, table_seed, scale, noise_rng_));
    }
    return win;
}

void Engine::validate_observation(const Observation& obs) const {
    for (const auto& decl : cfg_.schema.features) {
        auto it = obs.values.find(decl.name);
        if (it == obs.values.end()) throw SchemaError("missing feature: " + decl.name);
        if (decl.kind == FeatureKind::Categorical &&
            !std::holds_alternative<std::string>(it->second))
            throw SchemaError("categorical feature needs a string value: " + decl.name);
        if (decl.kind == FeatureKind::Continuous &&
            !std::holds_alternative<double>(it->second))
            throw SchemaError("continuous feature needs a numeric value: " + decl.name);
    }
    if (cfg_.schema.label_index(obs.label) < 0)
        throw SchemaError("unknown label value: " + obs.label);
    if (!(obs.p > 0.0 && obs.p <= 1.0))
        throw ValueError("importance probability must be in (0,1]");
    if (obs.p < cfg_.privacy.p_min)
        throw ValueError("importance probability below configured p_min");
}

std::string Engine::key_for(const FeatureDecl& decl, const FeatureValue& value) const {
    if (decl.kind == FeatureKind::Categorical)
        return encode_value_key(std::get<std::string>(value));
    auto it = boundaries_.find(decl.name);
    if (it == boundaries_.end()) return "unbinned";
    return std::to_string(it->second.apply(std::get<double>(value)));
}

void Engine::update_window_tables(Window& win, const Observation& obs) {
    int label = cfg_.schema.label_index(obs.label);
    std::map<std::string, std::string> keys;
    for (const auto& decl : cfg_.schema.features) {
        keys[decl.name] = key_for(decl, obs.values.at(decl.name));
        auto it = win.tables.find(decl.name);
        if (it != win.tables.end())
            it->second.update(keys[decl.name], static_cast<size_t>(label), obs.p);
    }
    auto update_group = [&](const std::vector<std::string>& members) {
        auto it = win.tables.find(group_table_id(members));
        if (it == win.tables.end()) return;
        std::vector<std::string> member_keys;
        member_keys.reserve(members.size());
        for (const auto& m : members) member_keys.push_back(keys.at(m));
        it->second.update(encode_group_key(member_keys), static_cast<size_t>(label), obs.p);
    };
    for (const auto& g : cfg_.schema.groups) update_group(g);
    for (const auto& c : confirmed_) update_group(c.members);
    for (const auto& t : trials_) update_group(t.members);
}

void Engine::fit_boundaries_locked() {
    if (boundaries_fitted_ || prefit_.empty()) return;
    for (const auto& decl : cfg_.schema.features) {
        if (decl.kind != FeatureKind::Continuous) continue;
        std::vector<double> vals;
        vals.reserve(prefit_.size());
        for (const auto& obs : prefit_)
            vals.push_back(std::get<double>(obs.values.at(decl.name)));
        boundaries_[decl.name] = BinBoundaries::fit(vals, cfg_.schema.bins_per_continuous);
    }
    boundaries_fitted_ = true;
    // Replay the buffered observations now that keys are stable.
    for (const auto& obs : prefit_) update_window_tables(populating_, obs);
    prefit_.clear();
}

void Engine::maybe_fit_boundaries_locked() {
    if (!boundaries_fitted_ && prefit_.size() >= cfg_.policy.hot_capacity)
        fit_boundaries_locked();
}

void Engine::observe(const Observation& obs) {
    std::optional<RetrainEvent> event;
    {
        std::lock_guard lock(mu_);
        validate_observation(obs);

        Observation stored = obs;
        stored.timestamp = obs.timestamp != 0 ? obs.timestamp : ++clock_;
        clock_ = std::max(clock_, stored.timestamp);

        hot_.push_back(stored);
        while (hot_.size() > cfg_.policy.hot_capacity) hot_.pop_front();

        if (populating_.count == 0) populating_.first_ts = stored.timestamp;
        populating_.last_ts = stored.timestamp;
        ++populating_.count;

        if (!boundaries_fitted_) {
            prefit_.push_back(stored);
            maybe_fit_boundaries_locked();
        } else {
            update_window_tables(populating_, stored);
        }

        if (cfg_.policy.window_length > 0 && populating_.count >= cfg_.policy.window_length)
            event = roll_locked();
    }
    if (event && retrain_cb_) retrain_cb_(*event);
}

void Engine::observe_json(const std::string& row_json) {
    json doc;
    try {
        doc = json::parse(row_json);
    } catch (const json::exception& e) {
        throw ValueError(std::string("observation is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValueError("observation must be a JSON object");

    Observation obs;
    for (const auto& decl : cfg_.schema.features) {
        if (!doc.contains(decl.name)) throw SchemaError("missing feature: " + decl.name);
        const auto& v = doc[decl.name];
        if (decl.kind == FeatureKind::Continuous) {
            if (!v.is_number()) throw SchemaError("continuous feature needs a number: " + decl.name);
            obs.values[decl.name] = v.get<double>();
        } else {
            obs.values[decl.name] =
                v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    if (!doc.contains(cfg_.schema.label_name)) throw SchemaError("missing label");
    const auto& lv = doc[cfg_.schema.label_name];
    obs.label = lv.is_string() ? lv.get<std::string>() : lv.dump();
    if (doc.contains("p")) obs.p = doc["p"].get<double>();
    if (doc.contains("ts")) obs.timestamp = doc["ts"].get<uint64_t>();
    observe(obs);
}

std::optional<RetrainEvent> Engine::roll_window() {
    std::optional<RetrainEvent> event;
    {
        std::lock_guard lock(mu_);
        event = roll_locked();
    }
    if (event && retrain_cb_) retrain_cb_(*event);
    return event;
}

std::optional<RetrainEvent> Engine::roll_locked() {
    fit_boundaries_locked();

    uint64_t sealed_id = populating_.id;
    bool sealed_for_view = !populating_.weights_only;
    if (sealed_for_view) {
        ledger_.record(sealed_id,
                       cfg_.policy.mode == RetentionMode::DyadicTree ? "window-tables(level0)"
                                                                     : "window-tables",
                       populating_.plan_epsilon);
        sealed_.push_back(std::move(populating_));
    }
    // A weights-only window is set aside: its tables never enter the view.

    if (cfg_.policy.mode == RetentionMode::DyadicTree) materialize_tree_nodes_locked();

    std::vector<uint64_t> expired;
    while (sealed_.size() > cfg_.policy.retention) {
        expired.push_back(sealed_.front().id);
        sealed_.pop_front();
    }
    if (!expired.empty()) {
        uint64_t first_retained = sealed_.empty() ? 0 : sealed_.front().id;
        std::erase_if(nodes_, [&](const TreeNode& n) { return n.first < first_retained; });
    }

    // Re-examine trial groups once their tables have sealed data behind them.
    if (!trials_.empty() && !sealed_.empty()) reevaluate_trials_locked();

    populating_ = make_window_locked(sealed_id + 1);
    ++version_;
    view_cache_.reset();

    RetrainEvent event;
    event.sealed_window_id = sealed_id;
    event.engine_version = version_;
    event.emitted_at = unix_millis();
    if (!expired.empty()) {
        event.reason = "window_expired";
        event.expired_window_ids = expired;
        return event;
    }
    if (cfg_.retrain_on_seal && sealed_for_view) {
        event.reason = "window_sealed";
        return event;
    }
    return std::nullopt;
}

void Engine::materialize_tree_nodes_locked() {
    if (sealed_.empty()) return;
    uint64_t last = sealed_.back().id;
    uint64_t first_retained = sealed_.front().id;
    uint32_t levels = tree_levels();

    auto find_node = [&](uint64_t first, uint32_t level) -> const TreeNode* {
        for (const auto& n : nodes_)
            if (n.first == first && n.level == level) return &n;
        return nullptr;
    };
    auto find_leaf = [&](uint64_t id) -> const Window* {
        for (const auto& w : sealed_)
            if (w.id == id) return &w;
        return nullptr;
    };

    for (uint32_t level = 1; level < levels; ++level) {
        uint64_t size = 1ULL << level;
        if ((last + 1) % size != 0) break;
        uint64_t first = last + 1 - size;
        if (first < first_retained) break;
        if (find_node(first, level)) break;

        // Collect the two child table maps (leaves at level 1).
        const std::map<std::string, CountTable>*left, *right;
        if (level == 1) {
            const Window* lw = find_leaf(first);
            const Window* rw = find_leaf(first + 1);
            if (!lw || !rw) break;
            left = &lw->tables;
            right = &rw->tables;
        } else {
            const TreeNode* ln = find_node(first, level - 1);
            const TreeNode* rn = find_node(first + size / 2, level - 1);
            if (!ln || !rn) break;
            left = &ln->tables;
            right = &rn->tables;
        }

        TreeNode node;
        node.first = first;
        node.last = last;
        node.level = level;
        double eps_level = cfg_.privacy.epsilon / static_cast<double>(levels);
        NoisePlan plan = plan_locked(eps_level);
        for (const auto& [id, ltable] : *left) {
            auto rit = right->find(id);
            if (rit == right->end()) continue;  // only tables both halves carry
            CountTable merged = ltable;
            merged.merge_from(rit->second);
            if (cfg_.noise_enabled) {
                const NoisePlanEntry* entry = plan.find(id);
                double scale = entry ? entry->scale : 0.0;
                if (scale > 0.0) merged.add_noise(scale, noise_rng_);
            }
            node.tables.emplace(id, std::move(merged));
        }
        ledger_.record(last, "tree-node[" + std::to_string(first) + ".." +
                                 std::to_string(last) + "]",
                       eps_level);
        nodes_.push_back(std::move(node));
    }
}

std::map<std::string, CountTable> Engine::aggregate_tables_locked() const {
    std::map<std::string, CountTable> agg;
    if (sealed_.empty()) return agg;

    if (cfg_.policy.mode == RetentionMode::Flat) {
        for (const auto& win : sealed_) {
            for (const auto& [id, table] : win.tables) {
                auto it = agg.find(id);
                if (it == agg.end()) {
                    agg.emplace(id, table);
                } else {
                    it->second.merge_from(table);
                }
            }
        }
        return agg;
    }

    // Dyadic mode: sum the minimal cover of the sealed range, falling back to
    // a direct leaf sum for tables that some cover node does not carry.
    uint64_t first = sealed_.front().id;
    uint64_t last = sealed_.back().id;
    auto cover = dyadic_cover(first, last);

    auto find_node = [&](uint64_t f, uint32_t level) -> const TreeNode* {
        for (const auto& n : nodes_)
            if (n.first == f && n.level == level) return &n;
        return nullptr;
    };

    std::set<std::string> all_ids;
    for (const auto& win : sealed_)
        for (const auto& [id, t] : win.tables) all_ids.insert(id);

    for (const auto& id : all_ids) {
        bool covered = true;
        std::vector<const CountTable*> parts;
        for (const auto& iv : cover) {
            const CountTable* part = nullptr;
            if (iv.level == 0) {
                for (const auto& w : sealed_)
                    if (w.id == iv.first) {
                        auto it = w.tables.find(id);
                        if (it != w.tables.end()) part = &it->second;
                    }
            } else if (const TreeNode* n = find_node(iv.first, iv.level)) {
                auto it = n->tables.find(id);
                if (it != n->tables.end()) part = &it->second;
            }
            if (!part) {
                covered = false;
                break;
            }
            parts.push_back(part);
        }
        if (!covered) {
            parts.clear();
            for (const auto& w : sealed_) {
                auto it = w.tables.find(id);
                if (it != w.tables.end()) parts.push_back(&it->second);
            }
        }
        if (parts.empty()) continue;
        CountTable merged = *parts.front();
        for (size_t i = 1; i < parts.size(); ++i) merged.merge_from(*parts[i]);
        agg.emplace(id, std::move(merged));
    }
    return agg;
}

FeatureViewPtr Engine::build_view_locked() const {
    std::vector<std::string> group_ids;
    for (const auto& g : cfg_.schema.groups) group_ids.push_back(group_table_id(g));
    for (const auto& c : confirmed_) group_ids.push_back(group_table_id(c.members));
    std::sort(group_ids.begin(), group_ids.end());
    group_ids.erase(std::unique(group_ids.begin(), group_ids.end()), group_ids.end());

    std::vector<WindowMeta> metas;
    for (const auto& w : sealed_)
        metas.push_back({w.id, "sealed", w.first_ts, w.last_ts});
    metas.push_back({populating_.id, "populating", populating_.first_ts, populating_.last_ts});

    return std::make_shared<FeatureView>(cfg_.schema, aggregate_tables_locked(), boundaries_,
                                         std::move(group_ids), cfg_.backoff, std::move(metas),
                                         version_);
}

FeatureViewPtr Engine::aggregate_view() const {
    std::lock_guard lock(mu_);
    if (!view_cache_) view_cache_ = build_view_locked();
    return view_cache_;
}

FeaturizedVector Engine::featurize_values(
    const std::map<std::string, FeatureValue>& values) const {
    return featurize(*aggregate_view(), values);
}

std::vector<TrainRow> Engine::train_set() const {
    FeatureViewPtr view;
    std::vector<Observation> hot;
    {
        std::lock_guard lock(mu_);
        if (!view_cache_) view_cache_ = build_view_locked();
        view = view_cache_;
        hot.assign(hot_.begin(), hot_.end());
    }
    std::vector<TrainRow> rows;
    rows.reserve(hot.size());
    for (const auto& obs : hot)
        rows.push_back({featurize(*view, obs.values), obs.label, obs.p});
    return rows;
}

std::map<std::string, std::vector<double>> Engine::hot_value_counts_locked() const {
    std::map<std::string, std::vector<double>> out;
    for (const auto& decl : cfg_.schema.features) {
        std::unordered_map<std::string, double> counts;
        for (const auto& obs : hot_) counts[key_for(decl, obs.values.at(decl.name))] += 1.0;
        std::vector<double> vals;
        vals.reserve(counts.size());
        for (const auto& [k, c] : counts) vals.push_back(c);
        if (vals.empty()) vals.push_back(0.0);
        out[decl.name] = std::move(vals);
    }
    return out;
}

std::map<std::string, double> Engine::compute_hot_weights(double quantile) {
    std::lock_guard lock(mu_);
    std::map<std::string, double> quantiles;
    for (const auto& [feature, counts] : hot_value_counts_locked())
        quantiles[feature] = empirical_quantile(counts, quantile);
    auto weights = rescale_weights(quantiles);
    for (const auto& [id, w] : weights) cfg_.weights[id] = w;
    return weights;
}

std::map<std::string, double> Engine::compute_private_hot_weights(double quantile) {
    std::lock_guard lock(mu_);
    if (hot_.empty()) throw StateError("weight computation needs a nonempty hot window");

    double eps_w = cfg_.privacy.epsilon * cfg_.weight_budget_fraction;
    double upper = static_cast<double>(hot_.size());
    Rng rng(derive_seed(cfg_.seed, 0x57454947485453ULL + version_));
    auto weights =
        compute_weights(hot_value_counts_locked(), quantile, eps_w, upper, rng);

    ledger_.record(populating_.id, "weights", eps_w);
    populating_.weights_only = true;  // this window is set aside for weights
    for (const auto& [id, w] : weights) cfg_.weights[id] = w;
    return weights;
}

void Engine::set_weights(std::map<std::string, double> weights) {
    std::lock_guard lock(mu_);
    for (auto& [id, w] : weights) {
        if (!(w > 0.0)) throw ValueError("weight must be positive: " + id);
        cfg_.weights[id] = w;
    }
}

std::vector<GroupCandidate> Engine::run_group_selection() {
    std::lock_guard lock(mu_);
    fit_boundaries_locked();
    std::vector<Observation> hot(hot_.begin(), hot_.end());
    auto candidates = select_groups(hot, cfg_.schema, boundaries_, cfg_.selection);

    std::set<std::vector<std::string>> known;
    for (const auto& g : cfg_.schema.groups) {
        auto s = g;
        std::sort(s.begin(), s.end());
        known.insert(s);
    }
    for (const auto& c : confirmed_) known.insert(c.members);
    for (const auto& t : trials_) known.insert(t.members);

    for (const auto& c : candidates) {
        if (known.count(c.members)) continue;
        trials_.push_back(c);
        known.insert(c.members);
    }
    return candidates;
}

std::vector<GroupCandidate> Engine::reevaluate_trials_locked() {
    auto agg = aggregate_tables_locked();

    // Probe keys come from the hot window's distinct tuples; sketches cannot
    // enumerate their own keys.
    std::vector<GroupCandidate> decided;
    std::vector<GroupCandidate> surviving;
    for (auto& trial : trials_) {
        std::string gid = group_table_id(trial.members);
        auto git = agg.find(gid);
        if (git == agg.end()) {
            surviving.push_back(trial);  // no sealed data yet; keep trialing
            continue;
        }

        const size_t labels = cfg_.schema.label_values.size();
        auto probe_mi = [&](const CountTable& table,
                            const std::set<std::string>& probe_keys) -> double {
            JointCounts joint;
            double total = 0.0;
            for (const auto& key : probe_keys) {
                for (size_t l = 0; l < labels; ++l) {
                    double c = std::max(0.0, table.estimate(key, l));
                    joint[{key, static_cast<int>(l)}] = c;
                    total += c;
                }
            }
            if (!(total > 0.0)) return -1.0;  // all-noise table: no signal
            return empirical_mi(joint);
        };

        std::set<std::string> group_keys;
        std::map<std::string, std::set<std::string>> member_keys;
        for (const auto& obs : hot_) {
            std::vector<std::string> tuple;
            for (const auto& m : trial.members) {
                const FeatureDecl* decl = cfg_.schema.find_feature(m);
                std::string k = key_for(*decl, obs.values.at(m));
                tuple.push_back(k);
                member_keys[m].insert(k);
            }
            group_keys.insert(encode_group_key(tuple));
            if (group_keys.size() > 65536) break;
        }

        double group_score = group_keys.empty() ? -1.0 : probe_mi(git->second, group_keys);
        double best_single = 0.0;
        for (const auto& m : trial.members) {
            auto fit = agg.find(m);
            if (fit == agg.end()) continue;
            double s = probe_mi(fit->second, member_keys[m]);
            best_single = std::max(best_single, s);
        }

        if (group_score > best_single + cfg_.selection.mi_margin) {
            trial.status = GroupStatus::Confirmed;
            trial.mi_score = group_score;
            confirmed_.push_back(trial);
        } else {
            trial.status = GroupStatus::Dropped;
        }
        decided.push_back(trial);
    }
    trials_ = std::move(surviving);
    if (!decided.empty()) view_cache_.reset();  // confirmed groups join the view
    return decided;
}

std::vector<GroupCandidate> Engine::reevaluate_trials() {
    std::lock_guard lock(mu_);
    for (const auto& trial : trials_) {
        std::string gid = group_table_id(trial.members);
        bool found = false;
        for (const auto& w : sealed_)
            if (w.tables.count(gid)) found = true;
        if (!found)
            throw StateError("trial group has no sealed count table yet: " + gid);
    }
    return reevaluate_trials_locked();
}

std::vector<std::string> Engine::confirmed_group_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& c : confirmed_) ids.push_back(group_table_id(c.members));
    return ids;
}

BudgetLedger Engine::ledger() const {
    std::lock_guard lock(mu_);
    return ledger_;
}

uint64_t Engine::version() const {
    std::lock_guard lock(mu_);
    return version_;
}

size_t Engine::hot_size() const {
    std::lock_guard lock(mu_);
    return hot_.size();
}

std::vector<Observation> Engine::hot_snapshot() const {
    std::lock_guard lock(mu_);
    return {hot_.begin(), hot_.end()};
}

std::vector<WindowMeta> Engine::window_metas() const {
    std::lock_guard lock(mu_);
    std::vector<WindowMeta> metas;
    for (const auto& w : sealed_) metas.push_back({w.id, "sealed", w.first_ts, w.last_ts});
    metas.push_back({populating_.id, "populating", populating_.first_ts, populating_.last_ts});
    return metas;
}

}  // namespace pyramid
