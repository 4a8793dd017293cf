#pragma once

#include "core/count_table.hpp"
#include "core/featurizer.hpp"
#include "core/noise_plan.hpp"
#include "core/rng.hpp"
#include "core/schema.hpp"
#include "core/selection.hpp"

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace pyramid {

enum class RetentionMode : uint8_t { Flat, DyadicTree };

struct RetentionPolicy {
    uint64_t hot_capacity = 1000;  // observations kept raw
    uint64_t window_length = 0;    // observations per count window; 0 = manual rolls
    uint64_t retention = 4;        // sealed windows retained
    RetentionMode mode = RetentionMode::Flat;

    void validate() const;
};

struct EngineConfig {
    FeatureSchema schema;
    RetentionPolicy policy;
    PrivacyConfig privacy;
    SketchConfig sketch;
    BackoffConfig backoff;
    SelectionConfig selection;
    bool noise_enabled = true;
    bool retrain_on_seal = true;
    double weight_quantile = 0.01;          // non-private weighting quantile
    double private_weight_quantile = 0.1;   // private weighting quantile
    double weight_budget_fraction = 1.0;    // share of one window's budget spent on weights
    std::map<std::string, double> weights;  // budget weight per table id
    uint64_t seed = 42;
    uint32_t webhook_attempts = 3;
    uint32_t webhook_backoff_ms = 50;

    static EngineConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct RetrainEvent {
    std::string reason;  // "window_expired" | "window_sealed"
    std::vector<uint64_t> expired_window_ids;
    uint64_t sealed_window_id = 0;
    uint64_t engine_version = 0;
    uint64_t emitted_at = 0;  // unix ms

    std::string to_json_text() const;
};

struct TrainRow {
    FeaturizedVector features;
    std::string label;
    double p = 1.0;
};

// Lifecycle coordinator. A single mutex serializes mutations; readers take
// immutable FeatureView handles that stay valid across rolls until released.
class Engine {
public:
    explicit Engine(EngineConfig cfg);

    // Appends to the hot window and updates the populating window's tables.
    // Auto-rolls when the configured window length fills; any retrain event
    // goes to the registered callback.
    void observe(const Observation& obs);
    void observe_json(const std::string& row_json);

    std::optional<RetrainEvent> roll_window();

    FeatureViewPtr aggregate_view() const;
    FeaturizedVector featurize_values(const std::map<std::string, FeatureValue>& values) const;
    std::vector<TrainRow> train_set() const;

    // Budget weights from hot-window count quantiles. The private variant
    // spends budget (recorded in the ledger) and sets the populating window
    // aside for weights only.
    std::map<std::string, double> compute_hot_weights(double quantile);
    std::map<std::string, double> compute_private_hot_weights(double quantile);
    void set_weights(std::map<std::string, double> weights);

    // MI group selection over the hot window; adopted groups start counting
    // on a trial basis from the next window.
    std::vector<GroupCandidate> run_group_selection();
    std::vector<GroupCandidate> reevaluate_trials();
    const std::vector<GroupCandidate>& trial_groups() const { return trials_; }
    std::vector<std::string> confirmed_group_ids() const;

    const EngineConfig& config() const { return cfg_; }
    const FeatureSchema& schema() const { return cfg_.schema; }
    BudgetLedger ledger() const;
    uint64_t version() const;
    size_t hot_size() const;
    std::vector<Observation> hot_snapshot() const;
    std::vector<WindowMeta> window_metas() const;

    void set_retrain_callback(std::function<void(const RetrainEvent&)> cb);

    // Snapshot interface (implemented in snapshot.cpp).
    std::string snapshot_bytes() const;
    void restore_sealed_state(const std::string& bytes);

    NoisePlan current_plan() const;

private:
    struct Window {
        uint64_t id = 0;
        std::map<std::string, CountTable> tables;
        uint64_t first_ts = 0;
        uint64_t last_ts = 0;
        uint64_t count = 0;
        double plan_epsilon = 0.0;  // budget of the plan its noise came from
        bool weights_only = false;
    };

    struct TreeNode {
        uint64_t first = 0;
        uint64_t last = 0;
        uint32_t level = 0;
        std::map<std::string, CountTable> tables;
    };

    void validate_observation(const Observation& obs) const;
    std::string key_for(const FeatureDecl& decl, const FeatureValue& value) const;
    void update_window_tables(Window& win, const Observation& obs);
    void fit_boundaries_locked();
    void maybe_fit_boundaries_locked();
    std::vector<std::pair<std::string, double>> plan_weights_locked() const;
    NoisePlan plan_locked(double epsilon_budget) const;
    Window make_window_locked(uint64_t id);
    std::optional<RetrainEvent> roll_locked();
    void materialize_tree_nodes_locked();
    uint32_t tree_levels() const;
    FeatureViewPtr build_view_locked() const;
    std::map<std::string, CountTable> aggregate_tables_locked() const;
    std::vector<std::string> all_table_ids_locked() const;
    std::map<std::string, std::vector<double>> hot_value_counts_locked() const;
    std::vector<GroupCandidate> reevaluate_trials_locked();

    mutable std::mutex mu_;
    EngineConfig cfg_;
    Rng noise_rng_;
    uint64_t clock_ = 0;
    std::deque<Observation> hot_;
    Window populating_;
    std::deque<Window> sealed_;
    std::vector<TreeNode> nodes_;
    std::map<std::string, BinBoundaries> boundaries_;
    bool boundaries_fitted_ = false;
    std::vector<Observation> prefit_;
    BudgetLedger ledger_;
    uint64_t version_ = 0;
    mutable FeatureViewPtr view_cache_;
    std::vector<GroupCandidate> trials_;
    std::vector<GroupCandidate> confirmed_;
    std::function<void(const RetrainEvent&)> retrain_cb_;
};

uint64_t unix_millis();

}  // namespace pyramid
