#include "core/noise_plan.hpp"

#include "core/errors.hpp"

#include <cmath>

namespace pyramid {

void PrivacyConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (h < 1) throw ConfigError("h must be >= 1");
    if (!(p_min > 0.0 && p_min <= 1.0)) throw ConfigError("p_min must be in (0,1]");
}

double NoisePlan::total_epsilon() const {
    double sum = 0.0;
    for (const auto& e : per_table) sum += e.epsilon;
    return sum;
}

const NoisePlanEntry* NoisePlan::find(const std::string& table_id) const {
    for (const auto& e : per_table)
        if (e.table_id == table_id) return &e;
    return nullptr;
}

NoisePlan build_noise_plan(const PrivacyConfig& cfg,
                           const std::vector<std::pair<std::string, double>>& weights) {
    cfg.validate();
    if (weights.empty()) throw ConfigError("noise plan needs at least one table");

    double weight_sum = 0.0;
    for (const auto& [id, w] : weights) {
        if (!(w > 0.0)) throw ValueError("table weight must be positive: " + id);
        weight_sum += w;
    }

    NoisePlan plan;
    plan.per_table.reserve(weights.size());
    double sensitivity = static_cast<double>(cfg.h) * cfg.k;
    for (const auto& [id, w] : weights) {
        double eps_i = cfg.epsilon * w / weight_sum;
        double b_i = sensitivity / (cfg.p_min * eps_i);
        plan.per_table.push_back({id, w, eps_i, b_i});
    }
    return plan;
}

void BudgetLedger::record(uint64_t window_id, std::string purpose, double epsilon) {
    entries_.push_back({window_id, std::move(purpose), epsilon});
}

double BudgetLedger::spent_in_window(uint64_t window_id) const {
    double sum = 0.0;
    for (const auto& e : entries_)
        if (e.window_id == window_id) sum += e.epsilon;
    return sum;
}

double BudgetLedger::total_spent() const {
    double sum = 0.0;
    for (const auto& e : entries_) sum += e.epsilon;
    return sum;
}

}  // namespace pyramid
