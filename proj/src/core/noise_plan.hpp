#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pyramid {

struct PrivacyConfig {
    double epsilon = 1.0;  // per-window budget
    uint32_t k = 1;        // group size of observations to hide
    uint32_t h = 5;        // sketch depth, the per-observation sensitivity multiplier
    double p_min = 1.0;    // minimum importance probability

    void validate() const;
};

struct NoisePlanEntry {
    std::string table_id;
    double weight;   // budget weight w_i
    double epsilon;  // share epsilon_i = eps * w_i / sum(w)
    double scale;    // b_i = h*k / (p_min * epsilon_i)
};

struct NoisePlan {
    std::vector<NoisePlanEntry> per_table;

    double total_epsilon() const;
    const NoisePlanEntry* find(const std::string& table_id) const;
};

// Splits the window budget across tables proportionally to the given weights.
// All-equal weights reproduce the even split b = n*h*k / (p_min * eps).
NoisePlan build_noise_plan(const PrivacyConfig& cfg,
                           const std::vector<std::pair<std::string, double>>& weights);

// Epsilon expenditure ledger. One entry per window's table noise plus one per
// weight computation; total spent per window never exceeds the configured
// budget.
struct LedgerEntry {
    uint64_t window_id;
    std::string purpose;  // "tables", "tree-node", "weights"
    double epsilon;
};

class BudgetLedger {
public:
    void record(uint64_t window_id, std::string purpose, double epsilon);
    double spent_in_window(uint64_t window_id) const;
    double total_spent() const;
    const std::vector<LedgerEntry>& entries() const { return entries_; }
    void replace(std::vector<LedgerEntry> entries) { entries_ = std::move(entries); }

private:
    std::vector<LedgerEntry> entries_;
};

}  // namespace pyramid
