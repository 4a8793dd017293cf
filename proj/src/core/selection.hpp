#pragma once

#include "core/schema.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pyramid {

enum class GroupStatus : uint8_t { Trial, Confirmed, Dropped };

struct GroupCandidate {
    std::vector<std::string> members;  // sorted, unique
    double mi_score = 0.0;             // nats
    GroupStatus status = GroupStatus::Trial;
};

struct SelectionConfig {
    uint32_t max_groups = 35;
    uint32_t max_group_size = 3;
    double budget_fraction = 0.1;  // epsilon share given to group tables
    double mi_margin = 0.001;      // required improvement in nats
    uint32_t value_cap = 1024;     // top values kept per feature for MI estimation
};

// Joint (value-key, label-index) counts.
using JointCounts = std::map<std::pair<std::string, int>, double>;

// Plug-in mutual information in nats from empirical joint counts. Terms with
// zero joint mass contribute nothing.
double empirical_mi(const JointCounts& joint_counts);

// Pairs (then greedy extensions) whose MI with the label beats every member's
// single-feature MI by the margin. Returns up to max_groups candidates,
// highest MI first, ties broken by lexicographic member order.
std::vector<GroupCandidate> select_groups(const std::vector<Observation>& hot_window,
                                          const FeatureSchema& schema,
                                          const std::map<std::string, BinBoundaries>& bounds,
                                          const SelectionConfig& cfg);

}  // namespace pyramid
