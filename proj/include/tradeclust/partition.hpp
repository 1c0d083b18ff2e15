#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tradeclust/common.hpp"

namespace tradeclust {

// Flat clustering: element i (named ids[i]) carries label labels[i] in
// [0, n_clusters). Labels are contiguous from 0.
struct Partition {
    std::vector<std::string> ids;
    std::vector<int> labels;
    int n_clusters = 0;

    std::size_t size() const { return ids.size(); }

    // Renumbers labels in order of first appearance and recomputes
    // n_clusters.
    void compact();

    std::unordered_map<std::string, int> label_by_id() const;

    void validate() const;
};

}  // namespace tradeclust
