#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tradeclust/partition.hpp"
#include "tradeclust/svn.hpp"

namespace tradeclust {

struct WeightedEdge {
    int u = 0;
    int v = 0;
    int weight = 1;
};

// Undirected weighted graph over named nodes; no self-loops, each unordered
// pair at most once, weights >= 1.
struct WeightedGraph {
    std::vector<std::string> node_ids;
    std::vector<WeightedEdge> edges;

    int n_nodes() const { return static_cast<int>(node_ids.size()); }

    void validate() const;

    static WeightedGraph from_network(const ValidatedNetwork& net);
};

// Two-level map equation in bits for a partition of g: the expected per-step
// description length of a random walk whose visit rates follow node strength,
// with one index codebook across modules and one codebook per module. Lower
// is better.
double codelength(const WeightedGraph& g, const Partition& p);

// Best partition over n_trials restarts of greedy node moving with
// module-merging refinement (Louvain-style passes on the aggregated module
// graph), evaluated by the map equation. The all-singletons and
// one-module-per-component partitions are always evaluated as fallbacks, so
// the result is never worse than either. Deterministic for fixed
// (seed, n_trials); codelength ties resolve to the lexicographically
// smallest canonical labeling. Isolated nodes stay singleton modules.
Partition infomap_partition(const WeightedGraph& g, std::uint64_t seed,
                            int n_trials = 10);

}  // namespace tradeclust
