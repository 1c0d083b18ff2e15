#pragma once

#include <map>
#include <string>
#include <vector>

#include "tradeclust/hclust.hpp"
#include "tradeclust/partition.hpp"

namespace tradeclust {

// Chance-corrected pair-agreement between two partitions of the same
// element set: 1 for identical partitions (up to label renaming), about 0
// for independent ones. The degenerate 0/0 case (both all-singletons or
// both one-cluster) is defined as 1.
double adjusted_rand_index(const Partition& p1, const Partition& p2);

// Induced partition on `subset` (every subset element must be in p); labels
// are recompacted, element order follows p.
Partition restrict_partition(const Partition& p,
                             const std::vector<std::string>& subset);

struct SweepResult {
    std::vector<double> thresholds;  // in evaluation order: coarse, then fine
    std::vector<double> ari_values;
    double best_threshold = 0.0;
    double best_ari = 0.0;
    std::string method;  // linkage name, filled by the caller
};

// ARI of cut(tree, t) restricted to `subset` against `reference`, for t on
// the coarse grid over [0, root reach + coarse_step], then on a fine grid
// spanning one coarse step either side of the coarse maximizer. Reports the
// overall best (first threshold attaining it under ties).
SweepResult ari_sweep(const Dendrogram& tree, const Partition& reference,
                      const std::vector<std::string>& subset,
                      double coarse_step = 0.1, double fine_step = 0.01);

struct SizeDistribution {
    std::map<int, int> counts;       // cluster size -> number of clusters
    std::map<int, double> density;   // counts / total clusters, sums to 1
};

SizeDistribution cluster_size_distribution(const Partition& p);

}  // namespace tradeclust
