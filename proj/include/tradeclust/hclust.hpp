#pragma once

#include <string>
#include <vector>

#include "tradeclust/partition.hpp"
#include "tradeclust/profiles.hpp"

namespace tradeclust {

enum class LinkageMethod { Single, Average, Complete };

LinkageMethod parse_linkage_method(const std::string& name);
const char* linkage_method_name(LinkageMethod m);

// One agglomeration step. `left` and `right` address either a leaf
// [0, n_leaves) or an earlier merge (n_leaves + merge index).
struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int size = 0;  // leaves under this merge
};

// Merge tree of n_leaves elements: exactly n_leaves - 1 merges with
// nondecreasing heights (single/average/complete linkage cannot invert).
struct Dendrogram {
    int n_leaves = 0;
    std::vector<std::string> leaf_names;
    std::vector<Merge> merges;

    double root_height() const {
        return merges.empty() ? 0.0 : merges.back().height;
    }
};

// Agglomerative clustering by the nearest-neighbor-chain algorithm
// (O(N^2) time, O(N) extra space; all three linkages are reducible).
// Inter-cluster distance is the minimum (single), unweighted mean over all
// cross pairs (average, UPGMA) or maximum (complete) of element
// dissimilarities. Ties are broken deterministically: nearest-neighbor scans
// keep the chain predecessor, then the candidate with the smallest minimum
// leaf id; equal-height merges are ordered by their (min leaf, max leaf)
// representative pair.
Dendrogram linkage(const DissimilarityMatrix& matrix, LinkageMethod method);

// Flat partition from applying every merge with height strictly below
// `threshold`; elements never merged below it stay singletons. Cluster ids
// are assigned in leaf order.
Partition cut(const Dendrogram& tree, double threshold);

// Nested parenthesized text form with branch lengths (child annotated with
// parent height minus child height; leaves sit at height 0), e.g.
// "(A:1.0,B:1.0);". parse_newick() round-trips it.
std::string to_newick(const Dendrogram& tree);
Dendrogram parse_newick(const std::string& text);

}  // namespace tradeclust
