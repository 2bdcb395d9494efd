#ifndef FEATSIG_CLUSTER_HPP
#define FEATSIG_CLUSTER_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "featsig/data.hpp"
#include "featsig/hierarchy.hpp"

namespace featsig {

struct LinkageStep {
    std::size_t left_cluster = 0;   // node id of the left merge input
    std::size_t right_cluster = 0;  // node id of the right merge input
    std::size_t merged = 0;         // node id of the new cluster
    std::size_t distance = 0;       // complete-linkage Hamming distance, in bits
};

struct ClusterResult {
    FeatureHierarchy hierarchy;
    std::vector<LinkageStep> steps;  // merge order; distances need not be monotone
};

// Agglomerates the columns of a binary matrix into a feature hierarchy.
// Starting from singleton clusters laid out in `order` (identity when
// empty), each step merges the adjacent pair with the smallest
// complete-linkage Hamming distance (leftmost pair on ties) until a single
// root remains.  Only adjacent clusters ever merge, so the tree's in-order
// leaf sequence equals the input order.  Leaves are named by
// `column_names` when given, "f<col>" otherwise.
ClusterResult constrained_cluster(const Matrix& X, std::span<const std::size_t> order = {},
                                  std::span<const std::string> column_names = {});

// Maximal subtrees whose every internal merge stayed within
// `max_bit_difference`, listed left to right as flat feature clusters.
std::vector<std::vector<std::size_t>> cut_clusters(const ClusterResult& result,
                                                   std::size_t max_bit_difference);

}  // namespace featsig

#endif  // FEATSIG_CLUSTER_HPP
