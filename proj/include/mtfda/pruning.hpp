#pragma once

#include <vector>

#include "mtfda/merge_tree.hpp"

namespace mtfda {

// One application of the pruning step: the globally minimal-weight leaf
// (ties broken by smallest node id) is deleted when its weight is strictly
// below eps, and its father is ghosted if it became order 2. A leaf that is
// the root's only child is never pruned.
WeightedMergeTree prune_step(const WeightedMergeTree& t, double eps);

// Fixed point of prune_step; idempotent.
WeightedMergeTree prune(const WeightedMergeTree& t, double eps);

// Same as prune but also reports the weights of the removed leaves at the
// moment of their removal (one entry per deleted leaf, in removal order).
struct PruneTrace {
    WeightedMergeTree tree;
    std::vector<double> removed_leaf_weights;
};
PruneTrace prune_trace(const WeightedMergeTree& t, double eps);

// Average leaf count of prune(T, eps) over a dataset, per grid threshold.
struct ElbowCurve {
    std::vector<double> thresholds;
    std::vector<double> avg_leaves;
};
ElbowCurve elbow_curve(const std::vector<WeightedMergeTree>& trees, const std::vector<double>& grid);

}  // namespace mtfda
