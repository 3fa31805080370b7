#pragma once

#include <string>
#include <vector>

#include "mtfda/pl_function.hpp"

namespace mtfda {

// Rooted tree with a height per node. The root has height +inf and exactly
// one child; heights are strictly increasing from child to father. Node ids
// are dense 0..n-1 in sweep order when built from a function.
struct MergeTree {
    struct Node {
        int parent = -1;  // -1 for the root
        double height = 0.0;
    };
    std::string id;
    std::vector<Node> nodes;
    int root = -1;

    int size() const { return static_cast<int>(nodes.size()); }
    bool is_root(int v) const { return v == root; }
    double height(int v) const { return nodes[static_cast<std::size_t>(v)].height; }
    int parent(int v) const { return nodes[static_cast<std::size_t>(v)].parent; }

    std::vector<std::vector<int>> children() const;
    std::vector<int> leaves() const;
    int leaf_count() const;
    double min_leaf_height() const;
    double max_finite_height() const;

    // Throws data_error if the structure or height monotonicity is broken.
    void validate() const;
};

// A merge tree plus the truncation constant K that replaces the root's +inf.
// Edge weights are derived: weight(v) = h'(parent(v)) - h'(v) with h'(root)=K.
struct WeightedMergeTree {
    MergeTree tree;
    double K = 0.0;

    double hprime(int v) const;
    double weight(int v) const;      // v non-root
    double total_weight() const;     // sum over all non-root nodes
};

// Sublevel-set sweep over the critical profile: one leaf per minimum plateau,
// one internal vertex per merge height (simultaneous merges at the same
// height collapse into a single multi-child vertex), root at +inf.
MergeTree build_merge_tree(const PLFunction& f);

// Ghost every order-2 non-root vertex; heights unchanged.
MergeTree normalize(const MergeTree& t);

// Attach K. Throws param_error if K is below a finite height of the tree.
WeightedMergeTree truncate(const MergeTree& t, double K);

// Least common ancestor under the child < father order.
int lca(const MergeTree& t, const std::vector<int>& vs);

// Subtrees sub_T(v) for every v with height(v) <= h < height(parent(v)),
// each re-rooted under a fresh +inf root.
std::vector<MergeTree> cut_at_height(const MergeTree& t, double h);

// JSON schema: {"K": number|null, "nodes":[{"id":int,"parent":int|null,"height":number|"inf"}]}
std::string to_json(const WeightedMergeTree& t);
WeightedMergeTree merge_tree_from_json(const std::string& text);

// Canonical key: equal keys <=> isomorphic as merge trees (structure plus
// exact heights). The weighted variant compares derived edge weights instead.
std::string canonical_key(const MergeTree& t);
std::string canonical_weight_key(const WeightedMergeTree& t);

bool isomorphic(const MergeTree& a, const MergeTree& b);

}  // namespace mtfda
