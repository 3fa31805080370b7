#pragma once

#include <string>
#include <vector>

#include "mtfda/merge_tree.hpp"

namespace mtfda {

// One edit on a weighted merge tree. Shrink changes an edge weight, Delete
// removes an edge (the father adopts the children), Insert is its inverse,
// Ghost removes an order-2 vertex joining the adjacent edges, Split is the
// inverse of Ghost.
struct Edit {
    enum class Kind { Shrink, Delete, Insert, Ghost, Split };
    Kind kind = Kind::Shrink;
    int node = -1;           // Shrink/Delete/Ghost target; Insert: attach under this vertex; Split: lower vertex of the edge
    double value = 0.0;      // Shrink: new weight; Insert: new edge weight; Split: upper part of the weight
    std::vector<int> adopt;  // Insert only: children of `node` moved below the new vertex
};

double edit_cost(const Edit& e, const WeightedMergeTree& t);
WeightedMergeTree apply_edit(const WeightedMergeTree& t, const Edit& e);

// Certificate realizing a distance: couples pair vertices across the trees,
// every other non-root vertex is deleted (paying its weight) or ghosted
// (free, its weight joins the coupled path below it).
struct Mapping {
    std::vector<std::pair<int, int>> couples;
    std::vector<int> deletions1, deletions2;
    std::vector<int> ghostings1, ghostings2;
};

struct EditResult {
    double distance = 0.0;
    Mapping mapping;
};

// Exact merge-tree edit distance. Both trees must carry the same K.
EditResult d_edit(const WeightedMergeTree& a, const WeightedMergeTree& b);

// Exhaustive minimum over all valid mappings; requires <= 4 leaves and
// <= 9 vertices per tree. Independent of the d_edit solver.
double d_edit_bruteforce(const WeightedMergeTree& a, const WeightedMergeTree& b);

// Replays a mapping as delete/ghost/shrink edits on both sides and returns
// the realized cost; throws data_error if the mapping is not valid or the
// contracted structures do not agree.
double replay_mapping(const WeightedMergeTree& a, const WeightedMergeTree& b, const Mapping& m);

std::string mapping_to_json(const Mapping& m);

}  // namespace mtfda
