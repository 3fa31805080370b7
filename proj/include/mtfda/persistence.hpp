#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtfda/merge_tree.hpp"
#include "mtfda/pl_function.hpp"

namespace mtfda {

// Multiset of (birth, death) pairs with death > birth, plus the essential
// class of the connected domain. K is the truncation used when the essential
// class is materialized as (birth, K).
struct PersistenceDiagram {
    std::string id;
    std::vector<std::pair<double, double>> points;
    std::optional<double> essential_birth;
    std::optional<double> K;

    // points sorted, essential appended as (birth, K) when materialized
    std::vector<std::pair<double, double>> materialized(bool drop_essential) const;
};

// Elder rule on the tree: at every internal vertex the merging branch whose
// minimum leaf is lowest survives (ties by smaller node id); each other
// branch emits (branch minimum, merge height).
PersistenceDiagram pd_from_merge_tree(const MergeTree& t);

// Direct union-find sweep over the critical profile of f; independent of the
// tree path and used to cross-check it.
PersistenceDiagram pd_from_function(const PLFunction& f);

// Drop every finite point with death - birth < eps; the essential class stays.
PersistenceDiagram threshold_pd(const PersistenceDiagram& d, double eps);

bool same_diagram(const PersistenceDiagram& a, const PersistenceDiagram& b);

// p-Wasserstein distance, unmatched points paired with the diagonal at cost
// (death - birth)/2 in the sup norm. Exact min-cost assignment on the
// diagonally augmented bipartite graph. Essential classes are either both
// materialized at the same K or both dropped.
double wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                   bool drop_essential = false);

// Exhaustive enumeration over all partial matchings; small diagrams only.
double wasserstein_bruteforce(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                              bool drop_essential = false);

// Exact solver for a dense square assignment problem; returns the minimal
// total cost. Exposed for reuse and for direct testing.
double solve_assignment(const std::vector<std::vector<double>>& cost);

std::string diagram_to_csv(const PersistenceDiagram& d, bool drop_essential);

}  // namespace mtfda
