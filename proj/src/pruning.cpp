#include "mtfda/pruning.hpp"

#include <algorithm>
#include <limits>

#include "mtfda/errors.hpp"

namespace mtfda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// workspace sharing the original id space so the tie-break stays stable
// across iterations; compacted once at the end
struct Workspace {
    const MergeTree* src;
    double K;
    std::vector<int> parent;
    std::vector<char> alive;
    std::vector<int> child_count;

    explicit Workspace(const WeightedMergeTree& t) : src(&t.tree), K(t.K) {
        int n = src->size();
        parent.resize(static_cast<std::size_t>(n));
        alive.assign(static_cast<std::size_t>(n), 1);
        child_count.assign(static_cast<std::size_t>(n), 0);
        for (int v = 0; v < n; ++v) {
            parent[static_cast<std::size_t>(v)] = src->parent(v);
            if (v != src->root) ++child_count[static_cast<std::size_t>(src->parent(v))];
        }
    }

    double hprime(int v) const { return v == src->root ? K : src->height(v); }
    double weight(int v) const { return hprime(parent[static_cast<std::size_t>(v)]) - src->height(v); }

    void remove(int v) {  // delete a leaf or splice an order-2 vertex
        alive[static_cast<std::size_t>(v)] = 0;
        int p = parent[static_cast<std::size_t>(v)];
        --child_count[static_cast<std::size_t>(p)];
        for (int u = 0; u < src->size(); ++u)
            if (alive[static_cast<std::size_t>(u)] && parent[static_cast<std::size_t>(u)] == v) {
                parent[static_cast<std::size_t>(u)] = p;
                ++child_count[static_cast<std::size_t>(p)];
            }
    }

    // returns the weight of the deleted leaf, or nothing at a fixed point
    bool step(double eps, double* removed) {
        int best = -1;
        double best_w = kInf;
        for (int v = 0; v < src->size(); ++v) {
            if (!alive[static_cast<std::size_t>(v)] || v == src->root) continue;
            if (child_count[static_cast<std::size_t>(v)] != 0) continue;
            double w = weight(v);
            if (w < best_w) {
                best_w = w;
                best = v;
            }
        }
        if (best < 0 || !(best_w < eps)) return false;
        if (parent[static_cast<std::size_t>(best)] == src->root) return false;  // last leaf stays
        int father = parent[static_cast<std::size_t>(best)];
        *removed = best_w;
        remove(best);
        // ghost any order-2 non-root vertex the deletion produced
        if (father != src->root && child_count[static_cast<std::size_t>(father)] == 1) remove(father);
        return true;
    }

    WeightedMergeTree compact() const {
        WeightedMergeTree out;
        out.K = K;
        out.tree.id = src->id;
        std::vector<int> remap(static_cast<std::size_t>(src->size()), -1);
        for (int v = 0; v < src->size(); ++v) {
            if (!alive[static_cast<std::size_t>(v)]) continue;
            remap[static_cast<std::size_t>(v)] = out.tree.size();
            out.tree.nodes.push_back({-1, src->height(v)});
        }
        for (int v = 0; v < src->size(); ++v) {
            if (!alive[static_cast<std::size_t>(v)]) continue;
            int nv = remap[static_cast<std::size_t>(v)];
            if (v == src->root) {
                out.tree.root = nv;
            } else {
                out.tree.nodes[static_cast<std::size_t>(nv)].parent =
                    remap[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            }
        }
        out.tree.validate();
        return out;
    }
};
}  // namespace

WeightedMergeTree prune_step(const WeightedMergeTree& t, double eps) {
    if (eps < 0) throw param_error("prune: eps must be nonnegative");
    Workspace ws(t);
    double removed;
    ws.step(eps, &removed);
    return ws.compact();
}

PruneTrace prune_trace(const WeightedMergeTree& t, double eps) {
    if (eps < 0) throw param_error("prune: eps must be nonnegative");
    Workspace ws(t);
    PruneTrace out;
    double removed;
    while (ws.step(eps, &removed)) out.removed_leaf_weights.push_back(removed);
    out.tree = ws.compact();
    return out;
}

WeightedMergeTree prune(const WeightedMergeTree& t, double eps) {
    return prune_trace(t, eps).tree;
}

ElbowCurve elbow_curve(const std::vector<WeightedMergeTree>& trees, const std::vector<double>& grid) {
    if (trees.empty()) throw param_error("elbow_curve: no trees");
    if (grid.empty()) throw param_error("elbow_curve: empty threshold grid");
    ElbowCurve out;
    out.thresholds = grid;
    std::sort(out.thresholds.begin(), out.thresholds.end());
    for (double eps : out.thresholds) {
        double acc = 0.0;
        for (const auto& t : trees) acc += prune(t, eps).tree.leaf_count();
        out.avg_leaves.push_back(acc / static_cast<double>(trees.size()));
    }
    return out;
}

}  // namespace mtfda
