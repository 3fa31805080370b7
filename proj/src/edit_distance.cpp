#include "mtfda/edit_distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <unordered_map>
#include <numeric>

#include <json.hpp>

#include "mtfda/errors.hpp"

namespace mtfda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// edits

double edit_cost(const Edit& e, const WeightedMergeTree& t) {
    const MergeTree& tr = t.tree;
    auto ch = tr.children();
    auto check_nonroot = [&](int v) {
        if (v < 0 || v >= tr.size() || v == tr.root) throw param_error("edit: target must be a non-root vertex");
    };
    switch (e.kind) {
        case Edit::Kind::Shrink:
            check_nonroot(e.node);
            if (!(e.value > 0)) throw param_error("edit: shrink weight must be positive");
            return std::abs(t.weight(e.node) - e.value);
        case Edit::Kind::Delete:
            check_nonroot(e.node);
            if (tr.parent(e.node) == tr.root) throw param_error("edit: cannot delete the root edge");
            return t.weight(e.node);
        case Edit::Kind::Insert:
            if (e.node < 0 || e.node >= tr.size()) throw param_error("edit: bad insertion vertex");
            if (!(e.value > 0)) throw param_error("edit: inserted weight must be positive");
            return e.value;
        case Edit::Kind::Ghost:
            check_nonroot(e.node);
            if (ch[static_cast<std::size_t>(e.node)].size() != 1)
                throw param_error("edit: ghosting needs an order-2 vertex");
            return 0.0;
        case Edit::Kind::Split:
            check_nonroot(e.node);
            if (!(e.value > 0) || !(e.value < t.weight(e.node)))
                throw param_error("edit: split position must fall strictly inside the edge");
            return 0.0;
    }
    throw param_error("edit: unknown kind");
}

WeightedMergeTree apply_edit(const WeightedMergeTree& t, const Edit& e) {
    edit_cost(e, t);  // validates applicability
    const MergeTree& tr = t.tree;
    int n = tr.size();
    // weight-space workspace: parents and edge weights, heights rebuilt at the end
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v) {
        parent[static_cast<std::size_t>(v)] = tr.parent(v);
        if (v != tr.root) w[static_cast<std::size_t>(v)] = t.weight(v);
    }
    std::vector<char> alive(static_cast<std::size_t>(n), 1);

    switch (e.kind) {
        case Edit::Kind::Shrink:
            w[static_cast<std::size_t>(e.node)] = e.value;
            break;
        case Edit::Kind::Delete: {
            alive[static_cast<std::size_t>(e.node)] = 0;
            for (int v = 0; v < n; ++v)
                if (alive[static_cast<std::size_t>(v)] && parent[static_cast<std::size_t>(v)] == e.node)
                    parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(e.node)];
            break;
        }
        case Edit::Kind::Insert: {
            for (int c : e.adopt) {
                if (c < 0 || c >= n || parent[static_cast<std::size_t>(c)] != e.node)
                    throw param_error("edit: insert may only adopt children of the attachment vertex");
            }
            parent.push_back(e.node);
            w.push_back(e.value);
            alive.push_back(1);
            int fresh = n;
            for (int c : e.adopt) parent[static_cast<std::size_t>(c)] = fresh;
            ++n;
            break;
        }
        case Edit::Kind::Ghost: {
            alive[static_cast<std::size_t>(e.node)] = 0;
            for (int v = 0; v < n; ++v)
                if (alive[static_cast<std::size_t>(v)] && parent[static_cast<std::size_t>(v)] == e.node) {
                    parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(e.node)];
                    w[static_cast<std::size_t>(v)] += w[static_cast<std::size_t>(e.node)];
                }
            break;
        }
        case Edit::Kind::Split: {
            parent.push_back(parent[static_cast<std::size_t>(e.node)]);
            w.push_back(e.value);
            alive.push_back(1);
            int fresh = n;
            parent[static_cast<std::size_t>(e.node)] = fresh;
            w[static_cast<std::size_t>(e.node)] -= e.value;
            ++n;
            break;
        }
    }

    // rebuild heights from the root downward with h'(root) = K
    WeightedMergeTree out;
    out.K = t.K;
    out.tree.id = tr.id;
    std::vector<int> remap(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v) {
        if (!alive[static_cast<std::size_t>(v)]) continue;
        remap[static_cast<std::size_t>(v)] = out.tree.size();
        out.tree.nodes.push_back({-1, 0.0});
    }
    std::vector<double> hp(static_cast<std::size_t>(n), 0.0);
    // resolve heights by repeated passes (tree depth бounded by n)
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    int old_root = tr.root;
    hp[static_cast<std::size_t>(old_root)] = t.K;
    done[static_cast<std::size_t>(old_root)] = 1;
    out.tree.nodes[static_cast<std::size_t>(remap[static_cast<std::size_t>(old_root)])].height = kInf;
    out.tree.root = remap[static_cast<std::size_t>(old_root)];
    bool progress = true;
    while (progress) {
        progress = false;
        for (int v = 0; v < n; ++v) {
            if (!alive[static_cast<std::size_t>(v)] || done[static_cast<std::size_t>(v)] || v == old_root)
                continue;
            int p = parent[static_cast<std::size_t>(v)];
            if (!done[static_cast<std::size_t>(p)]) continue;
            hp[static_cast<std::size_t>(v)] = hp[static_cast<std::size_t>(p)] - w[static_cast<std::size_t>(v)];
            done[static_cast<std::size_t>(v)] = 1;
            auto& node = out.tree.nodes[static_cast<std::size_t>(remap[static_cast<std::size_t>(v)])];
            node.height = hp[static_cast<std::size_t>(v)];
            node.parent = remap[static_cast<std::size_t>(p)];
            progress = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// exact solver
//
// A mapping is determined by its couple set: an order-isomorphism between
// subsets of the two vertex sets. Every vertex outside the couples is deleted,
// except the chain vertices with exactly one coupled branch below, which are
// ghosted for free with their weight folded into the coupled path. The solver
// searches couple sets as a recursive match between branch forests:
//   match  - a frontier branch pairs with a branch on the other side, the top
//            couple sits anywhere inside either subtree (off-path subtrees
//            deleted, on-path vertices ghosted);
//   core   - a frontier vertex with >= 2 children is deleted so its children
//            become separate branches;
//   delete - a frontier branch disappears wholesale.
// Branches that are weight-isomorphic cancel at zero cost.

namespace {

struct Side {
    int n = 0;
    int root = -1;
    double K = 0.0;
    std::vector<int> parent;
    std::vector<std::vector<int>> kids;
    std::vector<double> h;      // finite heights; root entry unused
    std::vector<double> w;      // edge weight above v; 0 for root
    std::vector<double> subw;   // total weight of the branch at v (own edge included)
    std::vector<int> canon;     // interned weight-canonical id of the branch at v
    std::vector<std::vector<int>> desc;  // descendants of v, v included, id-sorted
    std::vector<double> all_subw;        // every branch weight in the tree, sorted

    double hp(int v) const { return v == root ? K : h[static_cast<std::size_t>(v)]; }

    // smallest |x - s| over all branch weights of this side
    double nearest_subw_gap(double x) const {
        auto it = std::lower_bound(all_subw.begin(), all_subw.end(), x);
        double best = kInf;
        if (it != all_subw.end()) best = std::min(best, *it - x);
        if (it != all_subw.begin()) best = std::min(best, x - *(it - 1));
        return best;
    }
};

struct CanonInterner {
    std::map<std::pair<std::uint64_t, std::vector<int>>, int> table;
    int intern(double weight, std::vector<int> child_canons) {
        std::sort(child_canons.begin(), child_canons.end());
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof weight);
        std::memcpy(&bits, &weight, sizeof bits);
        auto key = std::make_pair(bits, std::move(child_canons));
        auto it = table.find(key);
        if (it != table.end()) return it->second;
        int id = static_cast<int>(table.size());
        table.emplace(std::move(key), id);
        return id;
    }
};

Side make_side(const WeightedMergeTree& t, CanonInterner& interner) {
    Side s;
    s.n = t.tree.size();
    s.root = t.tree.root;
    s.K = t.K;
    s.parent.resize(static_cast<std::size_t>(s.n));
    s.h.resize(static_cast<std::size_t>(s.n), 0.0);
    s.w.resize(static_cast<std::size_t>(s.n), 0.0);
    s.kids = t.tree.children();
    for (int v = 0; v < s.n; ++v) {
        s.parent[static_cast<std::size_t>(v)] = t.tree.parent(v);
        if (v != s.root) {
            s.h[static_cast<std::size_t>(v)] = t.tree.height(v);
            s.w[static_cast<std::size_t>(v)] = t.weight(v);
        }
    }
    s.subw.assign(static_cast<std::size_t>(s.n), 0.0);
    s.canon.assign(static_cast<std::size_t>(s.n), -1);
    s.desc.resize(static_cast<std::size_t>(s.n));
    // children first (heights ascend toward the root)
    std::vector<int> order(static_cast<std::size_t>(s.n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ha = a == s.root ? kInf : s.h[static_cast<std::size_t>(a)];
        double hb = b == s.root ? kInf : s.h[static_cast<std::size_t>(b)];
        return ha < hb;
    });
    for (int v : order) {
        if (v == s.root) continue;
        double total = s.w[static_cast<std::size_t>(v)];
        std::vector<int> child_canons;
        std::vector<int> d{v};
        for (int c : s.kids[static_cast<std::size_t>(v)]) {
            total += s.subw[static_cast<std::size_t>(c)];
            child_canons.push_back(s.canon[static_cast<std::size_t>(c)]);
            d.insert(d.end(), s.desc[static_cast<std::size_t>(c)].begin(),
                     s.desc[static_cast<std::size_t>(c)].end());
        }
        std::sort(d.begin(), d.end());
        s.subw[static_cast<std::size_t>(v)] = total;
        s.canon[static_cast<std::size_t>(v)] =
            interner.intern(s.w[static_cast<std::size_t>(v)], std::move(child_canons));
        s.desc[static_cast<std::size_t>(v)] = std::move(d);
    }
    for (int v = 0; v < s.n; ++v)
        if (v != s.root) s.all_subw.push_back(s.subw[static_cast<std::size_t>(v)]);
    std::sort(s.all_subw.begin(), s.all_subw.end());
    return s;
}

using Forest = std::vector<int>;  // id-sorted frontier roots

struct FfmMove {
    enum class Kind { Match, Core1, Core2, Del1, CloseLeft, CloseRight } kind;
    int x = -1, y = -1;
};

struct FfmEntry {
    double value = kInf;
    double proven_bound = 0.0;  // true value is >= this even when not exact
    bool exact = false;
    std::vector<std::pair<int, int>> cancels;  // identical branches paired first
    FfmMove move{FfmMove::Kind::CloseLeft, -1, -1};
};

struct BpEntry {
    double value = kInf;
    double proven_bound = 0.0;
    bool exact = false;
    bool identical = false;
    int a = -1, b = -1;  // chosen top couple when not identical
};

// frontier pair packed as f1, -1, f2
struct ForestKeyHash {
    std::size_t operator()(const std::vector<int>& key) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int v : key) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct Solver {
    Side A, B;
    std::vector<BpEntry> bp;       // n1*n2 memo, value NaN = unset
    std::vector<char> bp_set;
    std::unordered_map<std::vector<int>, FfmEntry, ForestKeyHash> ffm_memo;

    Solver(const WeightedMergeTree& ta, const WeightedMergeTree& tb) {
        CanonInterner interner;
        A = make_side(ta, interner);
        B = make_side(tb, interner);
        bp.resize(static_cast<std::size_t>(A.n) * static_cast<std::size_t>(B.n));
        bp_set.assign(bp.size(), 0);
        ffm_memo.reserve(1024);
    }

    static std::vector<int> make_key(const Forest& f1, const Forest& f2) {
        std::vector<int> key;
        key.reserve(f1.size() + f2.size() + 1);
        key.insert(key.end(), f1.begin(), f1.end());
        key.push_back(-1);
        key.insert(key.end(), f2.begin(), f2.end());
        return key;
    }

    double forest_weight(const Side& s, const Forest& f) const {
        double t = 0.0;
        for (int v : f) t += s.subw[static_cast<std::size_t>(v)];
        return t;
    }

    // lower bound on the cost of resolving the two frontiers; an item is
    // deleted (its branch weight), cored (its edge weight), or matched as a
    // branch against some branch of the other tree - possibly one exposed by
    // later corings, so the match floor ranges over every branch weight
    double lower_bound(const Forest& f1, const Forest& f2) const {
        double s1 = forest_weight(A, f1), s2 = forest_weight(B, f2);
        double lb = std::abs(s1 - s2);
        double acc1 = 0.0;
        for (int x : f1) {
            double best = std::min(A.subw[static_cast<std::size_t>(x)],
                                   B.nearest_subw_gap(A.subw[static_cast<std::size_t>(x)]));
            if (A.kids[static_cast<std::size_t>(x)].size() >= 2)
                best = std::min(best, A.w[static_cast<std::size_t>(x)]);
            acc1 += best;
        }
        double acc2 = 0.0;
        for (int y : f2) {
            double best = std::min(B.subw[static_cast<std::size_t>(y)],
                                   A.nearest_subw_gap(B.subw[static_cast<std::size_t>(y)]));
            if (B.kids[static_cast<std::size_t>(y)].size() >= 2)
                best = std::min(best, B.w[static_cast<std::size_t>(y)]);
            acc2 += best;
        }
        return std::max({lb, acc1, acc2});
    }

    // branch-vs-branch: exactly one top couple on each side. A finite result
    // is exact; kInf certifies the true value is >= budget, and that bound is
    // remembered so cheaper revisits bail out immediately.
    double branch_pair(int x, int y, double budget = kInf) {
        std::size_t key = static_cast<std::size_t>(x) * static_cast<std::size_t>(B.n) +
                          static_cast<std::size_t>(y);
        if (bp_set[key]) {
            if (bp[key].exact) return bp[key].value;
            if (bp[key].proven_bound >= budget) return kInf;
        }
        if (std::abs(A.subw[static_cast<std::size_t>(x)] - B.subw[static_cast<std::size_t>(y)]) >=
            budget)
            return kInf;
        BpEntry e;
        if (A.canon[static_cast<std::size_t>(x)] == B.canon[static_cast<std::size_t>(y)]) {
            e.value = 0.0;
            e.identical = true;
        } else {
            // candidate top couples ordered by their fixed part of the cost:
            // chain off-path deletions plus the path-weight shrink
            struct Cand {
                double base;
                int a, b;
            };
            std::vector<Cand> cands;
            double wx_top = A.hp(A.parent[static_cast<std::size_t>(x)]);
            double wy_top = B.hp(B.parent[static_cast<std::size_t>(y)]);
            for (int a : A.desc[static_cast<std::size_t>(x)]) {
                double off1 = offpath_cost(A, x, a);
                double w1 = wx_top - A.h[static_cast<std::size_t>(a)];
                for (int b : B.desc[static_cast<std::size_t>(y)]) {
                    double off2 = offpath_cost(B, y, b);
                    double w2 = wy_top - B.h[static_cast<std::size_t>(b)];
                    cands.push_back({off1 + off2 + std::abs(w1 - w2), a, b});
                }
            }
            std::sort(cands.begin(), cands.end(),
                      [](const Cand& l, const Cand& r) { return l.base < r.base; });
            for (const Cand& c : cands) {
                double best_known = std::min(e.value, budget);
                if (c.base >= best_known) break;  // sorted: nothing better follows
                double sub = ffm(A.kids[static_cast<std::size_t>(c.a)],
                                 B.kids[static_cast<std::size_t>(c.b)], best_known - c.base);
                if (c.base + sub < e.value) {
                    e.value = c.base + sub;
                    e.a = c.a;
                    e.b = c.b;
                }
            }
        }
        if (e.value >= budget) {
            // not proven exact; remember that the true value is >= budget
            if (!bp_set[key] || (!bp[key].exact && bp[key].proven_bound < budget)) {
                BpEntry bound;
                bound.proven_bound = budget;
                bp[key] = bound;
                bp_set[key] = 1;
            }
            return kInf;
        }
        e.exact = true;
        bp[key] = e;
        bp_set[key] = 1;
        return e.value;
    }

    // delete every subtree hanging off the chain from a (exclusive) up to x (inclusive)
    static double offpath_cost(const Side& s, int x, int a) {
        double c = 0.0;
        int cur = a;
        while (cur != x) {
            int p = s.parent[static_cast<std::size_t>(cur)];
            for (int k : s.kids[static_cast<std::size_t>(p)])
                if (k != cur) c += s.subw[static_cast<std::size_t>(k)];
            cur = p;
        }
        return c;
    }

    static Forest erase_item(const Forest& f, int v) {
        Forest out;
        out.reserve(f.size());
        for (int u : f)
            if (u != v) out.push_back(u);
        return out;
    }

    static Forest replace_with_children(const Side& s, const Forest& f, int v) {
        Forest out;
        out.reserve(f.size() + 2);
        for (int u : f)
            if (u != v) out.push_back(u);
        for (int c : s.kids[static_cast<std::size_t>(v)]) out.push_back(c);
        std::sort(out.begin(), out.end());
        return out;
    }

    // minimal cost of resolving the frontier pair (inputs id-sorted). The
    // budget seeds the incumbent: a finite return value is the exact minimum;
    // kInf certifies the true value is >= budget, and that bound is memoized
    // so cheaper revisits return immediately.
    double ffm(const Forest& f1, const Forest& f2, double budget = kInf) {
        std::vector<int> key = make_key(f1, f2);
        auto it = ffm_memo.find(key);
        if (it != ffm_memo.end()) {
            if (it->second.exact) return it->second.value;
            if (it->second.proven_bound >= budget) return kInf;
        }
        auto record_bound = [&](double bound) {
            if (it == ffm_memo.end())
                it = ffm_memo.emplace(std::move(key), FfmEntry{}).first;
            it->second.proven_bound = std::max(it->second.proven_bound, bound);
        };
        double lb = lower_bound(f1, f2);
        if (lb >= budget) {
            record_bound(lb);
            return kInf;
        }
        FfmEntry entry = solve_ffm(f1, f2, budget);
        if (entry.value == kInf) {
            record_bound(budget);
            return kInf;
        }
        entry.exact = true;
        double value = entry.value;
        if (it == ffm_memo.end())
            ffm_memo.emplace(std::move(key), std::move(entry));
        else
            it->second = std::move(entry);
        return value;
    }

    // exact minimum when the result lands below `limit`; kInf otherwise
    FfmEntry solve_ffm(const Forest& f1_in, const Forest& f2_in, double limit) {
        FfmEntry entry;
        Forest f1 = f1_in, f2 = f2_in;
        // cancel weight-isomorphic branches pairwise at zero cost
        auto by_canon = [](const Side& s, const Forest& f) {
            std::vector<std::pair<int, int>> v;  // (canon, id)
            for (int x : f) v.emplace_back(s.canon[static_cast<std::size_t>(x)], x);
            std::sort(v.begin(), v.end());
            return v;
        };
        auto c1 = by_canon(A, f1), c2 = by_canon(B, f2);
        std::size_t i = 0, j = 0;
        Forest r1, r2;
        while (i < c1.size() && j < c2.size()) {
            if (c1[i].first == c2[j].first) {
                entry.cancels.emplace_back(c1[i].second, c2[j].second);
                ++i, ++j;
            } else if (c1[i].first < c2[j].first) {
                r1.push_back(c1[i++].second);
            } else {
                r2.push_back(c2[j++].second);
            }
        }
        while (i < c1.size()) r1.push_back(c1[i++].second);
        while (j < c2.size()) r2.push_back(c2[j++].second);
        std::sort(r1.begin(), r1.end());
        std::sort(r2.begin(), r2.end());

        if (r1.empty() && r2.empty()) {
            entry.value = 0.0;
            entry.move = {FfmMove::Kind::CloseLeft, -1, -1};
            return entry;
        }
        if (r1.empty()) {
            entry.value = forest_weight(B, r2);
            entry.move = {FfmMove::Kind::CloseRight, -1, -1};
            return entry;
        }
        if (r2.empty()) {
            entry.value = forest_weight(A, r1);
            entry.move = {FfmMove::Kind::CloseLeft, -1, -1};
            return entry;
        }

        // pivot: heaviest branch on the left side
        int x = r1[0];
        for (int u : r1)
            if (A.subw[static_cast<std::size_t>(u)] > A.subw[static_cast<std::size_t>(x)]) x = u;

        struct Cand {
            double estimate;
            FfmMove move;
        };
        std::vector<Cand> cands;
        {
            std::vector<int> seen_canons;
            for (int y : r2) {
                int cy = B.canon[static_cast<std::size_t>(y)];
                if (std::find(seen_canons.begin(), seen_canons.end(), cy) != seen_canons.end())
                    continue;
                seen_canons.push_back(cy);
                cands.push_back({std::abs(A.subw[static_cast<std::size_t>(x)] -
                                          B.subw[static_cast<std::size_t>(y)]),
                                 {FfmMove::Kind::Match, x, y}});
            }
        }
        if (A.kids[static_cast<std::size_t>(x)].size() >= 2)
            cands.push_back({A.w[static_cast<std::size_t>(x)], {FfmMove::Kind::Core1, x, -1}});
        cands.push_back({A.subw[static_cast<std::size_t>(x)], {FfmMove::Kind::Del1, x, -1}});
        {
            std::vector<int> seen_canons;
            for (int y : r2) {
                if (B.kids[static_cast<std::size_t>(y)].size() < 2) continue;
                int cy = B.canon[static_cast<std::size_t>(y)];
                if (std::find(seen_canons.begin(), seen_canons.end(), cy) != seen_canons.end())
                    continue;
                seen_canons.push_back(cy);
                cands.push_back({B.w[static_cast<std::size_t>(y)], {FfmMove::Kind::Core2, -1, y}});
            }
        }
        std::sort(cands.begin(), cands.end(),
                  [](const Cand& a, const Cand& b) { return a.estimate < b.estimate; });

        for (const Cand& c : cands) {
            double best_known = std::min(entry.value, limit);
            double imm = 0.0;
            Forest n1 = r1, n2 = r2;
            switch (c.move.kind) {
                case FfmMove::Kind::Match:
                    imm = branch_pair(c.move.x, c.move.y, best_known);
                    if (imm == kInf) continue;
                    n1 = erase_item(r1, c.move.x);
                    n2 = erase_item(r2, c.move.y);
                    break;
                case FfmMove::Kind::Core1:
                    imm = A.w[static_cast<std::size_t>(c.move.x)];
                    n1 = replace_with_children(A, r1, c.move.x);
                    break;
                case FfmMove::Kind::Core2:
                    imm = B.w[static_cast<std::size_t>(c.move.y)];
                    n2 = replace_with_children(B, r2, c.move.y);
                    break;
                case FfmMove::Kind::Del1:
                    imm = A.subw[static_cast<std::size_t>(c.move.x)];
                    n1 = erase_item(r1, c.move.x);
                    break;
                default:
                    continue;
            }
            if (imm >= best_known) continue;
            if (imm + lower_bound(n1, n2) >= best_known) continue;
            double rest = ffm(n1, n2, best_known - imm);
            if (imm + rest < entry.value) {
                entry.value = imm + rest;
                entry.move = c.move;
            }
        }
        if (entry.value >= limit) entry.value = kInf;  // bounded by the caller's incumbent
        return entry;
    }
};

}  // namespace

// ---------------------------------------------------------------------------

EditResult d_edit(const WeightedMergeTree& a, const WeightedMergeTree& b) {
    if (a.K != b.K) throw param_error("d_edit: trees must share the same truncation K");
    Solver s(a, b);
    Forest f1 = s.A.kids[static_cast<std::size_t>(s.A.root)];
    Forest f2 = s.B.kids[static_cast<std::size_t>(s.B.root)];
    double value = s.ffm(f1, f2);

    EditResult res;
    res.distance = value;
    // reconstruct the certificate by replaying the memoized decisions
    struct Recon {
        Solver& s;
        Mapping& m;
        void couple_identical(int x, int y) {
            m.couples.emplace_back(x, y);
            auto ka = s.A.kids[static_cast<std::size_t>(x)];
            auto kb = s.B.kids[static_cast<std::size_t>(y)];
            auto key = [&](const Side& sd, int v) {
                return std::make_pair(sd.canon[static_cast<std::size_t>(v)], v);
            };
            std::sort(ka.begin(), ka.end(), [&](int u, int v) { return key(s.A, u) < key(s.A, v); });
            std::sort(kb.begin(), kb.end(), [&](int u, int v) { return key(s.B, u) < key(s.B, v); });
            for (std::size_t i = 0; i < ka.size(); ++i) couple_identical(ka[i], kb[i]);
        }
        void delete_subtree(const Side& sd, int v, std::vector<int>& out) {
            for (int u : sd.desc[static_cast<std::size_t>(v)]) out.push_back(u);
        }
        void chain(const Side& sd, int x, int a, std::vector<int>& ghosts, std::vector<int>& dels) {
            int cur = a;
            while (cur != x) {
                int p = sd.parent[static_cast<std::size_t>(cur)];
                for (int k : sd.kids[static_cast<std::size_t>(p)])
                    if (k != cur) delete_subtree(sd, k, dels);
                ghosts.push_back(p);
                cur = p;
            }
        }
        void branch(int x, int y) {
            std::size_t key = static_cast<std::size_t>(x) * static_cast<std::size_t>(s.B.n) +
                              static_cast<std::size_t>(y);
            const BpEntry& e = s.bp[key];
            if (!e.exact) throw numeric_error("d_edit: certificate reconstruction hit a bound entry");
            if (e.identical) {
                couple_identical(x, y);
                return;
            }
            chain(s.A, x, e.a, m.ghostings1, m.deletions1);
            chain(s.B, y, e.b, m.ghostings2, m.deletions2);
            m.couples.emplace_back(e.a, e.b);
            forest(s.A.kids[static_cast<std::size_t>(e.a)], s.B.kids[static_cast<std::size_t>(e.b)]);
        }
        void forest(Forest f1v, Forest f2v) {
            std::sort(f1v.begin(), f1v.end());
            std::sort(f2v.begin(), f2v.end());
            auto it = s.ffm_memo.find(Solver::make_key(f1v, f2v));
            if (it == s.ffm_memo.end() || !it->second.exact)
                throw numeric_error("d_edit: certificate reconstruction lost a state");
            const FfmEntry& e = it->second;
            for (auto& [x, y] : e.cancels) couple_identical(x, y);
            Forest r1 = f1v, r2 = f2v;
            for (auto& [x, y] : e.cancels) {
                r1.erase(std::find(r1.begin(), r1.end(), x));
                r2.erase(std::find(r2.begin(), r2.end(), y));
            }
            switch (e.move.kind) {
                case FfmMove::Kind::CloseLeft:
                    for (int v : r1) delete_subtree(s.A, v, m.deletions1);
                    for (int v : r2) delete_subtree(s.B, v, m.deletions2);
                    return;
                case FfmMove::Kind::CloseRight:
                    for (int v : r2) delete_subtree(s.B, v, m.deletions2);
                    return;
                case FfmMove::Kind::Match:
                    branch(e.move.x, e.move.y);
                    forest(Solver::erase_item(r1, e.move.x), Solver::erase_item(r2, e.move.y));
                    return;
                case FfmMove::Kind::Core1:
                    m.deletions1.push_back(e.move.x);
                    forest(Solver::replace_with_children(s.A, r1, e.move.x), r2);
                    return;
                case FfmMove::Kind::Core2:
                    m.deletions2.push_back(e.move.y);
                    forest(r1, Solver::replace_with_children(s.B, r2, e.move.y));
                    return;
                case FfmMove::Kind::Del1:
                    delete_subtree(s.A, e.move.x, m.deletions1);
                    forest(Solver::erase_item(r1, e.move.x), r2);
                    return;
            }
        }
    };
    Recon recon{s, res.mapping};
    recon.forest(f1, f2);
    std::sort(res.mapping.couples.begin(), res.mapping.couples.end());
    std::sort(res.mapping.deletions1.begin(), res.mapping.deletions1.end());
    std::sort(res.mapping.deletions2.begin(), res.mapping.deletions2.end());
    std::sort(res.mapping.ghostings1.begin(), res.mapping.ghostings1.end());
    std::sort(res.mapping.ghostings2.begin(), res.mapping.ghostings2.end());
    return res;
}

// ---------------------------------------------------------------------------
// exhaustive oracle over mappings

namespace {

struct OracleSide {
    std::vector<int> verts;  // non-root vertices, id order
    std::vector<int> parent;
    std::vector<double> w;
    int root;

    bool less(int a, int b) const {  // a strictly below b
        for (int u = parent[static_cast<std::size_t>(a)]; u != -1; u = parent[static_cast<std::size_t>(u)])
            if (u == b) return true;
        return false;
    }
};

OracleSide make_oracle_side(const WeightedMergeTree& t) {
    OracleSide s;
    s.root = t.tree.root;
    s.parent.resize(t.tree.nodes.size());
    s.w.resize(t.tree.nodes.size(), 0.0);
    for (int v = 0; v < t.tree.size(); ++v) {
        s.parent[static_cast<std::size_t>(v)] = t.tree.parent(v);
        if (v != t.tree.root) {
            s.w[static_cast<std::size_t>(v)] = t.weight(v);
            s.verts.push_back(v);
        }
    }
    return s;
}

// cost of the cheapest delete/ghost completion of a fixed couple set
double completion_cost(const OracleSide& s1, const OracleSide& s2,
                       const std::vector<std::pair<int, int>>& couples) {
    double total = 0.0;
    std::vector<double> w_extra_1, w_extra_2;
    for (int side = 0; side < 2; ++side) {
        const OracleSide& s = side == 0 ? s1 : s2;
        std::vector<int> cs;
        for (auto& [a, b] : couples) cs.push_back(side == 0 ? a : b);
        std::vector<double> path_weight(couples.size());
        for (std::size_t i = 0; i < couples.size(); ++i)
            path_weight[i] = s.w[static_cast<std::size_t>(cs[i])];
        for (int v : s.verts) {
            if (std::find(cs.begin(), cs.end(), v) != cs.end()) continue;
            // maximal couples strictly below v
            int count = 0;
            std::size_t the_one = 0;
            for (std::size_t i = 0; i < cs.size(); ++i) {
                if (!s.less(cs[i], v)) continue;
                bool maximal = true;
                for (std::size_t j = 0; j < cs.size(); ++j)
                    if (j != i && s.less(cs[i], cs[j]) && s.less(cs[j], v)) {
                        maximal = false;
                        break;
                    }
                if (maximal) {
                    ++count;
                    the_one = i;
                }
            }
            if (count == 1)
                path_weight[the_one] += s.w[static_cast<std::size_t>(v)];  // ghosted
            else
                total += s.w[static_cast<std::size_t>(v)];  // fringe or core: deleted
        }
        (side == 0 ? w_extra_1 : w_extra_2) = path_weight;
    }
    for (std::size_t i = 0; i < couples.size(); ++i)
        total += std::abs(w_extra_1[i] - w_extra_2[i]);
    return total;
}

void oracle_rec(const OracleSide& s1, const OracleSide& s2, std::size_t i,
                std::vector<std::pair<int, int>>& couples, std::vector<char>& used2, double& best) {
    if (i == s1.verts.size()) {
        best = std::min(best, completion_cost(s1, s2, couples));
        return;
    }
    int v = s1.verts[i];
    // v uncoupled
    oracle_rec(s1, s2, i + 1, couples, used2, best);
    // v coupled with each compatible vertex
    for (std::size_t j = 0; j < s2.verts.size(); ++j) {
        if (used2[j]) continue;
        int u = s2.verts[j];
        bool ok = true;
        for (auto& [a, b] : couples) {
            if (s1.less(a, v) != s2.less(b, u) || s1.less(v, a) != s2.less(u, b)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        couples.emplace_back(v, u);
        used2[j] = 1;
        oracle_rec(s1, s2, i + 1, couples, used2, best);
        used2[j] = 0;
        couples.pop_back();
    }
}

}  // namespace

double d_edit_bruteforce(const WeightedMergeTree& a, const WeightedMergeTree& b) {
    if (a.K != b.K) throw param_error("d_edit_bruteforce: trees must share the same truncation K");
    for (const WeightedMergeTree* t : {&a, &b}) {
        if (t->tree.leaf_count() > 4 || t->tree.size() > 9)
            throw param_error("d_edit_bruteforce: size cap is 4 leaves and 9 vertices");
    }
    OracleSide s1 = make_oracle_side(a), s2 = make_oracle_side(b);
    double best = kInf;
    std::vector<std::pair<int, int>> couples;
    std::vector<char> used2(s2.verts.size(), 0);
    oracle_rec(s1, s2, 0, couples, used2, best);
    return best;
}

// ---------------------------------------------------------------------------
// certificate replay

namespace {

struct ReplaySide {
    std::vector<int> parent;
    std::vector<double> w;
    std::vector<char> alive;
    std::vector<double> depth_h;
    int root;
};

ReplaySide contract_side(const WeightedMergeTree& t, const std::vector<int>& deletions,
                         const std::vector<int>& ghostings, double& paid) {
    ReplaySide s;
    s.root = t.tree.root;
    int n = t.tree.size();
    s.parent.resize(static_cast<std::size_t>(n));
    s.w.resize(static_cast<std::size_t>(n), 0.0);
    s.alive.assign(static_cast<std::size_t>(n), 1);
    for (int v = 0; v < n; ++v) {
        s.parent[static_cast<std::size_t>(v)] = t.tree.parent(v);
        if (v != s.root) s.w[static_cast<std::size_t>(v)] = t.weight(v);
    }
    std::vector<std::pair<double, std::pair<int, char>>> ops;  // (height, (vertex, is_ghost))
    for (int v : deletions) ops.push_back({t.tree.height(v), {v, 0}});
    for (int v : ghostings) ops.push_back({t.tree.height(v), {v, 1}});
    std::sort(ops.begin(), ops.end());  // deepest first
    auto child_count = [&](int v) {
        int c = 0;
        for (std::size_t u = 0; u < s.parent.size(); ++u)
            if (s.alive[u] && s.parent[u] == v && static_cast<int>(u) != v) ++c;
        return c;
    };
    for (auto& [h, op] : ops) {
        (void)h;
        auto [v, is_ghost] = op;
        if (!s.alive[static_cast<std::size_t>(v)]) throw data_error("mapping replay: vertex edited twice");
        if (is_ghost) {
            if (child_count(v) != 1) throw data_error("mapping replay: ghost target is not order 2");
            for (std::size_t u = 0; u < s.parent.size(); ++u)
                if (s.alive[u] && s.parent[u] == v) {
                    s.parent[u] = s.parent[static_cast<std::size_t>(v)];
                    s.w[u] += s.w[static_cast<std::size_t>(v)];
                }
        } else {
            paid += s.w[static_cast<std::size_t>(v)];
            for (std::size_t u = 0; u < s.parent.size(); ++u)
                if (s.alive[u] && s.parent[u] == v) s.parent[u] = s.parent[static_cast<std::size_t>(v)];
        }
        s.alive[static_cast<std::size_t>(v)] = 0;
    }
    return s;
}

}  // namespace

double replay_mapping(const WeightedMergeTree& a, const WeightedMergeTree& b, const Mapping& m) {
    // every non-root vertex appears exactly once
    for (int side = 0; side < 2; ++side) {
        const WeightedMergeTree& t = side == 0 ? a : b;
        std::vector<int> all;
        for (auto& [x, y] : m.couples) all.push_back(side == 0 ? x : y);
        for (int v : side == 0 ? m.deletions1 : m.deletions2) all.push_back(v);
        for (int v : side == 0 ? m.ghostings1 : m.ghostings2) all.push_back(v);
        std::sort(all.begin(), all.end());
        std::vector<int> expect;
        for (int v = 0; v < t.tree.size(); ++v)
            if (v != t.tree.root) expect.push_back(v);
        if (all != expect) throw data_error("mapping replay: not a partition of the vertex set");
    }
    double cost = 0.0;
    ReplaySide s1 = contract_side(a, m.deletions1, m.ghostings1, cost);
    ReplaySide s2 = contract_side(b, m.deletions2, m.ghostings2, cost);
    // coupled vertices must be exactly what survives, with matching structure
    std::map<int, int> pair12;
    for (auto& [x, y] : m.couples) pair12[x] = y;
    for (auto& [x, y] : m.couples) {
        cost += std::abs(s1.w[static_cast<std::size_t>(x)] - s2.w[static_cast<std::size_t>(y)]);
        int px = s1.parent[static_cast<std::size_t>(x)];
        int py = s2.parent[static_cast<std::size_t>(y)];
        bool root1 = px == s1.root, root2 = py == s2.root;
        if (root1 != root2) throw data_error("mapping replay: contracted structures disagree at the root");
        if (!root1 && (!pair12.count(px) || pair12[px] != py))
            throw data_error("mapping replay: contracted structures disagree");
    }
    return cost;
}

std::string mapping_to_json(const Mapping& m) {
    nlohmann::json j;
    j["couples"] = nlohmann::json::array();
    for (auto& [x, y] : m.couples) j["couples"].push_back({x, y});
    j["deletions1"] = m.deletions1;
    j["deletions2"] = m.deletions2;
    j["ghostings1"] = m.ghostings1;
    j["ghostings2"] = m.ghostings2;
    return j.dump(2);
}

}  // namespace mtfda
