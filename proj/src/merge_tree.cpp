#include "mtfda/merge_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "mtfda/errors.hpp"

namespace mtfda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// union-find over minimum-plateau indices
struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};
}  // namespace

std::vector<std::vector<int>> MergeTree::children() const {
    std::vector<std::vector<int>> ch(nodes.size());
    for (int v = 0; v < size(); ++v)
        if (v != root) ch[static_cast<std::size_t>(parent(v))].push_back(v);
    return ch;
}

std::vector<int> MergeTree::leaves() const {
    std::vector<char> has_child(nodes.size(), 0);
    for (int v = 0; v < size(); ++v)
        if (v != root) has_child[static_cast<std::size_t>(parent(v))] = 1;
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
        if (!has_child[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

int MergeTree::leaf_count() const { return static_cast<int>(leaves().size()); }

double MergeTree::min_leaf_height() const {
    double m = kInf;
    for (int v : leaves()) m = std::min(m, height(v));
    return m;
}

double MergeTree::max_finite_height() const {
    double m = -kInf;
    for (int v = 0; v < size(); ++v)
        if (v != root) m = std::max(m, height(v));
    return m;
}

void MergeTree::validate() const {
    if (nodes.empty() || root < 0 || root >= size()) throw data_error("merge tree: bad root");
    if (parent(root) != -1 || !std::isinf(height(root)))
        throw data_error("merge tree: root must have no parent and height inf");
    auto ch = children();
    if (ch[static_cast<std::size_t>(root)].size() != 1)
        throw data_error("merge tree: root must have exactly one child");
    for (int v = 0; v < size(); ++v) {
        if (v == root) continue;
        if (!std::isfinite(height(v))) throw data_error("merge tree: non-root height must be finite");
        int p = parent(v);
        if (p < 0 || p >= size()) throw data_error("merge tree: dangling parent");
        if (!(height(v) < height(p))) throw data_error("merge tree: heights not increasing toward the root");
        int u = v, steps = 0;
        while (u != root) {
            u = parent(u);
            if (++steps > size()) throw data_error("merge tree: cycle");
        }
    }
}

double WeightedMergeTree::hprime(int v) const {
    return tree.is_root(v) ? K : tree.height(v);
}

double WeightedMergeTree::weight(int v) const {
    return hprime(tree.parent(v)) - tree.height(v);
}

double WeightedMergeTree::total_weight() const {
    double s = 0.0;
    for (int v = 0; v < tree.size(); ++v)
        if (v != tree.root) s += weight(v);
    return s;
}

MergeTree build_merge_tree(const PLFunction& f) {
    CriticalProfile cp = critical_profile(f);
    const auto& mins = cp.minima;
    const auto& maxs = cp.maxima;

    MergeTree t;
    t.id = f.id;
    DisjointSet ds(static_cast<int>(mins.size()));
    std::vector<int> top(mins.size(), -1);  // current top vertex per component root

    struct Event {
        double h;
        bool birth;
        int idx;  // min index for births, max index for merges
    };
    std::vector<Event> events;
    for (std::size_t i = 0; i < mins.size(); ++i) events.push_back({mins[i].height, true, static_cast<int>(i)});
    for (std::size_t i = 0; i < maxs.size(); ++i) events.push_back({maxs[i].height, false, static_cast<int>(i)});
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.h != b.h) return a.h < b.h;
        return a.birth > b.birth;  // births before merges at equal height
    });

    // a maximum plateau at maxs[i] separates the minima adjacent to it;
    // count the minima strictly left of it to find the pair it joins
    std::vector<int> left_min(maxs.size(), -1);
    for (std::size_t i = 0; i < maxs.size(); ++i) {
        int cnt = 0;
        for (std::size_t j = 0; j < mins.size(); ++j)
            if (mins[j].first < maxs[i].first) ++cnt;
        left_min[i] = cnt - 1;  // -1 when the max plateau is the left domain endpoint
    }

    std::size_t e = 0;
    while (e < events.size()) {
        double h = events[e].h;
        // births at this height
        while (e < events.size() && events[e].h == h && events[e].birth) {
            int node = t.size();
            t.nodes.push_back({-1, h});
            top[static_cast<std::size_t>(events[e].idx)] = node;
            ++e;
        }
        // merges at this height, grouped transitively into one vertex per group
        std::map<int, std::vector<int>> groups;  // local group key -> pre-merge component roots
        DisjointSet local(static_cast<int>(mins.size()));
        std::vector<std::pair<int, int>> pairs;
        while (e < events.size() && events[e].h == h) {
            int mi = events[e].idx;
            ++e;
            int l = left_min[static_cast<std::size_t>(mi)];
            int r = l + 1;
            if (l < 0 || r >= static_cast<int>(mins.size())) continue;  // boundary maximum, no join
            pairs.emplace_back(ds.find(l), ds.find(r));
        }
        for (auto& [a, b] : pairs) local.unite(a, b);
        for (auto& [a, b] : pairs) {
            (void)b;
            groups[local.find(a)];
        }
        for (auto& [key, members] : groups) {
            (void)members;
            std::vector<int> tops;
            for (std::size_t j = 0; j < mins.size(); ++j) {
                int r = ds.find(static_cast<int>(j));
                if (r == static_cast<int>(j) && local.find(static_cast<int>(j)) == key &&
                    top[static_cast<std::size_t>(j)] >= 0)
                    tops.push_back(top[static_cast<std::size_t>(j)]);
            }
            if (tops.size() < 2) continue;
            int node = t.size();
            t.nodes.push_back({-1, h});
            for (int c : tops) t.nodes[static_cast<std::size_t>(c)].parent = node;
            // merge components and park the new top on the surviving root
            int acc = -1;
            for (std::size_t j = 0; j < mins.size(); ++j) {
                if (local.find(static_cast<int>(j)) != key) continue;
                if (acc < 0)
                    acc = static_cast<int>(j);
                else
                    ds.unite(static_cast<int>(j), acc);
            }
            top[static_cast<std::size_t>(ds.find(acc))] = node;
        }
    }

    // single surviving component; hang the root above its top
    int final_top = top[static_cast<std::size_t>(ds.find(0))];
    int root = t.size();
    t.nodes.push_back({-1, kInf});
    t.nodes[static_cast<std::size_t>(final_top)].parent = root;
    t.root = root;
    t.validate();
    return t;
}

MergeTree normalize(const MergeTree& t) {
    auto ch = t.children();
    std::vector<char> keep(t.nodes.size(), 1);
    for (int v = 0; v < t.size(); ++v)
        if (v != t.root && ch[static_cast<std::size_t>(v)].size() == 1) keep[static_cast<std::size_t>(v)] = 0;
    MergeTree out;
    out.id = t.id;
    std::vector<int> remap(t.nodes.size(), -1);
    for (int v = 0; v < t.size(); ++v) {
        if (!keep[static_cast<std::size_t>(v)]) continue;
        remap[static_cast<std::size_t>(v)] = out.size();
        out.nodes.push_back({-1, t.height(v)});
    }
    for (int v = 0; v < t.size(); ++v) {
        if (!keep[static_cast<std::size_t>(v)]) continue;
        int p = t.parent(v);
        while (p != -1 && !keep[static_cast<std::size_t>(p)]) p = t.parent(p);
        out.nodes[static_cast<std::size_t>(remap[static_cast<std::size_t>(v)])].parent =
            p == -1 ? -1 : remap[static_cast<std::size_t>(p)];
        if (p == -1) out.root = remap[static_cast<std::size_t>(v)];
    }
    out.validate();
    return out;
}

WeightedMergeTree truncate(const MergeTree& t, double K) {
    t.validate();
    if (K < t.max_finite_height())
        throw param_error("truncate: K is below a finite height of the tree");
    return WeightedMergeTree{t, K};
}

int lca(const MergeTree& t, const std::vector<int>& vs) {
    if (vs.empty()) throw param_error("lca: empty vertex set");
    auto ancestors = [&](int v) {
        std::vector<int> path;
        for (int u = v; u != -1; u = t.parent(u)) path.push_back(u);
        return path;  // v .. root
    };
    std::vector<int> common = ancestors(vs[0]);
    for (std::size_t i = 1; i < vs.size(); ++i) {
        std::vector<int> p = ancestors(vs[i]);
        // keep the longest common suffix (toward the root)
        std::size_t a = common.size(), b = p.size();
        std::size_t k = 0;
        while (k < a && k < b && common[a - 1 - k] == p[b - 1 - k]) ++k;
        common.assign(common.end() - static_cast<std::ptrdiff_t>(k), common.end());
    }
    return common.front();  // lowest common vertex
}

std::vector<MergeTree> cut_at_height(const MergeTree& t, double h) {
    std::vector<MergeTree> out;
    for (int v = 0; v < t.size(); ++v) {
        if (v == t.root) continue;
        if (!(t.height(v) <= h)) continue;
        int p = t.parent(v);
        double ph = p == -1 ? kInf : t.height(p);
        if (!(ph > h)) continue;
        // sub_T(v), re-rooted at a fresh +inf root
        MergeTree s;
        s.id = t.id;
        std::vector<int> remap(t.nodes.size(), -1);
        std::vector<int> stack{v};
        remap[static_cast<std::size_t>(v)] = 0;
        s.nodes.push_back({-1, t.height(v)});
        auto ch = t.children();
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int c : ch[static_cast<std::size_t>(u)]) {
                remap[static_cast<std::size_t>(c)] = s.size();
                s.nodes.push_back({remap[static_cast<std::size_t>(u)], t.height(c)});
                stack.push_back(c);
            }
        }
        int root = s.size();
        s.nodes.push_back({-1, kInf});
        s.nodes[0].parent = root;
        s.root = root;
        out.push_back(std::move(s));
    }
    return out;
}

std::string to_json(const WeightedMergeTree& t) {
    nlohmann::json j;
    if (std::isfinite(t.K))
        j["K"] = t.K;
    else
        j["K"] = nullptr;
    j["id"] = t.tree.id;
    j["nodes"] = nlohmann::json::array();
    for (int v = 0; v < t.tree.size(); ++v) {
        nlohmann::json n;
        n["id"] = v;
        if (v == t.tree.root) {
            n["parent"] = nullptr;
            n["height"] = "inf";
        } else {
            n["parent"] = t.tree.parent(v);
            n["height"] = t.tree.height(v);
        }
        j["nodes"].push_back(n);
    }
    return j.dump(2);
}

WeightedMergeTree merge_tree_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("merge tree JSON: ") + e.what());
    }
    if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty())
        throw data_error("merge tree JSON: missing nodes array");
    WeightedMergeTree out;
    out.K = j.contains("K") && !j["K"].is_null() ? j["K"].get<double>()
                                                 : std::numeric_limits<double>::infinity();
    if (j.contains("id") && j["id"].is_string()) out.tree.id = j["id"].get<std::string>();

    std::map<long long, int> remap;
    struct Raw {
        long long id;
        bool has_parent;
        long long parent;
        double height;
        bool is_root;
    };
    std::vector<Raw> raw;
    for (const auto& n : j["nodes"]) {
        if (!n.contains("id") || !n.contains("parent") || !n.contains("height"))
            throw data_error("merge tree JSON: node missing id/parent/height");
        Raw r{};
        r.id = n["id"].get<long long>();
        r.has_parent = !n["parent"].is_null();
        r.parent = r.has_parent ? n["parent"].get<long long>() : -1;
        if (n["height"].is_string()) {
            if (n["height"].get<std::string>() != "inf")
                throw data_error("merge tree JSON: height string must be \"inf\"");
            r.height = kInf;
            r.is_root = true;
        } else {
            r.height = n["height"].get<double>();
            r.is_root = false;
        }
        if (r.is_root == r.has_parent)
            throw data_error("merge tree JSON: exactly the parentless node must have height \"inf\"");
        if (remap.count(r.id)) throw data_error("merge tree JSON: duplicate node id");
        remap[r.id] = static_cast<int>(raw.size());
        raw.push_back(r);
    }
    out.tree.nodes.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.tree.nodes[i].height = raw[i].height;
        if (raw[i].has_parent) {
            auto it = remap.find(raw[i].parent);
            if (it == remap.end()) throw data_error("merge tree JSON: unknown parent id");
            out.tree.nodes[i].parent = it->second;
        } else {
            out.tree.nodes[i].parent = -1;
            if (out.tree.root != -1) throw data_error("merge tree JSON: more than one root");
            out.tree.root = static_cast<int>(i);
        }
    }
    out.tree.validate();
    if (std::isfinite(out.K) && out.K < out.tree.max_finite_height())
        throw data_error("merge tree JSON: K below a finite node height");
    return out;
}

namespace {
std::string canon_rec(const MergeTree& t, const std::vector<std::vector<int>>& ch, int v,
                      const std::vector<double>* weights) {
    std::vector<std::string> parts;
    for (int c : ch[static_cast<std::size_t>(v)]) parts.push_back(canon_rec(t, ch, c, weights));
    std::sort(parts.begin(), parts.end());
    char buf[40];
    double label = weights ? (*weights)[static_cast<std::size_t>(v)] : t.height(v);
    std::snprintf(buf, sizeof buf, "%a", label);
    std::string out = "(";
    out += buf;
    for (const auto& p : parts) out += p;
    out += ")";
    return out;
}
}  // namespace

std::string canonical_key(const MergeTree& t) {
    auto ch = t.children();
    return canon_rec(t, ch, t.root, nullptr);
}

std::string canonical_weight_key(const WeightedMergeTree& t) {
    std::vector<double> w(t.tree.nodes.size(), 0.0);
    for (int v = 0; v < t.tree.size(); ++v)
        if (v != t.tree.root) w[static_cast<std::size_t>(v)] = t.weight(v);
    auto ch = t.tree.children();
    return canon_rec(t.tree, ch, t.tree.root, &w);
}

bool isomorphic(const MergeTree& a, const MergeTree& b) {
    return canonical_key(a) == canonical_key(b);
}

}  // namespace mtfda
