#include "mtfda/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "mtfda/errors.hpp"

namespace mtfda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<std::pair<double, double>> PersistenceDiagram::materialized(bool drop_essential) const {
    std::vector<std::pair<double, double>> out = points;
    if (!drop_essential && essential_birth) {
        if (!K || !std::isfinite(*K))
            throw param_error("diagram '" + id + "': essential class needs a finite K");
        out.emplace_back(*essential_birth, *K);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PersistenceDiagram pd_from_merge_tree(const MergeTree& t) {
    PersistenceDiagram d;
    d.id = t.id;
    auto ch = t.children();
    // branch minimum per vertex: lexicographic (height, node id); the id
    // tie-break matches the sweep order of leaves born at equal heights
    std::vector<std::pair<double, int>> bmin(t.nodes.size(), {kInf, -1});
    // ascending height visits children before fathers
    std::vector<int> order(t.nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t.height(a) < t.height(b); });
    for (int v : order) {
        auto& kids = ch[static_cast<std::size_t>(v)];
        if (kids.empty()) {
            bmin[static_cast<std::size_t>(v)] = {t.height(v), v};
            continue;
        }
        if (t.is_root(v)) continue;
        std::pair<double, int> best{kInf, -1};
        for (int c : kids) best = std::min(best, bmin[static_cast<std::size_t>(c)]);
        for (int c : kids) {
            auto m = bmin[static_cast<std::size_t>(c)];
            if (m == best) continue;  // the elder branch survives
            d.points.emplace_back(m.first, t.height(v));
        }
        bmin[static_cast<std::size_t>(v)] = best;
    }
    int rc = ch[static_cast<std::size_t>(t.root)][0];
    d.essential_birth = bmin[static_cast<std::size_t>(rc)].first;
    std::sort(d.points.begin(), d.points.end());
    return d;
}

PersistenceDiagram pd_from_function(const PLFunction& f) {
    PersistenceDiagram d;
    d.id = f.id;
    CriticalProfile cp = critical_profile(f);
    const auto& mins = cp.minima;
    const auto& maxs = cp.maxima;

    std::vector<int> parent(mins.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    // per component: (birth height, leftmost minimum index)
    std::vector<std::pair<double, int>> birth(mins.size());
    for (std::size_t i = 0; i < mins.size(); ++i) birth[i] = {mins[i].height, static_cast<int>(i)};

    struct Merge {
        double h;
        int left;
    };
    std::vector<Merge> merges;
    for (std::size_t i = 0; i < maxs.size(); ++i) {
        int cnt = 0;
        for (std::size_t j = 0; j < mins.size(); ++j)
            if (mins[j].first < maxs[i].first) ++cnt;
        if (cnt >= 1 && cnt < static_cast<int>(mins.size())) merges.push_back({maxs[i].height, cnt - 1});
    }
    std::sort(merges.begin(), merges.end(), [](const Merge& a, const Merge& b) { return a.h < b.h; });

    for (const Merge& m : merges) {
        int a = find(m.left), b = find(m.left + 1);
        if (a == b) continue;
        int survivor = birth[static_cast<std::size_t>(a)] <= birth[static_cast<std::size_t>(b)] ? a : b;
        int victim = survivor == a ? b : a;
        d.points.emplace_back(birth[static_cast<std::size_t>(victim)].first, m.h);
        parent[static_cast<std::size_t>(victim)] = survivor;
    }
    double ess = kInf;
    for (auto& b : birth) ess = std::min(ess, b.first);
    d.essential_birth = ess;
    std::sort(d.points.begin(), d.points.end());
    return d;
}

PersistenceDiagram threshold_pd(const PersistenceDiagram& d, double eps) {
    if (eps < 0) throw param_error("threshold_pd: eps must be nonnegative");
    PersistenceDiagram out;
    out.id = d.id;
    out.essential_birth = d.essential_birth;
    out.K = d.K;
    for (auto& p : d.points)
        if (!(p.second - p.first < eps)) out.points.push_back(p);
    return out;
}

bool same_diagram(const PersistenceDiagram& a, const PersistenceDiagram& b) {
    auto pa = a.points, pb = b.points;
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    return pa == pb && a.essential_birth == b.essential_birth;
}

double solve_assignment(const std::vector<std::vector<double>>& cost) {
    // shortest augmenting path with potentials (Jonker-Volgenant style)
    int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    for (auto& row : cost)
        if (static_cast<int>(row.size()) != n) throw param_error("solve_assignment: matrix not square");
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // 1-based; match[j] = row matched to col j
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            int i0 = match[static_cast<std::size_t>(j0)], j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                             u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)]
                     [static_cast<std::size_t>(j - 1)];
    return total;
}

namespace {

double linf(const std::pair<double, double>& a, const std::pair<double, double>& b) {
    return std::max(std::abs(a.first - b.first), std::abs(a.second - b.second));
}

double diag_gap(const std::pair<double, double>& a) { return (a.second - a.first) / 2.0; }

std::pair<std::vector<std::pair<double, double>>, std::vector<std::pair<double, double>>>
matched_point_sets(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                   bool drop_essential) {
    if (p < 1.0) throw param_error("wasserstein: p must be >= 1");
    if (!drop_essential && (a.essential_birth.has_value() || b.essential_birth.has_value())) {
        if (!(a.essential_birth && b.essential_birth))
            throw param_error("wasserstein: essential classes must be present in both diagrams");
        if (!a.K || !b.K || *a.K != *b.K)
            throw param_error("wasserstein: essential classes must be materialized at the same K");
    }
    return {a.materialized(drop_essential), b.materialized(drop_essential)};
}

}  // namespace

double wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                   bool drop_essential) {
    auto [pa, pb] = matched_point_sets(a, b, p, drop_essential);
    int n1 = static_cast<int>(pa.size()), n2 = static_cast<int>(pb.size());
    int n = n1 + n2;
    if (n == 0) return 0.0;
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double c;
            if (i < n1 && j < n2)
                c = linf(pa[static_cast<std::size_t>(i)], pb[static_cast<std::size_t>(j)]);
            else if (i < n1)
                c = diag_gap(pa[static_cast<std::size_t>(i)]);
            else if (j < n2)
                c = diag_gap(pb[static_cast<std::size_t>(j)]);
            else
                c = 0.0;
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::pow(c, p);
        }
    double total = solve_assignment(cost);
    return std::pow(total, 1.0 / p);
}

namespace {
double brute_rec(const std::vector<std::pair<double, double>>& pa,
                 const std::vector<std::pair<double, double>>& pb, std::vector<char>& used_b,
                 std::size_t i, double p) {
    if (i == pa.size()) {
        double rest = 0.0;
        for (std::size_t j = 0; j < pb.size(); ++j)
            if (!used_b[j]) rest += std::pow(diag_gap(pb[j]), p);
        return rest;
    }
    double best = std::pow(diag_gap(pa[i]), p) + brute_rec(pa, pb, used_b, i + 1, p);
    for (std::size_t j = 0; j < pb.size(); ++j) {
        if (used_b[j]) continue;
        used_b[j] = 1;
        best = std::min(best, std::pow(linf(pa[i], pb[j]), p) + brute_rec(pa, pb, used_b, i + 1, p));
        used_b[j] = 0;
    }
    return best;
}
}  // namespace

double wasserstein_bruteforce(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                              bool drop_essential) {
    auto [pa, pb] = matched_point_sets(a, b, p, drop_essential);
    std::vector<char> used(pb.size(), 0);
    return std::pow(brute_rec(pa, pb, used, 0, p), 1.0 / p);
}

std::string diagram_to_csv(const PersistenceDiagram& d, bool drop_essential) {
    std::string out = "birth,death\n";
    char buf[80];
    auto pts = d.points;
    std::sort(pts.begin(), pts.end());
    for (auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.first, p.second);
        out += buf;
    }
    if (!drop_essential && d.essential_birth) {
        if (d.K && std::isfinite(*d.K))
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", *d.essential_birth, *d.K);
        else
            std::snprintf(buf, sizeof buf, "%.17g,inf\n", *d.essential_birth);
        out += buf;
    }
    return out;
}

}  // namespace mtfda
