#include "mtfda/tree_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mtfda/errors.hpp"

namespace mtfda {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

TreeStatistic statistic_from_string(const std::string& s) {
    if (s == "var") return TreeStatistic::Var;
    if (s == "nleaves") return TreeStatistic::NLeaves;
    if (s == "nint") return TreeStatistic::NInt;
    throw param_error("statistic must be one of var|nleaves|nint");
}

std::string statistic_name(TreeStatistic s) {
    switch (s) {
        case TreeStatistic::Var: return "var";
        case TreeStatistic::NLeaves: return "nleaves";
        case TreeStatistic::NInt: return "nint";
    }
    return "?";
}

int nleaves_stat(const MergeTree& t, double h) {
    int count = 0;
    for (int v : t.leaves())
        if (t.height(v) <= h) ++count;
    return count;
}

int nint_stat(const MergeTree& t, double h) {
    auto ch = t.children();
    int count = 0;
    for (int v = 0; v < t.size(); ++v) {
        if (v == t.root || ch[static_cast<std::size_t>(v)].empty()) continue;
        if (t.height(v) <= h) ++count;
    }
    return count;
}

double var_stat(const MergeTree& t, double h) {
    // leaf counts of the cut subtrees, without materializing them
    auto ch = t.children();
    std::vector<int> leaf_count(t.nodes.size(), 0);
    std::vector<int> order(t.nodes.size());
    for (int v = 0; v < t.size(); ++v) order[static_cast<std::size_t>(v)] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t.height(a) < t.height(b); });
    for (int v : order) {
        if (ch[static_cast<std::size_t>(v)].empty()) {
            leaf_count[static_cast<std::size_t>(v)] = 1;
            continue;
        }
        for (int c : ch[static_cast<std::size_t>(v)])
            leaf_count[static_cast<std::size_t>(v)] += leaf_count[static_cast<std::size_t>(c)];
    }
    int total = leaf_count[static_cast<std::size_t>(t.root)];
    std::vector<double> fractions;
    for (int v = 0; v < t.size(); ++v) {
        if (v == t.root) continue;
        if (!(t.height(v) <= h)) continue;
        int p = t.parent(v);
        double ph = p == t.root ? std::numeric_limits<double>::infinity() : t.height(p);
        if (p == t.root) ph = std::numeric_limits<double>::infinity();
        if (!(ph > h)) continue;
        fractions.push_back(static_cast<double>(leaf_count[static_cast<std::size_t>(v)]) / total);
    }
    if (fractions.empty()) return kNan;
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= static_cast<double>(fractions.size());
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    return var / static_cast<double>(fractions.size());
}

StatCurve stat_curve(const MergeTree& t, TreeStatistic s, const std::vector<double>& grid) {
    StatCurve out;
    out.tree_id = t.id;
    out.statistic = s;
    out.grid = grid;
    for (double h : grid) {
        switch (s) {
            case TreeStatistic::Var: out.values.push_back(var_stat(t, h)); break;
            case TreeStatistic::NLeaves: out.values.push_back(nleaves_stat(t, h)); break;
            case TreeStatistic::NInt: out.values.push_back(nint_stat(t, h)); break;
        }
    }
    return out;
}

double quantile(std::vector<double> sample, double p) {
    sample.erase(std::remove_if(sample.begin(), sample.end(),
                                [](double v) { return std::isnan(v); }),
                 sample.end());
    if (sample.empty()) return kNan;
    std::sort(sample.begin(), sample.end());
    double pos = p * (static_cast<double>(sample.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

std::vector<GroupBand> group_bands(const std::vector<StatCurve>& curves,
                                   const std::vector<std::string>& labels) {
    if (curves.empty() || curves.size() != labels.size())
        throw param_error("group_bands: curves/labels size mismatch");
    for (const auto& c : curves)
        if (c.grid != curves[0].grid || c.statistic != curves[0].statistic)
            throw param_error("group_bands: curves must share grid and statistic");

    std::map<std::string, std::vector<const StatCurve*>> groups;
    for (std::size_t i = 0; i < curves.size(); ++i) groups[labels[i]].push_back(&curves[i]);

    std::vector<GroupBand> out;
    for (auto& [label, members] : groups) {
        GroupBand band;
        band.group = label;
        band.statistic = curves[0].statistic;
        band.grid = curves[0].grid;
        for (std::size_t k = 0; k < band.grid.size(); ++k) {
            std::vector<double> col;
            for (auto* c : members) col.push_back(c->values[k]);
            band.median.push_back(quantile(col, 0.5));
            band.q1.push_back(quantile(col, 0.25));
            band.q3.push_back(quantile(col, 0.75));
            double m = 0.0;
            int cnt = 0;
            for (double v : col)
                if (!std::isnan(v)) {
                    m += v;
                    ++cnt;
                }
            band.mean.push_back(cnt ? m / cnt : kNan);
        }
        out.push_back(std::move(band));
    }
    return out;
}

}  // namespace mtfda
