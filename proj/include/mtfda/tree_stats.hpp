#pragma once

#include <string>
#include <vector>

#include "mtfda/merge_tree.hpp"

namespace mtfda {

enum class TreeStatistic { Var, NLeaves, NInt };
TreeStatistic statistic_from_string(const std::string& s);
std::string statistic_name(TreeStatistic s);

// #{leaves at or below h}
int nleaves_stat(const MergeTree& t, double h);
// #{internal non-root vertices at or below h}
int nint_stat(const MergeTree& t, double h);
// population variance of { #L(T') / #L(T) : T' in Cut_T(h) }; NaN when the cut is empty
double var_stat(const MergeTree& t, double h);

struct StatCurve {
    std::string tree_id;
    TreeStatistic statistic = TreeStatistic::Var;
    std::vector<double> grid;
    std::vector<double> values;  // NaN encodes a missing value
};

StatCurve stat_curve(const MergeTree& t, TreeStatistic s, const std::vector<double>& grid);

// Pointwise median/mean/Q1/Q3 per label group; all curves must share a grid.
struct GroupBand {
    std::string group;
    TreeStatistic statistic = TreeStatistic::Var;
    std::vector<double> grid;
    std::vector<double> median, mean, q1, q3;
};

std::vector<GroupBand> group_bands(const std::vector<StatCurve>& curves,
                                   const std::vector<std::string>& labels);

// Type-7 (linear interpolation) quantile of an unsorted sample; NaN entries excluded.
double quantile(std::vector<double> sample, double p);

}  // namespace mtfda
