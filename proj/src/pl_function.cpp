#include "mtfda/pl_function.hpp"

#include <algorithm>
#include <cmath>

#include "mtfda/errors.hpp"

namespace mtfda {

PLFunction::PLFunction(std::string id_, std::vector<double> xs_, std::vector<double> ys_)
    : id(std::move(id_)), xs(std::move(xs_)), ys(std::move(ys_)) {
    if (xs.size() < 2 || xs.size() != ys.size())
        throw data_error("PLFunction '" + id + "': need >= 2 breakpoints and len(xs) == len(ys)");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i] < xs[i + 1]))
            throw data_error("PLFunction '" + id + "': abscissas not strictly increasing");
    for (double v : ys)
        if (!std::isfinite(v))
            throw data_error("PLFunction '" + id + "': non-finite ordinate");
}

double PLFunction::min_value() const { return *std::min_element(ys.begin(), ys.end()); }
double PLFunction::max_value() const { return *std::max_element(ys.begin(), ys.end()); }

double PLFunction::evaluate(double x) const {
    if (x < xs.front() || x > xs.back())
        throw param_error("PLFunction '" + id + "': evaluation outside domain");
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i < xs.size() && xs[i] == x) return ys[i];  // exact at breakpoints
    // now xs[i-1] < x < xs[i]
    double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

CriticalProfile critical_profile(const PLFunction& f) {
    // collapse runs of equal consecutive ordinates into plateaus
    struct Run {
        std::size_t first, last;
        double h;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < f.ys.size(); ++i) {
        if (!runs.empty() && runs.back().h == f.ys[i])
            runs.back().last = i;
        else
            runs.push_back({i, i, f.ys[i]});
    }
    CriticalProfile out;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        bool lo_left = r == 0 || runs[r - 1].h > runs[r].h;
        bool lo_right = r + 1 == runs.size() || runs[r + 1].h > runs[r].h;
        bool hi_left = r == 0 || runs[r - 1].h < runs[r].h;
        bool hi_right = r + 1 == runs.size() || runs[r + 1].h < runs[r].h;
        Plateau p{runs[r].first, runs[r].last, runs[r].h};
        if (lo_left && lo_right) out.minima.push_back(p);
        if (hi_left && hi_right) out.maxima.push_back(p);
    }
    return out;
}

double sup_distance(const PLFunction& f, const PLFunction& g) {
    if (f.domain_lo() != g.domain_lo() || f.domain_hi() != g.domain_hi())
        throw param_error("sup_distance: domains differ");
    // f - g is PL on the union of breakpoints, so the sup is attained there
    double best = 0.0;
    std::size_t i = 0, j = 0;
    while (i < f.xs.size() || j < g.xs.size()) {
        double x;
        if (j == g.xs.size() || (i < f.xs.size() && f.xs[i] <= g.xs[j]))
            x = f.xs[i++];
        else
            x = g.xs[j++];
        while (i < f.xs.size() && f.xs[i] == x) ++i;
        while (j < g.xs.size() && g.xs[j] == x) ++j;
        best = std::max(best, std::abs(f.evaluate(x) - g.evaluate(x)));
    }
    return best;
}

PLFunction reparametrize(const PLFunction& f, const PLFunction& warp) {
    for (std::size_t i = 0; i + 1 < warp.ys.size(); ++i)
        if (!(warp.ys[i] < warp.ys[i + 1]))
            throw param_error("reparametrize: warp is not strictly increasing");
    if (warp.ys.front() != f.domain_lo() || warp.ys.back() != f.domain_hi())
        throw param_error("reparametrize: warp image does not match the function domain");

    // breakpoints of f o warp: warp's own, plus preimages of f's breakpoints
    struct Pt {
        double x, y;
        bool from_f;  // ordinate copied bit-exactly from f.ys
    };
    std::vector<Pt> pts;
    for (std::size_t i = 0; i < warp.xs.size(); ++i)
        pts.push_back({warp.xs[i], f.evaluate(warp.ys[i]), false});
    std::size_t seg = 0;  // current warp segment
    for (std::size_t j = 0; j < f.xs.size(); ++j) {
        double target = f.xs[j];
        while (seg + 1 < warp.ys.size() && warp.ys[seg + 1] < target) ++seg;
        double x;
        if (warp.ys[seg] == target)
            x = warp.xs[seg];
        else if (warp.ys[seg + 1] == target)
            x = warp.xs[seg + 1];
        else {
            double t = (target - warp.ys[seg]) / (warp.ys[seg + 1] - warp.ys[seg]);
            x = warp.xs[seg] + t * (warp.xs[seg + 1] - warp.xs[seg]);
        }
        pts.push_back({x, f.ys[j], true});
    }
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
        return a.x != b.x ? a.x < b.x : a.from_f < b.from_f;
    });
    std::vector<double> xs, ys;
    for (const Pt& p : pts) {
        if (!xs.empty() && p.x == xs.back()) {
            if (p.from_f) ys.back() = p.y;  // exact f ordinate wins at duplicates
            continue;
        }
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    return PLFunction(f.id, std::move(xs), std::move(ys));
}

}  // namespace mtfda
