#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mtfda {

// Piecewise-linear function on a compact interval, given by its breakpoints.
// Immutable after construction; the function is the linear interpolant of
// (xs[i], ys[i]) and its domain is [xs.front(), xs.back()].
struct PLFunction {
    std::string id;
    std::vector<double> xs;  // strictly increasing, size >= 2
    std::vector<double> ys;  // same size as xs

    PLFunction() = default;
    PLFunction(std::string id_, std::vector<double> xs_, std::vector<double> ys_);

    double domain_lo() const { return xs.front(); }
    double domain_hi() const { return xs.back(); }
    double min_value() const;
    double max_value() const;

    // Linear interpolation; exact at breakpoints. Throws param_error outside the domain.
    double evaluate(double x) const;
};

// A plateau of equal consecutive ordinates, [first, last] breakpoint indices.
struct Plateau {
    std::size_t first = 0;
    std::size_t last = 0;
    double height = 0.0;
};

// Local-minimum and local-maximum plateaus of the interpolant, in abscissa order.
// Domain endpoints count as extrema by one-sided comparison.
struct CriticalProfile {
    std::vector<Plateau> minima;
    std::vector<Plateau> maxima;
};

CriticalProfile critical_profile(const PLFunction& f);

// Exact sup norm of f - g over the common refinement of breakpoints.
// Requires equal domains.
double sup_distance(const PLFunction& f, const PLFunction& g);

// f composed with warp, where warp is a strictly increasing PL bijection onto
// f's domain. Breakpoints: warp's breakpoints plus warp-preimages of f's
// breakpoints; at a preimage, the ordinate is taken bit-exactly from f.
PLFunction reparametrize(const PLFunction& f, const PLFunction& warp);

}  // namespace mtfda
