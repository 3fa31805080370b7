#include "mtfda/pl_function.hpp"

#include <random>

#include <doctest.h>

#include "mtfda/errors.hpp"
#include "test_support.hpp"

using mtfda::PLFunction;

TEST_CASE("evaluate interpolates and is exact at breakpoints") {
    PLFunction f("f", {0, 1}, {0, 2});
    CHECK(f.evaluate(0.5) == doctest::Approx(1.0));
    PLFunction g("g", {0, 1, 2}, {0, 2, 1});
    CHECK(g.evaluate(1.0) == 2.0);
    CHECK(g.evaluate(1.5) == doctest::Approx(1.5));
    CHECK_THROWS_AS(g.evaluate(-0.1), mtfda::param_error);
    CHECK_THROWS_AS(g.evaluate(2.1), mtfda::param_error);
}

TEST_CASE("construction validates the breakpoints") {
    CHECK_THROWS_AS(PLFunction("b", {0}, {1}), mtfda::data_error);
    CHECK_THROWS_AS(PLFunction("b", {0, 0}, {1, 2}), mtfda::data_error);
    CHECK_THROWS_AS(PLFunction("b", {1, 0}, {1, 2}), mtfda::data_error);
    CHECK_THROWS_AS(PLFunction("b", {0, 1, 2}, {1, 2}), mtfda::data_error);
}

TEST_CASE("critical profile finds plateaus and endpoint extrema") {
    PLFunction f("f", {0, 1, 2, 3}, {0, 2, 1, 3});
    auto cp = mtfda::critical_profile(f);
    REQUIRE(cp.minima.size() == 2);
    REQUIRE(cp.maxima.size() == 2);
    CHECK(cp.minima[0].height == 0.0);
    CHECK(cp.minima[1].height == 1.0);
    CHECK(cp.maxima[0].height == 2.0);
    CHECK(cp.maxima[1].height == 3.0);

    PLFunction c("const", {0, 1}, {5, 5});
    auto cpc = mtfda::critical_profile(c);
    REQUIRE(cpc.minima.size() == 1);
    CHECK(cpc.minima[0].first == 0);
    CHECK(cpc.minima[0].last == 1);
    CHECK(cpc.maxima.size() == 1);  // the same plateau is the global maximum

    PLFunction v("v", {0, 1, 2}, {1, 0, 1});
    auto cpv = mtfda::critical_profile(v);
    REQUIRE(cpv.minima.size() == 1);
    CHECK(cpv.minima[0].height == 0.0);
    CHECK(cpv.maxima.size() == 2);  // both endpoints
}

TEST_CASE("interior plateau collapses to one extremum") {
    PLFunction f("f", {0, 1, 2, 3, 4}, {3, 1, 1, 1, 2});
    auto cp = mtfda::critical_profile(f);
    REQUIRE(cp.minima.size() == 1);
    CHECK(cp.minima[0].first == 1);
    CHECK(cp.minima[0].last == 3);
    CHECK(cp.minima[0].height == 1.0);
}

TEST_CASE("minima and maxima alternate") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        auto f = testutil::random_zigzag(rng, 1 + rep % 6);
        auto cp = mtfda::critical_profile(f);
        // merge the two lists by abscissa and check strict alternation
        std::size_t i = 0, j = 0;
        int last = -1;  // 0 = min, 1 = max
        while (i < cp.minima.size() || j < cp.maxima.size()) {
            bool take_min = j == cp.maxima.size() ||
                            (i < cp.minima.size() && cp.minima[i].first < cp.maxima[j].first);
            int kind = take_min ? 0 : 1;
            CHECK(kind != last);
            last = kind;
            take_min ? ++i : ++j;
        }
    }
}

TEST_CASE("sup_distance on the common refinement") {
    PLFunction f("f", {0, 1}, {0, 1});
    PLFunction g("g", {0, 1}, {0.5, 1.5});
    CHECK(mtfda::sup_distance(f, f) == 0.0);
    CHECK(mtfda::sup_distance(f, g) == doctest::Approx(0.5));

    PLFunction a("a", {0, 2}, {0, 0});
    PLFunction b("b", {0, 1, 2}, {0, 1, 0});
    CHECK(mtfda::sup_distance(a, b) == doctest::Approx(1.0));  // attained at b's breakpoint

    PLFunction c("c", {0, 3}, {0, 0});
    CHECK_THROWS_AS(mtfda::sup_distance(a, c), mtfda::param_error);
}

TEST_CASE("sup_distance metric axioms on random triples") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 40; ++rep) {
        auto f = testutil::random_zigzag(rng, 3);
        auto g = testutil::random_zigzag(rng, 4);
        auto h = testutil::random_zigzag(rng, 2);
        double fg = mtfda::sup_distance(f, g);
        double gh = mtfda::sup_distance(g, h);
        double fh = mtfda::sup_distance(f, h);
        CHECK(fg == mtfda::sup_distance(g, f));
        CHECK(fh <= fg + gh + 1e-12);
        CHECK(fg >= 0.0);
    }
}

TEST_CASE("reparametrize: identity and affine warps") {
    PLFunction f("f", {0, 1, 2}, {0, 2, 1});
    PLFunction id("id", {0, 2}, {0, 2});
    auto fi = mtfda::reparametrize(f, id);
    CHECK(fi.xs == f.xs);
    CHECK(fi.ys == f.ys);

    PLFunction half("h", {0, 0.5}, {0, 2});  // x -> 4x, squeezing the domain
    auto fh = mtfda::reparametrize(f, half);
    CHECK(fh.ys == f.ys);
    CHECK(fh.xs == std::vector<double>{0, 0.25, 0.5});

    PLFunction bad("bad", {0, 1, 2}, {0, 2, 1});
    CHECK_THROWS_AS(mtfda::reparametrize(f, bad), mtfda::param_error);
}

TEST_CASE("warping preserves the critical heights exactly") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        auto f = testutil::random_zigzag(rng, 2 + rep % 5);
        auto warp = testutil::random_warp(rng, f.domain_lo(), f.domain_hi());
        auto g = mtfda::reparametrize(f, warp);
        auto cf = mtfda::critical_profile(f);
        auto cg = mtfda::critical_profile(g);
        REQUIRE(cf.minima.size() == cg.minima.size());
        REQUIRE(cf.maxima.size() == cg.maxima.size());
        for (std::size_t i = 0; i < cf.minima.size(); ++i)
            CHECK(cf.minima[i].height == cg.minima[i].height);  // bit-exact
        for (std::size_t i = 0; i < cf.maxima.size(); ++i)
            CHECK(cf.maxima[i].height == cg.maxima[i].height);
    }
}
