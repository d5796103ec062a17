#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "daisyforge/density.hpp"

using namespace daisyforge;

namespace {

bool trace_mentions(const DensityReport& rep, const std::string& needle) {
    for (const auto& line : rep.trace)
        if (line.find(needle) != std::string::npos) return true;
    return false;
}

template <class Fn>
void expect(errc code, Fn&& fn) {
    try {
        fn();
        FAIL("expected an error");
    } catch (const error& e) {
        CHECK(e.code() == code);
    }
}

}  // namespace

TEST_CASE("product enclosures at pinned truncations") {
    ProductBound p51 = product_bound(5, 1);
    CHECK(p51.q == 5);
    CHECK(p51.K == 1);
    CHECK(p51.lower == rat(19, 25));
    CHECK(p51.upper == rat(4, 5));

    ProductBound p41 = product_bound(4, 1);
    CHECK(p41.lower == rat(11, 16));
    CHECK(p41.upper == rat(3, 4));

    // by hand at q=2, K=2: partial (1/2)(3/4) = 3/8, tail factor 1 - 1/4
    ProductBound p22 = product_bound(2, 2);
    CHECK(p22.upper == rat(3, 8));
    CHECK(p22.lower == rat(9, 32));

    CHECK(product_bound(4, 8).lower > rat(3, 5));
    CHECK(2 * product_bound(5, 8).lower >= rat(38, 25));

    expect(errc::out_of_range, [] { product_bound(1, 3); });
    expect(errc::out_of_range, [] { product_bound(5, 0); });
}

TEST_CASE("product enclosures nest as the truncation grows") {
    for (int q : {2, 3, 4, 5, 7}) {
        ProductBound prev = product_bound(q, 1);
        CHECK(prev.lower > 0);
        CHECK(prev.lower <= prev.upper);
        for (int K = 2; K <= 30; ++K) {
            ProductBound cur = product_bound(q, K);
            INFO("q=" << q << " K=" << K);
            CHECK(prev.lower <= cur.lower);
            CHECK(cur.lower <= cur.upper);
            CHECK(cur.upper <= prev.upper);
            prev = cur;
        }
        // the interval collapses geometrically, so by K=30 it is negligible
        CHECK(prev.upper - prev.lower < rat(1, 1000000));
    }
    CHECK(product_bound(2, 5).upper < product_bound(2, 4).upper);
    CHECK(product_bound(2, 5).lower > product_bound(2, 4).lower);
}

TEST_CASE("seven cube hitting density report") {
    DensityReport one = gamma7_report(1);
    CHECK(one.d == 7);
    CHECK(one.K == 1);
    CHECK(one.bound == rat(5, 64));
    CHECK(one.target == rat(1, 8));
    CHECK(one.lambda_lower == rat(59, 64));
    REQUIRE(one.trace.size() == 5);
    for (const auto& line : one.trace) CHECK(!line.empty());
    CHECK(trace_mentions(one, "<= 1/10"));
    CHECK(trace_mentions(one, "5/64"));

    DensityReport rep = gamma7_report(8);
    CHECK(rep.bound <= rat(1, 10));
    CHECK(rep.bound < rat(1, 8));
    CHECK(rep.bound > rat(77, 1000));
    CHECK(rep.bound < rat(78, 1000));
    // same value along a different expression order
    CHECK(rep.bound == rat(1, 4) - product_bound(4, 8).lower / 4);
    CHECK(rep.lambda_lower == Rational(1) - rep.bound);

    Rational prev = one.bound;
    for (int K = 2; K <= 12; ++K) {
        Rational cur = gamma7_report(K).bound;
        INFO("K=" << K);
        CHECK(cur < prev);
        prev = cur;
    }

    expect(errc::out_of_range, [] { gamma7_report(0); });
}

TEST_CASE("six cube hitting density report") {
    DensityReport one = gamma6_report(1);
    CHECK(one.d == 6);
    CHECK(one.K == 1);
    // K = 1 lands exactly on the cap: 1/2 - (38/25)/4 = 3/25
    CHECK(one.bound == rat(3, 25));
    CHECK(one.target == rat(1, 7));
    CHECK(one.lambda_lower == rat(22, 25));
    CHECK(trace_mentions(one, "38/25"));
    CHECK(trace_mentions(one, "C(24,2) = 276"));

    DensityReport rep = gamma6_report(8);
    CHECK(rep.bound > rat(119, 1000));
    CHECK(rep.bound < rat(3, 25));
    CHECK(rep.bound < rat(1, 7));
    CHECK(rep.bound == rat(1, 2) - product_bound(5, 8).lower / 2);
    CHECK(rep.lambda_lower == Rational(1) - rep.bound);
    REQUIRE(rep.trace.size() == 7);
    for (const auto& line : rep.trace) CHECK(!line.empty());

    Rational prev = one.bound;
    for (int K = 2; K <= 12; ++K) {
        Rational cur = gamma6_report(K).bound;
        INFO("K=" << K);
        CHECK(cur < prev);
        prev = cur;
    }

    expect(errc::out_of_range, [] { gamma6_report(0); });
}

TEST_CASE("benchmark bound from one level in d plus one") {
    CHECK(trivial_upper(7) == rat(1, 8));
    CHECK(trivial_upper(6) == rat(1, 7));
    CHECK(trivial_upper(1) == rat(1, 2));
    CHECK(trivial_upper(2) == rat(1, 3));
    for (int d = 1; d < 12; ++d) CHECK(trivial_upper(d + 1) < trivial_upper(d));
    CHECK(gamma7_report(8).bound < trivial_upper(7));
    CHECK(gamma6_report(8).bound < trivial_upper(6));
    expect(errc::out_of_range, [] { trivial_upper(0); });
}

TEST_CASE("density reports are deterministic") {
    DensityReport a = gamma7_report(8);
    DensityReport b = gamma7_report(8);
    CHECK(a.bound == b.bound);
    CHECK(a.trace == b.trace);
    DensityReport c = gamma6_report(6);
    DensityReport d = gamma6_report(6);
    CHECK(c.bound == d.bound);
    CHECK(c.trace == d.trace);
}
