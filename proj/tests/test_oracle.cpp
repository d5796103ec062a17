#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "daisyforge/oracle.hpp"

using namespace daisyforge;

namespace {

// Equal-popcount bitmask families compare as their ascending index lists;
// the lowest differing bit decides.
bool mask_lex_less(std::uint64_t f, std::uint64_t g) {
    std::uint64_t d = f ^ g;
    if (!d) return false;
    return (f & (d & (~d + 1))) != 0;
}

// Exhaustive reference for the layer maximum, sharing no machinery with the
// oracle engine: every daisy instance becomes a member-index mask over the
// lex universe and every subset of the layer is scanned.
struct NaiveEx {
    std::vector<std::vector<int>> universe;
    std::vector<std::uint64_t> instances;
    int value = -1;
    std::vector<std::vector<int>> witness;

    NaiveEx(int n, int r, const std::vector<DaisyPattern>& pats) {
        std::map<std::vector<int>, int> idx;
        for_each_subset_lex(n, r, [&](const std::vector<int>& m) {
            idx[m] = static_cast<int>(universe.size());
            universe.push_back(m);
        });
        REQUIRE(universe.size() <= 22);
        for (const DaisyPattern& p : pats) {
            for_each_subset_lex(n, p.r - p.s, [&](const std::vector<int>& stem) {
                std::vector<int> pool;
                for (int x = 1; x <= n; ++x)
                    if (!std::binary_search(stem.begin(), stem.end(), x)) pool.push_back(x);
                if (static_cast<int>(pool.size()) < p.t) return;
                for_each_subset_lex(static_cast<int>(pool.size()), p.t,
                                    [&](const std::vector<int>& sel) {
                    std::uint64_t mask = 0;
                    for_each_subset_lex(p.t, p.s, [&](const std::vector<int>& ss) {
                        std::vector<int> mem = stem;
                        for (int e : ss) mem.push_back(pool[sel[e - 1] - 1]);
                        std::sort(mem.begin(), mem.end());
                        mask |= std::uint64_t(1) << idx.at(mem);
                    });
                    instances.push_back(mask);
                });
            });
        }
        std::uint64_t bestmask = 0;
        for (std::uint64_t f = 0; f < (std::uint64_t(1) << universe.size()); ++f) {
            bool ok = true;
            for (std::uint64_t inst : instances)
                if ((f & inst) == inst) { ok = false; break; }
            if (!ok) continue;
            int sz = std::popcount(f);
            if (sz > value || (sz == value && mask_lex_less(f, bestmask))) {
                value = sz;
                bestmask = f;
            }
        }
        for (std::size_t i = 0; i < universe.size(); ++i)
            if ((bestmask >> i) & 1) witness.push_back(universe[i]);
    }
};

// Size-ascending exhaustive reference for the minimum hitting set; the first
// valid subset in lex order is the least one.
struct NaiveG {
    int value = -1;
    std::vector<std::vector<int>> witness;

    NaiveG(int n, int d) {
        std::vector<std::uint32_t> cubes;
        enumerate_subcubes(n, d, [&](const Subcube& c) {
            std::uint32_t m = 0;
            for (std::uint32_t v : subcube_vertices(c)) m |= std::uint32_t(1) << v;
            cubes.push_back(m);
        });
        int nverts = 1 << n;
        for (int k = 0; value < 0 && k <= nverts; ++k) {
            for_each_subset_lex(nverts, k, [&](const std::vector<int>& sel) {
                if (value >= 0) return;
                std::uint32_t mask = 0;
                for (int e : sel) mask |= std::uint32_t(1) << (e - 1);
                for (std::uint32_t c : cubes)
                    if (!(c & mask)) return;
                value = k;
                for (int e : sel) witness.push_back(mask_to_set(std::uint32_t(e - 1)));
            });
        }
    }
};

// Integer-weight exhaustive reference for the density-sum maximum: weights
// over the common denominator C(n,r) C(n,r-1), six-cube layer pairs rebuilt
// from first principles as index masks.
struct NaiveL {
    Rational value{0};
    std::vector<std::vector<int>> witness;
    int split = 0;

    NaiveL(int n, int r) {
        std::vector<std::vector<int>> universe;
        std::map<std::vector<int>, int> up_idx, low_idx;
        for_each_subset_lex(n, r, [&](const std::vector<int>& m) {
            up_idx[m] = static_cast<int>(universe.size());
            universe.push_back(m);
        });
        int upper_count = static_cast<int>(universe.size());
        for_each_subset_lex(n, r - 1, [&](const std::vector<int>& m) {
            low_idx[m] = static_cast<int>(universe.size());
            universe.push_back(m);
        });
        REQUIRE(universe.size() <= 22);
        long cu = static_cast<long>(binomial(n, r));
        long cl = static_cast<long>(binomial(n, r - 1));
        std::vector<long> w(universe.size());
        for (std::size_t i = 0; i < universe.size(); ++i)
            w[i] = static_cast<int>(i) < upper_count ? cl : cu;

        std::vector<std::uint64_t> copies;
        for (int i = 2; i <= std::min(5, r); ++i) {
            int b = r - i;
            if (n < b + 6) continue;
            for_each_subset_lex(n, b, [&](const std::vector<int>& base) {
                std::vector<int> pool;
                for (int x = 1; x <= n; ++x)
                    if (!std::binary_search(base.begin(), base.end(), x)) pool.push_back(x);
                for_each_subset_lex(static_cast<int>(pool.size()), 6,
                                    [&](const std::vector<int>& sel) {
                    std::uint64_t mask = 0;
                    auto layer = [&](int k, std::map<std::vector<int>, int>& idx) {
                        for_each_subset_lex(6, k, [&](const std::vector<int>& ss) {
                            std::vector<int> mem = base;
                            for (int e : ss) mem.push_back(pool[sel[e - 1] - 1]);
                            std::sort(mem.begin(), mem.end());
                            mask |= std::uint64_t(1) << idx.at(mem);
                        });
                    };
                    layer(i, up_idx);
                    layer(i - 1, low_idx);
                    copies.push_back(mask);
                });
            });
        }

        long bestw = -1;
        std::uint64_t bestmask = 0;
        for (std::uint64_t f = 0; f < (std::uint64_t(1) << universe.size()); ++f) {
            bool ok = true;
            for (std::uint64_t c : copies)
                if ((f & c) == c) { ok = false; break; }
            if (!ok) continue;
            long ww = 0;
            for (std::uint64_t m = f; m; m &= m - 1) ww += w[std::countr_zero(m)];
            if (ww > bestw || (ww == bestw && mask_lex_less(f, bestmask))) {
                bestw = ww;
                bestmask = f;
            }
        }
        value = Rational(BigInt(bestw), BigInt(cu) * cl);
        for (std::size_t i = 0; i < universe.size(); ++i)
            if ((bestmask >> i) & 1) {
                witness.push_back(universe[i]);
                if (static_cast<int>(i) < upper_count) ++split;
            }
    }
};

bool pattern_free(int n, int r, const std::vector<std::vector<int>>& members,
                  const std::vector<DaisyPattern>& pats) {
    SetFamily f(n, r);
    for (const auto& m : members) f.insert(m);
    for (const DaisyPattern& p : pats)
        if (contains_daisy(f, p).witness) return false;
    return true;
}

bool hits_all(int n, int d, const std::vector<std::vector<int>>& rows) {
    HittingFamily h(n);
    for (const auto& row : rows) h.insert(set_to_mask(row, n));
    return verify_hitting(h, d).ok;
}

LayeredFamily rebuild_layered(int n, int r, const ExactResult& res) {
    SetFamily up(n, r), low(n, r - 1);
    for (std::size_t i = 0; i < res.witness.size(); ++i) {
        if (static_cast<int>(i) < res.witness_split) up.insert(res.witness[i]);
        else low.insert(res.witness[i]);
    }
    return LayeredFamily(up, low);
}

}  // namespace

TEST_CASE("largest pattern-free layers at desk scale") {
    std::vector<DaisyPattern> p324{DaisyPattern(3, 2, 4)};

    ExactResult tiny = exact_ex(4, 3, p324);
    CHECK(tiny.value == 4);
    CHECK(tiny.witness == std::vector<std::vector<int>>{{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}});

    ExactResult five = exact_ex(5, 3, p324);
    CHECK(five.quantity == "ex");
    CHECK(five.params == std::vector<int>{5, 3, 2, 4});
    CHECK(five.value == 8);
    CHECK(five.witness == std::vector<std::vector<int>>{{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 3, 4},
                                                        {1, 3, 5}, {2, 3, 4}, {2, 4, 5}, {3, 4, 5}});
    CHECK(pattern_free(5, 3, five.witness, p324));
    CHECK(five.nodes > 0);

    CHECK(exact_ex(6, 3, p324).value == 16);

    // At arity 2 with an empty stem the patterns are complete graphs, so the
    // maxima are the classical complete-multipartite edge counts.
    std::vector<DaisyPattern> k4{DaisyPattern(2, 2, 4)}, k5{DaisyPattern(2, 2, 5)};
    CHECK(exact_ex(5, 2, k4).value == 8);
    CHECK(exact_ex(6, 2, k4).value == 12);
    CHECK(exact_ex(7, 2, k4).value == 16);
    CHECK(exact_ex(5, 2, k5).value == 9);
    CHECK(exact_ex(6, 2, k5).value == 13);

    ExactResult full = exact_ex(5, 3, {});
    CHECK(full.value == 10);
    CHECK(full.witness.size() == 10);
    CHECK(exact_ex(6, 2, {}).value == 15);
}

TEST_CASE("minimum hitting sets at desk scale") {
    ExactResult g32 = exact_g(3, 2);
    CHECK(g32.quantity == "g");
    CHECK(g32.params == std::vector<int>{3, 2});
    CHECK(g32.value == 2);
    CHECK(g32.witness == std::vector<std::vector<int>>{{}, {1, 2, 3}});
    CHECK(hits_all(3, 2, g32.witness));
    CHECK(g32.nodes > 0);

    CHECK(exact_g(2, 2).value == 1);
    CHECK(exact_g(2, 1).value == 2);
    CHECK(exact_g(3, 1).value == 4);
    CHECK(exact_g(4, 3).value == 2);
    CHECK(exact_g(5, 4).value == 2);

    // Structural rows: one subcube, vertex covers, and the whole vertex set.
    for (int n = 0; n <= 5; ++n) CHECK(exact_g(n, n).value == 1);
    for (int n = 1; n <= 5; ++n) CHECK(exact_g(n, 1).value == (1 << (n - 1)));
    for (int n = 0; n <= 5; ++n) CHECK(exact_g(n, 0).value == (1 << n));

    CHECK(exact_g(4, 2).value == 5);
    CHECK(exact_g(5, 2).value == 10);
    CHECK(exact_g(5, 3).value == 6);

    ExactResult g52 = exact_g(5, 2);
    CHECK(static_cast<int>(g52.witness.size()) == 10);
    CHECK(hits_all(5, 2, g52.witness));
}

TEST_CASE("maximum density sums without a six cube copy") {
    ExactResult l52 = exact_l(5, 2);
    CHECK(l52.quantity == "l");
    CHECK(l52.params == std::vector<int>{5, 6, 2});
    CHECK(l52.value == 2);
    CHECK(l52.witness.size() == 15);
    CHECK(l52.witness_split == 10);

    ExactResult l62 = exact_l(6, 2);
    CHECK(l62.value == rat(29, 15));
    CHECK(l62.witness.size() == 20);
    CHECK(l62.witness_split == 14);
    LayeredFamily lf = rebuild_layered(6, 2, l62);
    CHECK(lf.density_sum() == rat(29, 15));
    for (int i = 2; i <= 5; ++i) CHECK(!find_consecutive_q6(lf, i).witness);

    ExactResult l72 = exact_l(7, 2);
    CHECK(l72.value == rat(40, 21));
    CHECK(l72.witness.size() == 26);
    CHECK(l72.witness_split == 19);
    LayeredFamily lf7 = rebuild_layered(7, 2, l72);
    CHECK(lf7.density_sum() == rat(40, 21));
    for (int i = 2; i <= 5; ++i) CHECK(!find_consecutive_q6(lf7, i).witness);

    // Degenerate lower layer and too-small ground sets carry no copy at all.
    CHECK(exact_l(6, 1).value == 2);
    CHECK(exact_l(5, 1).value == 2);
    CHECK(exact_l(4, 2).value == 2);
}

TEST_CASE("branch and bound matches plain enumeration") {
    struct ExCase {
        int n, r;
        std::vector<DaisyPattern> pats;
    };
    std::vector<ExCase> ex_cases{
        {5, 3, {DaisyPattern(3, 2, 4)}}, {6, 3, {DaisyPattern(3, 2, 4)}},
        {5, 2, {DaisyPattern(2, 2, 4)}}, {6, 2, {DaisyPattern(2, 2, 4)}},
        {5, 2, {DaisyPattern(2, 2, 5)}}, {4, 2, {}},
        {6, 3, {DaisyPattern(3, 2, 5), DaisyPattern(3, 3, 5)}},
    };
    for (const ExCase& c : ex_cases) {
        NaiveEx ref(c.n, c.r, c.pats);
        ExactResult res = exact_ex(c.n, c.r, c.pats);
        INFO("ex n=" << c.n << " r=" << c.r);
        CHECK(res.value == ref.value);
        CHECK(res.witness == ref.witness);
    }

    for (int n = 1; n <= 4; ++n)
        for (int d = 0; d <= n; ++d) {
            NaiveG ref(n, d);
            ExactResult res = exact_g(n, d);
            INFO("g n=" << n << " d=" << d);
            CHECK(res.value == ref.value);
            CHECK(res.witness == ref.witness);
        }
    {
        NaiveG ref(5, 3);
        ExactResult res = exact_g(5, 3);
        CHECK(res.value == ref.value);
        CHECK(res.witness == ref.witness);
    }

    struct LCase { int n, r; };
    for (const LCase& c : std::vector<LCase>{{5, 2}, {6, 2}, {6, 1}, {5, 1}}) {
        NaiveL ref(c.n, c.r);
        ExactResult res = exact_l(c.n, c.r);
        INFO("l n=" << c.n << " r=" << c.r);
        CHECK(res.value == ref.value);
        CHECK(res.witness == ref.witness);
        CHECK(res.witness_split == ref.split);
    }
}

TEST_CASE("monotonicity suite finds no violations") {
    MonotonicityReport rep = monotonicity_suite();
    CHECK(rep.ok());
    CHECK(rep.checks.size() == 76);
    CHECK(rep.nodes > 0);

    auto has = [&](const std::string& line) {
        return std::find(rep.checks.begin(), rep.checks.end(), line) != rep.checks.end();
    };
    CHECK(has("g(3,2) >= 2 g(2,2)"));
    CHECK(has("ex(5,3,4)/C(n,r) >= ex(6,3,4)/C(n+1,r)"));
    CHECK(has("3 ex(6,3,4) <= 6 ex(5,2,4)"));
    CHECK(has("l(6,6,2) >= l(7,6,2)"));
    CHECK(has("ex(6,3,-) = C(n,r)"));
    CHECK(has("g(5,5) = 1"));

    OracleRanges small;
    small.ex_max_n = 5;
    small.g_max_n = 3;
    small.l_max_n = 6;
    small.l_max_r = 1;
    MonotonicityReport small_rep = monotonicity_suite(small);
    CHECK(small_rep.ok());
    CHECK(small_rep.checks.size() < rep.checks.size());
    CHECK(!small_rep.checks.empty());
}

TEST_CASE("doubling step for hitting lower bounds") {
    for (int n = 0; n <= 4; ++n)
        for (int d = 0; d <= n; ++d) {
            INFO("n=" << n << " d=" << d);
            CHECK(min_hitting_lower_bound_check(n, d));
        }

    try {
        min_hitting_lower_bound_check(5, 2);
        FAIL("expected an error");
    } catch (const error& e) {
        CHECK(e.code() == errc::oracle_scale_exceeded);
    }
    CHECK_THROWS_AS(min_hitting_lower_bound_check(2, 3), error);
}

TEST_CASE("oracle scale and validation errors") {
    auto expect = [](errc code, auto&& fn) {
        try {
            fn();
            FAIL("expected an error");
        } catch (const error& e) {
            CHECK(e.code() == code);
        }
    };

    // layer sizes beyond 30 need a budget; beyond 64 are refused outright
    expect(errc::scale_exceeded, [] { exact_ex(8, 3, {DaisyPattern(3, 2, 4)}); });
    Budget b;
    b.nodes = 1000;
    expect(errc::scale_exceeded, [&] { exact_ex(9, 4, {DaisyPattern(4, 2, 4)}, b); });
    Budget tight;
    tight.nodes = 200;
    expect(errc::scale_exceeded, [&] { exact_ex(8, 3, {DaisyPattern(3, 2, 4)}, tight); });

    expect(errc::pattern_mismatch, [] { exact_ex(5, 2, {DaisyPattern(3, 2, 4)}); });
    expect(errc::out_of_range, [] { exact_ex(4, 5, {}); });
    expect(errc::out_of_range, [] { exact_ex(-1, 0, {}); });

    expect(errc::scale_exceeded, [] { exact_g(6, 2); });
    expect(errc::out_of_range, [] { exact_g(3, 4); });
    expect(errc::out_of_range, [] { exact_g(-1, 0); });

    expect(errc::scale_exceeded, [] { exact_l(8, 3); });
    expect(errc::scale_exceeded, [] { exact_l(7, 3); });
    Budget lb;
    lb.nodes = 100;
    expect(errc::scale_exceeded, [&] { exact_l(7, 3, lb); });
    expect(errc::out_of_range, [] { exact_l(5, 0); });

    expect(errc::out_of_range, [] { ex_patterns(1, 4); });
    CHECK(ex_patterns(3, 4).size() == 1);
    CHECK(ex_patterns(3, 5).size() == 2);
    CHECK(ex_patterns(2, 5).size() == 1);

    Budget suite_tight;
    suite_tight.nodes = 50;
    OracleRanges ranges;
    ranges.budget = suite_tight;
    expect(errc::scale_exceeded, [&] { monotonicity_suite(ranges); });
}

TEST_CASE("results table rows") {
    CHECK(oracle_csv_header() == "quantity,params,value,witness_file,nodes,runtime_ms");

    ExactResult g32 = exact_g(3, 2);
    CHECK(oracle_csv_row(g32, "g32.json", 7) ==
          "g,3 2,2,g32.json," + std::to_string(g32.nodes) + ",7");

    ExactResult l62 = exact_l(6, 2);
    CHECK(oracle_csv_row(l62, "l62.json", 12) ==
          "l,6 6 2,29/15,l62.json," + std::to_string(l62.nodes) + ",12");

    ExactResult five = exact_ex(5, 3, {DaisyPattern(3, 2, 4)});
    CHECK(oracle_csv_row(five, "ex534.json", 3) ==
          "ex,5 3 2 4,8,ex534.json," + std::to_string(five.nodes) + ",3");
}
