#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "daisyforge/budget.hpp"
#include "daisyforge/daisy.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/families.hpp"
#include "daisyforge/hitting.hpp"
#include "daisyforge/rational.hpp"

namespace daisyforge {

// Exact value of one extremal quantity at desk scale, with the
// lexicographically least witness attaining it. Witness rows are sets over
// [n]; for the layered quantity the first witness_split rows belong to the
// upper layer. nodes counts search-tree nodes across every phase of the run.
struct ExactResult {
    std::string quantity;
    std::vector<int> params;
    Rational value;
    std::vector<std::vector<int>> witness;
    int witness_split = 0;
    std::uint64_t nodes = 0;
};

namespace detail {

// Oracle runs are exact or refused: overrunning the node budget cannot end in
// a truncated answer, so it surfaces as a scale failure.
struct OracleMeter {
    std::uint64_t nodes = 0;
    std::uint64_t cap = 0;

    void tick() {
        ++nodes;
        if (cap && nodes > cap)
            fail(errc::scale_exceeded, "oracle search exceeded its node budget");
    }
};

// Maximum pattern-free subfamily search. cur stays pattern-free throughout,
// so daisy_through_member is a complete freeness check for each insertion.
struct ExSearch {
    std::vector<std::vector<int>> universe;  // r-subsets of [n] in lex order
    const std::vector<DaisyPattern>& patterns;
    SetFamily cur;
    OracleMeter meter;
    int best = -1;

    ExSearch(int n, int r, const std::vector<DaisyPattern>& pats, std::uint64_t cap)
        : patterns(pats), cur(n, r) {
        for_each_subset_lex(n, r, [&](const std::vector<int>& m) { universe.push_back(m); });
        meter.cap = cap;
    }

    bool can_add(const std::vector<int>& m) {
        for (const DaisyPattern& p : patterns)
            if (daisy_through_member(cur, p, m)) return false;
        return true;
    }

    void maximize(std::size_t pos, int chosen) {
        meter.tick();
        if (chosen + static_cast<int>(universe.size() - pos) <= best) return;
        if (pos == universe.size()) { best = chosen; return; }
        if (can_add(universe[pos])) {
            cur.insert(universe[pos]);
            maximize(pos + 1, chosen + 1);
            cur.erase(universe[pos]);
        }
        maximize(pos + 1, chosen);
    }

    // True iff cur extends by exactly `need` members from universe[pos..].
    // The probe restores cur either way.
    bool complete(std::size_t pos, int need) {
        meter.tick();
        if (need == 0) return true;
        if (static_cast<int>(universe.size() - pos) < need) return false;
        if (can_add(universe[pos])) {
            cur.insert(universe[pos]);
            bool ok = complete(pos + 1, need - 1);
            cur.erase(universe[pos]);
            if (ok) return true;
        }
        return complete(pos + 1, need);
    }
};

// Minimum hitting-set engine over precomputed subcube vertex masks. Decision
// driven: iterative deepening from the packing lower bound, branching on the
// first unhit subcube with smaller-vertex branches excluded downstream.
struct GSearch {
    int nverts;
    std::vector<std::uint32_t> cubes;  // vertex masks in enumeration order
    OracleMeter meter;

    GSearch(int n, int d, std::uint64_t cap) : nverts(1 << n) {
        enumerate_subcubes(n, d, [&](const Subcube& c) {
            std::uint32_t m = 0;
            for (std::uint32_t v : subcube_vertices(c)) m |= std::uint32_t(1) << v;
            cubes.push_back(m);
        });
        meter.cap = cap;
    }

    // Greedy vertex-disjoint packing of unhit subcubes; each packed cube needs
    // its own vertex. nverts+1 flags a subcube with no available vertex left.
    int packing_bound(std::uint32_t chosen, std::uint32_t excluded) const {
        std::uint32_t used = 0;
        int k = 0;
        for (std::uint32_t m : cubes) {
            if (m & chosen) continue;
            std::uint32_t avail = m & ~excluded;
            if (!avail) return nverts + 1;
            if (avail & used) continue;
            used |= avail;
            ++k;
        }
        return k;
    }

    // True iff some hitting set extends chosen by at most `slots` vertices
    // while avoiding excluded.
    bool decide(std::uint32_t chosen, std::uint32_t excluded, int slots) {
        meter.tick();
        int lb = packing_bound(chosen, excluded);
        if (lb > slots) return false;
        if (lb == 0) return true;
        std::uint32_t target = 0;
        for (std::uint32_t m : cubes)
            if (!(m & chosen)) { target = m & ~excluded; break; }
        std::uint32_t below = 0;
        while (target) {
            std::uint32_t bit = target & (~target + 1);
            if (decide(chosen | bit, excluded | below, slots - 1)) return true;
            below |= bit;
            target &= target - 1;
        }
        return false;
    }
};

// Maximum-weight two-layer search with the complete six-direction layer pair
// forbidden. Copies are precomputed as member-index lists with live missing
// counters, so feasibility of an insertion is O(copies through the member).
struct LSearch {
    std::vector<std::vector<int>> universe;  // upper members then lower, lex within layer
    int upper_count = 0;
    std::vector<Rational> weight;
    std::vector<Rational> suffix;            // suffix[p] = sum of weight[p..]
    std::vector<std::vector<int>> copies_of;
    std::vector<int> miss;                   // per copy: members not yet chosen
    Rational best;
    OracleMeter meter;

    LSearch(int n, int r, std::uint64_t cap) {
        meter.cap = cap;
        std::map<std::vector<int>, int> index_of;
        Rational wu(BigInt(1), binomial(n, r));
        for_each_subset_lex(n, r, [&](const std::vector<int>& m) {
            index_of[m] = static_cast<int>(universe.size());
            universe.push_back(m);
            weight.push_back(wu);
        });
        upper_count = static_cast<int>(universe.size());
        Rational wl(BigInt(1), binomial(n, r - 1));
        std::map<std::vector<int>, int> low_index;
        for_each_subset_lex(n, r - 1, [&](const std::vector<int>& m) {
            low_index[m] = static_cast<int>(universe.size());
            universe.push_back(m);
            weight.push_back(wl);
        });
        copies_of.assign(universe.size(), {});
        suffix.assign(universe.size() + 1, Rational(0));
        for (std::size_t p = universe.size(); p-- > 0;) suffix[p] = suffix[p + 1] + weight[p];

        // One copy per (level i, base, six free directions): both layers of a
        // six-cube through the base.
        for (int i = 2; i <= std::min(5, r); ++i) {
            int b = r - i;
            if (n < b + 6) continue;
            for_each_subset_lex(n, b, [&](const std::vector<int>& base) {
                std::vector<int> pool;
                for (int x = 1; x <= n; ++x)
                    if (!std::binary_search(base.begin(), base.end(), x)) pool.push_back(x);
                for_each_subset_lex(static_cast<int>(pool.size()), 6,
                                    [&](const std::vector<int>& sel) {
                    std::vector<int> members;
                    auto layer = [&](int k, std::map<std::vector<int>, int>& idx) {
                        for_each_subset_lex(6, k, [&](const std::vector<int>& ss) {
                            std::vector<int> mem = base;
                            for (int e : ss) mem.push_back(pool[sel[e - 1] - 1]);
                            std::sort(mem.begin(), mem.end());
                            members.push_back(idx.at(mem));
                        });
                    };
                    layer(i, index_of);
                    layer(i - 1, low_index);
                    int id = static_cast<int>(miss.size());
                    miss.push_back(static_cast<int>(members.size()));
                    for (int mi : members) copies_of[mi].push_back(id);
                });
            });
        }
    }

    bool can_add(int j) const {
        for (int c : copies_of[j])
            if (miss[c] == 1) return false;
        return true;
    }
    void add(int j) {
        for (int c : copies_of[j]) --miss[c];
    }
    void remove(int j) {
        for (int c : copies_of[j]) ++miss[c];
    }

    void maximize(std::size_t pos, const Rational& w) {
        meter.tick();
        if (w + suffix[pos] <= best) return;
        if (pos == universe.size()) { best = w; return; }
        if (can_add(static_cast<int>(pos))) {
            add(static_cast<int>(pos));
            maximize(pos + 1, w + weight[pos]);
            remove(static_cast<int>(pos));
        }
        maximize(pos + 1, w);
    }

    // True iff the current family reaches exactly `target` using members from
    // universe[pos..]. No feasible state can overshoot the optimum. The probe
    // restores the counters either way.
    bool complete(std::size_t pos, const Rational& w, const Rational& target) {
        meter.tick();
        if (w == target) return true;
        if (w + suffix[pos] < target) return false;
        if (pos == universe.size()) return false;
        if (can_add(static_cast<int>(pos))) {
            add(static_cast<int>(pos));
            bool ok = complete(pos + 1, w + weight[pos], target);
            remove(static_cast<int>(pos));
            if (ok) return true;
        }
        return complete(pos + 1, w, target);
    }
};

}  // namespace detail

// Largest subfamily of the r-th layer of [n] with no copy of any given
// pattern, by branch and bound over member inclusion in lex order with
// incremental daisy detection and the remaining-capacity bound. The witness
// is rebuilt by prefix-greedy decision runs, making it the lexicographically
// least optimal family.
inline ExactResult exact_ex(int n, int r, const std::vector<DaisyPattern>& patterns,
                            const Budget& budget = Budget()) {
    require(n >= 0, errc::out_of_range, "ground set size must be >= 0");
    require(r >= 0 && r <= n, errc::out_of_range, "layer index must be in [0, n]");
    for (const DaisyPattern& p : patterns)
        require(p.r == r, errc::pattern_mismatch, "pattern arity does not match the layer");
    BigInt total = binomial(n, r);
    require(total <= 64, errc::scale_exceeded, "layer too large for the subset oracle");
    require(total <= 30 || budget.nodes > 0, errc::scale_exceeded,
            "layers beyond 30 members need an explicit node budget");

    detail::ExSearch s(n, r, patterns, budget.nodes);
    s.maximize(0, 0);
    int m = s.best;

    ExactResult res;
    res.quantity = "ex";
    res.params = {n, r};
    for (const DaisyPattern& p : patterns) {
        res.params.push_back(p.s);
        res.params.push_back(p.t);
    }
    res.value = Rational(BigInt(m));
    std::size_t pos = 0;
    int needed = m;
    while (needed > 0) {
        require(pos < s.universe.size(), errc::bound_too_loose, "oracle witness missed the optimum");
        if (s.can_add(s.universe[pos])) {
            s.cur.insert(s.universe[pos]);
            if (s.complete(pos + 1, needed - 1)) {
                res.witness.push_back(s.universe[pos]);
                --needed;
                ++pos;
                continue;
            }
            s.cur.erase(s.universe[pos]);
        }
        ++pos;
    }
    res.nodes = s.meter.nodes;
    for (const DaisyPattern& p : patterns)
        require(!contains_daisy(s.cur, p).witness, errc::bound_too_loose,
                "oracle witness failed re-verification");
    return res;
}

// Minimum number of cube vertices meeting every d-dimensional subcube of the
// n-cube. Witness rows are the chosen vertices as element subsets of [n].
inline ExactResult exact_g(int n, int d, const Budget& budget = Budget()) {
    require(n >= 0, errc::out_of_range, "cube dimension must be >= 0");
    require(d >= 0 && d <= n, errc::out_of_range, "subcube dimension must be in [0, n]");
    require(n <= 5, errc::scale_exceeded, "hitting oracle is desk-scale (n <= 5)");

    detail::GSearch s(n, d, budget.nodes);
    int m = s.packing_bound(0, 0);
    while (m <= s.nverts && !s.decide(0, 0, m)) ++m;
    require(m <= s.nverts, errc::bound_too_loose, "hitting search failed to close");

    ExactResult res;
    res.quantity = "g";
    res.params = {n, d};
    res.value = Rational(BigInt(m));
    std::uint32_t chosen = 0, excluded = 0;
    int v = 0;
    HittingFamily h(n);
    while (static_cast<int>(res.witness.size()) < m) {
        require(v < s.nverts, errc::bound_too_loose, "oracle witness missed the optimum");
        std::uint32_t bit = std::uint32_t(1) << v;
        if (s.decide(chosen | bit, excluded, m - static_cast<int>(res.witness.size()) - 1)) {
            chosen |= bit;
            res.witness.push_back(mask_to_set(static_cast<std::uint32_t>(v)));
            h.insert(static_cast<std::uint32_t>(v));
        } else {
            excluded |= bit;
        }
        ++v;
    }
    res.nodes = s.meter.nodes;
    require(verify_hitting(h, d).ok, errc::bound_too_loose,
            "oracle witness failed re-verification");
    return res;
}

// Maximum density sum of two consecutive layers of [n] (upper at r) with no
// copy of two consecutive layers of a six-cube, exact rational. The first
// witness_split rows are the upper-layer members.
inline ExactResult exact_l(int n, int r, const Budget& budget = Budget()) {
    require(n >= 0, errc::out_of_range, "ground set size must be >= 0");
    require(r >= 1 && r <= n, errc::out_of_range, "upper layer index must be in [1, n]");
    BigInt total = binomial(n, r) + binomial(n, r - 1);
    require(total <= 64, errc::scale_exceeded, "layers too large for the subset oracle");
    require(total <= 30 || budget.nodes > 0, errc::scale_exceeded,
            "layers beyond 30 members need an explicit node budget");

    detail::LSearch s(n, r, budget.nodes);
    s.maximize(0, Rational(0));
    Rational target = s.best;

    ExactResult res;
    res.quantity = "l";
    res.params = {n, 6, r};
    res.value = target;
    SetFamily up(n, r), low(n, r - 1);
    Rational w(0);
    std::size_t pos = 0;
    while (w < target) {
        require(pos < s.universe.size(), errc::bound_too_loose, "oracle witness missed the optimum");
        int j = static_cast<int>(pos);
        if (s.can_add(j)) {
            s.add(j);
            if (s.complete(pos + 1, w + s.weight[pos], target)) {
                w += s.weight[pos];
                res.witness.push_back(s.universe[pos]);
                if (j < s.upper_count) {
                    ++res.witness_split;
                    up.insert(s.universe[pos]);
                } else {
                    low.insert(s.universe[pos]);
                }
                ++pos;
                continue;
            }
            s.remove(j);
        }
        ++pos;
    }
    res.nodes = s.meter.nodes;
    LayeredFamily lf(up, low);
    require(lf.density_sum() == target, errc::bound_too_loose,
            "oracle witness missed the optimum");
    for (int i = 2; i <= 5; ++i)
        require(!find_consecutive_q6(lf, i).witness, errc::bound_too_loose,
                "oracle witness failed re-verification");
    return res;
}

// Pattern set forbidden in the layered extremal quantity at arity r: the
// (2,t) daisy plus the (t-2,t) daisy when it fits the arity (the two
// coincide at t = 4).
inline std::vector<DaisyPattern> ex_patterns(int r, int t) {
    require(r >= 2 && t >= 3, errc::out_of_range, "pattern family needs r >= 2, t >= 3");
    std::vector<DaisyPattern> pats;
    pats.emplace_back(r, 2, t);
    if (t - 2 != 2 && t - 2 >= 1 && t - 2 <= r) pats.emplace_back(r, t - 2, t);
    return pats;
}

// The doubling step g(n+1, d) >= 2 g(n, d) that chains subcube hitting lower
// bounds upward, checked from the exact oracle values.
inline bool min_hitting_lower_bound_check(int n, int d, const Budget& budget = Budget()) {
    require(n >= 0, errc::out_of_range, "cube dimension must be >= 0");
    require(d >= 0 && d <= n, errc::out_of_range, "subcube dimension must be in [0, n]");
    require(n + 1 <= 5, errc::oracle_scale_exceeded, "hitting oracle is desk-scale (n + 1 <= 5)");
    ExactResult small = exact_g(n, d, budget);
    ExactResult big = exact_g(n + 1, d, budget);
    return big.value >= small.value + small.value;
}

// Parameter ranges scanned by the monotonicity suite. The defaults stay
// inside the no-budget oracle preconditions.
struct OracleRanges {
    int ex_max_n = 6;
    int ex_max_r = 3;
    int ex_max_t = 5;
    int g_max_n = 4;
    int l_max_n = 7;
    int l_max_r = 2;
    Budget budget{};
};

struct MonotonicityReport {
    std::vector<std::string> checks;      // one line per verified relation
    std::vector<std::string> violations;  // nonempty only on an implementation bug
    std::uint64_t nodes = 0;

    bool ok() const { return violations.empty(); }
};

// Cross-checks every relation the exact quantities must satisfy on the given
// ranges: layer density of the pattern-free maximum weakly decreasing in n,
// the cross-level inequality (r+1) ex(n+1, r+1, t) <= (n+1) ex(n, r, t), the
// hitting doubling g(n+1, d) >= 2 g(n, d), the density sum weakly decreasing
// in n, plus the unconstrained full-layer and single-subcube identities.
inline MonotonicityReport monotonicity_suite(const OracleRanges& ranges = OracleRanges()) {
    MonotonicityReport rep;
    std::map<std::vector<int>, Rational> cache;

    auto ex_val = [&](int n, int r, int t) {
        std::vector<int> key{0, n, r, t};
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        ExactResult res = exact_ex(n, r, ex_patterns(r, t), ranges.budget);
        rep.nodes += res.nodes;
        cache.emplace(key, res.value);
        return res.value;
    };
    auto g_val = [&](int n, int d) {
        std::vector<int> key{1, n, d};
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        ExactResult res = exact_g(n, d, ranges.budget);
        rep.nodes += res.nodes;
        cache.emplace(key, res.value);
        return res.value;
    };
    auto l_val = [&](int n, int r) {
        std::vector<int> key{2, n, r};
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        ExactResult res = exact_l(n, r, ranges.budget);
        rep.nodes += res.nodes;
        cache.emplace(key, res.value);
        return res.value;
    };
    auto record = [&](bool holds, const std::string& line) {
        rep.checks.push_back(line);
        if (!holds) rep.violations.push_back(line);
    };
    auto ex_name = [](int n, int r, int t) {
        std::ostringstream os;
        os << "ex(" << n << "," << r << "," << t << ")";
        return os.str();
    };

    for (int r = 2; r <= ranges.ex_max_r; ++r)
        for (int t = 4; t <= ranges.ex_max_t; ++t)
            for (int n = r; n + 1 <= ranges.ex_max_n; ++n)
                record(ex_val(n, r, t) / Rational(binomial(n, r)) >=
                           ex_val(n + 1, r, t) / Rational(binomial(n + 1, r)),
                       ex_name(n, r, t) + "/C(n,r) >= " + ex_name(n + 1, r, t) + "/C(n+1,r)");

    for (int r = 2; r + 1 <= ranges.ex_max_r; ++r)
        for (int t = 4; t <= ranges.ex_max_t; ++t)
            for (int n = r; n + 1 <= ranges.ex_max_n; ++n)
                record(Rational(r + 1) * ex_val(n + 1, r + 1, t) <=
                           Rational(n + 1) * ex_val(n, r, t),
                       std::to_string(r + 1) + " " + ex_name(n + 1, r + 1, t) +
                           " <= " + std::to_string(n + 1) + " " + ex_name(n, r, t));

    for (int d = 0; d <= ranges.g_max_n; ++d)
        for (int n = d; n <= ranges.g_max_n; ++n)
            record(g_val(n + 1, d) >= Rational(2) * g_val(n, d),
                   "g(" + std::to_string(n + 1) + "," + std::to_string(d) + ") >= 2 g(" +
                       std::to_string(n) + "," + std::to_string(d) + ")");

    for (int r = 1; r <= ranges.l_max_r; ++r)
        for (int n = r; n + 1 <= ranges.l_max_n; ++n)
            record(l_val(n, r) >= l_val(n + 1, r),
                   "l(" + std::to_string(n) + ",6," + std::to_string(r) + ") >= l(" +
                       std::to_string(n + 1) + ",6," + std::to_string(r) + ")");

    for (int n = 0; n <= ranges.ex_max_n; ++n)
        for (int r = 0; r <= std::min(n, ranges.ex_max_r); ++r) {
            ExactResult res = exact_ex(n, r, {}, ranges.budget);
            rep.nodes += res.nodes;
            record(res.value == Rational(binomial(n, r)),
                   "ex(" + std::to_string(n) + "," + std::to_string(r) + ",-) = C(n,r)");
        }
    for (int d = 0; d <= std::min(5, ranges.g_max_n + 1); ++d)
        record(g_val(d, d) == Rational(1), "g(" + std::to_string(d) + "," + std::to_string(d) + ") = 1");

    return rep;
}

inline std::string oracle_csv_header() {
    return "quantity,params,value,witness_file,nodes,runtime_ms";
}

// params are space-separated inside their field, so no CSV quoting is needed.
inline std::string oracle_csv_row(const ExactResult& res, const std::string& witness_file,
                                  std::uint64_t runtime_ms) {
    std::ostringstream os;
    os << res.quantity << ",";
    for (std::size_t i = 0; i < res.params.size(); ++i) {
        if (i) os << " ";
        os << res.params[i];
    }
    os << "," << rat_string(res.value) << "," << witness_file << "," << res.nodes << ","
       << runtime_ms;
    return os.str();
}

}  // namespace daisyforge
