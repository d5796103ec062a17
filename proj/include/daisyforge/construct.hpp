#pragma once

#include <bit>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "daisyforge/budget.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/families.hpp"
#include "daisyforge/gf.hpp"
#include "daisyforge/hitting.hpp"
#include "daisyforge/rational.hpp"

namespace daisyforge {

// prod_{k=1}^{K} (1 - q^{-k}), the density every basis family strictly beats.
inline Rational product_one_minus_inv_powers(int q, int K) {
    require(q >= 2, errc::out_of_range, "base must be >= 2");
    require(K >= 0, errc::out_of_range, "product length must be >= 0");
    Rational out = 1;
    BigInt qk = 1;
    for (int k = 1; k <= K; ++k) {
        qk *= q;
        out *= Rational(qk - 1, qk);
    }
    return out;
}

namespace detail {

// Enumerates independent extensions: DFS over ground elements in increasing
// order, keeping reduced rows of the chosen vectors. Seeds allow forcing
// vectors (e.g. w) into the span without putting them into the member.
template <class Emit>
void independent_subsets(const GroundMap& gm, int pick, const std::vector<FqVector>& seed,
                         Emit&& emit) {
    const FiniteField& F = gm.field();
    int dim = gm.r();
    std::vector<std::vector<int>> rows;
    std::vector<int> pivots;

    auto reduce = [&](const FqVector& v) -> std::vector<int> {
        std::vector<int> r = v.coords;
        for (size_t i = 0; i < rows.size(); ++i) {
            int c = r[pivots[i]];
            if (c == 0) continue;
            for (int j = 0; j < dim; ++j) r[j] = F.sub(r[j], F.mul(c, rows[i][j]));
        }
        return r;
    };
    auto push = [&](std::vector<int> r) {
        int pc = -1;
        for (int j = 0; j < dim; ++j)
            if (r[j]) { pc = j; break; }
        if (pc < 0) return false;
        int s = F.inv(r[pc]);
        for (int j = 0; j < dim; ++j) r[j] = F.mul(s, r[j]);
        rows.push_back(std::move(r));
        pivots.push_back(pc);
        return true;
    };

    for (const auto& w : seed)
        require(push(reduce(w)), errc::zero_vector, "seed vectors must be independent");

    std::vector<int> chosen;
    auto rec = [&](auto&& self, long lo) -> void {
        if (static_cast<int>(chosen.size()) == pick) {
            emit(chosen);
            return;
        }
        long room = static_cast<long>(pick - chosen.size());
        for (long x = lo; x + room - 1 <= gm.n(); ++x) {
            std::vector<int> r = reduce(gm.vector_at(x));
            if (!push(std::move(r))) continue;
            chosen.push_back(static_cast<int>(x));
            self(self, x + 1);
            chosen.pop_back();
            rows.pop_back();
            pivots.pop_back();
        }
    };
    rec(rec, 1);
}

}  // namespace detail

// All r-subsets of the ground set [q^r - 1] whose vectors form a basis of
// GF(q)^r. Density strictly exceeds prod_{k<=r}(1 - q^{-k}); the comparison
// is re-checked exactly before returning.
inline SetFamily basis_family(int q, int r, const Budget& budget = Budget()) {
    GroundMap gm(q, r);  // rejects non prime powers
    require(binomial(gm.n(), r) <= budget.member_slots, errc::budget_exceeded,
            "layer exceeds the enumeration budget");
    SetFamily f(static_cast<int>(gm.n()), r);
    detail::independent_subsets(gm, r, {}, [&](const std::vector<int>& member) {
        f.insert(member);
    });
    f.finalize(budget);
    require(f.density() > product_one_minus_inv_powers(q, r), errc::bound_too_loose,
            "basis family density fell below the guaranteed product");
    return f;
}

// Contiguous equal blocks partitioning [base_n * m]: block j covers
// {(j-1)m+1, .., jm}.
struct BlowupSpec {
    int base_n;
    int m;

    BlowupSpec(int base_n_, int m_) : base_n(base_n_), m(m_) {
        require(base_n >= 0, errc::out_of_range, "base ground set must be >= 0");
        require(m >= 1, errc::out_of_range, "multiplier must be >= 1");
    }

    int n() const { return base_n * m; }

    int block_of(int y) const {
        require(y >= 1 && y <= n(), errc::out_of_range, "point outside the blown-up ground set");
        return (y - 1) / m + 1;
    }

    std::pair<int, int> block_range(int j) const {
        require(j >= 1 && j <= base_n, errc::out_of_range, "no such block");
        return {(j - 1) * m + 1, j * m};
    }
};

// Replaces every member {j1 < .. < jr} by all r-sets picking one point from
// each of the blocks j1, .., jr. Members meeting a block twice never arise.
// The exact density guarantee (1 - C(r,2)/n) * density(f) is re-checked.
inline SetFamily blow_up(const SetFamily& f, int m, const Budget& budget = Budget()) {
    BlowupSpec spec(f.n(), m);
    BigInt out_count = BigInt(f.size());
    for (int i = 0; i < f.r(); ++i) out_count *= m;
    require(out_count <= budget.member_slots, errc::budget_exceeded,
            "blow-up exceeds the member budget");

    SetFamily g(spec.n(), f.r());
    int r = f.r();
    std::vector<int> digits(r, 0), out(r);
    for (const auto& member : f.members()) {
        std::fill(digits.begin(), digits.end(), 0);
        for (;;) {
            for (int i = 0; i < r; ++i) out[i] = (member[i] - 1) * m + digits[i] + 1;
            g.insert(out);
            int i = 0;
            while (i < r && digits[i] == m - 1) { digits[i] = 0; ++i; }
            if (i == r) break;
            ++digits[i];
        }
        if (r == 0) break;  // single empty member maps to itself
    }
    g.finalize(budget);

    if (f.n() > 0) {
        Rational keep = Rational(1) - Rational(binomial(r, 2), BigInt(f.n()));
        if (keep < 0) keep = 0;
        require(g.density() >= keep * f.density(), errc::bound_too_loose,
                "blow-up density fell below the guarantee");
    }
    return g;
}

// Two consecutive layers over [5^r - 1]: upper = bases of GF(5)^r, lower =
// (r-1)-sets completing the fixed vector w to a basis. Density guarantees:
// upper strictly beats prod_{k<=r}(1 - 5^{-k}), lower strictly beats the
// r-1 prefix except in the degenerate r = 1 case, where the lower layer is
// exactly {emptyset} and the bound holds with equality.
inline LayeredFamily two_layer_family(int r, const FqVector& w, const Budget& budget = Budget()) {
    require(r >= 1, errc::out_of_range, "layer index must be >= 1");
    GroundMap gm(5, r);
    require(w.field == gm.field() && w.dim() == r, errc::mixed_dimensions,
            "w must live in GF(5)^r");
    require(!w.is_zero(), errc::zero_vector, "w must be nonzero");

    SetFamily upper = basis_family(5, r, budget);
    SetFamily lower(static_cast<int>(gm.n()), r - 1);
    detail::independent_subsets(gm, r - 1, {w}, [&](const std::vector<int>& member) {
        lower.insert(member);
    });
    lower.finalize(budget);

    Rational bound = product_one_minus_inv_powers(5, r - 1);
    if (r == 1)
        require(lower.density() >= bound, errc::bound_too_loose,
                "degenerate lower layer lost its density");
    else
        require(lower.density() > bound, errc::bound_too_loose,
                "lower layer density fell below the guaranteed product");
    return LayeredFamily(std::move(upper), std::move(lower));
}

inline LayeredFamily two_layer_family(int r, const Budget& budget = Budget()) {
    require(r >= 1, errc::out_of_range, "layer index must be >= 1");
    GroundMap gm(5, r);
    std::vector<int> coords(r, 0);
    coords[0] = 1;  // e1 = (1,0,..,0)
    return two_layer_family(r, FqVector{gm.field(), std::move(coords)}, budget);
}

// All subsets of [n] whose size is divisible by d+1. Any d+1 consecutive
// levels contain such a level, so the family meets every d-subcube.
inline HittingFamily mod_level_family(int n, int d, const Budget& budget = Budget()) {
    require(d >= 1, errc::out_of_range, "subcube dimension must be >= 1");
    require(n >= d, errc::out_of_range, "cube must be at least as large as the subcube");
    require(n <= HittingFamily::max_n, errc::out_of_range, "cube dimension exceeds the cap");
    require((std::uint64_t(1) << n) <= budget.member_slots, errc::budget_exceeded,
            "vertex set exceeds the budget");
    HittingFamily h(n);
    for (std::uint32_t v = 0; v < (std::uint32_t(1) << n); ++v)
        if (std::popcount(v) % (d + 1) == 0) h.insert(v);
    return h;
}

// Hitting plan for one target dimension: the covered levels under the residue
// rule, with either a materialized daisy-free family (its complement is what
// the construction takes) or a symbolic guaranteed density bound.
struct StripedPlan {
    struct Level {
        int level = 0;
        bool materialized = false;
        std::string role;              // "single" (d=7) or "upper"/"lower" (d=6)
        Rational family_density;       // materialized levels: exact achieved density
        Rational density_lower_bound;  // symbolic levels: guaranteed bound
    };

    int n = 0;
    int d = 0;
    std::vector<Level> levels;
    std::map<int, SetFamily> level_families;      // d=7 materialized levels
    std::optional<LayeredFamily> pair_family;     // d=6 materialized pair
    int pair_upper_level = -1;
    std::string asymptotic_formula;
};

inline StripedPlan striped_plan(int n, int d, const Budget& budget = Budget()) {
    require(d == 6 || d == 7, errc::out_of_range, "plans exist for d = 6 and d = 7 only");
    if (d == 7)
        require(n % 4 == 3, errc::bad_residue, "d=7 plans need n congruent to 3 mod 4");
    else
        require(n % 8 == 7, errc::bad_residue, "d=6 plans need n congruent to 7 mod 8");

    StripedPlan plan;
    plan.n = n;
    plan.d = d;

    const int q = (d == 7) ? 4 : 5;
    const int K = 8;
    // Guaranteed density of a basis-type family at any covered level: the
    // infinite product prod(1 - q^{-k}) bounded below with the geometric tail
    // prod_{k>K} (1 - q^{-k}) >= 1 - q^{-K}/(q-1).
    BigInt qK = 1;
    for (int k = 0; k < K; ++k) qK *= q;
    Rational symbolic_bound =
        product_one_minus_inv_powers(q, K) * (Rational(1) - Rational(BigInt(1), qK * (q - 1)));

    if (d == 7) {
        plan.asymptotic_formula = "(1/4)*(1 - prod_{k>=1}(1 - 4^-k))";
        for (int r = 3; r <= n; r += 4) {
            StripedPlan::Level lv;
            lv.level = r;
            lv.role = "single";
            // Materialize when the native source layer fits the budget and
            // can be sliced down to n.
            BigInt source_n = 1;
            for (int i = 0; i < r; ++i) source_n *= q;
            source_n -= 1;
            bool fits = source_n >= n && source_n <= (1 << 20) &&
                        binomial(source_n.convert_to<long>(), r) <= budget.member_slots;
            if (fits) {
                SetFamily src = basis_family(q, r, budget);
                SetFamily sliced = greedy_slice(src, n);
                lv.materialized = true;
                lv.family_density = sliced.density();
                require(lv.family_density > symbolic_bound, errc::bound_too_loose,
                        "materialized level lost the guaranteed density");
                plan.level_families.emplace(r, std::move(sliced));
            } else {
                lv.materialized = false;
                lv.density_lower_bound = symbolic_bound;
            }
            plan.levels.push_back(std::move(lv));
        }
    } else {
        plan.asymptotic_formula = "(1/2)*(1 - prod_{k>=1}(1 - 5^-k))";
        for (int r = 3; r <= n; r += 4) {
            BigInt source_n = 1;
            for (int i = 0; i < r; ++i) source_n *= q;
            source_n -= 1;
            bool fits = source_n >= n && source_n <= (1 << 20) &&
                        binomial(source_n.convert_to<long>(), r) <= budget.member_slots &&
                        !plan.pair_family;
            if (fits) {
                LayeredFamily src = two_layer_family(r, budget);
                LayeredFamily sliced = greedy_slice(src, n);
                StripedPlan::Level up;
                up.level = r;
                up.role = "upper";
                up.materialized = true;
                up.family_density = sliced.upper.density();
                StripedPlan::Level low;
                low.level = r - 1;
                low.role = "lower";
                low.materialized = true;
                low.family_density = sliced.lower.density();
                require(sliced.density_sum() > 2 * symbolic_bound, errc::bound_too_loose,
                        "materialized pair lost the guaranteed density sum");
                plan.pair_family = std::move(sliced);
                plan.pair_upper_level = r;
                plan.levels.push_back(std::move(low));
                plan.levels.push_back(std::move(up));
            } else {
                for (int lvl : {r - 1, r}) {
                    StripedPlan::Level lv;
                    lv.level = lvl;
                    lv.role = (lvl == r) ? "upper" : "lower";
                    lv.materialized = false;
                    lv.density_lower_bound = symbolic_bound;
                    plan.levels.push_back(std::move(lv));
                }
            }
        }
    }
    return plan;
}

}  // namespace daisyforge
