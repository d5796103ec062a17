#pragma once

#include <string>
#include <vector>

#include "daisyforge/construct.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/rational.hpp"

namespace daisyforge {

// Two-sided enclosure of the infinite product prod_{k>=1}(1 - q^{-k}).
// upper is the partial product through K; lower multiplies in the tail
// estimate prod_{k>K}(1 - q^{-k}) >= 1 - sum_{k>K} q^{-k} = 1 - q^{-K}/(q-1).
// Enclosures nest: raising K can only shrink [lower, upper].
struct ProductBound {
    int q = 0;
    int K = 0;
    Rational lower;
    Rational upper;
};

inline ProductBound product_bound(int q, int K) {
    require(q >= 2, errc::out_of_range, "base must be >= 2");
    require(K >= 1, errc::out_of_range, "truncation length must be >= 1");
    ProductBound pb;
    pb.q = q;
    pb.K = K;
    pb.upper = product_one_minus_inv_powers(q, K);
    BigInt qK = 1;
    for (int k = 0; k < K; ++k) qK *= q;
    pb.lower = pb.upper * (Rational(1) - Rational(BigInt(1), qK * (q - 1)));
    return pb;
}

// One derived level-density bound, with the derivation replayed as a list of
// exact rational (in)equalities. Every line in trace was checked while the
// report was built; a step that fails to hold aborts with BoundTooLoose
// instead of producing a report.
struct DensityReport {
    int d = 0;  // cube dimension, 6 or 7
    int K = 0;  // truncation length fed to the product enclosure
    Rational bound;         // upper bound on the minimal hitting density
    Rational target;        // the easy benchmark 1/(d+1) the bound must beat
    Rational lambda_lower;  // implied lower bound 1 - bound on the free density
    std::vector<std::string> trace;
};

namespace detail {

inline void push_step(std::vector<std::string>& trace, bool holds, const std::string& line) {
    require(holds, errc::bound_too_loose, "derivation step failed: " + line);
    trace.push_back(line);
}

}  // namespace detail

// Density bound for hitting every 7-subcube: cover one level in four with the
// complement of a base-4 basis-type family. Valid for any K >= 1; the
// enclosure is already sharp enough at K = 1.
inline DensityReport gamma7_report(int K) {
    require(K >= 1, errc::out_of_range, "truncation length must be >= 1");
    const ProductBound p = product_bound(4, K);
    DensityReport rep;
    rep.d = 7;
    rep.K = K;
    rep.bound = (Rational(1) - p.lower) / 4;
    rep.target = rat(1, 8);
    rep.lambda_lower = Rational(1) - rep.bound;
    auto& tr = rep.trace;
    detail::push_step(tr, Rational(0) < p.lower && p.lower <= p.upper,
                      "0 < " + rat_string(p.lower) + " <= " + rat_string(p.upper) +
                          "  (enclosure of prod(1 - 4^-k) at K = " + std::to_string(K) + ")");
    detail::push_step(tr, rep.bound == (Rational(1) - p.lower) / 4,
                      "bound = (1/4)(1 - " + rat_string(p.lower) + ") = " + rat_string(rep.bound));
    detail::push_step(tr, rep.bound <= rat(1, 10), rat_string(rep.bound) + " <= 1/10");
    detail::push_step(tr, rep.bound < rep.target,
                      rat_string(rep.bound) + " < 1/8  (beats the one-in-(d+1) benchmark)");
    detail::push_step(tr, rep.lambda_lower == Rational(1) - rep.bound,
                      "free density >= 1 - " + rat_string(rep.bound) + " = " +
                          rat_string(rep.lambda_lower));
    return rep;
}

// Density bound for hitting every 6-subcube: cover two consecutive levels in
// eight with the complement of a base-5 two-layer family whose density sum is
// at least 2 * lower. At K = 1 the bound lands exactly on 3/25.
inline DensityReport gamma6_report(int K) {
    require(K >= 1, errc::out_of_range, "truncation length must be >= 1");
    const ProductBound p = product_bound(5, K);
    const Rational sum = 2 * p.lower;
    DensityReport rep;
    rep.d = 6;
    rep.K = K;
    rep.bound = rat(1, 2) - sum / 4;
    rep.target = rat(1, 7);
    rep.lambda_lower = Rational(1) - rep.bound;
    auto& tr = rep.trace;
    detail::push_step(tr, Rational(0) < p.lower && p.lower <= p.upper,
                      "0 < " + rat_string(p.lower) + " <= " + rat_string(p.upper) +
                          "  (enclosure of prod(1 - 5^-k) at K = " + std::to_string(K) + ")");
    detail::push_step(tr, sum == 2 * p.lower && sum >= rat(38, 25),
                      "two-layer density sum >= 2 * " + rat_string(p.lower) + " = " +
                          rat_string(sum) + " >= 38/25");
    // Transferring a two-layer density sum into consecutive cube levels needs
    // the upper layer to be the larger one; checked at the desk instance.
    detail::push_step(tr, binomial(24, 2) > binomial(24, 1),
                      "C(24,2) = " + binomial(24, 2).str() + " > " + binomial(24, 1).str() +
                          " = C(24,1)  (layer sizes grow below n/2)");
    detail::push_step(tr, rep.bound == rat(1, 2) - sum / 4,
                      "bound = 1/2 - (" + rat_string(sum) + ")/4 = " + rat_string(rep.bound));
    detail::push_step(tr, rep.bound <= rat(3, 25), rat_string(rep.bound) + " <= 3/25");
    detail::push_step(tr, rep.bound < rep.target,
                      rat_string(rep.bound) + " < 1/7  (beats the one-in-(d+1) benchmark)");
    detail::push_step(tr, rep.lambda_lower == Rational(1) - rep.bound,
                      "free density >= 1 - " + rat_string(rep.bound) + " = " +
                          rat_string(rep.lambda_lower));
    return rep;
}

// The bound one level in d+1 always achieves (see mod_level_family); the
// derived reports above must come in strictly under this.
inline Rational trivial_upper(int d) {
    require(d >= 1, errc::out_of_range, "cube dimension must be >= 1");
    return rat(1, d + 1);
}

}  // namespace daisyforge
