#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "daisyforge/budget.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/rational.hpp"

namespace daisyforge {

// Visits the r-subsets of [n] in colex order (compare by largest element
// first). Members are sorted ascending. r = 0 visits the empty set once.
template <class Fn>
void for_each_subset(int n, int r, Fn&& visit) {
    require(n >= 0 && r >= 0 && r <= n, errc::out_of_range, "bad layer parameters");
    std::vector<int> a(r);
    for (int i = 0; i < r; ++i) a[i] = i + 1;
    if (r == 0) { visit(a); return; }
    for (;;) {
        visit(a);
        int i = 0;
        while (i + 1 < r && a[i] + 1 == a[i + 1]) ++i;
        if (i == r - 1 && a[i] == n) return;
        ++a[i];
        for (int j = 0; j < i; ++j) a[j] = j + 1;
    }
}

// Visits the r-subsets of [n] in lex order on the sorted tuples.
template <class Fn>
void for_each_subset_lex(int n, int r, Fn&& visit) {
    require(n >= 0 && r >= 0 && r <= n, errc::out_of_range, "bad layer parameters");
    std::vector<int> a(r);
    for (int i = 0; i < r; ++i) a[i] = i + 1;
    if (r == 0) { visit(a); return; }
    for (;;) {
        visit(a);
        int i = r - 1;
        while (i >= 0 && a[i] == n - (r - 1 - i)) --i;
        if (i < 0) return;
        ++a[i];
        for (int j = i + 1; j < r; ++j) a[j] = a[j - 1] + 1;
    }
}

// Colex rank of a sorted r-subset of [n]: sum_i C(a_i - 1, i), 1-based i.
// Equals the subset's position in for_each_subset order.
class ColexRanker {
public:
    ColexRanker(int n, int r) : r_(r) {
        // Saturating Pascal table C(m, j) for m < n, j <= r. Terms that feed a
        // genuine rank are bounded by the layer size, so saturation is safe.
        table_.assign(static_cast<size_t>(n) * (r + 1), 0);
        for (int m = 0; m < n; ++m) {
            at(m, 0) = 1;
            for (int j = 1; j <= r; ++j) {
                if (m == 0) { at(m, j) = 0; continue; }
                std::uint64_t s = at(m - 1, j - 1);
                std::uint64_t t = at(m - 1, j);
                at(m, j) = (s > sat_ - t) ? sat_ : s + t;
            }
        }
    }

    std::uint64_t rank(const std::vector<int>& sorted_members) const {
        std::uint64_t x = 0;
        for (int i = 0; i < r_; ++i) x += at(sorted_members[i] - 1, i + 1);
        return x;
    }

private:
    static constexpr std::uint64_t sat_ = std::numeric_limits<std::uint64_t>::max() / 2;
    int r_;
    std::vector<std::uint64_t> table_;

    std::uint64_t& at(int m, int j) { return table_[static_cast<size_t>(m) * (r_ + 1) + j]; }
    std::uint64_t at(int m, int j) const { return table_[static_cast<size_t>(m) * (r_ + 1) + j]; }
};

// A family of r-subsets of the ground set [n]. Members iterate in sorted
// (lex) order. finalize() attaches a colex bitmap for O(1) contains when the
// full layer fits the member budget; searches share finalized families
// read-only across threads.
class SetFamily {
public:
    SetFamily(int n, int r) : n_(n), r_(r) {
        require(n >= 0, errc::out_of_range, "ground set size must be >= 0");
        require(r >= 0 && r <= n, errc::out_of_range, "layer index must be in [0, n]");
    }

    int n() const { return n_; }
    int r() const { return r_; }
    std::uint64_t size() const { return members_.size(); }
    const std::set<std::vector<int>>& members() const { return members_; }

    BigInt layer_size() const { return binomial(n_, r_); }

    void insert(std::vector<int> member) {
        std::sort(member.begin(), member.end());
        validate_member(member);
        members_.insert(std::move(member));
        bitmap_.clear();
        ranker_.reset();
    }

    void erase(std::vector<int> member) {
        std::sort(member.begin(), member.end());
        members_.erase(member);
        bitmap_.clear();
        ranker_.reset();
    }

    bool contains(const std::vector<int>& sorted_member) const {
        if (ranker_) {
            std::uint64_t x = ranker_->rank(sorted_member);
            return (bitmap_[x >> 6] >> (x & 63)) & 1;
        }
        return members_.count(sorted_member) != 0;
    }

    // Builds the colex bitmap when C(n, r) fits the budget. Idempotent.
    void finalize(const Budget& budget = Budget()) {
        if (ranker_ || r_ == 0) return;
        BigInt total = layer_size();
        if (total > budget.member_slots) return;
        std::uint64_t bits = static_cast<std::uint64_t>(total);
        ranker_.emplace(n_, r_);
        bitmap_.assign((bits + 63) / 64, 0);
        for (const auto& m : members_) {
            std::uint64_t x = ranker_->rank(m);
            bitmap_[x >> 6] |= std::uint64_t(1) << (x & 63);
        }
    }

    bool finalized() const { return ranker_.has_value(); }

    Rational density() const {
        BigInt total = layer_size();
        require(total > 0, errc::out_of_range, "empty layer has no density");
        return Rational(BigInt(size()), total);
    }

    bool operator==(const SetFamily& o) const {
        return n_ == o.n_ && r_ == o.r_ && members_ == o.members_;
    }

private:
    int n_, r_;
    std::set<std::vector<int>> members_;
    std::optional<ColexRanker> ranker_;
    std::vector<std::uint64_t> bitmap_;

    void validate_member(const std::vector<int>& m) const {
        require(static_cast<int>(m.size()) == r_, errc::out_of_range, "member has wrong cardinality");
        for (size_t i = 0; i < m.size(); ++i) {
            require(m[i] >= 1 && m[i] <= n_, errc::out_of_range, "member element outside ground set");
            require(i == 0 || m[i] > m[i - 1], errc::out_of_range, "member elements must be distinct");
        }
    }
};

inline Rational density(const SetFamily& f) { return f.density(); }

// All r-subsets of [n] not in f. Refuses layers beyond the member budget.
inline SetFamily complement_in_layer(const SetFamily& f, const Budget& budget = Budget()) {
    require(f.layer_size() <= budget.member_slots, errc::layer_too_large,
            "layer too large to materialize");
    SetFamily out(f.n(), f.r());
    for_each_subset(f.n(), f.r(), [&](const std::vector<int>& m) {
        if (!f.contains(m)) out.insert(m);
    });
    out.finalize(budget);
    return out;
}

// Members avoiding coordinate i, relabelled to the ground set [n-1] by
// shifting every element above i down by one. Order-preserving.
inline SetFamily delete_coordinate(const SetFamily& f, int i) {
    require(i >= 1 && i <= f.n(), errc::out_of_range, "deleted coordinate outside ground set");
    require(f.n() > f.r(), errc::target_too_small, "cannot shrink the ground set below the layer");
    SetFamily out(f.n() - 1, f.r());
    for (const auto& m : f.members()) {
        if (std::binary_search(m.begin(), m.end(), i)) continue;
        std::vector<int> relabelled;
        relabelled.reserve(m.size());
        for (int x : m) relabelled.push_back(x > i ? x - 1 : x);
        out.insert(std::move(relabelled));
    }
    return out;
}

namespace detail {

// Count of members containing each coordinate.
inline std::vector<std::uint64_t> coordinate_degrees(const SetFamily& f) {
    std::vector<std::uint64_t> deg(f.n() + 1, 0);
    for (const auto& m : f.members())
        for (int x : m) ++deg[x];
    return deg;
}

}  // namespace detail

// Repeatedly deletes the coordinate whose removal maximizes the resulting
// density (ties: smallest index) until the ground set has target_n elements.
// Averaging over coordinates guarantees each step's density never drops;
// that invariant is re-checked at every step.
inline SetFamily greedy_slice(const SetFamily& f, int target_n) {
    require(target_n >= f.r(), errc::target_too_small, "target below layer index");
    require(target_n <= f.n(), errc::out_of_range, "target exceeds current ground set");
    SetFamily cur = f;
    while (cur.n() > target_n) {
        auto deg = detail::coordinate_degrees(cur);
        int best = 1;
        for (int i = 2; i <= cur.n(); ++i)
            if (deg[i] < deg[best]) best = i;
        Rational before = cur.density();
        SetFamily next = delete_coordinate(cur, best);
        require(next.density() >= before, errc::bound_too_loose, "greedy step lost density");
        cur = std::move(next);
    }
    cur.finalize();
    return cur;
}

// Two consecutive layers over one ground set: upper at r, lower at r-1.
struct LayeredFamily {
    SetFamily upper;
    SetFamily lower;

    LayeredFamily(SetFamily up, SetFamily low) : upper(std::move(up)), lower(std::move(low)) {
        require(upper.n() == lower.n(), errc::mixed_dimensions, "layers over different ground sets");
        require(lower.r() + 1 == upper.r(), errc::bad_layer_index, "layers must be consecutive");
    }

    int n() const { return upper.n(); }
    int r() const { return upper.r(); }

    Rational density_sum() const { return upper.density() + lower.density(); }
};

inline Rational density_sum(const LayeredFamily& lf) { return lf.density_sum(); }

inline LayeredFamily delete_coordinate(const LayeredFamily& lf, int i) {
    return LayeredFamily(delete_coordinate(lf.upper, i), delete_coordinate(lf.lower, i));
}

// Same greedy descent, scoring by density sum. The averaging argument applies
// to each layer separately, so the sum cannot drop either.
inline LayeredFamily greedy_slice(const LayeredFamily& lf, int target_n) {
    require(target_n >= lf.r(), errc::target_too_small, "target below layer index");
    require(target_n <= lf.n(), errc::out_of_range, "target exceeds current ground set");
    LayeredFamily cur = lf;
    while (cur.n() > target_n) {
        int n = cur.n();
        BigInt up_total = binomial(n - 1, cur.upper.r());
        BigInt low_total = binomial(n - 1, cur.lower.r());
        auto up_deg = detail::coordinate_degrees(cur.upper);
        auto low_deg = detail::coordinate_degrees(cur.lower);
        int best = -1;
        Rational best_sum;
        for (int i = 1; i <= n; ++i) {
            Rational s = Rational(BigInt(cur.upper.size() - up_deg[i]), up_total) +
                         Rational(BigInt(cur.lower.size() - low_deg[i]), low_total);
            if (best < 0 || s > best_sum) { best = i; best_sum = s; }
        }
        Rational before = cur.density_sum();
        LayeredFamily next = delete_coordinate(cur, best);
        require(next.density_sum() >= before, errc::bound_too_loose, "greedy step lost density");
        cur = std::move(next);
    }
    cur.upper.finalize();
    cur.lower.finalize();
    return cur;
}

}  // namespace daisyforge
