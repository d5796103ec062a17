#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "daisyforge/errors.hpp"

namespace daisyforge {

// Arithmetic for GF(q), q = p^k <= 256, as dense lookup tables.
//
// Element encoding: e in [0,q) stands for the polynomial sum_j d_j x^j over
// GF(p), where d_j is the j-th base-p digit of e. For prime q this is the
// residue itself. Extension fields reduce modulo the lexicographically
// smallest monic irreducible of degree k (coefficients compared from x^{k-1}
// down to x^0), so GF(4) uses x^2 + x + 1.
//
// A FiniteField value is a cheap shared handle; copies alias one table set.
class FiniteField {
public:
    explicit FiniteField(int q) : t_(build(q)) {}

    int q() const { return t_->q; }
    int p() const { return t_->p; }
    int degree() const { return t_->k; }

    // Irreducible modulus coefficients, x^0 first, length degree()+1.
    const std::vector<int>& modulus() const { return t_->modulus; }

    int add(int a, int b) const { return t_->add[check(a) * t_->q + check(b)]; }
    int mul(int a, int b) const { return t_->mul[check(a) * t_->q + check(b)]; }
    int neg(int a) const { return t_->neg[check(a)]; }
    int sub(int a, int b) const { return add(a, neg(b)); }

    int inv(int a) const {
        require(check(a) != 0, errc::zero_vector, "inverse of zero");
        return t_->inv[a];
    }

    bool operator==(const FiniteField& o) const { return t_->q == o.t_->q; }
    bool operator!=(const FiniteField& o) const { return !(*this == o); }

private:
    struct Tables {
        int q, p, k;
        std::vector<int> modulus;
        std::vector<uint8_t> add, mul, neg, inv;
    };

    std::shared_ptr<const Tables> t_;

    int check(int a) const {
        require(a >= 0 && a < t_->q, errc::out_of_range, "field element out of range");
        return a;
    }

    static bool is_prime(int n) {
        if (n < 2) return 0;
        for (int d = 2; d * d <= n; ++d)
            if (n % d == 0) return false;
        return true;
    }

    // Polynomials over GF(p) as digit vectors, x^0 first, no trailing zeros.
    static std::vector<int> digits(int e, int p, int len) {
        std::vector<int> d(len, 0);
        for (int j = 0; j < len; ++j) { d[j] = e % p; e /= p; }
        return d;
    }

    static std::vector<int> poly_mul(const std::vector<int>& a, const std::vector<int>& b, int p) {
        std::vector<int> c(a.size() + b.size() - 1, 0);
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j)
                c[i + j] = (c[i + j] + a[i] * b[j]) % p;
        return c;
    }

    // In-place remainder mod a monic divisor.
    static void poly_mod(std::vector<int>& a, const std::vector<int>& m, int p) {
        int dm = static_cast<int>(m.size()) - 1;
        for (int i = static_cast<int>(a.size()) - 1; i >= dm; --i) {
            int c = a[i];
            if (c == 0) continue;
            for (int j = 0; j <= dm; ++j)
                a[i - dm + j] = ((a[i - dm + j] - c * m[j]) % p + p) % p;
        }
        a.resize(dm);
    }

    static bool poly_is_zero(const std::vector<int>& a) {
        for (int c : a)
            if (c) return false;
        return true;
    }

    static std::vector<int> find_irreducible(int p, int k) {
        // Candidates x^k + sum c_j x^j scanned in lex order on (c_{k-1},..,c_0),
        // which is ascending order of the packed value sum c_j p^j.
        int pk = 1;
        for (int i = 0; i < k; ++i) pk *= p;
        for (int v = 0; v < pk; ++v) {
            std::vector<int> m = digits(v, p, k);
            m.push_back(1);
            bool irreducible = true;
            // Trial division by every monic polynomial of degree 1..k/2.
            for (int d = 1; irreducible && 2 * d <= k; ++d) {
                int pd = 1;
                for (int i = 0; i < d; ++i) pd *= p;
                for (int w = 0; irreducible && w < pd; ++w) {
                    std::vector<int> g = digits(w, p, d);
                    g.push_back(1);
                    std::vector<int> r = m;
                    poly_mod(r, g, p);
                    if (poly_is_zero(r)) irreducible = false;
                }
            }
            if (irreducible) return m;
        }
        fail(errc::not_prime_power, "no irreducible found");  // unreachable for prime p
    }

    static std::shared_ptr<const Tables> build(int q) {
        require(q >= 2 && q <= 256, errc::not_prime_power, "q must be in [2,256]");
        int p = 0, k = 0;
        for (int cand = 2; cand <= q; ++cand) {
            if (!is_prime(cand)) continue;
            int pow = cand, deg = 1;
            while (pow < q) { pow *= cand; ++deg; }
            if (pow == q) { p = cand; k = deg; break; }
        }
        require(p != 0, errc::not_prime_power, "q = " + std::to_string(q) + " is not a prime power");

        auto t = std::make_shared<Tables>();
        t->q = q;
        t->p = p;
        t->k = k;
        t->modulus = k == 1 ? std::vector<int>{0, 1} : find_irreducible(p, k);

        t->add.resize(static_cast<size_t>(q) * q);
        t->mul.resize(static_cast<size_t>(q) * q);
        t->neg.resize(q);
        t->inv.assign(q, 0);

        auto pack = [&](const std::vector<int>& d) {
            int e = 0;
            for (int j = static_cast<int>(d.size()) - 1; j >= 0; --j) e = e * p + d[j];
            return e;
        };

        for (int a = 0; a < q; ++a) {
            std::vector<int> da = digits(a, p, k);
            std::vector<int> dn(k);
            for (int j = 0; j < k; ++j) dn[j] = (p - da[j]) % p;
            t->neg[a] = static_cast<uint8_t>(pack(dn));
            for (int b = 0; b < q; ++b) {
                std::vector<int> db = digits(b, p, k);
                std::vector<int> ds(k);
                for (int j = 0; j < k; ++j) ds[j] = (da[j] + db[j]) % p;
                t->add[static_cast<size_t>(a) * q + b] = static_cast<uint8_t>(pack(ds));
                std::vector<int> dm = poly_mul(da, db, p);
                if (k > 1) poly_mod(dm, t->modulus, p);
                dm.resize(k, 0);
                t->mul[static_cast<size_t>(a) * q + b] = static_cast<uint8_t>(pack(dm));
            }
        }
        for (int a = 1; a < q; ++a)
            for (int b = 1; b < q; ++b)
                if (t->mul[static_cast<size_t>(a) * q + b] == 1) { t->inv[a] = static_cast<uint8_t>(b); break; }

        verify(*t);
        return t;
    }

    // Constructed tables are re-checked before use: identities, inverses and
    // commutativity always; full associativity/distributivity for q <= 16.
    static void verify(const Tables& t) {
        int q = t.q;
        auto A = [&](int a, int b) { return t.add[static_cast<size_t>(a) * q + b]; };
        auto M = [&](int a, int b) { return t.mul[static_cast<size_t>(a) * q + b]; };
        for (int a = 0; a < q; ++a) {
            require(A(a, 0) == a && M(a, 1) == a && M(a, 0) == 0, errc::not_prime_power, "identity check failed");
            require(A(a, t.neg[a]) == 0, errc::not_prime_power, "additive inverse check failed");
            if (a != 0)
                require(M(a, t.inv[a]) == 1, errc::not_prime_power, "multiplicative inverse check failed");
            for (int b = 0; b < q; ++b)
                require(A(a, b) == A(b, a) && M(a, b) == M(b, a), errc::not_prime_power, "commutativity check failed");
        }
        if (q > 16) return;
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                for (int c = 0; c < q; ++c) {
                    require(A(A(a, b), c) == A(a, A(b, c)), errc::not_prime_power, "add associativity failed");
                    require(M(M(a, b), c) == M(a, M(b, c)), errc::not_prime_power, "mul associativity failed");
                    require(M(a, A(b, c)) == A(M(a, b), M(a, c)), errc::not_prime_power, "distributivity failed");
                }
    }
};

// Vector over a fixed field. Coordinates are field elements in [0,q).
struct FqVector {
    FiniteField field;
    std::vector<int> coords;

    int dim() const { return static_cast<int>(coords.size()); }

    bool is_zero() const {
        for (int c : coords)
            if (c) return false;
        return true;
    }

    bool operator==(const FqVector& o) const {
        return field == o.field && coords == o.coords;
    }
};

inline void require_same_space(const std::vector<FqVector>& vs) {
    for (size_t i = 1; i < vs.size(); ++i)
        require(vs[i].field == vs[0].field && vs[i].dim() == vs[0].dim(),
                errc::mixed_dimensions, "vectors from different spaces");
}

// Row-reduction rank. Rows are consumed in the given order; the pivot of each
// surviving row is its first nonzero coordinate.
inline int rank(std::vector<FqVector> vs) {
    if (vs.empty()) return 0;
    require_same_space(vs);
    const FiniteField F = vs[0].field;
    int dim = vs[0].dim();
    std::vector<std::vector<int>> rows;  // reduced rows, pivot scaled to 1
    std::vector<int> pivot_col;
    for (auto& v : vs) {
        std::vector<int> r = v.coords;
        for (size_t i = 0; i < rows.size(); ++i) {
            int c = r[pivot_col[i]];
            if (c == 0) continue;
            for (int j = 0; j < dim; ++j)
                r[j] = F.sub(r[j], F.mul(c, rows[i][j]));
        }
        int pc = -1;
        for (int j = 0; j < dim; ++j)
            if (r[j]) { pc = j; break; }
        if (pc < 0) continue;
        int s = F.inv(r[pc]);
        for (int j = 0; j < dim; ++j) r[j] = F.mul(s, r[j]);
        rows.push_back(std::move(r));
        pivot_col.push_back(pc);
    }
    return static_cast<int>(rows.size());
}

// True iff the vectors form a basis of their ambient space.
inline bool is_basis(const std::vector<FqVector>& vs) {
    if (vs.empty()) return false;
    require_same_space(vs);
    if (static_cast<int>(vs.size()) != vs[0].dim()) return false;
    return rank(vs) == vs[0].dim();
}

// Canonical projective representative: scale so the first nonzero coordinate
// becomes 1. Errors on the zero vector.
inline FqVector projective_rep(const FqVector& v) {
    require(!v.is_zero(), errc::zero_vector, "projective representative of zero");
    const FiniteField& F = v.field;
    int lead = 0;
    for (int c : v.coords)
        if (c) { lead = c; break; }
    FqVector out = v;
    int s = F.inv(lead);
    for (int& c : out.coords) c = F.mul(s, c);
    return out;
}

// Deterministic bijection between ground elements 1..q^r-1 and the nonzero
// vectors of GF(q)^r: element x has base-q digits (v_1,..,v_r), v_1 most
// significant, so x = sum_j v_j q^{r-j}. Element 1 maps to (0,..,0,1).
class GroundMap {
public:
    GroundMap(int q, int r) : field_(q), r_(r) {
        require(r >= 1, errc::out_of_range, "dimension must be >= 1");
        n_ = 1;
        for (int i = 0; i < r; ++i) {
            n_ *= q;
            require(n_ <= (1L << 40), errc::scale_exceeded, "ground set too large");
        }
        n_ -= 1;
    }

    const FiniteField& field() const { return field_; }
    int r() const { return r_; }
    long n() const { return n_; }

    FqVector vector_at(long x) const {
        require(x >= 1 && x <= n_, errc::out_of_range, "ground element out of range");
        std::vector<int> coords(r_);
        for (int j = r_ - 1; j >= 0; --j) { coords[j] = static_cast<int>(x % field_.q()); x /= field_.q(); }
        return FqVector{field_, std::move(coords)};
    }

    long index_of(const FqVector& v) const {
        require(v.field == field_ && v.dim() == r_, errc::mixed_dimensions, "vector from a different space");
        require(!v.is_zero(), errc::zero_vector, "zero vector has no ground element");
        long x = 0;
        for (int c : v.coords) x = x * field_.q() + c;
        return x;
    }

private:
    FiniteField field_;
    int r_;
    long n_;
};

}  // namespace daisyforge
