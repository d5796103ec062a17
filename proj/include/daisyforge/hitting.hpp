#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "daisyforge/daisy.hpp"
#include "daisyforge/errors.hpp"

namespace daisyforge {

// Vertex set of the n-cube as a bitset; vertex index = binary encoding of the
// subset of [n] (element e <-> bit e-1).
class HittingFamily {
public:
    static constexpr int max_n = 25;

    explicit HittingFamily(int n) : n_(n) {
        require(n >= 0 && n <= max_n, errc::out_of_range,
                "cube dimension must be in [0, " + std::to_string(max_n) + "]");
        bits_.assign((std::uint64_t(1) << n) / 64 + 1, 0);
    }

    int n() const { return n_; }
    std::uint64_t universe_size() const { return std::uint64_t(1) << n_; }
    std::uint64_t vertex_count() const { return count_; }

    bool contains(std::uint32_t v) const {
        check(v);
        return (bits_[v >> 6] >> (v & 63)) & 1;
    }

    void insert(std::uint32_t v) {
        check(v);
        std::uint64_t& w = bits_[v >> 6];
        std::uint64_t bit = std::uint64_t(1) << (v & 63);
        if (!(w & bit)) { w |= bit; ++count_; }
    }

    bool operator==(const HittingFamily& o) const { return n_ == o.n_ && bits_ == o.bits_; }

private:
    int n_;
    std::vector<std::uint64_t> bits_;
    std::uint64_t count_ = 0;

    void check(std::uint32_t v) const {
        require(v < universe_size(), errc::out_of_range, "vertex outside the cube");
    }
};

// Copy of Q_d inside Q_n: coordinates in the base mask are pinned to 1, the
// free mask varies, the rest are pinned to 0. Vertex set = { base | A : A a
// submask of free }.
struct Subcube {
    std::uint32_t base = 0;
    std::uint32_t free = 0;

    int dim() const { return std::popcount(free); }
    bool valid() const { return (base & free) == 0; }
};

inline std::vector<int> mask_to_set(std::uint32_t mask) {
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask) + 1);
        mask &= mask - 1;
    }
    return out;
}

inline std::uint32_t set_to_mask(const std::vector<int>& set, int n) {
    std::uint32_t mask = 0;
    for (int e : set) {
        require(e >= 1 && e <= n, errc::out_of_range, "element outside ground set");
        require(!((mask >> (e - 1)) & 1), errc::out_of_range, "repeated element");
        mask |= std::uint32_t(1) << (e - 1);
    }
    return mask;
}

inline std::vector<std::uint32_t> subcube_vertices(const Subcube& c) {
    require(c.valid(), errc::out_of_range, "base and free sets must be disjoint");
    std::vector<std::uint32_t> out;
    std::uint32_t a = 0;
    do {
        out.push_back(c.base | a);
        a = (a - c.free) & c.free;
    } while (a);
    return out;
}

// Visits every copy of Q_d in Q_n exactly once: free sets X in colex order
// (ascending mask value over equal popcounts), bases B ascending within X.
// C(n,d) * 2^(n-d) subcubes in total.
template <class Fn>
void enumerate_subcubes(int n, int d, Fn&& visit) {
    require(n >= 0 && n <= HittingFamily::max_n, errc::out_of_range, "bad cube dimension");
    require(d >= 0 && d <= n, errc::out_of_range, "subcube dimension must be in [0, n]");
    std::uint32_t full = (n == 32) ? ~std::uint32_t(0) : ((std::uint32_t(1) << n) - 1);
    std::uint32_t x = (d == 0) ? 0 : ((std::uint32_t(1) << d) - 1);
    for (;;) {
        std::uint32_t comp = full & ~x;
        std::uint32_t b = 0;
        do {
            visit(Subcube{b, x});
            b = (b - comp) & comp;
        } while (b);
        if (d == 0 || x == (full & ~((std::uint32_t(1) << (n - d)) - 1))) break;
        // Gosper's hack: next mask with the same popcount.
        std::uint32_t c = x & -x;
        std::uint32_t r = x + c;
        x = (((x ^ r) >> 2) / c) | r;
    }
}

struct HitCheckResult {
    bool ok = true;
    std::optional<Subcube> missed;
    std::uint64_t subcubes = 0;
};

// True iff every d-subcube's vertex set meets h; otherwise reports the first
// missed subcube in enumeration order. Per free set X the 2^d vertex offsets
// are expanded once and shifted over the bases.
inline HitCheckResult verify_hitting(const HittingFamily& h, int d) {
    require(d >= 0 && d <= h.n(), errc::out_of_range, "subcube dimension must be in [0, n]");
    HitCheckResult res;
    std::uint32_t last_x = ~std::uint32_t(0);
    std::vector<std::uint32_t> offsets;
    enumerate_subcubes(h.n(), d, [&](const Subcube& c) {
        if (!res.ok) return;
        ++res.subcubes;
        if (c.free != last_x) {
            last_x = c.free;
            offsets.clear();
            std::uint32_t a = 0;
            do {
                offsets.push_back(a);
                a = (a - c.free) & c.free;
            } while (a);
        }
        for (std::uint32_t a : offsets)
            if (h.contains(c.base | a)) return;
        res.ok = false;
        res.missed = c;
    });
    return res;
}

// Level predicate with a fixed period: level l is covered iff l mod period is
// one of the residues.
struct LevelRule {
    int period;
    std::vector<int> residues;

    LevelRule(int p, std::vector<int> rs) : period(p), residues(std::move(rs)) {
        require(period >= 1, errc::bad_residue, "period must be positive");
        for (int r : residues)
            require(r >= 0 && r < period, errc::bad_residue, "residue outside [0, period)");
    }

    bool covered(long level) const {
        if (level < 0) return false;
        int rem = static_cast<int>(level % period);
        for (int r : residues)
            if (r == rem) return true;
        return false;
    }
};

// True iff every base level b finds a covered level within the window
// [b+layer_lo, b+layer_hi]. Checking one full period of b suffices.
inline bool residue_reduction_check(int d, const LevelRule& rule, int layer_lo, int layer_hi) {
    require(0 <= layer_lo && layer_lo <= layer_hi && layer_hi <= d, errc::out_of_range,
            "layer window must satisfy 0 <= lo <= hi <= d");
    for (int b = 0; b < rule.period; ++b) {
        bool hit = false;
        for (int j = layer_lo; j <= layer_hi && !hit; ++j)
            if (rule.covered(b + j)) hit = true;
        if (!hit) return false;
    }
    return true;
}

// Layer j of a subcube, read as a daisy instance at level |B|+j: stem B,
// petal set X, member sets B + (j-subsets of X). j = 0 degenerates to the
// single set B and is flagged; j >= 1 yields the genuine pattern
// (|B|+j, j, dim).
struct SubcubeLayerDaisy {
    int r, s, t;
    bool degenerate;
    std::optional<DaisyPattern> pattern;
    std::vector<int> stem;
    std::vector<int> petals;
    std::vector<std::vector<int>> members;
};

inline SubcubeLayerDaisy layer_of_subcube_is_daisy(const Subcube& c, int j) {
    require(c.valid(), errc::out_of_range, "base and free sets must be disjoint");
    int d = c.dim();
    require(j >= 0 && j <= d, errc::out_of_range, "layer index must be in [0, dim]");
    SubcubeLayerDaisy out;
    out.stem = mask_to_set(c.base);
    out.petals = mask_to_set(c.free);
    int b = static_cast<int>(out.stem.size());
    out.r = b + j;
    out.s = j;
    out.t = d;
    out.degenerate = (j == 0);
    if (!out.degenerate) out.pattern = DaisyPattern(out.r, out.s, out.t);
    for_each_subset_lex(d, j, [&](const std::vector<int>& sel) {
        std::vector<int> m = out.stem;
        for (int i : sel) m.push_back(out.petals[i - 1]);
        std::sort(m.begin(), m.end());
        out.members.push_back(std::move(m));
    });
    return out;
}

}  // namespace daisyforge
