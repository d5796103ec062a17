#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "daisyforge/budget.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/gf.hpp"
#include "daisyforge/rational.hpp"

namespace daisyforge {

enum class ArcNormalization { none, frame };

inline const char* normalization_name(ArcNormalization n) {
    return n == ArcNormalization::frame ? "frame" : "none";
}

// "k vectors in F_q^dim, every j of them independent" instance.
struct ArcProblem {
    int q, dim, j, k;

    ArcProblem(int q_, int dim_, int j_, int k_) : q(q_), dim(dim_), j(j_), k(k_) {
        require(j >= 1 && j <= dim, errc::out_of_range,
                "independence arity must be in [1, dim]");
        require(k >= j, errc::out_of_range, "target size must be at least the arity");
    }
};

struct ArcSearchResult {
    int max_size = 0;
    std::vector<std::vector<int>> witness;  // coordinate rows, search order
    bool exhaustive = false;                // every branch scanned to the end
    ArcNormalization normalization = ArcNormalization::none;
    std::uint64_t nodes = 0;
    // Frame search only: final-slot candidates that pass every check against
    // the frame alone and every check whose frame part avoids e1, yet fail one
    // of the remaining cross checks. These are the configurations the final
    // case analysis has to kill one by one.
    std::vector<std::vector<int>> terminal_candidates;
};

// Every j-subset of the rows is independent.
inline bool arc_property_holds(const FiniteField& field, int j,
                               const std::vector<std::vector<int>>& rows) {
    int m = static_cast<int>(rows.size());
    if (j > m) return true;
    std::vector<int> sel(j);
    for (int i = 0; i < j; ++i) sel[i] = i;
    for (;;) {
        std::vector<FqVector> vs;
        vs.reserve(j);
        for (int i : sel) vs.push_back(FqVector{field, rows[i]});
        if (rank(vs) != j) return false;
        int i = j - 1;
        while (i >= 0 && sel[i] == m - j + i) --i;
        if (i < 0) return true;
        ++sel[i];
        for (int t = i + 1; t < j; ++t) sel[t] = sel[t - 1] + 1;
    }
}

namespace detail {

// Projective representatives of F_q^dim \ {0}, id-ordered by ground index.
struct ProjectivePoints {
    GroundMap gm;
    std::vector<FqVector> vecs;
    std::vector<long> ground;
    std::vector<int> id_by_ground;
    std::vector<int> add_tab;  // flat q*q addition table for the span hot path
    int count = 0;
    int words = 0;

    ProjectivePoints(int q, int dim) : gm(q, dim) {
        id_by_ground.assign(gm.n() + 1, -1);
        for (long x = 1; x <= gm.n(); ++x) {
            FqVector v = gm.vector_at(x);
            if (projective_rep(v) == v) {
                id_by_ground[x] = count++;
                ground.push_back(x);
                vecs.push_back(std::move(v));
            }
        }
        words = (count + 63) / 64;
        add_tab.resize(static_cast<std::size_t>(q) * q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) add_tab[a * q + b] = gm.field().add(a, b);
    }

    int id_of(const FqVector& v) const { return id_by_ground[gm.index_of(projective_rep(v))]; }
};

inline void mask_or(std::vector<std::uint64_t>& a, const std::uint64_t* b, int words) {
    for (int w = 0; w < words; ++w) a[w] |= b[w];
}

// Marks every point of span(vs) in the mask. Hot path of the fallback span
// engine: all scalar multiples of each generator are precomputed once, the
// odometer maintains suffix sums of the combination (digits below the stepped
// one are zero after a roll-over), and only combinations that already are the
// scaled projective representative get indexed, marking each point once.
inline void span_into_mask(const ProjectivePoints& pts, const std::vector<const FqVector*>& vs,
                           std::vector<std::uint64_t>& mask) {
    const FiniteField& F = pts.gm.field();
    int q = F.q();
    int dim = pts.gm.r();
    int m = static_cast<int>(vs.size());
    require(m < 8 && dim < 8 && q <= 8, errc::scale_exceeded, "span enumeration is desk-scale");
    const int* add = pts.add_tab.data();
    int scaled[8][8][8];
    for (int t = 0; t < m; ++t)
        for (int c = 0; c < q; ++c)
            for (int d = 0; d < dim; ++d) scaled[t][c][d] = F.mul(c, vs[t]->coords[d]);
    int coef[8] = {0};
    int suf[9][8] = {};
    for (;;) {
        int i = 0;
        while (i < m && coef[i] == q - 1) { coef[i] = 0; ++i; }
        if (i == m) break;
        ++coef[i];
        for (int t = i; t >= 0; --t) {
            const int* s = scaled[t][coef[t]];
            const int* hi = suf[t + 1];
            for (int d = 0; d < dim; ++d) suf[t][d] = add[s[d] * q + hi[d]];
        }
        const int* w = suf[0];
        int fnz = 0;
        while (fnz < dim && !w[fnz]) ++fnz;
        if (fnz == dim || w[fnz] != 1) continue;
        long idx = 0;
        for (int d = 0; d < dim; ++d) idx = idx * q + w[d];
        int id = pts.id_by_ground[idx];
        mask[id >> 6] |= std::uint64_t(1) << (id & 63);
    }
}

// Projective flats by span dimension, with O(1) "span of flat + point" steps.
// next[k] maps (level-k flat, outside point) -> level-(k+1) flat; masks[k]
// stores each level-k flat's point set. Built for levels 1..top.
struct FlatChain {
    int top = 0;
    int P = 0;
    int words = 0;
    std::vector<std::vector<std::uint64_t>> masks;  // [level], flat-major
    std::vector<std::vector<std::int32_t>> next;    // [level], flat-major
    std::vector<std::int64_t> flats;                // count per level

    const std::uint64_t* mask_of(int level, std::int32_t id) const {
        return masks[level].data() + std::size_t(id) * words;
    }
    std::int32_t step(int level, std::int32_t id, int point) const {
        return next[level][std::size_t(id) * P + point];
    }
};

// Number of k-dimensional subspaces of F_q^dim (Gaussian binomial).
inline BigInt subspace_count(int q, int dim, int k) {
    BigInt num = 1, den = 1;
    for (int i = 0; i < k; ++i) {
        BigInt a = 1, b = 1;
        for (int t = 0; t < dim - i; ++t) a *= q;
        for (int t = 0; t < k - i; ++t) b *= q;
        num *= a - 1;
        den *= b - 1;
    }
    return num / den;
}

// Builds the chain up to level `top` if the tables stay desk-sized.
inline bool build_flat_chain(const ProjectivePoints& pts, int top, FlatChain& out) {
    int q = pts.gm.field().q();
    int dim = pts.gm.r();
    BigInt entries = 0;
    for (int k = 1; k <= top; ++k) {
        BigInt flats = subspace_count(q, dim, k);
        entries += flats * ((k < top ? pts.count : 0) + pts.words);
    }
    if (entries > (BigInt(1) << 24)) return false;

    out.top = top;
    out.P = pts.count;
    out.words = pts.words;
    out.masks.assign(top + 1, {});
    out.next.assign(top + 1, {});
    out.flats.assign(top + 1, 0);

    out.flats[1] = pts.count;
    out.masks[1].assign(std::size_t(pts.count) * pts.words, 0);
    for (int i = 0; i < pts.count; ++i)
        out.masks[1][std::size_t(i) * pts.words + (i >> 6)] |= std::uint64_t(1) << (i & 63);

    for (int k = 1; k < top; ++k) {
        out.next[k].assign(std::size_t(out.flats[k]) * pts.count, -1);
        std::map<std::vector<std::uint64_t>, std::int32_t> seen;
        std::vector<std::vector<std::uint64_t>> built;
        for (std::int32_t f = 0; f < out.flats[k]; ++f) {
            const std::uint64_t* fm = out.mask_of(k, f);
            for (int p = 0; p < pts.count; ++p) {
                if ((fm[p >> 6] >> (p & 63)) & 1) continue;        // inside the flat
                if (out.next[k][std::size_t(f) * pts.count + p] >= 0) continue;
                // A flat plus any one point of a larger flat spans it, so one
                // span computation fills the whole (flat, larger flat) slice.
                std::vector<std::uint64_t> gm_mask(pts.words, 0);
                std::vector<const FqVector*> basis;
                std::vector<FqVector> probe;  // low-index flat points can be dependent
                for (int w = 0; w < pts.words && static_cast<int>(basis.size()) < k; ++w) {
                    std::uint64_t bits = fm[w];
                    while (bits && static_cast<int>(basis.size()) < k) {
                        int pid = (w << 6) + std::countr_zero(bits);
                        bits &= bits - 1;
                        probe.push_back(pts.vecs[pid]);
                        if (rank(probe) == static_cast<int>(probe.size()))
                            basis.push_back(&pts.vecs[pid]);
                        else
                            probe.pop_back();
                    }
                }
                basis.push_back(&pts.vecs[p]);
                span_into_mask(pts, basis, gm_mask);
                auto it = seen.find(gm_mask);
                std::int32_t id;
                if (it != seen.end()) {
                    id = it->second;
                } else {
                    id = static_cast<std::int32_t>(built.size());
                    seen.emplace(gm_mask, id);
                    built.push_back(gm_mask);
                }
                for (int w = 0; w < pts.words; ++w) {
                    std::uint64_t bits = gm_mask[w] & ~fm[w];
                    while (bits) {
                        int pp = (w << 6) + std::countr_zero(bits);
                        bits &= bits - 1;
                        out.next[k][std::size_t(f) * pts.count + pp] = id;
                    }
                }
            }
        }
        out.flats[k + 1] = static_cast<std::int64_t>(built.size());
        out.masks[k + 1].assign(built.size() * pts.words, 0);
        for (std::size_t i = 0; i < built.size(); ++i)
            std::copy(built[i].begin(), built[i].end(),
                      out.masks[k + 1].begin() + i * pts.words);
    }
    return true;
}

// Shared node metering across workers; soft global cap, hard throw.
struct ArcMeter {
    std::atomic<std::uint64_t>* global;
    std::atomic<bool>* abort;
    std::uint64_t cap;
    std::uint64_t local = 0;
    std::uint64_t pending = 0;

    void tick() {
        ++local;
        if (++pending < 64) return;
        flush();
    }
    void flush() {
        if (!pending) return;
        std::uint64_t total = global->fetch_add(pending) + pending;
        pending = 0;
        if (abort->load(std::memory_order_relaxed))
            fail(errc::scale_exceeded, "search aborted");
        if (cap && total > cap) {
            abort->store(true);
            fail(errc::scale_exceeded, "arc search exceeded its node budget");
        }
    }
};

// Maintains span ids of all small subsets of the chosen points through the
// flat chain; gives each child's forbidden mask in O(c^(j-2)) table steps.
struct ChainSpans {
    const FlatChain* chain;
    int j;
    std::vector<std::vector<std::int32_t>> ids;  // [k] colex over chosen slots
    std::vector<std::vector<std::uint32_t>> lens;

    ChainSpans(const FlatChain* c, int j_) : chain(c), j(j_) {
        ids.assign(std::max(0, j - 1), {});
        lens.clear();
    }

    void child_forbidden(int csize, int x, const std::vector<std::uint64_t>& parent,
                         std::vector<std::uint64_t>& out) const {
        int words = chain->words;
        if (j == 1) { out = parent; return; }
        if (csize + 1 <= j - 1) {
            std::int32_t id = (csize == 0)
                                  ? x
                                  : chain->step(csize, ids[csize].back(), x);
            const std::uint64_t* m = chain->mask_of(csize + 1, id);
            out.assign(m, m + words);
            return;
        }
        out = parent;
        if (j == 2) {
            out[x >> 6] |= std::uint64_t(1) << (x & 63);
            return;
        }
        for (std::int32_t s : ids[j - 2])
            mask_or(out, chain->mask_of(j - 1, chain->step(j - 2, s, x)), words);
    }

    void pushed(int x) {
        if (j <= 2) return;
        std::vector<std::uint32_t> saved(j - 1);
        for (int k = 1; k <= j - 2; ++k) saved[k] = static_cast<std::uint32_t>(ids[k].size());
        for (int k = j - 2; k >= 2; --k)
            for (std::uint32_t i = 0; i < saved[k - 1]; ++i)
                ids[k].push_back(chain->step(k - 1, ids[k - 1][i], x));
        ids[1].push_back(x);
        lens.push_back(std::move(saved));
    }

    void popped() {
        if (j <= 2) return;
        for (int k = 1; k <= j - 2; ++k) ids[k].resize(lens.back()[k]);
        lens.pop_back();
    }
};

// Fallback when the chain tables would not fit: spans enumerated directly.
struct DirectSpans {
    const ProjectivePoints* pts;
    int j;

    DirectSpans(const ProjectivePoints* p, int j_) : pts(p), j(j_) {}

    void child_forbidden(const std::vector<int>& chosen, int x,
                         const std::vector<std::uint64_t>& parent,
                         std::vector<std::uint64_t>& out) const {
        int words = pts->words;
        if (j == 1) { out = parent; return; }
        int c = static_cast<int>(chosen.size());
        std::vector<const FqVector*> vs;
        if (c + 1 <= j - 1) {
            out.assign(words, 0);
            for (int id : chosen) vs.push_back(&pts->vecs[id]);
            vs.push_back(&pts->vecs[x]);
            span_into_mask(*pts, vs, out);
            return;
        }
        out = parent;
        int pick = j - 2;
        std::vector<int> sel(pick);
        for (int i = 0; i < pick; ++i) sel[i] = i;
        for (;;) {
            vs.clear();
            for (int i : sel) vs.push_back(&pts->vecs[chosen[i]]);
            vs.push_back(&pts->vecs[x]);
            span_into_mask(*pts, vs, out);
            if (pick == 0) break;
            int i = pick - 1;
            while (i >= 0 && sel[i] == c - pick + i) --i;
            if (i < 0) break;
            ++sel[i];
            for (int t = i + 1; t < pick; ++t) sel[t] = sel[t - 1] + 1;
        }
    }
};

struct ArcRootOutcome {
    int best = 0;
    std::vector<int> witness_ids;
    bool capped = false;
    std::uint64_t nodes = 0;
};

// Full lex DFS below one root point. The forbidden mask at each depth equals
// the union of spans of all (j-1)-subsets (or the partial span while fewer
// than j-1 points are chosen), so every scanned candidate is a valid
// extension and counts as one node.
template <class Spans>
void arc_scan_root(const ProjectivePoints& pts, int j, int cap, int root, Spans& spans,
                   ArcRootOutcome& out, ArcMeter& meter) {
    int words = pts.words;
    std::vector<std::vector<std::uint64_t>> forb(cap + 1,
                                                 std::vector<std::uint64_t>(words, 0));
    std::vector<std::uint64_t> valid(words, 0);
    for (int i = 0; i < pts.count; ++i) valid[i >> 6] |= std::uint64_t(1) << (i & 63);
    std::vector<int> chosen;
    bool stop = false;

    auto record = [&] {
        if (static_cast<int>(chosen.size()) > out.best) {
            out.best = static_cast<int>(chosen.size());
            out.witness_ids = chosen;
            if (out.best == cap) {
                out.capped = true;
                stop = true;
            }
        }
    };
    auto push = [&](int x) {
        meter.tick();
        if constexpr (std::is_same_v<Spans, ChainSpans>) {
            spans.child_forbidden(static_cast<int>(chosen.size()), x,
                                  forb[chosen.size()], forb[chosen.size() + 1]);
            spans.pushed(x);
        } else {
            spans.child_forbidden(chosen, x, forb[chosen.size()], forb[chosen.size() + 1]);
        }
        chosen.push_back(x);
        record();
    };
    auto pop = [&] {
        chosen.pop_back();
        if constexpr (std::is_same_v<Spans, ChainSpans>) spans.popped();
    };

    push(root);
    auto rec = [&](auto&& self) -> void {
        if (stop) return;
        int depth = static_cast<int>(chosen.size());
        if (depth == cap) return;
        const auto& F = forb[depth];
        int lo = chosen.back() + 1;
        for (int w = lo >> 6; w < words; ++w) {
            std::uint64_t bits = ~F[w] & valid[w];
            if (w == (lo >> 6)) bits &= ~std::uint64_t(0) << (lo & 63);
            while (bits) {
                int x = (w << 6) + std::countr_zero(bits);
                bits &= bits - 1;
                push(x);
                self(self);
                pop();
                if (stop) return;
            }
        }
    };
    rec(rec);
    pop();
    out.nodes = meter.local;
}

// Runs fn(root) for every root on a stride-partitioned worker pool and
// rethrows the first worker error after joining.
template <class Fn>
void for_each_root_parallel(int nroots, int threads, std::uint64_t node_cap, Fn&& fn) {
    int nworkers = std::max(1, std::min(threads, nroots == 0 ? 1 : nroots));
    std::atomic<std::uint64_t> global{0};
    std::atomic<bool> abort{false};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto work = [&](int w) {
        ArcMeter meter{&global, &abort, node_cap, 0, 0};
        try {
            for (int r = w; r < nroots; r += nworkers) {
                meter.local = 0;
                fn(r, meter);
                meter.flush();
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!first_error) first_error = std::current_exception();
            abort.store(true);
        }
    };
    if (nworkers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nworkers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

constexpr std::uint64_t arc_default_node_cap = std::uint64_t(1) << 31;

}  // namespace detail

// Largest configuration of <= cap projective points with every j-subset
// independent, by exhaustive lex backtracking over representatives. Order and
// scalar invariance of the property make this reduction lossless, so when no
// branch stopped at the cap the result is the true maximum (exhaustive flag).
inline ArcSearchResult max_arc(int q, int dim, int j, int cap, int threads = 1,
                               const Budget& budget = Budget()) {
    FiniteField field(q);  // rejects non prime powers
    require(q <= 7 && dim <= 5, errc::scale_exceeded,
            "arc searches are desk-scale (q <= 7, dim <= 5)");
    [[maybe_unused]] ArcProblem prob(q, dim, j, cap);  // range validation
    detail::ProjectivePoints pts(q, dim);

    detail::FlatChain chain;
    bool chained = (j >= 2) && detail::build_flat_chain(pts, j - 1, chain);

    std::vector<detail::ArcRootOutcome> roots(pts.count);
    std::uint64_t node_cap = budget.nodes ? budget.nodes : detail::arc_default_node_cap;
    detail::for_each_root_parallel(pts.count, threads, node_cap,
                                   [&](int r, detail::ArcMeter& meter) {
        if (chained) {
            detail::ChainSpans spans(&chain, j);
            detail::arc_scan_root(pts, j, cap, r, spans, roots[r], meter);
        } else {
            detail::DirectSpans spans(&pts, j);
            detail::arc_scan_root(pts, j, cap, r, spans, roots[r], meter);
        }
    });

    ArcSearchResult res;
    res.normalization = ArcNormalization::none;
    int best_root = -1;
    bool any_capped = false;
    for (int r = 0; r < pts.count; ++r) {
        res.nodes += roots[r].nodes;
        any_capped = any_capped || roots[r].capped;
        if (roots[r].best > res.max_size) {
            res.max_size = roots[r].best;
            best_root = r;
        }
    }
    res.exhaustive = !any_capped;
    if (best_root >= 0)
        for (int id : roots[best_root].witness_ids)
            res.witness.push_back(pts.vecs[id].coords);
    require(arc_property_holds(field, j, res.witness), errc::bound_too_loose,
            "arc witness failed re-verification");
    return res;
}

namespace detail {

// Ground index of the projectively normalized coordinate permutation minimum.
inline long orbit_min_index(const ProjectivePoints& pts, const FqVector& v) {
    const FiniteField& F = pts.gm.field();
    int dim = v.dim();
    std::vector<int> perm(dim);
    for (int i = 0; i < dim; ++i) perm[i] = i;
    long best = -1;
    do {
        std::vector<int> w(dim);
        for (int i = 0; i < dim; ++i) w[i] = v.coords[perm[i]];
        FqVector rep = projective_rep(FqVector{F, std::move(w)});
        long idx = pts.gm.index_of(rep);
        if (best < 0 || idx < best) best = idx;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

enum class CheckTier { frame_only, frame_off_e1, cross };

// Search for `target` vectors with every dim-subset independent, normalized
// so the first dim+1 are the standard basis plus the all-ones vector. Valid
// because the general linear group is sharply transitive on such frames
// (normalize_to_frame realizes the map for concrete configurations), and
// because the smallest free vector may further be taken minimal under
// coordinate permutations, which stabilize the frame.
inline ArcSearchResult frame_engine(int q, int dim, int target, int threads,
                                    const Budget& budget) {
    FiniteField field(q);
    require(q <= 7 && dim <= 5, errc::scale_exceeded,
            "frame searches are desk-scale (q <= 7, dim <= 5)");
    require(target >= dim + 2, errc::out_of_range, "target must exceed the frame");
    ProjectivePoints pts(q, dim);

    std::vector<int> frame_ids;
    for (int i = 0; i < dim; ++i) {
        std::vector<int> e(dim, 0);
        e[i] = 1;
        frame_ids.push_back(pts.id_of(FqVector{field, e}));
    }
    int all_ones = pts.id_of(FqVector{field, std::vector<int>(dim, 1)});
    frame_ids.push_back(all_ones);

    std::vector<std::vector<int>> frame_rows;
    for (int id : frame_ids) frame_rows.push_back(pts.vecs[id].coords);
    require(arc_property_holds(field, dim, frame_rows), errc::bound_too_loose,
            "frame is not in general position");

    std::vector<bool> in_frame(pts.count, false);
    std::vector<bool> is_e1_or_ones(pts.count, false);
    for (int id : frame_ids) in_frame[id] = true;
    is_e1_or_ones[frame_ids[0]] = true;  // e1
    is_e1_or_ones[all_ones] = true;

    int free_slots = target - (dim + 1);
    std::uint64_t node_cap = budget.nodes ? budget.nodes : arc_default_node_cap;

    // Candidate x against the current list: every (dim-1)-subset plus x must
    // have full rank. Tier of a subset: frame_only if it lies in the frame,
    // frame_off_e1 if its frame part avoids both e1 and the all-ones vector,
    // cross otherwise.
    auto classify = [&](const std::vector<int>& S) {
        bool all_frame = true, off_e1 = true;
        for (int id : S) {
            if (!in_frame[id]) all_frame = false;
            else if (is_e1_or_ones[id]) off_e1 = false;
        }
        if (all_frame) return CheckTier::frame_only;
        return off_e1 ? CheckTier::frame_off_e1 : CheckTier::cross;
    };
    // Sets per-tier pass flags; without tier classification any failure is
    // reported through t1_ok alone.
    auto candidate_check = [&](const std::vector<int>& cur, int x, bool classify_tiers,
                               bool& t1_ok, bool& t2_ok, bool& t3_ok) {
        t1_ok = t2_ok = t3_ok = true;
        int m = static_cast<int>(cur.size());
        int pick = dim - 1;
        std::vector<int> sel(pick);
        for (int i = 0; i < pick; ++i) sel[i] = i;
        for (;;) {
            std::vector<FqVector> vs;
            std::vector<int> S;
            for (int i : sel) {
                S.push_back(cur[i]);
                vs.push_back(pts.vecs[cur[i]]);
            }
            vs.push_back(pts.vecs[x]);
            if (rank(vs) != dim) {
                if (!classify_tiers) { t1_ok = false; return; }
                switch (classify(S)) {
                    case CheckTier::frame_only: t1_ok = false; return;
                    case CheckTier::frame_off_e1: t2_ok = false; return;
                    case CheckTier::cross: t3_ok = false; break;
                }
            }
            int i = pick - 1;
            while (i >= 0 && sel[i] == m - pick + i) --i;
            if (i < 0) return;
            ++sel[i];
            for (int t = i + 1; t < pick; ++t) sel[t] = sel[t - 1] + 1;
        }
    };

    // Admissible first-slot candidates: valid extensions minimal within their
    // coordinate permutation orbit. With a single free slot this already is
    // the final slot, so tier classification happens here.
    std::uint64_t prescan_nodes = 0;
    std::vector<int> first_slot;
    std::vector<std::vector<int>> first_slot_terminals;
    bool lone_slot = (free_slots == 1);
    {
        std::atomic<std::uint64_t> global{0};
        std::atomic<bool> abort{false};
        ArcMeter meter{&global, &abort, node_cap, 0, 0};
        for (int x = 0; x < pts.count; ++x) {
            meter.tick();
            if (orbit_min_index(pts, pts.vecs[x]) != pts.ground[x]) continue;
            bool t1, t2, t3;
            candidate_check(frame_ids, x, lone_slot, t1, t2, t3);
            if (lone_slot && t1 && t2 && !t3) first_slot_terminals.push_back(pts.vecs[x].coords);
            if (t1 && t2 && t3) first_slot.push_back(x);
        }
        prescan_nodes = meter.local;
    }

    struct FrameRoot {
        int best_extra = 0;
        std::vector<int> frees;
        bool reached = false;
        std::uint64_t nodes = 0;
        std::vector<std::vector<int>> terminals;
    };
    std::vector<FrameRoot> roots(first_slot.size());

    for_each_root_parallel(static_cast<int>(first_slot.size()), threads, node_cap,
                           [&](int ri, ArcMeter& meter) {
        FrameRoot& out = roots[ri];
        std::vector<int> cur = frame_ids;
        cur.push_back(first_slot[ri]);
        std::vector<int> frees{first_slot[ri]};
        out.best_extra = 1;
        out.frees = frees;
        bool stop = false;

        auto rec = [&](auto&& self) -> void {
            if (stop) return;
            int depth = static_cast<int>(frees.size());
            if (depth == free_slots) {
                out.reached = true;
                out.frees = frees;
                out.best_extra = depth;
                stop = true;
                return;
            }
            bool last = (depth == free_slots - 1);
            for (int x = frees.back() + 1; x < pts.count; ++x) {
                meter.tick();
                bool t1, t2, t3;
                candidate_check(cur, x, last, t1, t2, t3);
                if (last && t1 && t2 && !t3) out.terminals.push_back(pts.vecs[x].coords);
                if (!(t1 && t2 && t3)) continue;
                cur.push_back(x);
                frees.push_back(x);
                if (depth + 1 > out.best_extra) {
                    out.best_extra = depth + 1;
                    out.frees = frees;
                }
                self(self);
                cur.pop_back();
                frees.pop_back();
                if (stop) return;
            }
        };
        rec(rec);
        out.nodes = meter.local;
    });

    ArcSearchResult res;
    res.normalization = ArcNormalization::frame;
    res.nodes = prescan_nodes;
    res.max_size = dim + 1;
    res.witness = frame_rows;
    res.terminal_candidates = std::move(first_slot_terminals);
    int best_root = -1;
    bool reached = false;
    for (std::size_t r = 0; r < roots.size(); ++r) {
        res.nodes += roots[r].nodes;
        reached = reached || roots[r].reached;
        for (auto& t : roots[r].terminals) res.terminal_candidates.push_back(std::move(t));
        if (dim + 1 + roots[r].best_extra > res.max_size) {
            res.max_size = dim + 1 + roots[r].best_extra;
            best_root = static_cast<int>(r);
        }
    }
    if (best_root >= 0) {
        res.witness = frame_rows;
        for (int id : roots[best_root].frees) res.witness.push_back(pts.vecs[id].coords);
    }
    res.exhaustive = !reached;
    require(arc_property_holds(field, dim, res.witness), errc::bound_too_loose,
            "frame witness failed re-verification");
    return res;
}

}  // namespace detail

// Does a 7-vector configuration with every dim-subset independent exist?
// Searches only frame-normalized configurations; must agree with max_arc.
inline ArcSearchResult frame_search(int q, int dim, int threads = 1,
                                    const Budget& budget = Budget()) {
    return detail::frame_engine(q, dim, 7, threads, budget);
}

// Change of basis sending rows[0..dim-1] to the standard basis and rows[dim]
// to the all-ones vector, applied projectively to every row. Realizes the
// frame normalization on a concrete configuration.
inline std::vector<std::vector<int>> normalize_to_frame(
    const FiniteField& field, const std::vector<std::vector<int>>& rows) {
    require(!rows.empty(), errc::out_of_range, "empty configuration");
    int dim = static_cast<int>(rows[0].size());
    require(static_cast<int>(rows.size()) >= dim + 1, errc::out_of_range,
            "need dim+1 rows to pin a frame");

    // Solve v_{dim+1} = sum c_i v_i by Gaussian elimination on the transpose.
    std::vector<std::vector<int>> aug(dim, std::vector<int>(dim + 1, 0));
    for (int col = 0; col < dim; ++col)
        for (int row = 0; row < dim; ++row) aug[row][col] = rows[col][row];
    for (int row = 0; row < dim; ++row) aug[row][dim] = rows[dim][row];
    for (int col = 0; col < dim; ++col) {
        int piv = -1;
        for (int row = col; row < dim; ++row)
            if (aug[row][col]) { piv = row; break; }
        require(piv >= 0, errc::out_of_range, "first dim rows are dependent");
        std::swap(aug[col], aug[piv]);
        int inv = field.inv(aug[col][col]);
        for (int t = col; t <= dim; ++t) aug[col][t] = field.mul(inv, aug[col][t]);
        for (int row = 0; row < dim; ++row) {
            if (row == col || !aug[row][col]) continue;
            int f = aug[row][col];
            for (int t = col; t <= dim; ++t)
                aug[row][t] = field.sub(aug[row][t], field.mul(f, aug[col][t]));
        }
    }
    std::vector<int> c(dim);
    for (int i = 0; i < dim; ++i) {
        c[i] = aug[i][dim];
        require(c[i] != 0, errc::out_of_range,
                "row dim+1 is not in general position with the first dim rows");
    }

    // New basis b_i = c_i * v_i; transform x -> coordinates of x in (b_i).
    std::vector<std::vector<int>> B(dim, std::vector<int>(dim));
    for (int i = 0; i < dim; ++i)
        for (int t = 0; t < dim; ++t) B[i][t] = field.mul(c[i], rows[i][t]);
    // Invert B by Gauss-Jordan.
    std::vector<std::vector<int>> inv(dim, std::vector<int>(dim, 0));
    for (int i = 0; i < dim; ++i) inv[i][i] = 1;
    for (int col = 0; col < dim; ++col) {
        int piv = -1;
        for (int row = col; row < dim; ++row)
            if (B[row][col]) { piv = row; break; }
        require(piv >= 0, errc::out_of_range, "degenerate basis");
        std::swap(B[col], B[piv]);
        std::swap(inv[col], inv[piv]);
        int s = field.inv(B[col][col]);
        for (int t = 0; t < dim; ++t) {
            B[col][t] = field.mul(s, B[col][t]);
            inv[col][t] = field.mul(s, inv[col][t]);
        }
        for (int row = 0; row < dim; ++row) {
            if (row == col || !B[row][col]) continue;
            int f = B[row][col];
            for (int t = 0; t < dim; ++t) {
                B[row][t] = field.sub(B[row][t], field.mul(f, B[col][t]));
                inv[row][t] = field.sub(inv[row][t], field.mul(f, inv[col][t]));
            }
        }
    }

    std::vector<std::vector<int>> out;
    for (const auto& row : rows) {
        std::vector<int> y(dim, 0);
        for (int t = 0; t < dim; ++t)
            for (int k = 0; k < dim; ++k) y[t] = field.add(y[t], field.mul(row[k], inv[k][t]));
        out.push_back(projective_rep(FqVector{field, std::move(y)}).coords);
    }
    return out;
}

// True iff no q+2 pairwise independent vectors exist in F_q^2: the projective
// line has exactly q+1 points, recounted and cross-checked here.
inline bool q_plus_two_pairwise(int q) {
    FiniteField field(q);  // rejects non prime powers
    require(q <= 16, errc::scale_exceeded, "pairwise check is desk-scale (q <= 16)");
    GroundMap gm(q, 2);
    std::vector<FqVector> reps;
    for (long x = 1; x <= gm.n(); ++x) {
        FqVector v = gm.vector_at(x);
        if (projective_rep(v) == v) reps.push_back(v);
    }
    bool ok = static_cast<int>(reps.size()) == q + 1;
    for (std::size_t a = 0; a < reps.size() && ok; ++a)
        for (std::size_t b = a + 1; b < reps.size() && ok; ++b)
            ok = rank(std::vector<FqVector>{reps[a], reps[b]}) == 2;
    // q+2 vectors land on at most q+1 lines through the origin, so two of
    // them are dependent.
    return ok;
}

// True iff no q+2 vectors in F_q^q have every q-subset independent; runs the
// frame-normalized search and the raw backtracking, which must agree.
inline bool q_plus_two_any_q(int q, const Budget& budget = Budget()) {
    FiniteField field(q);
    require(q <= 4, errc::scale_exceeded, "full q+2 search is desk-scale (q <= 4)");
    ArcSearchResult framed = detail::frame_engine(q, q, q + 2, 1, budget);
    ArcSearchResult raw = max_arc(q, q, q, q + 2, 1, budget);
    bool frame_says_none = framed.max_size < q + 2;
    bool raw_says_none = raw.max_size < q + 2;
    require(frame_says_none == raw_says_none, errc::bound_too_loose,
            "frame search disagrees with raw backtracking");
    return raw_says_none;
}

}  // namespace daisyforge
