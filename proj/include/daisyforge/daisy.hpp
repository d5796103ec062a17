#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "daisyforge/budget.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/families.hpp"

namespace daisyforge {

// Pattern D_r(s,t): a stem of r-s ground elements plus a disjoint petal set
// of t elements; the member set is { stem + X : X an s-subset of petals }.
struct DaisyPattern {
    int r, s, t;

    DaisyPattern(int r_, int s_, int t_) : r(r_), s(s_), t(t_) {
        require(s >= 1 && t >= s && r >= s, errc::out_of_range,
                "pattern needs r >= s >= 1 and t >= s");
    }

    int stem_size() const { return r - s; }
    BigInt member_count() const { return binomial(t, s); }
};

struct DaisyWitness {
    std::vector<int> stem;
    std::vector<int> petals;
};

enum class SearchMode { deterministic, fast };

inline const char* mode_name(SearchMode m) {
    return m == SearchMode::deterministic ? "deterministic" : "fast";
}

struct DaisySearchResult {
    std::optional<DaisyWitness> witness;
    std::uint64_t nodes = 0;
    SearchMode mode = SearchMode::deterministic;
};

// True iff stem+petals describe a daisy of shape pat fully inside f.
inline bool verify_daisy_witness(const SetFamily& f, DaisyPattern pat, const DaisyWitness& w) {
    if (pat.r != f.r()) return false;
    if (static_cast<int>(w.stem.size()) != pat.stem_size()) return false;
    if (static_cast<int>(w.petals.size()) != pat.t) return false;
    std::vector<int> all = w.stem;
    all.insert(all.end(), w.petals.begin(), w.petals.end());
    std::sort(all.begin(), all.end());
    for (int x : all)
        if (x < 1 || x > f.n()) return false;
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) return false;
    bool ok = true;
    std::vector<int> member;
    for_each_subset_lex(pat.t, pat.s, [&](const std::vector<int>& idx) {
        member = w.stem;
        for (int i : idx) member.push_back(w.petals[i - 1]);
        std::sort(member.begin(), member.end());
        if (!f.contains(member)) ok = false;
    });
    return ok;
}

namespace detail {

// Petal search below one fixed stem. Deterministic callers rely on the DFS
// visiting candidate sets in lex order, so the first completion is the least
// valid petal set; all pruning below is sound (discards only subtrees without
// a t-set), which preserves that property.
class PetalSearch {
public:
    PetalSearch(const SetFamily& f, DaisyPattern pat, const std::vector<int>& stem, NodeCounter& nc)
        : f_(f), pat_(pat), stem_(stem), nc_(nc) {
        for (int x = 1; x <= f.n(); ++x)
            if (!std::binary_search(stem_.begin(), stem_.end(), x)) cand_.push_back(x);
    }

    std::optional<std::vector<int>> run() {
        if (static_cast<int>(cand_.size()) < pat_.t) return std::nullopt;
        if (pat_.s == 2) return run_clique();
        chosen_.clear();
        if (dfs(0)) return chosen_;
        return std::nullopt;
    }

private:
    const SetFamily& f_;
    DaisyPattern pat_;
    const std::vector<int>& stem_;
    NodeCounter& nc_;
    std::vector<int> cand_;
    std::vector<int> chosen_;
    std::vector<int> scratch_;

    bool member_with_stem(const std::vector<int>& petals_part) {
        scratch_.clear();
        scratch_.resize(stem_.size() + petals_part.size());
        std::merge(stem_.begin(), stem_.end(), petals_part.begin(), petals_part.end(),
                   scratch_.begin());
        return f_.contains(scratch_);
    }

    // Adding x closes exactly the s-subsets whose largest petal is x: pick
    // s-1 earlier petals. Every member set is therefore checked exactly once
    // over the life of a branch.
    bool feasible_add(int x) {
        int k = pat_.s - 1;
        if (static_cast<int>(chosen_.size()) < k) return true;
        std::vector<int> part(pat_.s);
        part[k] = x;
        bool ok = true;
        auto rec = [&](auto&& self, int got, size_t lo) -> void {
            if (!ok) return;
            if (got == k) {
                std::sort(part.begin(), part.end());
                if (!member_with_stem(part)) ok = false;
                std::sort(part.begin(), part.end() - 1);
                part[k] = x;
                return;
            }
            for (size_t i = lo; i < chosen_.size(); ++i) {
                part[got] = chosen_[i];
                self(self, got + 1, i + 1);
            }
        };
        if (k == 0) {
            part[0] = x;
            return member_with_stem(part);
        }
        rec(rec, 0, 0);
        return ok;
    }

    bool dfs(size_t pos) {
        nc_.tick();
        if (static_cast<int>(chosen_.size()) == pat_.t) return true;
        size_t need = static_cast<size_t>(pat_.t) - chosen_.size();
        for (size_t i = pos; i + need <= cand_.size(); ++i) {
            if (!feasible_add(cand_[i])) continue;
            chosen_.push_back(cand_[i]);
            if (dfs(i + 1)) return true;
            chosen_.pop_back();
        }
        return false;
    }

    // s == 2: petal sets are cliques of the compatibility graph. A greedy
    // colouring bounds the largest clique in a candidate set; for basis-type
    // links the graph is complete multipartite, so the bound is exact and
    // cuts the search at the root.
    std::optional<std::vector<int>> run_clique() {
        size_t m = cand_.size();
        words_ = (m + 63) / 64;
        adj_.assign(m * words_, 0);
        std::vector<int> pair(2);
        for (size_t i = 0; i < m; ++i)
            for (size_t j = i + 1; j < m; ++j) {
                pair[0] = cand_[i];
                pair[1] = cand_[j];
                if (member_with_stem(pair)) {
                    adj_[i * words_ + (j >> 6)] |= std::uint64_t(1) << (j & 63);
                    adj_[j * words_ + (i >> 6)] |= std::uint64_t(1) << (i & 63);
                }
            }
        std::vector<std::uint64_t> all(words_, 0);
        for (size_t i = 0; i < m; ++i) all[i >> 6] |= std::uint64_t(1) << (i & 63);
        chosen_.clear();
        if (clique_dfs(all)) return chosen_;
        return std::nullopt;
    }

    size_t words_ = 0;
    std::vector<std::uint64_t> adj_;

    static int popcount(const std::vector<std::uint64_t>& mask) {
        int c = 0;
        for (std::uint64_t w : mask) c += std::popcount(w);
        return c;
    }

    int colour_bound(const std::vector<std::uint64_t>& mask) const {
        std::vector<std::vector<std::uint64_t>> colours;
        for (size_t wi = 0; wi < words_; ++wi) {
            std::uint64_t w = mask[wi];
            while (w) {
                size_t v = (wi << 6) + std::countr_zero(w);
                w &= w - 1;
                bool placed = false;
                for (auto& col : colours) {
                    bool clash = false;
                    for (size_t k = 0; k < words_; ++k)
                        if (col[k] & adj_[v * words_ + k]) { clash = true; break; }
                    if (!clash) {
                        col[v >> 6] |= std::uint64_t(1) << (v & 63);
                        placed = true;
                        break;
                    }
                }
                if (!placed) {
                    colours.emplace_back(words_, 0);
                    colours.back()[v >> 6] |= std::uint64_t(1) << (v & 63);
                }
            }
        }
        return static_cast<int>(colours.size());
    }

    bool clique_dfs(const std::vector<std::uint64_t>& cand) {
        nc_.tick();
        int have = static_cast<int>(chosen_.size());
        if (have == pat_.t) return true;
        if (have + popcount(cand) < pat_.t) return false;
        if (have + colour_bound(cand) < pat_.t) return false;
        for (size_t wi = 0; wi < words_; ++wi) {
            std::uint64_t w = cand[wi];
            while (w) {
                size_t v = (wi << 6) + std::countr_zero(w);
                w &= w - 1;
                std::vector<std::uint64_t> next(words_);
                for (size_t k = 0; k < words_; ++k)
                    next[k] = cand[k] & adj_[v * words_ + k];
                // restrict to indices above v to keep lex order
                for (size_t k = 0; k < words_; ++k) {
                    if (k < (v >> 6)) next[k] = 0;
                    else if (k == (v >> 6))
                        next[k] &= ~((std::uint64_t(2) << (v & 63)) - 1);
                }
                chosen_.push_back(cand_[v]);
                if (clique_dfs(next)) return true;
                chosen_.pop_back();
            }
        }
        return false;
    }
};

template <class Fn>
void for_each_stem(int n, int size, SearchMode mode, Fn&& fn) {
    if (mode == SearchMode::deterministic)
        for_each_subset_lex(n, size, fn);
    else
        for_each_subset(n, size, fn);
}

inline std::optional<DaisyWitness> scan_stem_block(const SetFamily& fam, DaisyPattern pat,
                                                   const std::vector<std::vector<int>>& block,
                                                   SearchMode mode, int threads,
                                                   const Budget& budget, std::uint64_t& nodes_acc);

}  // namespace detail

// Searches f for a daisy of shape pat. Deterministic mode scans stems in lex
// order and reports the least stem with its least petal set; fast mode scans
// stems in colex order and may return any witness. Worker counts never change
// the deterministic answer: blocks of stems are merged by taking the earliest
// hit in enumeration order.
inline DaisySearchResult contains_daisy(const SetFamily& f, DaisyPattern pat,
                                        SearchMode mode = SearchMode::deterministic,
                                        int threads = 1, const Budget& budget = Budget()) {
    require(pat.r == f.r(), errc::pattern_mismatch,
            "pattern arity does not match the family layer");
    DaisySearchResult res;
    res.mode = mode;
    int stem_size = pat.stem_size();
    if (stem_size > f.n() || pat.t > f.n() - stem_size) return res;

    std::optional<SetFamily> local;
    const SetFamily* fam = &f;
    if (!f.finalized() && f.r() > 0) {
        local = f;
        local->finalize(budget);
        fam = &*local;
    }

    // Block pipeline: materialize a block of stems, scan it with the workers,
    // merge by earliest index, then move on. In deterministic mode every stem
    // of every inspected block is searched to completion, so node totals and
    // the winning witness do not depend on the worker count.
    std::vector<std::vector<int>> block;
    const size_t block_size = 1024;
    std::optional<DaisyWitness> winner;
    bool stop = false;
    detail::for_each_stem(f.n(), stem_size, mode, [&](const std::vector<int>& stem) {
        if (stop) return;
        block.push_back(stem);
        if (block.size() < block_size) return;
        winner = detail::scan_stem_block(*fam, pat, block, mode, threads, budget, res.nodes);
        block.clear();
        if (winner) stop = true;
    });
    if (!winner && !block.empty())
        winner = detail::scan_stem_block(*fam, pat, block, mode, threads, budget, res.nodes);
    res.witness = std::move(winner);
    return res;
}

namespace detail {

inline std::optional<DaisyWitness> scan_stem_block(const SetFamily& fam, DaisyPattern pat,
                                                   const std::vector<std::vector<int>>& block,
                                                   SearchMode mode, int threads,
                                                   const Budget& budget, std::uint64_t& nodes_acc) {
    size_t m = block.size();
    std::vector<std::optional<std::vector<int>>> petals(m);
    std::atomic<size_t> earliest{m};
    std::atomic<std::uint64_t> nodes{0};
    std::atomic<bool> overran{false};
    std::exception_ptr stored = nullptr;
    std::mutex stored_mutex;
    size_t nworkers = std::min<size_t>(std::max(threads, 1), m);

    auto work = [&](size_t w) {
        NodeCounter nc{0, budget.nodes};
        for (size_t i = w; i < m; i += nworkers) {
            if (mode == SearchMode::fast && earliest.load() < m) break;
            try {
                PetalSearch ps(fam, pat, block[i], nc);
                if (auto p = ps.run()) {
                    petals[i] = std::move(p);
                    size_t cur = earliest.load();
                    while (i < cur && !earliest.compare_exchange_weak(cur, i)) {}
                }
            } catch (const error& e) {
                if (e.code() == errc::budget_exceeded) {
                    overran = true;
                } else {
                    std::lock_guard<std::mutex> lk(stored_mutex);
                    if (!stored) stored = std::current_exception();
                }
                break;
            } catch (...) {
                std::lock_guard<std::mutex> lk(stored_mutex);
                if (!stored) stored = std::current_exception();
                break;
            }
        }
        nodes += nc.nodes;
    };

    if (nworkers == 1) {
        work(0);
    } else {
        std::vector<std::thread> workers;
        for (size_t w = 0; w < nworkers; ++w) workers.emplace_back(work, w);
        for (auto& t : workers) t.join();
    }
    nodes_acc += nodes.load();
    if (stored) std::rethrow_exception(stored);
    if (overran) fail(errc::budget_exceeded, "search node budget exhausted");
    size_t win = earliest.load();
    if (win == m) return std::nullopt;
    return DaisyWitness{block[win], *petals[win]};
}

}  // namespace detail

// True iff f and the single extra member together contain a daisy of shape
// pat that uses the extra member. Callers keep f daisy-free, so this is the
// full incremental freeness check for one insertion.
inline bool daisy_through_member(const SetFamily& f, DaisyPattern pat,
                                 const std::vector<int>& member) {
    require(pat.r == f.r(), errc::pattern_mismatch,
            "pattern arity does not match the family layer");
    require(static_cast<int>(member.size()) == pat.r, errc::out_of_range,
            "member has wrong cardinality");
    int n = f.n();
    // Stem = member minus an s-subset X0; petal set must extend X0.
    bool found = false;
    for_each_subset_lex(pat.r, pat.s, [&](const std::vector<int>& idx) {
        if (found) return;
        std::vector<int> x0, stem;
        for (int i = 1, k = 0; i <= pat.r; ++i) {
            if (k < pat.s && idx[k] == i) { x0.push_back(member[i - 1]); ++k; }
            else stem.push_back(member[i - 1]);
        }
        std::vector<int> ext_cand;
        for (int x = 1; x <= n; ++x)
            if (!std::binary_search(member.begin(), member.end(), x)) ext_cand.push_back(x);
        std::vector<int> petals = x0;  // grows with extensions, re-sorted per check
        std::vector<int> scratch;
        auto member_ok = [&](const std::vector<int>& part) {
            scratch.resize(stem.size() + part.size());
            std::vector<int> sp = part;
            std::sort(sp.begin(), sp.end());
            std::merge(stem.begin(), stem.end(), sp.begin(), sp.end(), scratch.begin());
            return scratch == member || f.contains(scratch);
        };
        auto rec = [&](auto&& self, size_t lo, int need) -> bool {
            if (need == 0) {
                // all s-subsets of the final petal set must be members
                bool ok = true;
                std::vector<int> sorted = petals;
                std::sort(sorted.begin(), sorted.end());
                for_each_subset_lex(pat.t, pat.s, [&](const std::vector<int>& sel) {
                    if (!ok) return;
                    std::vector<int> part;
                    for (int i : sel) part.push_back(sorted[i - 1]);
                    if (!member_ok(part)) ok = false;
                });
                return ok;
            }
            for (size_t i = lo; i < ext_cand.size(); ++i) {
                petals.push_back(ext_cand[i]);
                if (self(self, i + 1, need - 1)) return true;
                petals.pop_back();
            }
            return false;
        };
        if (rec(rec, 0, pat.t - pat.s)) found = true;
    });
    return found;
}

// Closure of the two reduction moves petal-shrink (s,t) -> (s,t-1) and
// stem-absorb (s,t) -> (s-1,t-1): inner is reachable iff the stem can absorb
// the surplus s - s' petals and still leave t' of them. Containments outside
// this closure (e.g. the degenerate t' = s' single-member pattern sits inside
// any nonempty family) are deliberately not claimed.
inline bool daisy_contains(DaisyPattern outer, DaisyPattern inner) {
    require(outer.r == inner.r, errc::pattern_mismatch, "patterns live at different arities");
    return inner.s <= outer.s && inner.t <= outer.t &&
           (outer.s - inner.s) <= (outer.t - inner.t);
}

// Member family of the canonical daisy of shape pat on the ground set
// [stem_size + t]: stem = the first elements, petals = the rest. Any family
// containing an outer daisy contains a relabelled copy of this one.
inline SetFamily canonical_daisy_members(DaisyPattern pat) {
    int n = pat.stem_size() + pat.t;
    SetFamily f(n, pat.r);
    std::vector<int> stem;
    for (int i = 1; i <= pat.stem_size(); ++i) stem.push_back(i);
    for_each_subset_lex(pat.t, pat.s, [&](const std::vector<int>& sel) {
        std::vector<int> m = stem;
        for (int i : sel) m.push_back(pat.stem_size() + i);
        f.insert(m);
    });
    f.finalize();
    return f;
}

// Witness for a copy of layers i, i-1 of a 6-cube inside a layered family:
// base Y at level r - i, six free directions X; every (Y + i-subset of X) is
// in the upper layer and every (Y + (i-1)-subset of X) in the lower layer.
struct Q6LayerWitness {
    std::vector<int> base;
    std::vector<int> frees;
};

struct Q6SearchResult {
    std::optional<Q6LayerWitness> witness;
    std::uint64_t nodes = 0;
};

inline bool verify_q6_witness(const LayeredFamily& lf, int i, const Q6LayerWitness& w) {
    if (static_cast<int>(w.base.size()) != lf.r() - i) return false;
    if (w.frees.size() != 6) return false;
    std::vector<int> all = w.base;
    all.insert(all.end(), w.frees.begin(), w.frees.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) return false;
    for (int x : all)
        if (x < 1 || x > lf.n()) return false;
    bool ok = true;
    auto check_layer = [&](const SetFamily& layer, int k) {
        std::vector<int> member;
        for_each_subset_lex(6, k, [&](const std::vector<int>& sel) {
            if (!ok) return;
            member = w.base;
            for (int j : sel) member.push_back(w.frees[j - 1]);
            std::sort(member.begin(), member.end());
            if (!layer.contains(member)) ok = false;
        });
    };
    check_layer(lf.upper, i);
    if (ok) check_layer(lf.lower, i - 1);
    return ok;
}

// Exhaustive search for such a copy. Bases are scanned in lex order and free
// sets extended in lex order, so the first witness found is the least one.
inline Q6SearchResult find_consecutive_q6(const LayeredFamily& lf, int i,
                                          const Budget& budget = Budget()) {
    require(i >= 2 && i <= 5, errc::bad_layer_index, "cube layer index must be in [2, 5]");
    Q6SearchResult res;
    int base_size = lf.r() - i;
    if (base_size < 0 || lf.n() < base_size + 6) return res;

    NodeCounter nc{0, budget.nodes};
    std::optional<Q6LayerWitness> hit;
    std::vector<int> frees, scratch;

    auto member_ok = [&](const SetFamily& layer, const std::vector<int>& base,
                         const std::vector<int>& part) {
        scratch.resize(base.size() + part.size());
        std::merge(base.begin(), base.end(), part.begin(), part.end(), scratch.begin());
        return layer.contains(scratch);
    };

    // Adding x closes the i-subsets (upper) and (i-1)-subsets (lower) whose
    // largest free element is x.
    auto feasible_add = [&](const std::vector<int>& base, int x) {
        for (int k : {i - 1, i - 2}) {
            const SetFamily& layer = (k == i - 1) ? lf.upper : lf.lower;
            if (k > static_cast<int>(frees.size())) continue;
            if (k < 0) continue;
            bool ok = true;
            std::vector<int> part;
            auto rec = [&](auto&& self, size_t lo, int need) -> void {
                if (!ok) return;
                if (need == 0) {
                    part.push_back(x);
                    std::sort(part.begin(), part.end());
                    if (!member_ok(layer, base, part)) ok = false;
                    part.erase(std::find(part.begin(), part.end(), x));
                    return;
                }
                for (size_t j = lo; j < frees.size(); ++j) {
                    part.push_back(frees[j]);
                    self(self, j + 1, need - 1);
                    part.pop_back();
                }
            };
            rec(rec, 0, k);
            if (!ok) return false;
        }
        return true;
    };

    try {
        for_each_subset_lex(lf.n(), base_size, [&](const std::vector<int>& base) {
            if (hit) return;
            std::vector<int> cand;
            for (int x = 1; x <= lf.n(); ++x)
                if (!std::binary_search(base.begin(), base.end(), x)) cand.push_back(x);
            frees.clear();
            auto rec = [&](auto&& self, size_t lo) -> bool {
                nc.tick();
                if (frees.size() == 6) return true;
                size_t need = 6 - frees.size();
                for (size_t j = lo; j + need <= cand.size(); ++j) {
                    if (!feasible_add(base, cand[j])) continue;
                    frees.push_back(cand[j]);
                    if (self(self, j + 1)) return true;
                    frees.pop_back();
                }
                return false;
            };
            if (rec(rec, 0)) hit = Q6LayerWitness{base, frees};
        });
    } catch (...) {
        res.nodes = nc.nodes;
        throw;
    }
    res.nodes = nc.nodes;
    res.witness = std::move(hit);
    return res;
}

}  // namespace daisyforge
