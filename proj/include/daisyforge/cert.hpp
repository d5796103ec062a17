#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "daisyforge/arcs.hpp"
#include "daisyforge/io.hpp"
#include "daisyforge/oracle.hpp"

namespace daisyforge {

// Certificates are JSON objects: stable fields first, the run-dependent
// "runtime_ms" strictly last. Byte comparisons between runs are made over
// canonical_certificate_bytes, which drops that one field.
inline Json strip_volatile(Json cert) {
    cert.erase("runtime_ms");
    return cert;
}

inline std::string canonical_certificate_bytes(const Json& cert) {
    return json_bytes(strip_volatile(cert));
}

// check_certificate re-runs freeness searches only below this family size;
// larger claims are accepted on checksum and witness consistency alone.
inline constexpr std::uint64_t recheck_member_cap = 2000;

namespace detail {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::int64_t ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

inline void need(const Json& c, std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        require(c.contains(k), errc::corrupt_certificate,
                std::string("certificate missing field \"") + k + "\"");
}

inline int cint(const Json& c, const char* key) {
    require(c.contains(key) && c[key].is_number_integer(), errc::corrupt_certificate,
            std::string("certificate field \"") + key + "\" must be an integer");
    return c[key].get<int>();
}

inline std::string cstr(const Json& c, const char* key) {
    require(c.contains(key) && c[key].is_string(), errc::corrupt_certificate,
            std::string("certificate field \"") + key + "\" must be a string");
    return c[key].get<std::string>();
}

inline std::vector<int> int_list(const Json& a) {
    require(a.is_array(), errc::corrupt_certificate, "expected an integer array");
    std::vector<int> out;
    out.reserve(a.size());
    for (const Json& e : a) {
        require(e.is_number_integer(), errc::corrupt_certificate, "expected an integer array");
        out.push_back(e.get<int>());
    }
    return out;
}

inline std::vector<std::vector<int>> int_rows(const Json& a) {
    require(a.is_array(), errc::corrupt_certificate, "expected an array of integer arrays");
    std::vector<std::vector<int>> out;
    out.reserve(a.size());
    for (const Json& row : a) out.push_back(int_list(row));
    return out;
}

inline std::vector<std::string> str_list(const Json& a) {
    require(a.is_array(), errc::corrupt_certificate, "expected a string array");
    std::vector<std::string> out;
    out.reserve(a.size());
    for (const Json& e : a) {
        require(e.is_string(), errc::corrupt_certificate, "expected a string array");
        out.push_back(e.get<std::string>());
    }
    return out;
}

// Referenced artifacts resolve as written, then relative to the certificate.
inline std::string resolve_ref(const std::string& cert_path, const std::string& ref) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::path p(ref);
    if (fs::exists(p, ec)) return p.string();
    fs::path alt = fs::path(cert_path).parent_path() / p;
    if (fs::exists(alt, ec)) return alt.string();
    fail(errc::corrupt_certificate, "certificate references missing file " + ref);
}

inline Json load_ref_json(const std::string& cert_path, const Json& cert, const char* key) {
    std::string ref = cstr(cert, key);
    std::string path = resolve_ref(cert_path, ref);
    try {
        return parse_json(read_text(path), path);
    } catch (const error&) {
        fail(errc::corrupt_certificate, "certificate references unreadable file " + path);
    }
}

}  // namespace detail

// ---- builders ----

inline Json arc_certificate(int q, int dim, int j, int cap, const ArcSearchResult& res,
                            std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "arc_search";
    c["q"] = q;
    c["dim"] = dim;
    c["j"] = j;
    c["cap"] = cap;
    c["max_size"] = res.max_size;
    c["witness"] = res.witness;
    c["exhaustive"] = res.exhaustive;
    c["nodes"] = res.nodes;
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json frame_certificate(int q, int dim, const ArcSearchResult& res,
                              std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "frame_search";
    c["q"] = q;
    c["dim"] = dim;
    c["max_size"] = res.max_size;
    c["witness"] = res.witness;
    c["terminals"] = res.terminal_candidates;
    c["exhaustive"] = res.exhaustive;
    c["nodes"] = res.nodes;
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json pairwise_certificate(int q, bool any_q, bool holds, std::int64_t runtime_ms) {
    Json c;
    c["kind"] = any_q ? "pairwise_any_q" : "pairwise";
    c["q"] = q;
    c["holds"] = holds;
    c["runtime_ms"] = runtime_ms;
    return c;
}

struct DaisyRunOutcome {
    bool free = false;
    DaisySearchResult search;
    Json certificate;
};

// Runs the daisy search and wraps the verdict into a certificate whose
// checksum binds it to the family's canonical serialization.
inline DaisyRunOutcome daisy_free_certificate(const SetFamily& f, DaisyPattern pat,
                                              const std::string& family_file,
                                              SearchMode mode = SearchMode::deterministic,
                                              int threads = 1, const Budget& budget = Budget()) {
    detail::Stopwatch sw;
    DaisyRunOutcome out;
    out.search = contains_daisy(f, pat, mode, threads, budget);
    out.free = !out.search.witness.has_value();
    Json c;
    c["kind"] = "daisy_free";
    c["pattern"] = {pat.r, pat.s, pat.t};
    c["family_file"] = family_file;
    c["family_sha256"] = sha256_hex(json_bytes(family_to_json(f)));
    c["result"] = out.free ? "free" : "contains";
    if (!out.free) {
        Json w;
        w["stem"] = out.search.witness->stem;
        w["petals"] = out.search.witness->petals;
        c["witness"] = std::move(w);
    }
    c["nodes"] = out.search.nodes;
    c["mode"] = mode_name(out.search.mode);
    c["runtime_ms"] = sw.ms();
    out.certificate = std::move(c);
    return out;
}

struct TwoLayerRunOutcome {
    bool free = false;
    int hit_i = 0;
    Q6SearchResult search;
    Json certificate;
};

// Scans every petal width i in [2,5] for a consecutive-layer 6-cube copy.
inline TwoLayerRunOutcome two_layer_certificate(const LayeredFamily& lf,
                                                const std::string& family_file,
                                                const Budget& budget = Budget()) {
    detail::Stopwatch sw;
    TwoLayerRunOutcome out;
    out.free = true;
    std::uint64_t nodes = 0;
    for (int i = 2; i <= 5; ++i) {
        Q6SearchResult r6 = find_consecutive_q6(lf, i, budget);
        nodes += r6.nodes;
        if (r6.witness) {
            out.free = false;
            out.hit_i = i;
            out.search = std::move(r6);
            break;
        }
    }
    Json c;
    c["kind"] = "two_layer_free";
    c["family_file"] = family_file;
    c["family_sha256"] = sha256_hex(json_bytes(layered_to_json(lf)));
    c["result"] = out.free ? "free" : "contains";
    if (!out.free) {
        Json w;
        w["i"] = out.hit_i;
        w["base"] = out.search.witness->base;
        w["frees"] = out.search.witness->frees;
        c["witness"] = std::move(w);
    }
    c["nodes"] = nodes;
    c["runtime_ms"] = sw.ms();
    out.certificate = std::move(c);
    return out;
}

struct HittingRunOutcome {
    bool ok = false;
    HitCheckResult check;
    Json certificate;
};

inline HittingRunOutcome hitting_certificate(const HittingFamily& h, int d,
                                             const std::string& family_file) {
    detail::Stopwatch sw;
    HittingRunOutcome out;
    out.check = verify_hitting(h, d);
    out.ok = out.check.ok;
    Json c;
    c["kind"] = "hitting";
    c["n"] = h.n();
    c["d"] = d;
    c["family_file"] = family_file;
    c["family_sha256"] = sha256_hex(json_bytes(hitting_to_json(h)));
    c["vertex_count"] = h.vertex_count();
    c["result"] = out.ok ? "hits_all" : "missed";
    if (!out.ok) c["missed"] = subcube_to_json(*out.check.missed);
    c["subcubes"] = out.check.subcubes;
    c["runtime_ms"] = sw.ms();
    out.certificate = std::move(c);
    return out;
}

inline Json oracle_certificate(const ExactResult& res, const std::string& witness_file,
                               const std::string& witness_sha256, std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "oracle";
    c["quantity"] = res.quantity;
    c["params"] = res.params;
    c["value"] = rat_string(res.value);
    c["witness_file"] = witness_file;
    if (!witness_file.empty()) c["witness_sha256"] = witness_sha256;
    c["nodes"] = res.nodes;
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json monotonicity_certificate(const MonotonicityReport& rep, const OracleRanges& ranges,
                                     std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "oracle_monotonicity";
    Json rg;
    rg["ex_max_n"] = ranges.ex_max_n;
    rg["ex_max_r"] = ranges.ex_max_r;
    rg["ex_max_t"] = ranges.ex_max_t;
    rg["g_max_n"] = ranges.g_max_n;
    rg["l_max_n"] = ranges.l_max_n;
    rg["l_max_r"] = ranges.l_max_r;
    c["ranges"] = std::move(rg);
    c["checks"] = rep.checks.size();
    c["violations"] = rep.violations;
    c["nodes"] = rep.nodes;
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json density_certificate(const DensityReport& rep, std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "density_report";
    const Json body = density_report_to_json(rep);
    for (const auto& [key, value] : body.items()) c[key] = value;
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json product_bound_certificate(const ProductBound& pb, std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "product_bound";
    c["q"] = pb.q;
    c["K"] = pb.K;
    c["lower_num"] = numerator(pb.lower).str();
    c["lower_den"] = denominator(pb.lower).str();
    c["upper_num"] = numerator(pb.upper).str();
    c["upper_den"] = denominator(pb.upper).str();
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json trivial_certificate(int d, const Rational& bound, std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "trivial_upper";
    c["d"] = d;
    c["bound_num"] = numerator(bound).str();
    c["bound_den"] = denominator(bound).str();
    c["runtime_ms"] = runtime_ms;
    return c;
}

inline Json construct_certificate(const std::string& op, const Json& params,
                                  const std::string& out_file, const std::string& out_sha256,
                                  const Json& stats, std::int64_t runtime_ms) {
    Json c;
    c["kind"] = "construct";
    c["op"] = op;
    c["params"] = params;
    c["out"] = out_file;
    c["out_sha256"] = out_sha256;
    c["stats"] = stats;
    c["runtime_ms"] = runtime_ms;
    return c;
}

// ---- re-validation ----

namespace detail {

inline bool check_arc_search(const Json& c) {
    need(c, {"witness", "exhaustive"});
    int q = cint(c, "q"), dim = cint(c, "dim"), j = cint(c, "j");
    int cap = cint(c, "cap"), max_size = cint(c, "max_size");
    require(c["exhaustive"].is_boolean(), errc::corrupt_certificate,
            "certificate field \"exhaustive\" must be boolean");
    std::vector<std::vector<int>> rows = int_rows(c["witness"]);
    if (static_cast<int>(rows.size()) != max_size || max_size > cap) return false;
    try {
        FiniteField field(q);
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != dim) return false;
            for (int e : row)
                if (e < 0 || e >= q) return false;
        }
        return arc_property_holds(field, j, rows);
    } catch (const error&) {
        return false;
    }
}

inline bool check_frame_search(const Json& c) {
    need(c, {"witness", "terminals", "exhaustive"});
    int q = cint(c, "q"), dim = cint(c, "dim"), max_size = cint(c, "max_size");
    std::vector<std::vector<int>> wit = int_rows(c["witness"]);
    std::vector<std::vector<int>> terms = int_rows(c["terminals"]);
    if (static_cast<int>(wit.size()) != max_size) return false;
    for (const auto* rows : {&wit, &terms})
        for (const auto& row : *rows) {
            if (static_cast<int>(row.size()) != dim) return false;
            for (int e : row)
                if (e < 0 || e >= q) return false;
        }
    // full replay only at toy scale; the real searches take minutes
    long points = 1;
    for (int i = 0; i < dim; ++i) points *= q;
    if (points <= 256) {
        try {
            ArcSearchResult res = frame_search(q, dim);
            return res.max_size == max_size && res.terminal_candidates == terms;
        } catch (const error&) {
            return false;
        }
    }
    return true;
}

inline bool check_pairwise(const Json& c, bool any_q) {
    int q = cint(c, "q");
    require(c.contains("holds") && c["holds"].is_boolean(), errc::corrupt_certificate,
            "certificate field \"holds\" must be boolean");
    try {
        bool truth = any_q ? q_plus_two_any_q(q) : q_plus_two_pairwise(q);
        return truth == c["holds"].get<bool>();
    } catch (const error&) {
        return false;
    }
}

inline bool check_daisy_free(const std::string& path, const Json& c) {
    need(c, {"pattern", "family_sha256", "result"});
    Json fam_doc = load_ref_json(path, c, "family_file");
    SetFamily f(0, 0);
    try {
        f = family_from_json(fam_doc);
    } catch (const error&) {
        fail(errc::corrupt_certificate, "referenced family file is not a valid family");
    }
    if (cstr(c, "family_sha256") != sha256_hex(json_bytes(family_to_json(f)))) return false;
    std::vector<int> pv = int_list(c["pattern"]);
    require(pv.size() == 3, errc::corrupt_certificate, "pattern must be [r, s, t]");
    std::string result = cstr(c, "result");
    try {
        DaisyPattern pat(pv[0], pv[1], pv[2]);
        if (pat.r != f.r()) return false;
        if (result == "contains") {
            need(c, {"witness"});
            const Json& wj = c["witness"];
            require(wj.is_object() && wj.contains("stem") && wj.contains("petals"),
                    errc::corrupt_certificate, "daisy witness needs stem and petals");
            DaisyWitness w{int_list(wj["stem"]), int_list(wj["petals"])};
            return verify_daisy_witness(f, pat, w);
        }
        if (result == "free") {
            if (f.size() <= recheck_member_cap) return !contains_daisy(f, pat).witness.has_value();
            return true;
        }
    } catch (const error&) {
        return false;
    }
    return false;
}

inline bool check_two_layer_free(const std::string& path, const Json& c) {
    need(c, {"family_sha256", "result"});
    Json doc = load_ref_json(path, c, "family_file");
    try {
        LayeredFamily lf = layered_from_json(doc);
        if (cstr(c, "family_sha256") != sha256_hex(json_bytes(layered_to_json(lf)))) return false;
        std::string result = cstr(c, "result");
        if (result == "contains") {
            need(c, {"witness"});
            const Json& wj = c["witness"];
            require(wj.is_object() && wj.contains("base") && wj.contains("frees"),
                    errc::corrupt_certificate, "layer witness needs base and frees");
            int i = cint(wj, "i");
            Q6LayerWitness w{int_list(wj["base"]), int_list(wj["frees"])};
            if (i < 2 || i > 5) return false;
            return verify_q6_witness(lf, i, w);
        }
        if (result == "free") {
            if (lf.upper.size() + lf.lower.size() <= recheck_member_cap) {
                for (int i = 2; i <= 5; ++i)
                    if (find_consecutive_q6(lf, i).witness) return false;
            }
            return true;
        }
    } catch (const error& e) {
        if (e.code() == errc::corrupt_certificate || e.code() == errc::invalid_file)
            fail(errc::corrupt_certificate, e.what());
        return false;
    }
    return false;
}

inline bool check_hitting(const std::string& path, const Json& c) {
    need(c, {"family_sha256", "result"});
    int n = cint(c, "n"), d = cint(c, "d");
    Json doc = load_ref_json(path, c, "family_file");
    HittingFamily h(0);
    try {
        h = hitting_from_json(doc);
    } catch (const error&) {
        fail(errc::corrupt_certificate, "referenced hitting file is not valid");
    }
    try {
        if (h.n() != n) return false;
        if (cstr(c, "family_sha256") != sha256_hex(json_bytes(hitting_to_json(h)))) return false;
        std::string result = cstr(c, "result");
        if (result == "missed") {
            need(c, {"missed"});
            const Json& mj = c["missed"];
            require(mj.is_object() && mj.contains("base") && mj.contains("free"),
                    errc::corrupt_certificate, "missed subcube needs base and free");
            Subcube cube{set_to_mask(int_list(mj["base"]), n),
                         set_to_mask(int_list(mj["free"]), n)};
            if (!cube.valid() || cube.dim() != d) return false;
            for (std::uint32_t v : subcube_vertices(cube))
                if (h.contains(v)) return false;
            return true;
        }
        if (result == "hits_all") {
            if (h.n() <= 16) return verify_hitting(h, d).ok;
            return true;
        }
    } catch (const error& e) {
        if (e.code() == errc::corrupt_certificate) throw;
        return false;
    }
    return false;
}

inline bool check_oracle(const std::string& path, const Json& c) {
    need(c, {"params", "value"});
    std::string quantity = cstr(c, "quantity");
    std::vector<int> params = int_list(c["params"]);
    Rational value;
    try {
        value = rat_from_string(cstr(c, "value"));
    } catch (const error&) {
        fail(errc::corrupt_certificate, "oracle certificate value is not a rational");
    }
    try {
        ExactResult res;
        if (quantity == "ex") {
            if (params.size() < 2 || params.size() % 2 != 0) return false;
            std::vector<DaisyPattern> pats;
            for (std::size_t i = 2; i + 1 < params.size(); i += 2)
                pats.emplace_back(params[1], params[i], params[i + 1]);
            res = exact_ex(params[0], params[1], pats);
        } else if (quantity == "g") {
            if (params.size() != 2) return false;
            res = exact_g(params[0], params[1]);
        } else if (quantity == "l") {
            if (params.size() != 3 || params[1] != 6) return false;
            res = exact_l(params[0], params[2]);
        } else {
            return false;
        }
        if (res.value != value) return false;
        if (c.contains("witness_file") && c["witness_file"].is_string() &&
            !c["witness_file"].get<std::string>().empty()) {
            Json wdoc = load_ref_json(path, c, "witness_file");
            if (c.contains("witness_sha256") &&
                cstr(c, "witness_sha256") != sha256_hex(json_bytes(wdoc)))
                return false;
        }
        return true;
    } catch (const error& e) {
        if (e.code() == errc::corrupt_certificate) throw;
        return false;
    }
}

inline bool check_monotonicity(const Json& c) {
    need(c, {"ranges", "violations"});
    const Json& rg = c["ranges"];
    OracleRanges ranges;
    ranges.ex_max_n = cint(rg, "ex_max_n");
    ranges.ex_max_r = cint(rg, "ex_max_r");
    ranges.ex_max_t = cint(rg, "ex_max_t");
    ranges.g_max_n = cint(rg, "g_max_n");
    ranges.l_max_n = cint(rg, "l_max_n");
    ranges.l_max_r = cint(rg, "l_max_r");
    std::size_t checks = static_cast<std::size_t>(cint(c, "checks"));
    std::vector<std::string> violations = str_list(c["violations"]);
    try {
        MonotonicityReport rep = monotonicity_suite(ranges);
        return rep.checks.size() == checks && rep.violations == violations;
    } catch (const error&) {
        return false;
    }
}

inline bool check_density_report(const Json& c) {
    need(c, {"trace"});
    int d = cint(c, "d"), K = cint(c, "K");
    if (d != 6 && d != 7) return false;
    try {
        DensityReport rep = (d == 7) ? gamma7_report(K) : gamma6_report(K);
        return numerator(rep.bound).str() == cstr(c, "bound_num") &&
               denominator(rep.bound).str() == cstr(c, "bound_den") &&
               numerator(rep.target).str() == cstr(c, "target_num") &&
               denominator(rep.target).str() == cstr(c, "target_den") &&
               rep.trace == str_list(c["trace"]);
    } catch (const error&) {
        return false;
    }
}

inline bool check_product_bound(const Json& c) {
    int q = cint(c, "q"), K = cint(c, "K");
    try {
        ProductBound pb = product_bound(q, K);
        return numerator(pb.lower).str() == cstr(c, "lower_num") &&
               denominator(pb.lower).str() == cstr(c, "lower_den") &&
               numerator(pb.upper).str() == cstr(c, "upper_num") &&
               denominator(pb.upper).str() == cstr(c, "upper_den");
    } catch (const error&) {
        return false;
    }
}

inline bool check_trivial(const Json& c) {
    int d = cint(c, "d");
    try {
        Rational bound = trivial_upper(d);
        return numerator(bound).str() == cstr(c, "bound_num") &&
               denominator(bound).str() == cstr(c, "bound_den");
    } catch (const error&) {
        return false;
    }
}

inline bool check_construct(const std::string& path, const Json& c) {
    need(c, {"out_sha256", "stats"});
    Json doc = load_ref_json(path, c, "out");
    if (cstr(c, "out_sha256") != sha256_hex(json_bytes(doc))) return false;
    const Json& stats = c["stats"];
    try {
        if (doc.contains("sets")) {
            SetFamily f = family_from_json(doc);
            if (stats.contains("size") && f.size() != stats["size"].get<std::uint64_t>())
                return false;
            if (stats.contains("density") && rat_string(f.density()) != stats["density"])
                return false;
        } else if (doc.contains("kind") && doc["kind"] == "layered") {
            LayeredFamily lf = layered_from_json(doc);
            if (stats.contains("density_sum") &&
                rat_string(lf.density_sum()) != stats["density_sum"])
                return false;
        } else if (doc.contains("vertices")) {
            HittingFamily h = hitting_from_json(doc);
            if (stats.contains("vertex_count") &&
                h.vertex_count() != stats["vertex_count"].get<std::uint64_t>())
                return false;
        } else if (!doc.contains("levels")) {
            return false;
        }
        return true;
    } catch (const error&) {
        return false;
    }
}

}  // namespace detail

// Re-verifies the recorded claim from its recorded inputs: witnesses are
// re-validated outright, freeness and exact-value claims are re-run when they
// fit the desk budget. True iff everything recorded is consistent.
inline bool check_certificate(const std::string& path) {
    Json c;
    try {
        c = parse_json(read_text(path), path);
    } catch (const error&) {
        fail(errc::corrupt_certificate, "unreadable certificate " + path);
    }
    require(c.is_object() && c.contains("kind") && c["kind"].is_string(),
            errc::corrupt_certificate, "certificate has no kind");
    const std::string kind = c["kind"].get<std::string>();
    if (kind == "arc_search") return detail::check_arc_search(c);
    if (kind == "frame_search") return detail::check_frame_search(c);
    if (kind == "pairwise") return detail::check_pairwise(c, false);
    if (kind == "pairwise_any_q") return detail::check_pairwise(c, true);
    if (kind == "daisy_free") return detail::check_daisy_free(path, c);
    if (kind == "two_layer_free") return detail::check_two_layer_free(path, c);
    if (kind == "hitting") return detail::check_hitting(path, c);
    if (kind == "oracle") return detail::check_oracle(path, c);
    if (kind == "oracle_monotonicity") return detail::check_monotonicity(c);
    if (kind == "density_report") return detail::check_density_report(c);
    if (kind == "product_bound") return detail::check_product_bound(c);
    if (kind == "trivial_upper") return detail::check_trivial(c);
    if (kind == "construct") return detail::check_construct(path, c);
    fail(errc::corrupt_certificate, "unknown certificate kind \"" + kind + "\"");
}

}  // namespace daisyforge
