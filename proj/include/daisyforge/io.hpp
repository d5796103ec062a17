#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "daisyforge/construct.hpp"
#include "daisyforge/density.hpp"
#include "daisyforge/errors.hpp"
#include "daisyforge/families.hpp"
#include "daisyforge/hitting.hpp"

namespace daisyforge {

// All artifacts keep their declared key order, so serialization must not
// re-sort keys.
using Json = nlohmann::ordered_json;

// Canonical byte form of any JSON artifact: 2-space indent, trailing newline.
// Checksums and byte-identity comparisons are defined over these bytes.
inline std::string json_bytes(const Json& j) { return j.dump(2) + "\n"; }

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
              EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
              EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    require(ok, errc::invalid_file, "digest computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::invalid_file, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), errc::invalid_file, "cannot write " + path);
    out << bytes;
    out.flush();
    require(out.good(), errc::invalid_file, "short write to " + path);
}

inline Json parse_json(const std::string& bytes, const std::string& what) {
    Json j = Json::parse(bytes, nullptr, /*allow_exceptions=*/false);
    require(!j.is_discarded(), errc::invalid_file, "malformed JSON in " + what);
    return j;
}

namespace detail {

inline int int_field(const Json& j, const char* key, const std::string& what) {
    require(j.contains(key) && j[key].is_number_integer(), errc::invalid_file,
            what + " needs integer field \"" + key + "\"");
    return j[key].get<int>();
}

}  // namespace detail

// {"version":1,"n","r","sets":[[...]]}; members emitted in lex order.
inline Json family_to_json(const SetFamily& f) {
    Json j;
    j["version"] = 1;
    j["n"] = f.n();
    j["r"] = f.r();
    Json sets = Json::array();
    for (const auto& m : f.members()) sets.push_back(m);
    j["sets"] = std::move(sets);
    return j;
}

inline SetFamily family_from_json(const Json& j) {
    require(j.is_object(), errc::invalid_file, "family file must be a JSON object");
    require(detail::int_field(j, "version", "family file") == 1, errc::invalid_file,
            "unsupported family file version");
    int n = detail::int_field(j, "n", "family file");
    int r = detail::int_field(j, "r", "family file");
    require(j.contains("sets") && j["sets"].is_array(), errc::invalid_file,
            "family file needs array field \"sets\"");
    require(n >= 0 && r >= 0 && r <= n, errc::invalid_file, "family file layer out of range");
    SetFamily f(n, r);
    for (const Json& s : j["sets"]) {
        require(s.is_array() && static_cast<int>(s.size()) == r, errc::invalid_file,
                "each set must be an array of exactly r elements");
        std::vector<int> m;
        m.reserve(r);
        int prev = 0;
        for (const Json& e : s) {
            require(e.is_number_integer(), errc::invalid_file, "set elements must be integers");
            int v = e.get<int>();
            require(v > prev && v <= n, errc::invalid_file,
                    "sets must be strictly increasing within 1..n");
            prev = v;
            m.push_back(v);
        }
        f.insert(std::move(m));
    }
    return f;
}

// {"version":1,"kind":"layered","upper":<family>,"lower":<family>}.
inline Json layered_to_json(const LayeredFamily& lf) {
    Json j;
    j["version"] = 1;
    j["kind"] = "layered";
    j["upper"] = family_to_json(lf.upper);
    j["lower"] = family_to_json(lf.lower);
    return j;
}

inline LayeredFamily layered_from_json(const Json& j) {
    require(j.is_object() && j.contains("kind") && j["kind"] == "layered" &&
                j.contains("upper") && j.contains("lower"),
            errc::invalid_file, "layered family file shape is invalid");
    require(detail::int_field(j, "version", "layered family file") == 1, errc::invalid_file,
            "unsupported layered family file version");
    // layer consistency (same n, consecutive r) is enforced by the constructor
    return LayeredFamily(family_from_json(j["upper"]), family_from_json(j["lower"]));
}

// {"n","vertices":[...]}; vertices ascending, each < 2^n.
inline Json hitting_to_json(const HittingFamily& h) {
    Json j;
    j["n"] = h.n();
    Json v = Json::array();
    for (std::uint64_t x = 0; x < h.universe_size(); ++x)
        if (h.contains(static_cast<std::uint32_t>(x))) v.push_back(x);
    j["vertices"] = std::move(v);
    return j;
}

inline HittingFamily hitting_from_json(const Json& j) {
    require(j.is_object(), errc::invalid_file, "hitting file must be a JSON object");
    int n = detail::int_field(j, "n", "hitting file");
    require(n >= 0 && n <= HittingFamily::max_n, errc::invalid_file,
            "hitting file dimension out of range");
    require(j.contains("vertices") && j["vertices"].is_array(), errc::invalid_file,
            "hitting file needs array field \"vertices\"");
    HittingFamily h(n);
    for (const Json& e : j["vertices"]) {
        require(e.is_number_integer(), errc::invalid_file, "vertices must be integers");
        std::int64_t v = e.get<std::int64_t>();
        require(v >= 0 && v < static_cast<std::int64_t>(h.universe_size()), errc::invalid_file,
                "vertex outside the cube");
        h.insert(static_cast<std::uint32_t>(v));
    }
    return h;
}

inline Json subcube_to_json(const Subcube& c) {
    Json j;
    j["base"] = mask_to_set(c.base);
    j["free"] = mask_to_set(c.free);
    return j;
}

// Plan file: materialized levels point at family files named off ref_prefix,
// symbolic levels carry the guaranteed density bound as an exact fraction.
inline Json plan_to_json(const StripedPlan& plan, const std::string& ref_prefix) {
    Json j;
    j["n"] = plan.n;
    j["d"] = plan.d;
    Json levels = Json::array();
    for (const auto& lv : plan.levels) {
        Json e;
        e["level"] = lv.level;
        e["kind"] = lv.materialized ? "materialized" : "symbolic";
        e["role"] = lv.role;
        if (lv.materialized) {
            std::string ref = (plan.d == 7) ? ref_prefix + "level" + std::to_string(lv.level) + ".json"
                                            : ref_prefix + "pair.json";
            e["family_ref"] = ref;
            e["density"] = rat_string(lv.family_density);
        } else {
            e["density_lower_bound"] = rat_string(lv.density_lower_bound);
        }
        levels.push_back(std::move(e));
    }
    j["levels"] = std::move(levels);
    j["asymptotic_formula"] = plan.asymptotic_formula;
    return j;
}

// {"d","K","bound_num","bound_den","target_num","target_den","trace":[steps]};
// numerators and denominators as decimal strings since they outgrow int64.
inline Json density_report_to_json(const DensityReport& rep) {
    Json j;
    j["d"] = rep.d;
    j["K"] = rep.K;
    j["bound_num"] = numerator(rep.bound).str();
    j["bound_den"] = denominator(rep.bound).str();
    j["target_num"] = numerator(rep.target).str();
    j["target_den"] = denominator(rep.target).str();
    j["trace"] = rep.trace;
    return j;
}

}  // namespace daisyforge
