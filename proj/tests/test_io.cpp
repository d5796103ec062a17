#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "daisyforge/cert.hpp"

using namespace daisyforge;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path dir;

    TempDir() {
        dir = fs::temp_directory_path() / ("daisyforge_io_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

template <class Fn>
void expect(errc code, Fn&& fn) {
    try {
        fn();
        FAIL("expected an error");
    } catch (const error& e) {
        CHECK(e.code() == code);
    }
}

SetFamily small_family() {
    SetFamily f(4, 2);
    f.insert({1, 2});
    f.insert({3, 4});
    f.insert({1, 3});
    return f;
}

}  // namespace

TEST_CASE("canonical bytes and checksums") {
    // key order is preserved, so canonical bytes follow insertion order
    Json a;
    a["x"] = 1;
    a["y"] = 2;
    Json b;
    b["y"] = 2;
    b["x"] = 1;
    CHECK(json_bytes(a) != json_bytes(b));
    CHECK(json_bytes(a) == "{\n  \"x\": 1,\n  \"y\": 2\n}\n");

    // published reference digests
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    TempDir tmp;
    write_text(tmp.path("t.txt"), "payload\n");
    CHECK(read_text(tmp.path("t.txt")) == "payload\n");
    expect(errc::invalid_file, [&] { read_text(tmp.path("absent.txt")); });
    expect(errc::invalid_file, [&] { parse_json("{broken", "inline"); });
}

TEST_CASE("family files round trip") {
    SetFamily f = small_family();
    Json j = family_to_json(f);
    CHECK(j["version"] == 1);
    CHECK(j["n"] == 4);
    CHECK(j["r"] == 2);
    // members come out in lex order regardless of insertion order
    CHECK(j["sets"] == Json::array({{1, 2}, {1, 3}, {3, 4}}));

    SetFamily back = family_from_json(j);
    CHECK(back.n() == f.n());
    CHECK(back.r() == f.r());
    CHECK(back.members() == f.members());
    CHECK(json_bytes(family_to_json(back)) == json_bytes(j));

    auto reject = [&](Json bad) {
        expect(errc::invalid_file, [&] { family_from_json(bad); });
    };
    Json bad = j;
    bad["version"] = 2;
    reject(bad);
    bad = j;
    bad.erase("sets");
    reject(bad);
    bad = j;
    bad["sets"] = Json::array({{2, 1}});  // not increasing
    reject(bad);
    bad = j;
    bad["sets"] = Json::array({{0, 1}});  // below ground set
    reject(bad);
    bad = j;
    bad["sets"] = Json::array({{1, 5}});  // above ground set
    reject(bad);
    bad = j;
    bad["sets"] = Json::array({{1, 2, 3}});  // wrong arity
    reject(bad);
    bad = j;
    bad["sets"] = Json::array({{1, "x"}});
    reject(bad);
    bad = j;
    bad["r"] = 9;  // r > n
    reject(bad);
}

TEST_CASE("layered and hitting files round trip") {
    SetFamily up(3, 2);
    up.insert({1, 2});
    SetFamily low(3, 1);
    low.insert({1});
    LayeredFamily lf(up, low);
    Json j = layered_to_json(lf);
    CHECK(j["kind"] == "layered");
    LayeredFamily back = layered_from_json(j);
    CHECK(back.upper.members() == lf.upper.members());
    CHECK(back.lower.members() == lf.lower.members());

    Json bad = j;
    bad["kind"] = "stack";
    expect(errc::invalid_file, [&] { layered_from_json(bad); });
    bad = j;
    bad["lower"] = bad["upper"];  // same layer twice: no longer consecutive
    expect(errc::bad_layer_index, [&] { layered_from_json(bad); });

    HittingFamily h(3);
    h.insert(0);
    h.insert(5);
    h.insert(7);
    Json hj = hitting_to_json(h);
    CHECK(hj["n"] == 3);
    CHECK(hj["vertices"] == Json::array({0, 5, 7}));
    HittingFamily hback = hitting_from_json(hj);
    CHECK(hback == h);

    Json hbad = hj;
    hbad["vertices"] = Json::array({8});  // outside the 3-cube
    expect(errc::invalid_file, [&] { hitting_from_json(hbad); });
    hbad = hj;
    hbad["n"] = 99;
    expect(errc::invalid_file, [&] { hitting_from_json(hbad); });
}

TEST_CASE("plan files name their levels") {
    StripedPlan plan = striped_plan(7, 7);
    Json j = plan_to_json(plan, "plan7_");
    CHECK(j["n"] == 7);
    CHECK(j["d"] == 7);
    REQUIRE(j["levels"].size() == 2);
    CHECK(j["levels"][0]["level"] == 3);
    CHECK(j["levels"][0]["kind"] == "materialized");
    CHECK(j["levels"][0]["family_ref"] == "plan7_level3.json");
    CHECK(j["levels"][0]["role"] == "single");
    CHECK(j["levels"][1]["level"] == 7);
    CHECK(j["levels"][1]["kind"] == "symbolic");
    // the symbolic guarantee is exactly the product enclosure's lower end
    CHECK(j["levels"][1]["density_lower_bound"] ==
          rat_string(product_bound(4, 8).lower));
    CHECK(j["asymptotic_formula"].get<std::string>().find("4^-k") != std::string::npos);
}

TEST_CASE("density report serialization") {
    DensityReport rep = gamma7_report(1);
    Json j = density_report_to_json(rep);
    CHECK(j["d"] == 7);
    CHECK(j["K"] == 1);
    CHECK(j["bound_num"] == "5");
    CHECK(j["bound_den"] == "64");
    CHECK(j["target_num"] == "1");
    CHECK(j["target_den"] == "8");
    CHECK(j["trace"].size() == rep.trace.size());
}

TEST_CASE("arc and frame certificates re-validate") {
    TempDir tmp;

    ArcSearchResult arc = max_arc(2, 2, 2, 4);
    Json cert = arc_certificate(2, 2, 2, 4, arc, 17);
    std::string path = tmp.path("arc.json");
    write_text(path, json_bytes(cert));
    CHECK(check_certificate(path));

    Json tampered = cert;
    tampered["witness"].push_back(tampered["witness"][0]);  // repeated point
    tampered["max_size"] = tampered["witness"].size();
    write_text(path, json_bytes(tampered));
    CHECK_FALSE(check_certificate(path));

    ArcSearchResult frame = frame_search(5, 3);
    Json fcert = frame_certificate(5, 3, frame, 3);
    std::string fpath = tmp.path("frame.json");
    write_text(fpath, json_bytes(fcert));
    CHECK(check_certificate(fpath));  // 125 points: replayed in full

    Json ftampered = fcert;
    ftampered["terminals"] = Json::array({Json::array({1, 1, 1})});
    write_text(fpath, json_bytes(ftampered));
    CHECK_FALSE(check_certificate(fpath));

    Json pcert = pairwise_certificate(5, false, q_plus_two_pairwise(5), 1);
    std::string ppath = tmp.path("pairwise.json");
    write_text(ppath, json_bytes(pcert));
    CHECK(check_certificate(ppath));
    pcert["holds"] = !pcert["holds"].get<bool>();
    write_text(ppath, json_bytes(pcert));
    CHECK_FALSE(check_certificate(ppath));
}

TEST_CASE("daisy certificates bind family checksums") {
    TempDir tmp;

    SetFamily f = basis_family(2, 3);
    std::string fam_path = tmp.path("fam.json");
    write_text(fam_path, json_bytes(family_to_json(f)));

    DaisyRunOutcome run = daisy_free_certificate(f, DaisyPattern(3, 2, 4), fam_path);
    CHECK(run.free);
    CHECK(run.certificate["result"] == "free");
    std::string cert_path = tmp.path("daisy.json");
    write_text(cert_path, json_bytes(run.certificate));
    CHECK(check_certificate(cert_path));

    // altering the family file breaks the checksum
    SetFamily smaller = f;
    smaller.erase(*f.members().begin());
    write_text(fam_path, json_bytes(family_to_json(smaller)));
    CHECK_FALSE(check_certificate(cert_path));
    write_text(fam_path, json_bytes(family_to_json(f)));
    CHECK(check_certificate(cert_path));

    // a refuted run ships a witness that re-validates
    SetFamily full(6, 3);
    for (int a = 1; a <= 4; ++a)
        for (int b = a + 1; b <= 5; ++b)
            for (int c = b + 1; c <= 6; ++c) full.insert({a, b, c});
    std::string full_path = tmp.path("full.json");
    write_text(full_path, json_bytes(family_to_json(full)));
    DaisyRunOutcome hit = daisy_free_certificate(full, DaisyPattern(3, 2, 4), full_path);
    CHECK_FALSE(hit.free);
    CHECK(hit.certificate["result"] == "contains");
    std::string hit_path = tmp.path("daisy_hit.json");
    write_text(hit_path, json_bytes(hit.certificate));
    CHECK(check_certificate(hit_path));

    Json tampered = hit.certificate;
    tampered["witness"]["petals"] = Json::array({1, 2});  // wrong petal count
    write_text(hit_path, json_bytes(tampered));
    CHECK_FALSE(check_certificate(hit_path));

    // pointing at a missing family file is a corrupt certificate
    Json orphan = run.certificate;
    orphan["family_file"] = tmp.path("gone.json");
    std::string orphan_path = tmp.path("orphan.json");
    write_text(orphan_path, json_bytes(orphan));
    expect(errc::corrupt_certificate, [&] { check_certificate(orphan_path); });
}

TEST_CASE("two layer certificates re-validate") {
    TempDir tmp;

    LayeredFamily lf = two_layer_family(1);
    std::string fam_path = tmp.path("pair.json");
    write_text(fam_path, json_bytes(layered_to_json(lf)));
    TwoLayerRunOutcome run = two_layer_certificate(lf, fam_path);
    CHECK(run.free);
    std::string cert_path = tmp.path("pair_cert.json");
    write_text(cert_path, json_bytes(run.certificate));
    CHECK(check_certificate(cert_path));

    Json tampered = run.certificate;
    tampered["family_sha256"] = std::string(64, '0');
    write_text(cert_path, json_bytes(tampered));
    CHECK_FALSE(check_certificate(cert_path));

    // full consecutive layers of the 7-cube contain a copy at petal width 5
    SetFamily up(7, 6);
    SetFamily low(7, 5);
    std::vector<int> ground{1, 2, 3, 4, 5, 6, 7};
    for (int skip = 1; skip <= 7; ++skip) {
        std::vector<int> m;
        for (int e : ground)
            if (e != skip) m.push_back(e);
        up.insert(m);
    }
    for (int s1 = 1; s1 <= 7; ++s1)
        for (int s2 = s1 + 1; s2 <= 7; ++s2) {
            std::vector<int> m;
            for (int e : ground)
                if (e != s1 && e != s2) m.push_back(e);
            low.insert(m);
        }
    LayeredFamily dense(up, low);
    std::string dense_path = tmp.path("dense.json");
    write_text(dense_path, json_bytes(layered_to_json(dense)));
    TwoLayerRunOutcome hit = two_layer_certificate(dense, dense_path);
    CHECK_FALSE(hit.free);
    CHECK(hit.hit_i == 5);
    std::string hit_path = tmp.path("dense_cert.json");
    write_text(hit_path, json_bytes(hit.certificate));
    CHECK(check_certificate(hit_path));

    Json bad = hit.certificate;
    bad["witness"]["frees"] = Json::array({1, 2, 3});
    write_text(hit_path, json_bytes(bad));
    CHECK_FALSE(check_certificate(hit_path));
}

TEST_CASE("hitting certificates re-validate") {
    TempDir tmp;

    HittingFamily h = mod_level_family(6, 2);
    std::string fam_path = tmp.path("hit.json");
    write_text(fam_path, json_bytes(hitting_to_json(h)));
    HittingRunOutcome run = hitting_certificate(h, 2, fam_path);
    CHECK(run.ok);
    CHECK(run.certificate["result"] == "hits_all");
    std::string cert_path = tmp.path("hit_cert.json");
    write_text(cert_path, json_bytes(run.certificate));
    CHECK(check_certificate(cert_path));

    HittingFamily sparse(4);
    sparse.insert(0);
    std::string sparse_path = tmp.path("sparse.json");
    write_text(sparse_path, json_bytes(hitting_to_json(sparse)));
    HittingRunOutcome miss = hitting_certificate(sparse, 2, sparse_path);
    CHECK_FALSE(miss.ok);
    CHECK(miss.certificate["result"] == "missed");
    std::string miss_path = tmp.path("miss_cert.json");
    write_text(miss_path, json_bytes(miss.certificate));
    CHECK(check_certificate(miss_path));

    Json bad = miss.certificate;
    bad["d"] = 3;  // recorded subcube no longer has the claimed dimension
    write_text(miss_path, json_bytes(bad));
    CHECK_FALSE(check_certificate(miss_path));
}

TEST_CASE("oracle certificates re-run the search") {
    TempDir tmp;

    ExactResult ex = exact_ex(5, 3, {DaisyPattern(3, 2, 4)});
    SetFamily wit(5, 3);
    for (const auto& m : ex.witness) wit.insert(m);
    std::string wit_path = tmp.path("ex_witness.json");
    std::string wit_bytes = json_bytes(family_to_json(wit));
    write_text(wit_path, wit_bytes);
    Json cert = oracle_certificate(ex, wit_path, sha256_hex(wit_bytes), 9);
    CHECK(cert["value"] == "8");
    std::string cert_path = tmp.path("ex_cert.json");
    write_text(cert_path, json_bytes(cert));
    CHECK(check_certificate(cert_path));

    Json bad = cert;
    bad["value"] = "9";
    write_text(cert_path, json_bytes(bad));
    CHECK_FALSE(check_certificate(cert_path));

    ExactResult g = exact_g(3, 2);
    HittingFamily gw(3);
    for (const auto& row : g.witness) gw.insert(set_to_mask(row, 3));
    std::string gw_path = tmp.path("g_witness.json");
    std::string gw_bytes = json_bytes(hitting_to_json(gw));
    write_text(gw_path, gw_bytes);
    Json gcert = oracle_certificate(g, gw_path, sha256_hex(gw_bytes), 2);
    std::string gcert_path = tmp.path("g_cert.json");
    write_text(gcert_path, json_bytes(gcert));
    CHECK(check_certificate(gcert_path));

    Json gbad = gcert;
    gbad["witness_sha256"] = std::string(64, 'f');
    write_text(gcert_path, json_bytes(gbad));
    CHECK_FALSE(check_certificate(gcert_path));

    OracleRanges ranges;
    ranges.ex_max_n = 5;
    ranges.g_max_n = 3;
    ranges.l_max_n = 6;
    MonotonicityReport rep = monotonicity_suite(ranges);
    Json mcert = monotonicity_certificate(rep, ranges, 30);
    std::string mpath = tmp.path("mono.json");
    write_text(mpath, json_bytes(mcert));
    CHECK(check_certificate(mpath));
    mcert["checks"] = 1;
    write_text(mpath, json_bytes(mcert));
    CHECK_FALSE(check_certificate(mpath));
}

TEST_CASE("density and construct certificates re-derive") {
    TempDir tmp;

    Json dcert = density_certificate(gamma7_report(8), 1);
    std::string dpath = tmp.path("gamma7.json");
    write_text(dpath, json_bytes(dcert));
    CHECK(check_certificate(dpath));
    dcert["bound_num"] = "1";
    write_text(dpath, json_bytes(dcert));
    CHECK_FALSE(check_certificate(dpath));

    Json pcert = product_bound_certificate(product_bound(4, 8), 1);
    std::string ppath = tmp.path("product.json");
    write_text(ppath, json_bytes(pcert));
    CHECK(check_certificate(ppath));

    SetFamily f = basis_family(2, 3);
    std::string out_path = tmp.path("basis.json");
    std::string out_bytes = json_bytes(family_to_json(f));
    write_text(out_path, out_bytes);
    Json params;
    params["q"] = 2;
    params["r"] = 3;
    Json stats;
    stats["size"] = f.size();
    stats["density"] = rat_string(f.density());
    Json ccert = construct_certificate("basis", params, out_path, sha256_hex(out_bytes),
                                       stats, 4);
    std::string cpath = tmp.path("construct.json");
    write_text(cpath, json_bytes(ccert));
    CHECK(check_certificate(cpath));
    ccert["stats"]["size"] = f.size() + 1;
    write_text(cpath, json_bytes(ccert));
    CHECK_FALSE(check_certificate(cpath));

    // malformed certificates are corrupt, not false
    std::string junk_path = tmp.path("junk.json");
    write_text(junk_path, "not json");
    expect(errc::corrupt_certificate, [&] { check_certificate(junk_path); });
    write_text(junk_path, json_bytes(Json{{"kind", "mystery"}}));
    expect(errc::corrupt_certificate, [&] { check_certificate(junk_path); });
    write_text(junk_path, json_bytes(Json{{"no_kind", 1}}));
    expect(errc::corrupt_certificate, [&] { check_certificate(junk_path); });
    expect(errc::corrupt_certificate, [&] { check_certificate(tmp.path("absent.json")); });
}

TEST_CASE("volatile fields are quarantined") {
    ArcSearchResult arc = max_arc(2, 2, 2, 4);
    Json fast = arc_certificate(2, 2, 2, 4, arc, 5);
    Json slow = arc_certificate(2, 2, 2, 4, arc, 991);
    CHECK(json_bytes(fast) != json_bytes(slow));
    CHECK(canonical_certificate_bytes(fast) == canonical_certificate_bytes(slow));
    CHECK(canonical_certificate_bytes(fast).find("runtime_ms") == std::string::npos);
    // runtime_ms is the last key of every certificate
    const std::string raw = json_bytes(fast);
    CHECK(raw.rfind("runtime_ms") > raw.rfind("nodes"));
}
