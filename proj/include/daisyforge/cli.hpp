#pragma once

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "daisyforge/cert.hpp"

namespace daisyforge {

namespace detail {

// "1,0,2" -> {1, 0, 2}; flag parse problems are usage errors.
inline std::vector<int> parse_coords(const std::string& spec) {
    std::vector<int> coords;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(tok, &used);
            require(used == tok.size(), errc::usage, "--w expects comma-separated integers");
            coords.push_back(v);
        } catch (const std::exception&) {
            fail(errc::usage, "--w expects comma-separated integers");
        }
    }
    require(!coords.empty(), errc::usage, "--w must name at least one coordinate");
    return coords;
}

// Derived artifact names sit next to the primary output: "x.json" -> "x_".
inline std::string ref_prefix_for(const std::string& out_path) {
    if (out_path.empty()) return "plan_";
    std::string stem = out_path;
    std::size_t dot = stem.rfind('.');
    std::size_t slash = stem.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        stem = stem.substr(0, dot);
    return stem + "_";
}

inline void emit(std::ostream& os, const Json& certificate, const std::string& copy_path) {
    std::string bytes = json_bytes(certificate);
    os << bytes;
    if (!copy_path.empty()) write_text(copy_path, bytes);
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"exact constructions, searches, and certified bounds for cube-hitting families"};
    app.require_subcommand(1);

    int q = 0, r = 0, s = 0, t = 0, n = 0, d = 0, K = 8, cap = 0, m = 0;
    int dim = 0, j = 0, threads = 1;
    std::string out_path, family_path, witness_path, mode_str = "deterministic", w_spec;
    std::string check_path;
    std::uint64_t budget_members = 0, budget_nodes = 0;

    auto add_budget_flags = [&](CLI::App* sub) {
        sub->add_option("--budget-members", budget_members, "cap on materialized layer members");
        sub->add_option("--budget-nodes", budget_nodes, "cap on search-tree nodes");
    };
    auto add_out = [&](CLI::App* sub, const std::string& what) {
        sub->add_option("--out", out_path, what);
    };

    CLI::App* construct = app.add_subcommand("construct", "materialize families, layers, and plans");
    construct->require_subcommand(1);
    CLI::App* c_basis = construct->add_subcommand("basis", "pattern-free family from vector bases");
    c_basis->add_option("--q", q, "field size")->required();
    c_basis->add_option("--r", r, "layer index")->required();
    add_out(c_basis, "family file to write");
    add_budget_flags(c_basis);
    CLI::App* c_blowup = construct->add_subcommand("blowup", "replace ground elements by groups");
    c_blowup->add_option("--family", family_path, "input family file")->required();
    c_blowup->add_option("--m", m, "group size")->required();
    add_out(c_blowup, "family file to write");
    add_budget_flags(c_blowup);
    CLI::App* c_two = construct->add_subcommand("two-layer", "consecutive layer pair over GF(5)");
    c_two->add_option("--r", r, "upper layer index")->required();
    c_two->add_option("--w", w_spec, "avoided direction as comma-separated coordinates");
    add_out(c_two, "layered family file to write");
    add_budget_flags(c_two);
    CLI::App* c_mod = construct->add_subcommand("mod-level", "levels divisible by d+1");
    c_mod->add_option("--n", n, "cube dimension")->required();
    c_mod->add_option("--d", d, "subcube dimension to hit")->required();
    add_out(c_mod, "hitting family file to write");
    add_budget_flags(c_mod);
    CLI::App* c_plan = construct->add_subcommand("plan", "residue-striped level plan");
    c_plan->add_option("--n", n, "cube dimension")->required();
    c_plan->add_option("--d", d, "subcube dimension (6 or 7)")->required();
    add_out(c_plan, "plan file to write; families go next to it");
    add_budget_flags(c_plan);

    CLI::App* verify = app.add_subcommand("verify", "re-check claims about serialized families");
    verify->require_subcommand(1);
    CLI::App* v_daisy = verify->add_subcommand("daisy", "search a family for a daisy pattern");
    v_daisy->add_option("--family", family_path, "family file")->required();
    v_daisy->add_option("--s", s, "petal size")->required();
    v_daisy->add_option("--t", t, "petal ground size")->required();
    v_daisy->add_option("--mode", mode_str, "deterministic or fast")
        ->check(CLI::IsMember({"deterministic", "fast"}));
    v_daisy->add_option("--threads", threads, "worker count");
    add_out(v_daisy, "certificate copy to write");
    add_budget_flags(v_daisy);
    CLI::App* v_two = verify->add_subcommand("two-layer", "search a layer pair for a 6-cube copy");
    v_two->add_option("--family", family_path, "layered family file")->required();
    add_out(v_two, "certificate copy to write");
    add_budget_flags(v_two);
    CLI::App* v_hit = verify->add_subcommand("hitting", "check a vertex set against all d-subcubes");
    v_hit->add_option("--family", family_path, "hitting family file")->required();
    v_hit->add_option("--d", d, "subcube dimension")->required();
    add_out(v_hit, "certificate copy to write");

    CLI::App* lemma = app.add_subcommand("lemma", "independence searches over small vector spaces");
    lemma->require_subcommand(1);
    CLI::App* l_arc = lemma->add_subcommand("arc", "largest j-independent configuration");
    l_arc->add_option("--q", q, "field size")->required();
    l_arc->add_option("--dim", dim, "vector space dimension")->required();
    l_arc->add_option("--j", j, "independence arity")->required();
    l_arc->add_option("--cap", cap, "stop growing beyond this size")->required();
    l_arc->add_option("--threads", threads, "worker count");
    add_out(l_arc, "certificate copy to write");
    add_budget_flags(l_arc);
    CLI::App* l_frame = lemma->add_subcommand("frame", "extensions of the standard frame");
    l_frame->add_option("--q", q, "field size")->required();
    l_frame->add_option("--dim", dim, "vector space dimension")->required();
    l_frame->add_option("--threads", threads, "worker count");
    add_out(l_frame, "certificate copy to write");
    add_budget_flags(l_frame);
    CLI::App* l_pair = lemma->add_subcommand("pairwise", "no q+2 pairwise independent vectors");
    l_pair->add_option("--q", q, "field size")->required();
    add_out(l_pair, "certificate copy to write");
    CLI::App* l_any = lemma->add_subcommand("any-q", "the pairwise bound across valid q");
    l_any->add_option("--q", q, "field size")->required();
    add_out(l_any, "certificate copy to write");
    add_budget_flags(l_any);

    CLI::App* oracle = app.add_subcommand("oracle", "exact desk-scale searches");
    oracle->require_subcommand(1);
    CLI::App* o_ex = oracle->add_subcommand("ex", "largest pattern-free layer family");
    o_ex->add_option("--n", n, "ground set size")->required();
    o_ex->add_option("--r", r, "layer index")->required();
    o_ex->add_option("--s", s, "petal size (with --t: a single pattern)");
    o_ex->add_option("--t", t, "petal ground size (alone: the doubly-free pair)");
    o_ex->add_option("--w", witness_path, "witness family file to write");
    add_out(o_ex, "results table to write");
    add_budget_flags(o_ex);
    CLI::App* o_g = oracle->add_subcommand("g", "smallest family hitting every d-subcube");
    o_g->add_option("--n", n, "cube dimension")->required();
    o_g->add_option("--d", d, "subcube dimension")->required();
    o_g->add_option("--w", witness_path, "witness hitting file to write");
    add_out(o_g, "results table to write");
    add_budget_flags(o_g);
    CLI::App* o_l = oracle->add_subcommand("l", "largest 6-cube-free consecutive layer pair");
    o_l->add_option("--n", n, "ground set size")->required();
    o_l->add_option("--r", r, "upper layer index")->required();
    o_l->add_option("--w", witness_path, "witness layered file to write");
    add_out(o_l, "results table to write");
    add_budget_flags(o_l);
    CLI::App* o_mono = oracle->add_subcommand("monotone", "cross-check oracle values against each other");
    add_out(o_mono, "certificate copy to write");
    add_budget_flags(o_mono);

    CLI::App* density = app.add_subcommand("density", "exact rational bound derivations");
    density->require_subcommand(1);
    CLI::App* d_prod = density->add_subcommand("product", "two-sided product enclosure");
    d_prod->add_option("--q", q, "base")->required();
    d_prod->add_option("--K", K, "truncation length");
    add_out(d_prod, "certificate copy to write");
    CLI::App* d_g7 = density->add_subcommand("gamma7", "7-cube hitting density bound");
    d_g7->add_option("--K", K, "truncation length");
    add_out(d_g7, "report file to write");
    CLI::App* d_g6 = density->add_subcommand("gamma6", "6-cube hitting density bound");
    d_g6->add_option("--K", K, "truncation length");
    add_out(d_g6, "report file to write");
    CLI::App* d_triv = density->add_subcommand("trivial", "the one-level-in-(d+1) benchmark");
    d_triv->add_option("--d", d, "cube dimension")->required();
    add_out(d_triv, "certificate copy to write");

    CLI::App* check = app.add_subcommand("check", "re-verify a stored certificate");
    check->add_option("path", check_path, "certificate file")->required();
    add_out(check, "verdict copy to write");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("daisyforge");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        detail::Stopwatch sw;
        Budget budget(budget_members ? budget_members : Budget::default_member_slots(),
                      budget_nodes);

        auto emit_family_construct = [&](const std::string& op, Json params, const SetFamily& f) {
            Json artifact = family_to_json(f);
            std::string bytes = json_bytes(artifact);
            if (!out_path.empty()) write_text(out_path, bytes);
            Json stats;
            stats["n"] = f.n();
            stats["r"] = f.r();
            stats["size"] = f.size();
            stats["density"] = rat_string(f.density());
            detail::emit(out, construct_certificate(op, params, out_path, sha256_hex(bytes),
                                                    stats, sw.ms()),
                         "");
            return 0;
        };

        if (c_basis->parsed()) {
            Json params;
            params["q"] = q;
            params["r"] = r;
            return emit_family_construct("basis", params, basis_family(q, r, budget));
        }
        if (c_blowup->parsed()) {
            SetFamily f = family_from_json(parse_json(read_text(family_path), family_path));
            Json params;
            params["family"] = family_path;
            params["m"] = m;
            return emit_family_construct("blowup", params, blow_up(f, m, budget));
        }
        if (c_two->parsed()) {
            LayeredFamily lf = [&] {
                if (w_spec.empty()) return two_layer_family(r, budget);
                std::vector<int> coords = detail::parse_coords(w_spec);
                require(static_cast<int>(coords.size()) == r, errc::usage,
                        "--w needs exactly r coordinates");
                for (int c : coords)
                    require(c >= 0 && c < 5, errc::usage, "--w coordinates must lie in [0, 5)");
                return two_layer_family(r, FqVector{FiniteField(5), std::move(coords)}, budget);
            }();
            Json artifact = layered_to_json(lf);
            std::string bytes = json_bytes(artifact);
            if (!out_path.empty()) write_text(out_path, bytes);
            Json params;
            params["r"] = r;
            if (!w_spec.empty()) params["w"] = w_spec;
            Json stats;
            stats["n"] = lf.n();
            stats["upper_size"] = lf.upper.size();
            stats["lower_size"] = lf.lower.size();
            stats["density_sum"] = rat_string(lf.density_sum());
            detail::emit(out, construct_certificate("two-layer", params, out_path,
                                                    sha256_hex(bytes), stats, sw.ms()),
                         "");
            return 0;
        }
        if (c_mod->parsed()) {
            HittingFamily h = mod_level_family(n, d, budget);
            Json artifact = hitting_to_json(h);
            std::string bytes = json_bytes(artifact);
            if (!out_path.empty()) write_text(out_path, bytes);
            Json params;
            params["n"] = n;
            params["d"] = d;
            Json stats;
            stats["vertex_count"] = h.vertex_count();
            stats["density"] = rat_string(Rational(BigInt(h.vertex_count()),
                                                   BigInt(1) << h.n()));
            detail::emit(out, construct_certificate("mod-level", params, out_path,
                                                    sha256_hex(bytes), stats, sw.ms()),
                         "");
            return 0;
        }
        if (c_plan->parsed()) {
            StripedPlan plan = striped_plan(n, d, budget);
            std::string prefix = detail::ref_prefix_for(out_path);
            Json artifact = plan_to_json(plan, prefix);
            std::string bytes = json_bytes(artifact);
            if (!out_path.empty()) {
                write_text(out_path, bytes);
                for (const auto& [lvl, fam] : plan.level_families)
                    write_text(prefix + "level" + std::to_string(lvl) + ".json",
                               json_bytes(family_to_json(fam)));
                if (plan.pair_family)
                    write_text(prefix + "pair.json",
                               json_bytes(layered_to_json(*plan.pair_family)));
            }
            Json params;
            params["n"] = n;
            params["d"] = d;
            Json stats;
            stats["levels"] = plan.levels.size();
            std::size_t materialized = 0;
            for (const auto& lv : plan.levels) materialized += lv.materialized ? 1 : 0;
            stats["materialized"] = materialized;
            detail::emit(out, construct_certificate("plan", params, out_path, sha256_hex(bytes),
                                                    stats, sw.ms()),
                         "");
            return 0;
        }

        if (v_daisy->parsed()) {
            SetFamily f = family_from_json(parse_json(read_text(family_path), family_path));
            SearchMode mode =
                mode_str == "fast" ? SearchMode::fast : SearchMode::deterministic;
            DaisyRunOutcome res = daisy_free_certificate(f, DaisyPattern(f.r(), s, t),
                                                         family_path, mode, threads, budget);
            detail::emit(out, res.certificate, out_path);
            return res.free ? 0 : 2;
        }
        if (v_two->parsed()) {
            LayeredFamily lf = layered_from_json(parse_json(read_text(family_path), family_path));
            TwoLayerRunOutcome res = two_layer_certificate(lf, family_path, budget);
            detail::emit(out, res.certificate, out_path);
            return res.free ? 0 : 2;
        }
        if (v_hit->parsed()) {
            HittingFamily h = hitting_from_json(parse_json(read_text(family_path), family_path));
            HittingRunOutcome res = hitting_certificate(h, d, family_path);
            detail::emit(out, res.certificate, out_path);
            return res.ok ? 0 : 2;
        }

        if (l_arc->parsed()) {
            ArcSearchResult res = max_arc(q, dim, j, cap, threads, budget);
            detail::emit(out, arc_certificate(q, dim, j, cap, res, sw.ms()), out_path);
            return 0;
        }
        if (l_frame->parsed()) {
            ArcSearchResult res = frame_search(q, dim, threads, budget);
            detail::emit(out, frame_certificate(q, dim, res, sw.ms()), out_path);
            return 0;
        }
        if (l_pair->parsed()) {
            bool holds = q_plus_two_pairwise(q);
            detail::emit(out, pairwise_certificate(q, false, holds, sw.ms()), out_path);
            return holds ? 0 : 2;
        }
        if (l_any->parsed()) {
            bool holds = q_plus_two_any_q(q, budget);
            detail::emit(out, pairwise_certificate(q, true, holds, sw.ms()), out_path);
            return holds ? 0 : 2;
        }

        auto emit_oracle = [&](const ExactResult& res, const Json& witness_artifact) {
            std::string wit_sha;
            if (!witness_path.empty()) {
                std::string bytes = json_bytes(witness_artifact);
                write_text(witness_path, bytes);
                wit_sha = sha256_hex(bytes);
            }
            if (!out_path.empty())
                write_text(out_path, oracle_csv_header() + "\n" +
                                         oracle_csv_row(res, witness_path, sw.ms()) + "\n");
            detail::emit(out, oracle_certificate(res, witness_path, wit_sha, sw.ms()), "");
            return 0;
        };

        if (o_ex->parsed()) {
            std::vector<DaisyPattern> pats;
            if (s > 0 && t > 0)
                pats.emplace_back(r, s, t);
            else if (t > 0)
                pats = ex_patterns(r, t);
            ExactResult res = exact_ex(n, r, pats, budget);
            SetFamily wit(n, r);
            for (const auto& mem : res.witness) wit.insert(mem);
            return emit_oracle(res, family_to_json(wit));
        }
        if (o_g->parsed()) {
            ExactResult res = exact_g(n, d, budget);
            HittingFamily wit(n);
            for (const auto& row : res.witness) wit.insert(set_to_mask(row, n));
            return emit_oracle(res, hitting_to_json(wit));
        }
        if (o_l->parsed()) {
            ExactResult res = exact_l(n, r, budget);
            SetFamily up(n, r), low(n, r - 1);
            for (std::size_t idx = 0; idx < res.witness.size(); ++idx) {
                if (static_cast<int>(idx) < res.witness_split)
                    up.insert(res.witness[idx]);
                else
                    low.insert(res.witness[idx]);
            }
            return emit_oracle(res, layered_to_json(LayeredFamily(std::move(up), std::move(low))));
        }
        if (o_mono->parsed()) {
            OracleRanges ranges;
            ranges.budget = budget;
            MonotonicityReport rep = monotonicity_suite(ranges);
            detail::emit(out, monotonicity_certificate(rep, ranges, sw.ms()), out_path);
            return rep.ok() ? 0 : 2;
        }

        if (d_prod->parsed()) {
            detail::emit(out, product_bound_certificate(product_bound(q, K), sw.ms()), out_path);
            return 0;
        }
        if (d_g7->parsed() || d_g6->parsed()) {
            DensityReport rep = d_g7->parsed() ? gamma7_report(K) : gamma6_report(K);
            if (!out_path.empty()) write_text(out_path, json_bytes(density_report_to_json(rep)));
            detail::emit(out, density_certificate(rep, sw.ms()), "");
            return 0;
        }
        if (d_triv->parsed()) {
            detail::emit(out, trivial_certificate(d, trivial_upper(d), sw.ms()), out_path);
            return 0;
        }

        if (check->parsed()) {
            bool truth = check_certificate(check_path);
            Json verdict;
            verdict["kind"] = "check";
            verdict["certificate"] = check_path;
            verdict["result"] = truth;
            verdict["runtime_ms"] = sw.ms();
            detail::emit(out, verdict, out_path);
            return truth ? 0 : 2;
        }
    } catch (const error& e) {
        err << e.what() << "\n";
        return 1;
    }
    err << "Usage: no runnable subcommand\n";
    return 1;
}

inline int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? argc - 1 : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace daisyforge
