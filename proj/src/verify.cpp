#include "lrec/verify.hpp"

#include "lrec/json_io.hpp"
#include "lrec/oracles.hpp"
#include "lrec/strategy.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace lrec {
namespace verify {

std::string SuiteReport::summary_json() const {
    std::ostringstream os;
    os << "{\"suite\":\"" << name << "\",\"cases\":" << cases
       << ",\"failures\":" << failures << ",\"ok\":" << (ok() ? "true" : "false");
    if (!first_counterexample.empty()) {
        std::string esc;
        for (char c : first_counterexample) {
            if (c == '"' || c == '\\') esc += '\\';
            esc += c;
        }
        os << ",\"first_counterexample\":\"" << esc << "\"";
    }
    os << "}";
    return os.str();
}

std::string SuiteReport::summary_text() const {
    std::ostringstream os;
    os << (ok() ? "PASS" : "FAIL") << " " << name << ": " << cases << " cases, " << failures
       << " failures";
    if (!first_counterexample.empty()) os << "\n  first counterexample: " << first_counterexample;
    for (const auto& n : notes) os << "\n  " << n;
    return os.str();
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

LabelledGraph random_labelled_graph(Rng& rng, int max_vertices, int max_label) {
    int n = rng.range(1, max_vertices);
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (rng.chance(1, 4)) edges.insert({static_cast<std::uint32_t>(a),
                                                static_cast<std::uint32_t>(b)});
    std::vector<std::set<BigInt>> labels(n);
    for (int v = 0; v < n; ++v) {
        int count = rng.range(0, 3);
        for (int i = 0; i < count; ++i) labels[v].insert(BigInt(rng.range(0, max_label)));
    }
    return LabelledGraph::make(n, edges, std::move(labels));
}

LabelledSemiGraph random_semigraph(Rng& rng, int max_vertices) {
    LabelledSemiGraph g;
    int n = rng.range(1, max_vertices);
    g.n = n;
    g.labels.resize(n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (rng.chance(1, 4)) g.edges.insert({static_cast<std::uint32_t>(a),
                                                  static_cast<std::uint32_t>(b)});
            if (rng.chance(1, 6)) g.sim.insert({static_cast<std::uint32_t>(a),
                                                static_cast<std::uint32_t>(b)});
        }
        int count = rng.range(0, 2);
        for (int i = 0; i < count; ++i) g.labels[a].insert(BigInt(rng.range(0, 10)));
    }
    return g;
}

TreeGroupSpec random_treegroup(Rng& rng, int h, int p) {
    TreeGroupSpec spec;
    spec.h = h;
    spec.p = p;
    spec.sigma.resize(1u << h);
    for (auto& v : spec.sigma) v = rng.range(0, p - 1);
    spec.t = rng.range(0, p - 1);
    return spec;
}

OffsetFn random_consistent_offsets(Rng& rng, const BinTree& t, int p, int support) {
    // Random values on a random node set, closed up; retry until consistent.
    for (int attempt = 0; attempt < 64; ++attempt) {
        OffsetFn rho;
        rho.p = p;
        for (int i = 0; i < support; ++i) {
            NodeId v = static_cast<NodeId>(1 + rng.below(t.node_count()));
            rho.set(v, rng.range(0, p - 1));
        }
        if (is_consistent(t, rho)) return rho;
    }
    OffsetFn zero;
    zero.p = p;
    zero.set(t.root(), 0);
    return zero;
}

// ---------------------------------------------------------------------------
// core
// ---------------------------------------------------------------------------

namespace {

Structure small_random_structure(Rng& rng, int max_n) {
    StructureData d;
    int n = rng.range(1, max_n);
    for (int i = 0; i < n; ++i) d.universe.push_back("u" + std::to_string(i));
    StructureData::Rel r;
    r.arity = 2;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (rng.chance(1, 3)) r.tuples.push_back({d.universe[a], d.universe[b]});
    d.relations["E"] = r;
    StructureData::Rel s;
    s.arity = 1;
    for (int a = 0; a < n; ++a)
        if (rng.chance(1, 2)) s.tuples.push_back({d.universe[a]});
    d.relations["S"] = s;
    return Structure::from_data(d);
}

PartialInjection random_injection(Rng& rng, std::size_t n, int size) {
    PartialInjection f;
    for (int i = 0; i < size; ++i)
        f.insert(static_cast<ElemId>(rng.below(n)), static_cast<ElemId>(rng.below(n)));
    return f;
}

}  // namespace

SuiteReport core_suite(std::uint64_t seed, int cases) {
    SuiteReport rep;
    rep.name = "core";
    Rng rng(seed);

    // Number-tuple encoding is injective for fixed width (exhaustive).
    for (std::uint64_t n = 0; n <= 4; ++n) {
        for (std::size_t m = 1; m <= 3; ++m) {
            std::map<BigInt, std::vector<std::uint64_t>> seen;
            std::vector<std::uint64_t> digits(m, 0);
            while (true) {
                ++rep.cases;
                BigInt code = encode_number_tuple(digits, n);
                auto [it, fresh] = seen.emplace(code, digits);
                if (!fresh) rep.fail("encoding collision at n=" + std::to_string(n));
                if (decode_number_tuple(code, n, m) != digits)
                    rep.fail("decode does not invert encode");
                std::size_t pos = m;
                while (pos > 0 && ++digits[pos - 1] == n + 1) digits[--pos] = 0;
                if (pos == 0) break;
            }
        }
    }

    // Spot values.
    ++rep.cases;
    if (encode_number_tuple(std::vector<std::uint64_t>{2, 1}, 2) != 5)
        rep.fail("<(2,1)> with n=2 must be 5");
    ++rep.cases;
    if (encode_number_tuple(std::vector<std::uint64_t>{3, 3, 3}, 3) != 63)
        rep.fail("<(3,3,3)> with n=3 must be 63");

    for (int i = 0; i < cases; ++i) {
        // Union-with-precedence is associative where defined.
        std::size_t n = 8;
        auto f = random_injection(rng, n, rng.range(0, 3));
        auto g = random_injection(rng, n, rng.range(0, 3));
        auto h = random_injection(rng, n, rng.range(0, 3));
        ++rep.cases;
        auto fg = compose_injection(f, g);
        auto gh = compose_injection(g, h);
        std::optional<PartialInjection> left, right;
        if (fg) left = compose_injection(*fg, h);
        if (gh) right = compose_injection(f, *gh);
        if (left && right && !(*left == *right)) rep.fail("composition not associative");

        // Partial isomorphism is symmetric under swap + inverse.
        Structure a = small_random_structure(rng, 5);
        StructureData bd = a.to_data();
        if (rng.chance(1, 2) && !bd.relations["E"].tuples.empty())
            bd.relations["E"].tuples.pop_back();
        Structure b = Structure::from_data(bd);
        auto fi = random_injection(rng, a.size(), rng.range(0, 3));
        ++rep.cases;
        if (is_partial_isomorphism(fi, a, b) != is_partial_isomorphism(fi.inverse(), b, a))
            rep.fail("partial isomorphism not symmetric under inversion");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// chi / quotient
// ---------------------------------------------------------------------------

SuiteReport chi_suite(std::uint64_t seed, int cases) {
    SuiteReport rep;
    rep.name = "chi";
    Rng rng(seed);
    constexpr std::uint64_t kFuel = 2000000;

    int produced = 0;
    while (produced < cases) {
        LabelledGraph g = random_labelled_graph(rng, 8, 8);
        std::uint32_t u = static_cast<std::uint32_t>(rng.below(g.n));
        BigInt ell = rng.range(-2, 20);
        if (oracles::naive_chi_cost(g, u, ell) > kFuel) continue;

        ++produced;
        ++rep.cases;
        std::uint64_t fuel = kFuel;
        auto expect = oracles::naive_chi(g, u, ell, fuel);
        if (!expect) {
            rep.fail("oracle fuel exhausted unexpectedly");
            continue;
        }
        if (chi(g, u, ell) != *expect) {
            std::ostringstream os;
            os << "chi mismatch on graph with " << g.n << " vertices, u=" << u
               << ", ell=" << ell.str();
            rep.fail(os.str());
        }
    }
    return rep;
}

SuiteReport quotient_suite(std::uint64_t seed, int cases) {
    SuiteReport rep;
    rep.name = "quotient";
    Rng rng(seed);
    for (int i = 0; i < cases; ++i) {
        LabelledSemiGraph g = random_semigraph(rng, 10);
        ++rep.cases;
        QuotientGraph got = quotient(g);
        QuotientGraph want = oracles::dsu_quotient(g);
        if (got.class_of != want.class_of || got.members != want.members ||
            got.graph.edges != want.graph.edges || got.graph.labels != want.graph.labels) {
            rep.fail("quotient disagrees with union-find oracle on " +
                     std::to_string(g.n) + " vertices");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// psp
// ---------------------------------------------------------------------------

SuiteReport psp_suite(std::uint64_t seed, int cases) {
    SuiteReport rep;
    rep.name = "psp";
    Rng rng(seed);
    const std::vector<int> primes{2, 3, 5};

    int produced = 0;
    while (produced < cases) {
        int h = rng.range(1, 3);
        int p = primes[rng.below(primes.size())];
        TreeGroupSpec spec = random_treegroup(rng, h, p);
        ++produced;

        PspInstance inst = generate_instance(spec);
        bool direct = solve_direct(inst);
        bool via_lfp = solve_via_lfp(inst);
        bool expected = expected_positivity(spec);
        ++rep.cases;
        if (direct != via_lfp || direct != expected) {
            std::ostringstream os;
            os << "solver disagreement at h=" << h << " p=" << p << " t=" << spec.t
               << " (direct=" << direct << " lfp=" << via_lfp << " expected=" << expected
               << ")";
            rep.fail(os.str());
        }

        // Closure residue uniqueness per tree node.
        ++rep.cases;
        auto closed = upward_closure(inst);
        std::map<NodeId, std::set<int>> residues;
        for (ElemId e : closed) {
            NodeId v;
            int r;
            parse_psp_element_name(inst.structure.name_of(e), &v, &r);
            residues[v].insert(r);
        }
        for (const auto& [v, rs] : residues) {
            if (rs.size() != 1) {
                rep.fail("node " + std::to_string(v) + " reaches " +
                         std::to_string(rs.size()) + " residues in the closure");
                break;
            }
        }

        // Canonical serialization: equal specs give identical bytes.
        ++rep.cases;
        if (structure_to_json(inst.structure) !=
            structure_to_json(generate_instance(spec).structure))
            rep.fail("generation is not canonical");
    }

    // Mutation check: admitting equal children breaks residue uniqueness.
    // sigma = (1,0): the honest closure reaches the root only at residue 1,
    // while same-leaf pairs sum to 0.
    {
        TreeGroupSpec spec;
        spec.h = 1;
        spec.p = 2;
        spec.sigma = {1, 0};
        spec.t = 1;
        StructureData d = generate_instance(spec).structure.to_data();
        auto& r = d.relations["R"];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (NodeId leaf : {2u, 3u})
                    r.tuples.push_back({psp_element_name(leaf, a), psp_element_name(leaf, b),
                                        psp_element_name(1, (a + b) % 2)});
        PspInstance mutated = PspInstance::wrap(Structure::from_data(d));
        auto closed = upward_closure(mutated);
        std::set<int> root_residues;
        for (ElemId e : closed) {
            NodeId v;
            int res;
            parse_psp_element_name(mutated.structure.name_of(e), &v, &res);
            if (v == 1) root_residues.insert(res);
        }
        ++rep.cases;
        if (root_residues.size() <= 1)
            rep.fail("mutation (same-child triples) was not detected by uniqueness");
        else
            rep.notes.push_back("mutation check: same-child triples break uniqueness as expected");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// treecomb
// ---------------------------------------------------------------------------

namespace {

NodeSet random_node_set(Rng& rng, const BinTree& t, int size) {
    NodeSet out;
    for (int i = 0; i < size; ++i)
        out.insert(static_cast<NodeId>(1 + rng.below(t.node_count())));
    return out;
}

std::optional<OffsetFn> union_offsets(const OffsetFn& a, const OffsetFn& b) {
    OffsetFn out = a;
    for (const auto& [v, val] : b.values) {
        auto it = out.values.find(v);
        if (it != out.values.end() && it->second != val) return std::nullopt;
        out.values[v] = val;
    }
    return out;
}

}  // namespace

SuiteReport treecomb_suite(std::uint64_t seed, int lift_cases) {
    SuiteReport rep;
    rep.name = "treecomb";
    Rng rng(seed);

    // min-h(cl X) = min-h(X), and the frontier bound per closed component.
    for (int i = 0; i < 300; ++i) {
        BinTree t(rng.range(1, 4));
        NodeSet x = random_node_set(rng, t, rng.range(1, 6));
        NodeSet cl = closure(t, x);
        ++rep.cases;
        if (min_height(t, cl) != min_height(t, x))
            rep.fail("closure changed the minimum height");
        for (const auto& comp : components(t, cl)) {
            ++rep.cases;
            if (static_cast<int>(comp.frontier.size()) <= comp.component_height)
                rep.fail("frontier bound |F| > height(X) violated");
        }
    }

    // Consistency versus the enclosing-sum characterization, exhaustively on
    // small trees and domains.
    for (int h = 1; h <= 3; ++h) {
        BinTree t(h);
        for (int p : {2, 3}) {
            Rng sub(rng.fork());
            for (int i = 0; i < 120; ++i) {
                OffsetFn rho;
                rho.p = p;
                int dom = sub.range(1, 4);
                for (int j = 0; j < dom; ++j)
                    rho.set(static_cast<NodeId>(1 + sub.below(t.node_count())),
                            sub.range(0, p - 1));
                ++rep.cases;
                bool via_extend = is_consistent(t, rho);
                bool via_sums = oracles::consistent_by_enclosing_sums(t, rho);
                if (via_extend != via_sums)
                    rep.fail("consistency disagrees with the enclosing-sum oracle");
                if (via_extend) {
                    // Unique extension, independent of elimination order.
                    ++rep.cases;
                    auto bfs = extend_consistent(t, rho, ExtendOrder::breadth_first);
                    auto dfs = extend_consistent(t, rho, ExtendOrder::depth_first);
                    if (bfs.values != dfs.values)
                        rep.fail("consistent extension depends on elimination order");
                    ++rep.cases;
                    for (const auto& [v, val] : rho.values)
                        if (bfs.at(v) != val) rep.fail("extension does not restrict to rho");
                }
            }
        }
    }

    // Forced extension stays consistent and restricts to rho; free elements
    // match the brute-force subset oracle on small trees.
    for (int i = 0; i < 500; ++i) {
        int h = rng.range(1, 5);
        BinTree t(h);
        int p = std::vector<int>{2, 3, 5}[rng.below(3)];
        OffsetFn rho = random_consistent_offsets(rng, t, p, rng.range(0, 3));
        NodeSet x = rho.domain();
        NodeSet y = x;
        NodeSet extra = random_node_set(rng, t, rng.range(1, 3));
        y.insert(extra.begin(), extra.end());

        ++rep.cases;
        try {
            OffsetFn forced = forced_extension(t, x, y, rho);
            for (const auto& [v, val] : rho.values)
                if (forced.at(v) != val) rep.fail("forced extension does not restrict to rho");
            if (!is_consistent(t, forced)) rep.fail("forced extension inconsistent");
            NodeSet want_dom = x;
            NodeSet free = free_elements(t, x, y, rho);
            want_dom.insert(free.begin(), free.end());
            if (forced.domain() != want_dom) rep.fail("forced extension domain mismatch");

            if (h <= 3) {
                ++rep.cases;
                if (free != oracles::free_elements_bitmask(t, x, y, rho))
                    rep.fail("free elements disagree with the subset oracle");
            }
        } catch (const std::exception& e) {
            rep.fail(std::string("forced extension raised: ") + e.what());
        }
    }

    // Lift sequences: pairwise consistency, the height-gap bound, and no
    // sibling pairs in the obstruction sets.
    for (int i = 0; i < lift_cases; ++i) {
        int h = rng.range(2, 8);
        BinTree t(h);
        int p = std::vector<int>{2, 3, 5}[rng.below(3)];
        OffsetFn rho = random_consistent_offsets(rng, t, p, rng.range(0, 3));
        NodeSet x = rho.domain();
        int r = rng.range(1, 4);
        std::size_t s = 3;
        std::vector<NodeSet> ys;
        for (int j = 0; j < r; ++j)
            ys.push_back(random_node_set(rng, t, rng.range(1, static_cast<int>(s))));

        ++rep.cases;
        try {
            auto sigmas = lift_sequence(t, x, rho, ys, s);
            OffsetFn prev;
            prev.p = p;
            for (std::size_t j = 0; j < sigmas.size(); ++j) {
                auto u1 = union_offsets(rho, prev);
                auto u2 = u1 ? union_offsets(*u1, sigmas[j]) : std::nullopt;
                if (!u2 || !is_consistent(t, *u2)) {
                    rep.fail("lift output breaks pairwise consistency");
                    break;
                }
                for (const auto& [yv, val] : sigmas[j].values) {
                    if (val == 0) continue;
                    bool witnessed = false;
                    for (const auto& [z, zv] : rho.values)
                        if (zv != 0 &&
                            t.height_of(yv) >=
                                t.height_of(z) - 2 * static_cast<int>(x.size() + s))
                            witnessed = true;
                    if (!witnessed) rep.fail("lift output breaks the height-gap bound");
                }
                prev = sigmas[j];
            }
            for (std::size_t j = 1; j <= ys.size(); ++j) {
                NodeSet hset = lift_obstruction_set(t, x, rho, ys, j);
                for (NodeId v : hset)
                    if (v != t.root() && hset.count(t.sibling(v))) {
                        rep.fail("obstruction set contains a sibling pair");
                        break;
                    }
            }
        } catch (const std::exception& e) {
            rep.fail(std::string("lift raised: ") + e.what());
        }
    }

    // Zero base offsets lift to all-zero extensions.
    {
        BinTree t(4);
        OffsetFn zero;
        zero.p = 3;
        std::vector<NodeSet> ys{{5, 9}, {3}};
        auto sigmas = lift_sequence(t, {}, zero, ys, 2);
        ++rep.cases;
        for (const auto& s : sigmas)
            if (!s.is_zero()) rep.fail("zero base lifted to a nonzero extension");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// game
// ---------------------------------------------------------------------------

SuiteReport game_suite(std::uint64_t seed, int matches) {
    SuiteReport rep;
    rep.name = "game";
    Rng rng(seed);

    for (int i = 0; i < matches; ++i) {
        // Small instance pairs; identical structures half of the time.
        int h = rng.range(1, 2);
        int p = rng.chance(1, 2) ? 2 : 3;
        TreeGroupSpec sa = random_treegroup(rng, h, p);
        TreeGroupSpec sb = sa;
        if (rng.chance(1, 2)) sb.t = (sb.t + 1) % p;
        Structure a = generate_instance(sa).structure;
        Structure b = generate_instance(sb).structure;

        GameConfig cfg;
        cfg.k = rng.range(2, 4);
        cfg.q = 1;

        std::uint64_t match_seed = rng.fork();
        bool paper = rng.chance(1, 2);

        auto play = [&]() {
            RandomSpoiler sp(match_seed);
            if (paper) {
                PaperDuplicator dup = PaperDuplicator::for_match(a, b);
                return run_match(cfg, a, b, {}, sp, dup, match_seed);
            }
            IdentityDuplicator dup;
            return run_match(cfg, a, b, {}, sp, dup, match_seed);
        };

        MatchResult r1 = play();
        MatchResult r2 = play();
        ++rep.cases;
        if (r1.transcript.lines != r2.transcript.lines)
            rep.fail("same seed produced different transcripts");

        ++rep.cases;
        ReplayResult replay = replay_transcript(cfg, a, b, r1.transcript);
        bool had_forfeit = false;
        for (const auto& line : r1.transcript.lines)
            if (line.find("\"forfeit\"") != std::string::npos) had_forfeit = true;
        if (!replay.ok) {
            rep.fail("replay failed: " + replay.error);
        } else if (!had_forfeit &&
                   replay.outcome->winner != r1.outcome.winner) {
            rep.fail("replay outcome differs");
        }

        // Identity duplicator never loses on identical structures.
        if (sa.t == sb.t) {
            ++rep.cases;
            if (r1.outcome.winner != Winner::duplicator && !paper)
                rep.fail("identity duplicator lost on identical structures");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// strategy
// ---------------------------------------------------------------------------

SuiteReport strategy_suite(std::uint64_t seed, const StrategyOptions& opts) {
    SuiteReport rep;
    rep.name = "strategy";
    Rng rng(seed);
    const std::vector<int> primes{5, 7};

    double worst_seconds = 0;
    int played = 0;
    while (played < opts.matches) {
        int h = opts.h_lo + played % (opts.h_hi - opts.h_lo + 1);
        int p = primes[(played / 7) % primes.size()];
        int k = 2 + (played / 3) % 2;
        TreeGroupSpec sa = random_treegroup(rng, h, p);
        TreeGroupSpec sb = sa;
        sb.t = (sb.t + 1) % p;

        Structure a = generate_instance(sa).structure;
        Structure b = generate_instance(sb).structure;

        GameConfig cfg;
        cfg.k = k;
        cfg.q = 1;

        std::uint64_t match_seed = rng.fork();
        PaperDuplicator dup = PaperDuplicator::for_match(a, b);

        auto t0 = std::chrono::steady_clock::now();
        MatchResult r = [&] {
            if (played % 2 == 0) {
                RandomSpoiler sp(match_seed);
                return run_match(cfg, a, b, {}, sp, dup, match_seed);
            }
            GreedySpoiler sp(match_seed);
            return run_match(cfg, a, b, {}, sp, dup, match_seed);
        }();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        worst_seconds = std::max(worst_seconds, secs);

        ++played;
        ++rep.cases;
        if (r.outcome.winner != Winner::duplicator) {
            std::ostringstream os;
            os << "paper duplicator lost at h=" << h << " p=" << p << " k=" << k
               << " seed=" << match_seed << ": " << r.outcome.reason;
            rep.fail(os.str());
        }
        ++rep.cases;
        if (r.outcome.reason.find("duplicator forfeits") != std::string::npos)
            rep.fail("paper duplicator forfeited");
        ++rep.cases;
        if (secs > opts.per_match_seconds) {
            std::ostringstream os;
            os << "match exceeded the time bound: " << secs << " s at h=" << h << " p=" << p;
            rep.fail(os.str());
        }
    }
    std::ostringstream note;
    note << "worst match time " << worst_seconds << " s over " << played << " matches";
    rep.notes.push_back(note.str());
    return rep;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

namespace {

Structure build_structure(int n, const std::map<std::string, std::pair<int, std::vector<std::vector<int>>>>& rels,
                          const std::map<std::string, int>& constants = {}) {
    StructureData d;
    for (int i = 0; i < n; ++i) d.universe.push_back("u" + std::to_string(i));
    for (const auto& [name, def] : rels) {
        StructureData::Rel r;
        r.arity = def.first;
        for (const auto& t : def.second) {
            std::vector<std::string> tuple;
            for (int e : t) tuple.push_back("u" + std::to_string(e));
            r.tuples.push_back(tuple);
        }
        d.relations[name] = r;
    }
    for (const auto& [name, e] : constants) d.constants[name] = "u" + std::to_string(e);
    return Structure::from_data(d);
}

}  // namespace

std::vector<GameFixture> formula_game_fixtures() {
    std::vector<GameFixture> out;

    // Pair PA: unary predicate of different cardinality.
    Structure pa_a = build_structure(6, {{"S", {1, {{0}, {1}, {2}}}}});
    Structure pa_b = build_structure(6, {{"S", {1, {{0}, {1}}}}});
    out.push_back({"PA-three-distinct", pa_a, pa_b,
                   "exists x. exists y. exists z. (S(x) & S(y) & S(z) & !(x = y) & !(x = z) & "
                   "!(y = z))",
                   {}, 3, 0});
    out.push_back({"PA-count-3", pa_a, pa_b, "count{x : S(x)} = 3", {}, 1, 0});
    out.push_back({"PA-count-2", pa_a, pa_b, "count{x : S(x)} = 2", {}, 1, 0});
    out.push_back({"PA-cocount", pa_a, pa_b, "count{x : !S(x)} = 4", {}, 1, 0});
    out.push_back({"PA-witness-count", pa_a, pa_b,
                   "exists x. (S(x) & count{y : S(y)} = 3)", {}, 2, 0});

    // Pair PB: directed cycle versus path.
    Structure pb_a = build_structure(6, {{"E", {2, {{0, 1}, {1, 2}, {2, 0}}}}});
    Structure pb_b = build_structure(6, {{"E", {2, {{0, 1}, {1, 2}}}}});
    out.push_back({"PB-outdeg-count", pb_a, pb_b,
                   "count{x : exists y. E(x,y)} = 3", {}, 2, 0});
    out.push_back({"PB-three-cycle", pb_a, pb_b,
                   "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(z,x))", {}, 3, 0});
    out.push_back({"PB-unit-outdeg", pb_a, pb_b,
                   "count{x : count{y : E(x,y)} = 1} = 3", {}, 2, 0});
    out.push_back({"PB-indeg-count", pb_a, pb_b,
                   "count{x : exists y. E(y,x)} = 3", {}, 2, 0});

    // Pair PC: six-cycle versus two triangles (symmetric edges).
    auto cyc6 = std::vector<std::vector<int>>{};
    for (int i = 0; i < 6; ++i) {
        cyc6.push_back({i, (i + 1) % 6});
        cyc6.push_back({(i + 1) % 6, i});
    }
    auto tri2 = std::vector<std::vector<int>>{};
    for (auto [x, y] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 0},
                                                        {3, 4}, {4, 5}, {5, 3}}) {
        tri2.push_back({x, y});
        tri2.push_back({y, x});
    }
    Structure pc_a = build_structure(6, {{"E", {2, cyc6}}});
    Structure pc_b = build_structure(6, {{"E", {2, tri2}}});
    out.push_back({"PC-distance-two", pc_a, pc_b,
                   "exists x. exists y. (!(x = y) & !E(x,y) & exists z. (E(x,z) & E(z,y)))",
                   {}, 3, 0});
    out.push_back({"PC-distance-two-count", pc_a, pc_b,
                   "count{x : exists y. (E(x,y) & exists z. (E(y,z) & !E(x,z) & !(x = z)))} = 6",
                   {}, 3, 0});

    // Pair PD: a self-loop on one side.
    Structure pd_a = build_structure(6, {{"E", {2, {{0, 0}}}}});
    Structure pd_b = build_structure(6, {{"E", {2, {}}}});
    out.push_back({"PD-loop", pd_a, pd_b, "exists x. E(x,x)", {}, 1, 0});
    out.push_back({"PD-loop-count", pd_a, pd_b, "count{x : E(x,x)} = 1", {}, 1, 0});

    // Pair PE: tree-group instances of height 1 over Z_2.
    TreeGroupSpec pe_spec;
    pe_spec.h = 1;
    pe_spec.p = 2;
    pe_spec.sigma = {1, 1};
    pe_spec.t = 0;
    Structure pe_a = generate_instance(pe_spec).structure;
    pe_spec.t = 1;
    Structure pe_b = generate_instance(pe_spec).structure;
    out.push_back({"PE-sum-pair", pe_a, pe_b,
                   "exists x. exists y. (S(x) & S(y) & R(x,y,t))", {}, 3, 0});
    out.push_back({"PE-sum-pair-distinct", pe_a, pe_b,
                   "exists x. exists y. (S(x) & S(y) & !(x = y) & R(x,y,t))", {}, 4, 0});
    out.push_back({"PE-sum-count", pe_a, pe_b,
                   "count{x : (S(x) & exists y. (S(y) & R(x,y,t)))} = 2", {}, 3, 0});
    {
        Assignment env;
        env[{"r", Sort::number}] = Value::num(1);
        out.push_back({"PE-lrec", pe_a, pe_b,
                       "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); false; (S(u) & %p = 0) | "
                       "(u = t & %p = 2))(t; %r)",
                       env, 4, 1});
        out.push_back({"PE-lrec-quotient", pe_a, pe_b,
                       "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); S(u) & S(v); (S(u) & %p = 0) "
                       "| (u = t & %p = 1))(t; %r)",
                       env, 4, 1});
    }

    // Pair PF: height 1 over Z_3.
    TreeGroupSpec pf_spec;
    pf_spec.h = 1;
    pf_spec.p = 3;
    pf_spec.sigma = {1, 1};
    pf_spec.t = 2;
    Structure pf_a = generate_instance(pf_spec).structure;
    pf_spec.t = 0;
    Structure pf_b = generate_instance(pf_spec).structure;
    out.push_back({"PF-sum-pair", pf_a, pf_b,
                   "exists x. exists y. (S(x) & S(y) & !(x = y) & R(x,y,t))", {}, 4, 0});
    {
        Assignment env;
        env[{"r", Sort::number}] = Value::num(1);
        out.push_back({"PF-lrec", pf_a, pf_b,
                       "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); false; (S(u) & %p = 0) | "
                       "(u = t & %p = 2))(t; %r)",
                       env, 4, 1});
    }
    return out;
}

std::vector<BijectionFixture> bijection_fixtures() {
    std::vector<BijectionFixture> out;

    Structure s3 = build_structure(6, {{"S", {1, {{0}, {1}, {2}}}}});
    Structure s3_shift = build_structure(6, {{"S", {1, {{3}, {4}, {5}}}}});
    Structure s2 = build_structure(6, {{"S", {1, {{0}, {1}}}}});

    out.push_back({"identical", s3, s3, 3, true});
    out.push_back({"isomorphic-shift", s3, s3_shift, 3, true});
    out.push_back({"card-mismatch-r1", s3, s2, 1, false});
    out.push_back({"card-mismatch-r0", s3, s2, 0, true});

    Structure loop = build_structure(6, {{"E", {2, {{0, 0}}}}});
    Structure noloop = build_structure(6, {{"E", {2, {}}}});
    out.push_back({"loop-r1", loop, noloop, 1, false});

    auto sym = [](std::vector<std::pair<int, int>> edges) {
        std::vector<std::vector<int>> out;
        for (auto [x, y] : edges) {
            out.push_back({x, y});
            out.push_back({y, x});
        }
        return out;
    };
    Structure c4 = build_structure(6, {{"E", {2, sym({{0, 1}, {1, 2}, {2, 3}, {3, 0}})}}});
    Structure m2 = build_structure(6, {{"E", {2, sym({{0, 1}, {2, 3}})}}});
    out.push_back({"c4-vs-2k2-r1", c4, m2, 1, true});
    out.push_back({"c4-vs-2k2-r2", c4, m2, 2, false});

    Structure c6 = build_structure(
        6, {{"E", {2, sym({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}})}}});
    Structure t2 = build_structure(6,
                                   {{"E", {2, sym({{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}})}}});
    out.push_back({"c6-vs-2c3-r2", c6, t2, 2, true});
    out.push_back({"c6-vs-2c3-r3", c6, t2, 3, false});

    Structure cyc = build_structure(6, {{"E", {2, {{0, 1}, {1, 2}, {2, 0}}}}});
    Structure path = build_structure(6, {{"E", {2, {{0, 1}, {1, 2}}}}});
    out.push_back({"cycle-vs-path-r2", cyc, path, 2, false});

    return out;
}

std::vector<std::string> low_rank_sentences() {
    return {
        "exists x. S(x)",
        "forall x. (S(x) | !S(x))",
        "count{x : S(x)} = 64",
        "count{x : S(x)} = 3",
        "exists x. exists y. R(x,y,t)",
        "exists x. R(x,x,t)",
        "S(t)",
        "exists x. (S(x) & exists y. R(t,x,y))",
        "forall x. forall y. (!R(x,y,t) | !(x = y))",
        "exists %m. count{x : S(x)} = %m",
        "forall x. (!S(x) | exists y. exists z. R(x,y,z))",
        "count{x : exists y. R(t,y,x)} = 0",
        "lrec[u;v;%p](false; false; false)(t; 0)",
        "lrec[u;v;%p](false; false; S(u) & %p = 0)(t; 0)",
        "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); false; (S(u) & %p = 0) | (u = t & %p = 2))(t; 0)",
        "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); false; (S(u) & %p = 0) | (u = t & %p = 2))(t; 1)",
        "lrec[u;v;%p](exists w. R(u,v,w); false; S(u) & %p = 1)(t; 2)",
        "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); S(u) & S(v); (S(u) & %p = 0) | (u = t & %p = 1))(t; 3)",
        "exists x. (!(x = t) & lrec[u;v;%p](false; false; u = t & %p = 0)(x; 0))",
        "count{x : lrec[u;v;%p](false; false; S(u) & %p = 0)(x; 0)} = 64",
        "exists %m. (count{x : S(x)} = %m & lrec[u;v;%p](false; false; S(u) & %p = %m)(t; 0))",
    };
}

SuiteReport formula_game_suite(std::uint64_t seed) {
    SuiteReport rep;
    rep.name = "formula-game";
    auto fixtures = formula_game_fixtures();
    for (const auto& fx : fixtures) {
        Vocabulary voc;
        for (const auto& [name, rel] : fx.a.relations()) voc.relations[name] = rel.arity;
        for (const auto& [name, _] : fx.a.constants()) voc.constants.insert(name);
        FormulaPtr phi = parse_formula(fx.formula, voc);

        // The fixture must actually distinguish the pair.
        ++rep.cases;
        bool va = eval_formula(phi, fx.a, fx.env);
        Assignment env_b = fx.env;  // no element values are used in fixture envs
        bool vb = eval_formula(phi, fx.b, env_b);
        if (va == vb) {
            rep.fail(fx.name + ": fixture formula does not distinguish the pair");
            continue;
        }

        GameConfig cfg;
        cfg.k = fx.k;
        cfg.q = fx.q;

        for (int dup_kind = 0; dup_kind < 2; ++dup_kind) {
            ++rep.cases;
            FormulaSpoiler spoiler(phi, fx.env);
            MatchResult r = [&] {
                if (dup_kind == 0) {
                    IdentityDuplicator dup;
                    return run_match(cfg, fx.a, fx.b, {}, spoiler, dup, seed);
                }
                PaperDuplicator dup = PaperDuplicator::for_match(fx.a, fx.b);
                return run_match(cfg, fx.a, fx.b, {}, spoiler, dup, seed);
            }();
            if (r.outcome.winner != Winner::spoiler)
                rep.fail(fx.name + ": formula spoiler failed against " +
                         (dup_kind == 0 ? "identity" : "paper") + ": " + r.outcome.reason);
        }
    }
    return rep;
}

SuiteReport bijection_oracle_suite() {
    SuiteReport rep;
    rep.name = "bijection-oracle";
    for (const auto& fx : bijection_fixtures()) {
        ++rep.cases;
        bool got = bijection_game_oracle(fx.a, fx.b, fx.rounds);
        if (got != fx.duplicator_wins)
            rep.fail(fx.name + ": oracle says " + (got ? "duplicator" : "spoiler") +
                     ", hand classification says " +
                     (fx.duplicator_wins ? "duplicator" : "spoiler"));
    }
    return rep;
}

SuiteReport low_rank_agreement_suite(const TreeGroupSpec& spec_a, int t_b,
                                     const EvalBudget& budget) {
    SuiteReport rep;
    rep.name = "low-rank-agreement";
    TreeGroupSpec spec_b = spec_a;
    spec_b.t = t_b;
    Structure a = generate_instance(spec_a).structure;
    Structure b = generate_instance(spec_b).structure;

    Evaluator eval_a(a, budget), eval_b(b, budget);
    for (const auto& text : low_rank_sentences()) {
        ++rep.cases;
        FormulaPtr phi = parse_formula(text, Vocabulary::psp());
        if (rank(phi) > 3 || iteration_degree(phi) > 1) {
            rep.fail("sentence exceeds the rank/degree envelope: " + text);
            continue;
        }
        try {
            bool va = eval_a.eval(*phi, {});
            bool vb = eval_b.eval(*phi, {});
            if (va != vb) rep.fail("sentence distinguishes the pair: " + text);
        } catch (const std::exception& e) {
            rep.fail("sentence raised " + std::string(e.what()) + ": " + text);
        }
    }
    return rep;
}

}  // namespace verify
}  // namespace lrec
