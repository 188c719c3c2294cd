#include "doctest.h"

#include "lrec/eval.hpp"
#include "lrec/json_io.hpp"
#include "lrec/oracles.hpp"
#include "lrec/psp.hpp"
#include "lrec/rng.hpp"
#include "lrec/verify.hpp"

#include <algorithm>

using namespace lrec;

namespace {

Structure make_path(int n) {
    StructureData d;
    for (int i = 0; i < n; ++i) d.universe.push_back("p" + std::to_string(i));
    StructureData::Rel e;
    e.arity = 2;
    for (int i = 0; i + 1 < n; ++i)
        e.tuples.push_back({"p" + std::to_string(i), "p" + std::to_string(i + 1)});
    d.relations["E"] = e;
    StructureData::Rel s;
    s.arity = 1;
    s.tuples.push_back({"p0"});
    d.relations["S"] = s;
    return Structure::from_data(d);
}

Vocabulary vocab_of(const Structure& s) {
    Vocabulary v;
    for (const auto& [name, rel] : s.relations()) v.relations[name] = rel.arity;
    for (const auto& [name, _] : s.constants()) v.constants.insert(name);
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("recursion on labelled graphs: isolated vertices and base guards") {
    // Isolated vertex with 0 in its label set holds at every counter.
    LabelledGraph g = LabelledGraph::make(1, {}, {{BigInt(0)}});
    CHECK(chi(g, 0, 0));
    CHECK(chi(g, 0, 5));
    CHECK(chi(g, 0, BigInt("123456789012345678901234567890")));
    CHECK(!chi(g, 0, -1));

    LabelledGraph g2 = LabelledGraph::make(1, {}, {{BigInt(1)}});
    CHECK(!chi(g2, 0, 0));
    CHECK(!chi(g2, 0, 7));
}

TEST_CASE("recursion counts successors at the divided counter") {
    // Edge u -> v, C(u) = {1}, C(v) = {0}: u holds at 1 because v holds at 0.
    LabelledGraph g = LabelledGraph::make(2, {{0, 1}}, {{BigInt(1)}, {BigInt(0)}});
    CHECK(chi(g, 0, 1));
    CHECK(chi(g, 1, 0));
    CHECK(!chi(g, 0, 0));  // at 0 the successor is probed at -1

    std::uint64_t fuel = 1000;
    auto naive = oracles::naive_chi(g, 0, 1, fuel);
    REQUIRE(naive);
    CHECK(*naive == chi(g, 0, 1));
}

TEST_CASE("memoized recursion equals the naive recursion on random graphs") {
    Rng rng(3);
    int done = 0;
    while (done < 120) {
        LabelledGraph g = verify::random_labelled_graph(rng, 8, 8);
        std::uint32_t u = static_cast<std::uint32_t>(rng.below(g.n));
        BigInt ell = rng.range(-2, 20);
        if (oracles::naive_chi_cost(g, u, ell) > 500000) continue;
        std::uint64_t fuel = 500000;
        auto want = oracles::naive_chi(g, u, ell, fuel);
        REQUIRE(want);
        CHECK(chi(g, u, ell) == *want);
        ++done;
    }
}

TEST_CASE("label edits only affect the vertex and its ancestors") {
    Rng rng(9);
    for (int it = 0; it < 40; ++it) {
        LabelledGraph g = verify::random_labelled_graph(rng, 6, 6);
        std::uint32_t target = static_cast<std::uint32_t>(rng.below(g.n));
        LabelledGraph mutated = g;
        mutated.labels[target].insert(BigInt(rng.range(0, 6)));

        // Reachability to the target (vertices with a path to it).
        std::vector<bool> reaches(g.n, false);
        reaches[target] = true;
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& [a, b] : g.edges)
                if (reaches[b] && !reaches[a]) reaches[a] = changed = true;
        }

        for (std::uint32_t v = 0; v < g.n; ++v) {
            for (int ell = 0; ell <= 6; ++ell) {
                if (chi(g, v, ell) != chi(mutated, v, ell)) CHECK(reaches[v]);
            }
        }
    }
}

TEST_CASE("quotient merges components, edges, and labels") {
    LabelledSemiGraph g;
    g.n = 3;  // a=0, b=1, c=2
    g.sim = {{0, 1}};
    g.edges = {{1, 2}};
    g.labels = {{BigInt(0)}, {}, {BigInt(4)}};
    QuotientGraph q = quotient(g);
    REQUIRE(q.members.size() == 2);
    CHECK(q.members[0] == std::vector<std::uint32_t>{0, 1});
    CHECK(q.members[1] == std::vector<std::uint32_t>{2});
    CHECK(q.graph.edges.count({0, 1}) == 1);
    CHECK(q.graph.labels[0] == std::set<BigInt>{BigInt(0)});

    // Empty sim: identity quotient.
    LabelledSemiGraph plain;
    plain.n = 3;
    plain.edges = {{0, 2}};
    plain.labels.resize(3);
    QuotientGraph qp = quotient(plain);
    CHECK(qp.members.size() == 3);
    CHECK(qp.graph.edges.count({0, 2}) == 1);
}

TEST_CASE("quotient partition is the coarsest sim-connected partition") {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        LabelledSemiGraph g = verify::random_semigraph(rng, 8);
        QuotientGraph q = quotient(g);
        // Sim-related vertices share a class.
        for (const auto& [a, b] : g.sim) CHECK(q.class_of[a] == q.class_of[b]);
        // Every class is sim-connected: grown from any seed by sim-adjacency
        // it covers the whole class.
        for (const auto& members : q.members) {
            std::set<std::uint32_t> seen{members.front()};
            bool grew = true;
            while (grew) {
                grew = false;
                for (const auto& [a, b] : g.sim) {
                    if (seen.count(a) && !seen.count(b)) seen.insert(b), grew = true;
                    if (seen.count(b) && !seen.count(a)) seen.insert(a), grew = true;
                }
            }
            CHECK(seen == std::set<std::uint32_t>(members.begin(), members.end()));
        }
    }
}

TEST_CASE("hat recursion is the recursion on the quotient") {
    // Two sim-equivalent isolated vertices with labels {0} and {}.
    LabelledSemiGraph g;
    g.n = 2;
    g.sim = {{0, 1}};
    g.labels = {{BigInt(0)}, {}};
    CHECK(chi_hat(g, 0, 3));
    CHECK(chi_hat(g, 1, 3));

    Rng rng(33);
    for (int i = 0; i < 60; ++i) {
        LabelledSemiGraph sg = verify::random_semigraph(rng, 6);
        QuotientGraph q = oracles::dsu_quotient(sg);
        for (std::uint32_t v = 0; v < sg.n; ++v)
            CHECK(chi_hat(sg, v, 4) == chi(q.graph, q.class_of[v], 4));
    }
}

TEST_CASE("basic first-order and counting semantics") {
    Structure s = make_path(4);
    Vocabulary voc = vocab_of(s);
    CHECK(eval_formula(parse_formula("exists x. S(x)", voc), s, {}));
    CHECK(!eval_formula(parse_formula("forall x. S(x)", voc), s, {}));
    CHECK(eval_formula(parse_formula("count{x : S(x)} = 1", voc), s, {}));
    CHECK(!eval_formula(parse_formula("count{x : S(x)} = 2", voc), s, {}));

    Assignment env;
    env[{"m", Sort::number}] = Value::num(1);
    CHECK(eval_formula(parse_formula("count{x : S(x)} = %m", voc), s, env));
    env[{"m", Sort::number}] = Value::num(2);
    CHECK(!eval_formula(parse_formula("count{x : S(x)} = %m", voc), s, env));

    CHECK_THROWS_AS(eval_formula(parse_formula("S(y)", voc), s, {}), std::invalid_argument);
    Assignment bad;
    bad[{"y", Sort::element}] = Value::num(1);
    CHECK_THROWS_AS(eval_formula(parse_formula("S(y)", voc), s, bad), std::invalid_argument);
}

TEST_CASE("least fixed point reaches transitive closure") {
    Structure s = make_path(5);
    Vocabulary voc = vocab_of(s);
    // p0 reaches p4 through the edge relation.
    auto phi = parse_formula("lfp[X,u](S(u) | exists v. (X(v) & E(v,u)))(y)", voc);
    Assignment env;
    env[{"y", Sort::element}] = Value::elem(*s.id_of("p4"));
    CHECK(eval_formula(phi, s, env));

    // Unreached when the chain is cut: p0 does not reach itself backwards.
    auto back = parse_formula("lfp[X,u](E(y,u) | exists v. (X(v) & E(v,u)))(y)", voc);
    env[{"y", Sort::element}] = Value::elem(*s.id_of("p4"));
    CHECK(!eval_formula(back, s, env));
}

TEST_CASE("interpretations: identity copy and node arithmetic") {
    Structure s = make_path(2);
    Interpretation interp;
    interp.dimension = 1;
    interp.position_sorts = {Sort::element};
    interp.x_vars = {{"x1", Sort::element}};
    Vocabulary voc = vocab_of(s);
    interp.relations.push_back(
        {"E", 2, {{"a1", Sort::element}, {"a2", Sort::element}},
         parse_formula("E(a1,a2)", voc)});
    Structure out = apply_interpretation(interp, s, {});
    CHECK(out.size() == s.size());
    CHECK(out.relation("E")->tuples.size() == s.relation("E")->tuples.size());

    // Untyped dimension-1 node set over a 2-element universe: 2 + 3 nodes.
    Interpretation untyped = interp;
    untyped.position_sorts = {std::nullopt};
    untyped.relations.clear();
    untyped.relations.push_back(
        {"D", 1, {{"x1", Sort::element}}, parse_formula("x1 = x1", voc)});
    Structure wide = apply_interpretation(untyped, s, {});
    CHECK(wide.size() == 5);
    CHECK(wide.relation("D")->tuples.size() == 2);  // element slice only
}

TEST_CASE("interpretation congruence quotients and detects non-congruences") {
    Structure s = make_path(4);
    Vocabulary voc = vocab_of(s);
    Interpretation interp;
    interp.dimension = 1;
    interp.position_sorts = {Sort::element};
    interp.x_vars = {{"x1", Sort::element}};
    interp.y_vars = {{"y1", Sort::element}};
    // Everything equivalent: needs every relation to be constant; S is not.
    interp.eps = parse_formula("x1 = x1 | y1 = y1", voc);
    interp.relations.push_back({"S", 1, {{"a1", Sort::element}}, parse_formula("S(a1)", voc)});
    CHECK_THROWS_AS(apply_interpretation(interp, s, {}), std::invalid_argument);

    // Equivalence by S-membership is a congruence for S.
    interp.eps = parse_formula("(S(x1) & S(y1)) | (!S(x1) & !S(y1))", voc);
    Structure out = apply_interpretation(interp, s, {});
    CHECK(out.size() == 2);
    CHECK(out.relation("S")->tuples.size() == 1);
}

TEST_CASE("materialized semi-graphs match a direct pairwise evaluation") {
    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 3;
    spec.sigma = {1, 1};
    spec.t = 2;
    Structure s = generate_instance(spec).structure;
    Vocabulary voc = vocab_of(s);

    SemiGraphInterp si;
    si.untyped = true;
    si.u_vars = {{"x1", Sort::element}};
    si.v_vars = {{"y1", Sort::element}};
    si.edge = parse_formula("exists w. (S(w) & R(y1,w,x1))", voc);
    si.merge = parse_formula("S(x1) & S(y1)", voc);
    si.label = nullptr;

    MaterializedSemiGraph msg = materialize_semigraph(si, s, {});
    REQUIRE(msg.space->size() == 9 + 10);

    // Direct pairwise oracle over the same node set.
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges, sim;
    for (std::uint32_t i = 0; i < msg.space->size(); ++i) {
        auto ti = msg.space->tuple_of(i);
        if (ti[0].sort != Sort::element) continue;
        for (std::uint32_t j = 0; j < msg.space->size(); ++j) {
            auto tj = msg.space->tuple_of(j);
            if (tj[0].sort != Sort::element) continue;
            Assignment env;
            env[{"x1", Sort::element}] = ti[0];
            env[{"y1", Sort::element}] = tj[0];
            if (eval_formula(si.edge, s, env)) edges.insert({i, j});
            if (eval_formula(si.merge, s, env)) sim.insert({i, j});
        }
    }
    CHECK(msg.graph.edges == edges);
    CHECK(msg.graph.sim == sim);
}

TEST_CASE("recursion operator: isolated anchors follow the zero-label rule") {
    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 2;
    spec.sigma = {1, 1};
    spec.t = 0;
    Structure s = generate_instance(spec).structure;
    Vocabulary voc = vocab_of(s);

    // No edges, 0 in the label set of the anchor: true at every counter.
    CHECK(eval_formula(
        parse_formula("lrec[u;v;%p](false; false; u = t & %p = 0)(t; 1)", voc), s, {}));
    CHECK(eval_formula(
        parse_formula("lrec[u;v;%p](false; false; u = t & %p = 0)(t; 0)", voc), s, {}));
    // 0 not in the label set: false.
    CHECK(!eval_formula(
        parse_formula("lrec[u;v;%p](false; false; u = t & %p = 1)(t; 1)", voc), s, {}));
}

TEST_CASE("recursion operator agrees with the quotient recursion on its graph") {
    Structure s = make_path(4);
    Vocabulary voc = vocab_of(s);
    // Edges follow E; a node is labelled {0} when S holds, so membership at
    // counter ell spreads along chains of in-degree one.
    std::string text = "lrec[u;v;%p](E(v,u); false; S(u) & %p = 0)(y; %r)";
    FormulaPtr phi = parse_formula(text, voc);

    SemiGraphInterp si;
    si.u_vars = {{"u", Sort::element}};
    si.v_vars = {{"v", Sort::element}};
    si.p_vars = {{"p", Sort::number}};
    si.edge = parse_formula("E(v,u)", voc);
    si.merge = f_bool(false);
    si.label = parse_formula("S(u) & %p = 0", voc);
    MaterializedSemiGraph msg = materialize_semigraph(si, s, {});
    QuotientGraph q = quotient(msg.graph);

    for (std::uint64_t ell = 0; ell <= 6; ++ell) {
        for (ElemId e = 0; e < s.size(); ++e) {
            Assignment env;
            env[{"y", Sort::element}] = Value::elem(e);
            env[{"r", Sort::number}] = Value::num(ell % (s.number_max() + 1));
            std::vector<Value> node{Value::elem(e)};
            bool direct = chi(q.graph, q.class_of[msg.space->index_of(node)],
                              BigInt(ell % (s.number_max() + 1)));
            CHECK(eval_formula(phi, s, env) == direct);
        }
    }
}

TEST_CASE("evaluation is invariant under structure isomorphism") {
    Rng rng(77);
    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 2;
    spec.sigma = {1, 0};
    spec.t = 1;
    Structure s = generate_instance(spec).structure;

    // Random relabeling.
    StructureData d = s.to_data();
    std::vector<std::string> names = d.universe;
    std::vector<std::string> shuffled = names;
    rng.shuffle(shuffled);
    std::map<std::string, std::string> eta;
    for (std::size_t i = 0; i < names.size(); ++i) eta[names[i]] = "w" + shuffled[i];
    StructureData d2;
    for (const auto& e : d.universe) d2.universe.push_back(eta[e]);
    for (const auto& [name, rel] : d.relations) {
        StructureData::Rel r;
        r.arity = rel.arity;
        for (const auto& t : rel.tuples) {
            std::vector<std::string> mapped;
            for (const auto& e : t) mapped.push_back(eta[e]);
            r.tuples.push_back(mapped);
        }
        d2.relations[name] = r;
    }
    for (const auto& [name, e] : d.constants) d2.constants[name] = eta[e];
    Structure s2 = Structure::from_data(d2);

    Vocabulary voc = vocab_of(s);
    std::vector<std::string> sentences{
        "exists x. exists y. (S(x) & S(y) & R(x,y,t))",
        "count{x : S(x)} = 2",
        "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); false; (S(u) & %p = 0) | (u = t & %p = 2))(t; 1)",
        "lrec[u;v;%p](exists w. (S(w) & R(v,w,u)); S(u) & S(v); (S(u) & %p = 0) | (u = t & %p = 1))(t; 1)",
    };
    for (const auto& text : sentences) {
        FormulaPtr phi = parse_formula(text, voc);
        CHECK(eval_formula(phi, s, {}) == eval_formula(phi, s2, {}));
    }
}

TEST_CASE("budgets stop oversized materializations loudly") {
    Structure s = make_path(4);
    Vocabulary voc = vocab_of(s);
    EvalBudget tiny;
    tiny.max_nodes = 3;
    auto phi = parse_formula("lrec[u;v;%p](E(u,v); false; S(u) & %p = 0)(y; 0)", voc);
    Assignment env;
    env[{"y", Sort::element}] = Value::elem(0);
    CHECK_THROWS_AS(eval_formula(phi, s, env, tiny), BudgetError);
}

TEST_CASE("semigraph json round-trips") {
    LabelledSemiGraph g;
    g.n = 3;
    g.names = {"a", "b", "c"};
    g.edges = {{0, 1}};
    g.sim = {{1, 2}};
    g.labels.resize(3);
    g.labels[0].insert(BigInt(2));
    std::string j = semigraph_to_json(g);
    LabelledSemiGraph back = semigraph_from_json(j);
    CHECK(back.n == 3);
    CHECK(back.edges == g.edges);
    CHECK(back.sim == g.sim);
    CHECK(back.labels[0] == g.labels[0]);
}

TEST_SUITE_END();
