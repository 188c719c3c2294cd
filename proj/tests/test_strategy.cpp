#include "doctest.h"

#include "lrec/rng.hpp"
#include "lrec/strategy.hpp"
#include "lrec/verify.hpp"

using namespace lrec;

namespace {

struct Ctx {
    Structure a, b;
    TreePairContext ctx;
};

Ctx make_ctx(int h, int p, std::vector<int> sigma, int ta, int tb) {
    TreeGroupSpec sa;
    sa.h = h;
    sa.p = p;
    sa.sigma = std::move(sigma);
    sa.t = ta;
    TreeGroupSpec sb = sa;
    sb.t = tb;
    Structure a = generate_instance(sa).structure;
    Structure b = generate_instance(sb).structure;
    auto ctx = TreePairContext::try_build(a, b);
    REQUIRE(ctx);
    return {std::move(a), std::move(b), std::move(*ctx)};
}

}  // namespace

TEST_SUITE_BEGIN("strategy");

TEST_CASE("tree pair decoding") {
    Ctx c = make_ctx(2, 3, {1, 0, 2, 1}, 0, 2);
    CHECK(c.ctx.p == 3);
    CHECK(c.ctx.tree.height() == 2);
    CHECK(c.ctx.root_offset == 2);
    ElemId e = *c.a.id_of("n5_r1");
    CHECK(c.ctx.node_of[e] == 5);
    CHECK(c.ctx.residue_of[e] == 1);
    CHECK(c.ctx.element(5, 4) == e);  // residues wrap mod p

    // Non-tree structures do not decode.
    StructureData d;
    d.universe = {"a", "b"};
    Structure plain = Structure::from_data(d);
    CHECK(!TreePairContext::try_build(plain, plain));
}

TEST_CASE("null height") {
    BinTree t(6);
    OffsetFn rho;
    rho.p = 5;
    CHECK(!null_height(t, rho));
    rho.set(1, 0);
    CHECK(!null_height(t, rho));  // zero support only
    rho.set(2, 3);                // height 5
    auto nh = null_height(t, rho);
    REQUIRE(nh);
    CHECK(*nh == 4);
}

TEST_CASE("offset bijections shift residues and compose additively") {
    Ctx c = make_ctx(1, 3, {1, 1}, 0, 1);
    OffsetFn zero;
    zero.p = 3;
    auto id = offset_permutation(c.ctx, zero);
    for (ElemId e = 0; e < id.size(); ++e) CHECK(id[e] == e);

    OffsetFn rho;
    rho.p = 3;
    rho.set(2, 1);
    auto g = offset_permutation(c.ctx, rho);
    CHECK(g[c.ctx.element(2, 2)] == c.ctx.element(2, 0));
    CHECK(g[c.ctx.element(3, 2)] == c.ctx.element(3, 2));

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        OffsetFn r1, r2, sum;
        r1.p = r2.p = sum.p = 3;
        for (NodeId v = 1; v <= c.ctx.tree.node_count(); ++v) {
            int a = rng.range(0, 2), b = rng.range(0, 2);
            r1.set(v, a);
            r2.set(v, b);
            sum.set(v, a + b);
        }
        auto g1 = offset_permutation(c.ctx, r1);
        auto g2 = offset_permutation(c.ctx, r2);
        auto gs = offset_permutation(c.ctx, sum);
        for (ElemId e = 0; e < g1.size(); ++e) CHECK(g2[g1[e]] == gs[e]);
    }
}

TEST_CASE("position offsets decode pebbles and pin the root") {
    Ctx c = make_ctx(2, 5, {1, 2, 3, 4}, 1, 3);
    PartialInjection f;
    f.insert(c.ctx.element(5, 2), c.ctx.element(5, 4));
    auto rho = position_offsets(c.ctx, f);
    REQUIRE(rho);
    CHECK(rho->at(1) == 2);  // root offset t_B - t_A
    CHECK(rho->at(5) == 2);

    PartialInjection crooked;
    crooked.insert(c.ctx.element(5, 2), c.ctx.element(6, 2));
    CHECK(!position_offsets(c.ctx, crooked));
}

TEST_CASE("extension response plays the closure and zero elsewhere") {
    Ctx c = make_ctx(2, 5, {0, 0, 0, 0}, 0, 2);
    PaperDuplicator dup(c.ctx);
    PartialInjection f;  // nothing pebbled: only the root offset is active
    OffsetFn sigma = dup.extension_offsets(f);
    CHECK(sigma.at(1) == 2);
    CHECK(sigma.domain() == NodeSet{1});  // closure of the root alone

    // With one child pebbled at offset 0, the other child is forced to 2.
    PartialInjection f2;
    f2.insert(c.ctx.element(2, 0), c.ctx.element(2, 0));
    OffsetFn sigma2 = dup.extension_offsets(f2);
    CHECK(sigma2.at(3) == 2);
}

TEST_CASE("extension responses keep positions partial isomorphisms under any pick") {
    Rng rng(99);
    for (int round = 0; round < 30; ++round) {
        int h = rng.range(2, 5);
        int p = std::vector<int>{3, 5, 7}[rng.below(3)];
        TreeGroupSpec sa = verify::random_treegroup(rng, h, p);
        TreeGroupSpec sb = sa;
        sb.t = (sa.t + 1 + static_cast<int>(rng.below(p - 1))) % p;
        Structure a = generate_instance(sa).structure;
        Structure b = generate_instance(sb).structure;

        GameConfig cfg;
        cfg.k = 3;
        cfg.q = 1;
        Match m(cfg, a, b, {});
        PaperDuplicator dup = PaperDuplicator::for_match(a, b);

        for (int mv = 0; mv < 3; ++mv) {
            auto g = dup.extension_bijection(m);
            ElemId pick = static_cast<ElemId>(rng.below(a.size()));
            std::string rej;
            m.apply_extension(g, pick, &rej);
            REQUIRE(rej.empty());
            CHECK(is_partial_isomorphism(m.position(), a, b));
        }
    }
}

TEST_CASE("class freeness by spike agrees between spike values") {
    Ctx c = make_ctx(2, 3, {1, 0, 2, 1}, 0, 1);
    Vocabulary voc;
    for (const auto& [name, rel] : c.a.relations()) voc.relations[name] = rel.arity;
    voc.constants.insert("t");

    GameConfig cfg;
    cfg.k = 4;
    cfg.q = 1;
    PartialInjection f0;
    f0.insert(*c.a.constant("t"), *c.b.constant("t"));
    Match m(cfg, c.a, c.b, f0);

    GraphOpenMove mv;
    mv.c = 1;
    mv.phi_edge = parse_formula("exists w. (S(w) & R(y1,w,x1))", voc);
    mv.phi_sim = parse_formula("S(x1) & S(y1)", voc);
    mv.a0 = {Value::elem(*c.a.constant("t"))};
    mv.ell0 = 3;
    std::string rej;
    m.start_graph_move(mv, &rej);
    REQUIRE(rej.empty());

    const auto& side = *m.graph_state().side_a;
    Rng rng(7);
    int checked = 0;
    for (int it = 0; it < 200; ++it) {
        // Random element tuple; its closure frontier is the node itself.
        ElemId e = static_cast<ElemId>(rng.below(c.a.size()));
        std::vector<Value> tuple{Value::elem(e)};
        NodeId u = c.ctx.node_of[e];
        NodeSet beta{1};
        if (u == 1) continue;
        bool f1 = is_free_in_class(c.ctx, side, tuple, u, beta, 1);
        bool f2 = is_free_in_class(c.ctx, side, tuple, u, beta, 2);
        CHECK(f1 == f2);
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("graph responses stay legal across random rounds") {
    Ctx c = make_ctx(3, 3, {1, 0, 2, 1, 0, 0, 2, 2}, 0, 1);
    Vocabulary voc;
    for (const auto& [name, rel] : c.a.relations()) voc.relations[name] = rel.arity;
    voc.constants.insert("t");

    GameConfig cfg;
    cfg.k = 4;
    cfg.q = 1;
    PartialInjection f0;
    f0.insert(*c.a.constant("t"), *c.b.constant("t"));

    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Match m(cfg, c.a, c.b, f0);
        GraphOpenMove mv;
        mv.c = 1;
        mv.phi_edge = parse_formula("exists w. (S(w) & R(y1,w,x1))", voc);
        mv.phi_sim = parse_formula("S(x1) & S(y1)", voc);
        mv.a0 = {Value::elem(*c.a.constant("t"))};
        mv.ell0 = 5;
        std::string rej;
        m.start_graph_move(mv, &rej);
        REQUIRE(rej.empty());

        PaperDuplicator dup(c.ctx);
        Rng rng(seed);
        for (int round = 0; round < 3; ++round) {
            if (m.graph_state().ell == 0) break;
            GraphReply reply = dup.graph_response(m);
            auto o = m.apply_graph_reply(reply, &rej);
            REQUIRE(rej.empty());
            REQUIRE(!o);  // the reply passes all three conditions

            // Step to a random successor if one exists.
            const auto& st = m.graph_state();
            std::uint32_t cls = st.side_a->class_of_tuple(st.current);
            auto succ = st.side_a->q.graph.out[cls];
            if (succ.empty()) break;
            std::sort(succ.begin(), succ.end());
            succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
            std::uint32_t target = succ[rng.below(succ.size())];
            std::uint32_t rep = st.side_a->q.members[target].front();
            o = m.apply_graph_step(st.side_a->space->tuple_of(rep), &rej);
            REQUIRE(rej.empty());
            REQUIRE(!o);
        }
        auto o = m.exit_graph_move();
        if (o) CHECK(o->winner == Winner::duplicator);  // only the k-bound may end it
        CHECK(is_partial_isomorphism(m.position(), c.a, c.b));
    }
}

TEST_CASE("null height drop per extension stays within the pebble budget bound") {
    TreeGroupSpec sa;
    sa.h = 6;
    sa.p = 5;
    sa.sigma.assign(64, 0);
    sa.t = 0;
    TreeGroupSpec sb = sa;
    sb.t = 1;
    Structure a = generate_instance(sa).structure;
    Structure b = generate_instance(sb).structure;
    auto ctx = TreePairContext::try_build(a, b);
    REQUIRE(ctx);

    GameConfig cfg;
    cfg.k = 3;
    cfg.q = 1;
    Rng rng(4);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Match m(cfg, a, b, {});
        PaperDuplicator dup(*ctx);
        std::optional<int> prev = std::nullopt;
        {
            auto rho = position_offsets(*ctx, m.position());
            REQUIRE(rho);
            prev = null_height(ctx->tree, *rho);
        }
        for (int mv = 0; mv < 3; ++mv) {
            auto g = dup.extension_bijection(m);
            ElemId pick = static_cast<ElemId>(rng.below(a.size()));
            std::string rej;
            m.apply_extension(g, pick, &rej);
            REQUIRE(rej.empty());
            auto rho = position_offsets(*ctx, m.position());
            REQUIRE(rho);
            auto nh = null_height(ctx->tree, *rho);
            if (prev && nh) CHECK(*nh >= *prev - cfg.k);
            if (!prev) CHECK(!nh ? true : *nh >= 0);
            prev = nh;
        }
    }
}

TEST_SUITE_END();
