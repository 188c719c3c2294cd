#include "doctest.h"

#include "lrec/oracles.hpp"
#include "lrec/rng.hpp"
#include "lrec/treecomb.hpp"

using namespace lrec;

TEST_SUITE_BEGIN("treecomb");

TEST_CASE("heap addressing and heights") {
    BinTree t(3);
    CHECK(t.node_count() == 15);
    CHECK(t.height_of(t.root()) == 3);
    CHECK(t.height_of(8) == 0);
    CHECK(t.is_leaf(8));
    CHECK(!t.is_leaf(7));
    CHECK(t.parent(7) == 3);
    CHECK(t.sibling(6) == 7);
    CHECK(t.is_ancestor_or_self(3, 14));
    CHECK(!t.is_ancestor_or_self(2, 14));
}

TEST_CASE("closure fires related triples in all directions") {
    BinTree t(2);
    CHECK(closure(t, {1}) == NodeSet{1});
    // Two sibling leaves force their parent.
    CHECK(closure(t, {4, 5}) == NodeSet{2, 4, 5});
    // Parent and one child force the sibling.
    CHECK(closure(t, {2, 4}) == NodeSet{2, 4, 5});
    // Cascade: leaves force a parent, parents force the root, root and a
    // parent force nothing new.
    CHECK(closure(t, {4, 5, 3}) == NodeSet{1, 2, 3, 4, 5});
}

TEST_CASE("closure preserves minimum height") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        BinTree t(4);
        NodeSet x;
        int size = rng.range(1, 6);
        for (int j = 0; j < size; ++j)
            x.insert(static_cast<NodeId>(1 + rng.below(t.node_count())));
        CHECK(min_height(t, closure(t, x)) == min_height(t, x));
    }
}

TEST_CASE("components of a full tree and of a split set") {
    BinTree t2(2);
    NodeSet all;
    for (NodeId v = 1; v <= t2.node_count(); ++v) all.insert(v);
    auto comps = components(t2, all);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].head == 1);
    CHECK(comps[0].frontier == NodeSet{4, 5, 6, 7});
    CHECK(comps[0].component_height == 2);
    CHECK(static_cast<int>(comps[0].frontier.size()) > comps[0].component_height);

    BinTree t3(3);
    auto split = components(t3, {1, 4, 8, 9});  // root apart from a filled triple
    REQUIRE(split.size() == 2);

    CHECK_THROWS_AS(components(t3, NodeSet{2, 4}), std::invalid_argument);  // not closed
}

TEST_CASE("enclosure tests") {
    BinTree t(2);
    CHECK(minimally_encloses(t, {3}, 3));          // trivial case
    CHECK(minimally_encloses(t, {2, 3}, 1));       // both children
    CHECK(!minimally_encloses(t, {2, 3, 5}, 1));   // extra node breaks minimality
    CHECK(minimally_encloses(t, {4, 5, 3}, 1));
    CHECK(!encloses(t, {2}, 1));
    CHECK(encloses(t, {1}, 1));
    CHECK(!minimally_encloses(t, {}, 1));
}

TEST_CASE("consistency on a height-1 tree") {
    BinTree t(1);
    OffsetFn rho;
    rho.p = 5;
    rho.set(1, 3);
    rho.set(2, 1);
    rho.set(3, 2);
    CHECK(is_consistent(t, rho));
    rho.set(1, 4);
    CHECK(!is_consistent(t, rho));
}

TEST_CASE("consistency matches the enclosing-sum oracle") {
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        BinTree t(3);
        OffsetFn rho;
        rho.p = 3;
        int dom = rng.range(1, 4);
        for (int j = 0; j < dom; ++j)
            rho.set(static_cast<NodeId>(1 + rng.below(t.node_count())), rng.range(0, 2));
        CHECK(is_consistent(t, rho) == oracles::consistent_by_enclosing_sums(t, rho));
    }
}

TEST_CASE("consistent extension applies child-sum and parent-minus-sibling rules") {
    BinTree t(2);
    OffsetFn rho;
    rho.p = 7;
    rho.set(4, 2);
    rho.set(5, 3);
    OffsetFn ext = extend_consistent(t, rho);
    CHECK(ext.at(2) == 5);  // parent of two known leaves
    CHECK(ext.domain() == NodeSet{2, 4, 5});

    OffsetFn rho2;
    rho2.p = 7;
    rho2.set(2, 5);
    rho2.set(4, 2);
    OffsetFn ext2 = extend_consistent(t, rho2);
    CHECK(ext2.at(5) == 3);  // sibling forced by parent minus child

    // A domain that is already closed extends to itself.
    OffsetFn rho3;
    rho3.p = 7;
    rho3.set(1, 1);
    rho3.set(4, 2);
    OffsetFn ext3 = extend_consistent(t, rho3);
    CHECK(ext3.domain() == NodeSet{1, 4});

    // Uniqueness: both elimination orders agree everywhere.
    CHECK(extend_consistent(t, rho, ExtendOrder::breadth_first).values ==
          extend_consistent(t, rho, ExtendOrder::depth_first).values);
}

TEST_CASE("free elements: zero offsets free everything, a root spike blocks") {
    BinTree t(2);
    NodeSet all;
    for (NodeId v = 1; v <= t.node_count(); ++v) all.insert(v);

    OffsetFn zero;
    zero.p = 3;
    zero.set(1, 0);
    CHECK(free_elements(t, {1}, all, zero) == closure(t, all));

    OffsetFn empty;
    empty.p = 3;
    CHECK(free_elements(t, {}, all, empty) == closure(t, all));

    OffsetFn spike;
    spike.p = 3;
    spike.set(1, 1);
    NodeSet free = free_elements(t, {1}, all, spike);
    // The component with head root and leaf frontier blocks the leaves.
    for (NodeId leaf : t.leaves()) CHECK(free.count(leaf) == 0);
}

TEST_CASE("free elements match the subset oracle") {
    Rng rng(17);
    for (int i = 0; i < 60; ++i) {
        BinTree t(3);
        OffsetFn rho;
        rho.p = 3;
        for (int j = 0; j < 2; ++j)
            rho.set(static_cast<NodeId>(1 + rng.below(t.node_count())), rng.range(0, 2));
        if (!is_consistent(t, rho)) continue;
        NodeSet x = rho.domain();
        NodeSet y = x;
        for (int j = 0; j < 2; ++j)
            y.insert(static_cast<NodeId>(1 + rng.below(t.node_count())));
        CHECK(free_elements(t, x, y, rho) == oracles::free_elements_bitmask(t, x, y, rho));
    }
}

TEST_CASE("forced extension zeroes exactly the free part and stays consistent") {
    BinTree t(2);
    OffsetFn zero;
    zero.p = 5;
    zero.set(1, 0);
    NodeSet all;
    for (NodeId v = 1; v <= t.node_count(); ++v) all.insert(v);
    OffsetFn forced = forced_extension(t, {1}, all, zero);
    CHECK(forced.is_zero());
    CHECK(forced.domain() == all);
}

TEST_CASE("lift of an empty base is zero and respects a large height gap") {
    BinTree t(5);
    OffsetFn empty;
    empty.p = 3;
    auto sigmas = lift_sequence(t, {}, empty, {{32, 33}, {16}}, 2);
    REQUIRE(sigmas.size() == 2);
    CHECK(sigmas[0].is_zero());
    CHECK(sigmas[1].is_zero());

    // A nonzero root offset, targets far below: the gap forces zero.
    BinTree t8(8);
    OffsetFn rho;
    rho.p = 5;
    rho.set(1, 2);
    NodeSet deep;
    deep.insert(*t8.leaves().begin());
    // height(root) - height(leaf) = 8 > 2(|X|+s) = 2(1+1) = 4.
    auto lifted = lift_sequence(t8, {1}, rho, {deep}, 1);
    REQUIRE(lifted.size() == 1);
    CHECK(lifted[0].is_zero());
}

TEST_CASE("obstruction sets avoid nonzero regions and sibling pairs") {
    BinTree t(4);
    OffsetFn rho;
    rho.p = 3;
    rho.set(2, 1);  // nonzero in the left half
    std::vector<NodeSet> ys{{24}};
    NodeSet h = lift_obstruction_set(t, {2}, rho, ys, 1);
    CHECK(!h.empty());
    for (NodeId v : h) {
        // No member's grandparent subtree contains the nonzero support node.
        CHECK(!t.is_ancestor_or_self(v >> 2, 2));
        if (v != t.root()) CHECK(h.count(t.sibling(v)) == 0);
    }
}

TEST_SUITE_END();
