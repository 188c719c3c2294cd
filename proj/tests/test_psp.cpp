#include "doctest.h"

#include "lrec/json_io.hpp"
#include "lrec/psp.hpp"
#include "lrec/rng.hpp"
#include "lrec/verify.hpp"

using namespace lrec;

TEST_SUITE_BEGIN("psp");

TEST_CASE("spec validation") {
    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 4;  // not prime
    spec.sigma = {0, 0};
    spec.t = 0;
    CHECK(!spec.validate().empty());
    spec.p = 2;
    CHECK(spec.validate().empty());
    spec.h = 0;
    CHECK(!spec.validate().empty());
    spec.h = 2;
    CHECK(!spec.validate().empty());  // sigma now has the wrong length
}

TEST_CASE("generated instance shape at height 1") {
    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 2;
    spec.sigma = {1, 1};
    spec.t = 0;
    PspInstance inst = generate_instance(spec);
    const Structure& s = inst.structure;
    CHECK(s.size() == 6);  // 3 nodes x 2 residues
    CHECK(s.relation("S")->tuples.size() == 2);
    CHECK(s.holds("S", {*s.id_of("n2_r1")}));
    CHECK(s.holds("S", {*s.id_of("n3_r1")}));
    CHECK(*s.constant("t") == *s.id_of("n1_r0"));

    // No triple uses the same child twice.
    for (const auto& t : s.relation("R")->tuples) {
        NodeId u, v;
        int a, b;
        REQUIRE(parse_psp_element_name(s.name_of(t[0]), &u, &a));
        REQUIRE(parse_psp_element_name(s.name_of(t[1]), &v, &b));
        CHECK(u != v);
    }
}

TEST_CASE("triples add residues modulo p") {
    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 3;
    spec.sigma = {1, 1};
    spec.t = 2;
    const Structure& s = generate_instance(spec).structure;
    CHECK(s.holds("R", {*s.id_of("n2_r1"), *s.id_of("n3_r1"), *s.id_of("n1_r2")}));
    CHECK(s.holds("R", {*s.id_of("n3_r1"), *s.id_of("n2_r1"), *s.id_of("n1_r2")}));
    CHECK(!s.holds("R", {*s.id_of("n2_r1"), *s.id_of("n3_r1"), *s.id_of("n1_r0")}));
}

TEST_CASE("direct solver: empty premises, exact sum, target membership") {
    // S empty: nothing is derivable.
    StructureData d;
    d.universe = {"a", "b", "c"};
    d.relations["R"] = {3, {{"a", "b", "c"}}};
    d.relations["S"] = {1, {}};
    d.constants["t"] = "c";
    CHECK(!solve_direct(PspInstance::wrap(Structure::from_data(d))));

    // t already a premise.
    d.relations["S"] = {1, {{"c"}}};
    CHECK(solve_direct(PspInstance::wrap(Structure::from_data(d))));

    TreeGroupSpec spec;
    spec.h = 1;
    spec.p = 2;
    spec.sigma = {1, 1};
    spec.t = 0;
    CHECK(solve_direct(generate_instance(spec)));
    CHECK(expected_positivity(spec));
    spec.t = 1;
    CHECK(!solve_direct(generate_instance(spec)));
    CHECK(!expected_positivity(spec));
}

TEST_CASE("three solvers agree on random instances") {
    Rng rng(123);
    for (int i = 0; i < 100; ++i) {
        int h = rng.range(1, 3);
        int p = std::vector<int>{2, 3, 5}[rng.below(3)];
        TreeGroupSpec spec = verify::random_treegroup(rng, h, p);
        PspInstance inst = generate_instance(spec);
        bool direct = solve_direct(inst);
        CHECK(direct == solve_via_lfp(inst));
        CHECK(direct == expected_positivity(spec));
    }
}

TEST_CASE("wrap validates the vocabulary shape") {
    StructureData d;
    d.universe = {"a"};
    CHECK_THROWS_AS(PspInstance::wrap(Structure::from_data(d)), std::invalid_argument);
}

TEST_CASE("treegroup json round-trip") {
    TreeGroupSpec spec;
    spec.h = 2;
    spec.p = 3;
    spec.sigma = {1, 0, 2, 1};
    spec.t = 1;
    TreeGroupSpec back = treegroup_from_json(treegroup_to_json(spec));
    CHECK(back.h == spec.h);
    CHECK(back.p == spec.p);
    CHECK(back.sigma == spec.sigma);
    CHECK(back.t == spec.t);
    CHECK_THROWS_AS(treegroup_from_json("{\"h\":1,\"p\":4,\"sigma\":[0,0],\"t\":0}"),
                    std::invalid_argument);
}

TEST_SUITE_END();
