#include "doctest.h"

#include "lrec/core.hpp"
#include "lrec/json_io.hpp"

using namespace lrec;

namespace {

StructureData minimal() {
    StructureData d;
    d.universe = {"a"};
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("validate accepts the smallest legal structure") {
    CHECK(validate_structure(minimal()).empty());
}

TEST_CASE("validate flags arity mismatches, unknown elements, empty universes") {
    StructureData d = minimal();
    d.relations["R"] = {3, {{"a", "a"}}};
    auto errors = validate_structure(d);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].find("arity mismatch") != std::string::npos);

    d = minimal();
    d.constants["t"] = "zzz";
    errors = validate_structure(d);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].find("unknown element") != std::string::npos);

    d = StructureData{};
    errors = validate_structure(d);
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("empty universe") != std::string::npos);

    d = minimal();
    d.relations["R"] = {2, {{"a", "b"}}};
    errors = validate_structure(d);
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("unknown element") != std::string::npos);
}

TEST_CASE("number tuple encoding follows the positional formula") {
    CHECK(encode_number_tuple(std::vector<std::uint64_t>{0}, 7) == 0);
    CHECK(encode_number_tuple(std::vector<std::uint64_t>{2, 1}, 2) == 5);
    CHECK(encode_number_tuple(std::vector<std::uint64_t>{3, 3, 3}, 3) == 63);
    CHECK(encode_number_tuple(std::vector<std::uint64_t>{}, 5) == 0);
    CHECK_THROWS_AS(encode_number_tuple(std::vector<std::uint64_t>{4}, 3),
                    std::invalid_argument);
}

TEST_CASE("decode inverts encode and rejects oversized values") {
    auto digits = decode_number_tuple(BigInt(63), 3, 3);
    CHECK(digits == std::vector<std::uint64_t>{3, 3, 3});
    CHECK_THROWS_AS(decode_number_tuple(BigInt(64), 3, 3), std::invalid_argument);
}

TEST_CASE("partial injections compose with precedence and reject conflicts") {
    PartialInjection f, g;
    CHECK(g.insert(0, 1));
    auto r = compose_injection(f, g);
    REQUIRE(r);
    CHECK(*r == g);

    PartialInjection d1, d2;
    d1.insert(1, 2);
    d2.insert(3, 4);
    r = compose_injection(d1, d2);
    REQUIRE(r);
    CHECK(r->size() == 2);

    PartialInjection clash;
    clash.insert(3, 2);
    std::string why;
    CHECK(!compose_injection(d1, clash, &why));
    CHECK(why.find("injective") != std::string::npos);

    PartialInjection disagree;
    disagree.insert(1, 5);
    CHECK(!compose_injection(d1, disagree, &why));
}

TEST_CASE("partial isomorphism checks relations and constants both ways") {
    StructureData da;
    da.universe = {"a", "b", "c"};
    da.relations["R"] = {2, {{"a", "b"}}};
    da.constants["t"] = "a";
    StructureData db = da;
    db.relations["R"] = {2, {}};
    Structure a = Structure::from_data(da);
    Structure b = Structure::from_data(db);
    Structure b_sameconst = Structure::from_data(da);

    PartialInjection empty;
    CHECK(is_partial_isomorphism(empty, a, b_sameconst));

    PartialInjection id2;
    id2.insert(*a.id_of("a"), *a.id_of("a"));
    id2.insert(*a.id_of("b"), *a.id_of("b"));
    CHECK(!is_partial_isomorphism(id2, a, b));  // R(a,b) lost on the image side
    CHECK(is_partial_isomorphism(id2, a, a));

    // Constant pebbled to the wrong spot.
    PartialInjection wrong;
    wrong.insert(*a.id_of("a"), *a.id_of("b"));
    CHECK(!is_partial_isomorphism(wrong, a, b_sameconst));

    StructureData dc;
    dc.universe = {"x"};
    Structure c = Structure::from_data(dc);
    CHECK_THROWS_AS(is_partial_isomorphism(empty, a, c), std::invalid_argument);
}

TEST_CASE("structure json round-trips canonically") {
    StructureData d;
    d.universe = {"b", "a", "c"};
    d.relations["R"] = {2, {{"c", "a"}, {"a", "b"}}};
    d.constants["t"] = "c";
    Structure s = Structure::from_data(d);
    std::string j1 = structure_to_json(s);
    Structure s2 = structure_from_json(j1);
    CHECK(structure_to_json(s2) == j1);
    CHECK(s2.universe() == std::vector<std::string>{"a", "b", "c"});
    CHECK(s2.holds("R", {*s2.id_of("c"), *s2.id_of("a")}));
}

TEST_SUITE_END();
