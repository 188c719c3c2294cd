#include "doctest.h"

#include "lrec/logic.hpp"
#include "lrec/rng.hpp"

using namespace lrec;

namespace {

const Vocabulary kPsp = Vocabulary::psp();

FormulaPtr parse(const std::string& text) { return parse_formula(text, kPsp); }

// Random well-sorted formulas over the path-systems vocabulary.
FormulaPtr random_formula(Rng& rng, int depth, std::vector<Var> scope, bool allow_ops = true);

Term random_elem_term(Rng& rng, const std::vector<Var>& scope) {
    std::vector<Term> options{t_const("t")};
    for (const auto& v : scope)
        if (v.sort == Sort::element) options.push_back(t_var(v));
    options.push_back(t_elem_var("fx" + std::to_string(rng.below(3))));
    return options[rng.below(options.size())];
}

Term random_num_term(Rng& rng, const std::vector<Var>& scope) {
    std::vector<Term> options{t_lit(rng.below(4))};
    for (const auto& v : scope)
        if (v.sort == Sort::number) options.push_back(t_var(v));
    return options[rng.below(options.size())];
}

FormulaPtr random_atomic(Rng& rng, const std::vector<Var>& scope) {
    switch (rng.below(5)) {
        case 0:
            return f_atom("S", {random_elem_term(rng, scope)});
        case 1:
            return f_atom("R", {random_elem_term(rng, scope), random_elem_term(rng, scope),
                                random_elem_term(rng, scope)});
        case 2:
            return f_eq(random_elem_term(rng, scope), random_elem_term(rng, scope));
        case 3:
            return f_eq(random_num_term(rng, scope), random_num_term(rng, scope));
        default:
            return f_bool(rng.chance(1, 2));
    }
}

FormulaPtr random_formula(Rng& rng, int depth, std::vector<Var> scope, bool allow_ops) {
    if (depth <= 0) return random_atomic(rng, scope);
    switch (rng.below(allow_ops ? 8 : 6)) {
        case 0:
            return f_not(random_formula(rng, depth - 1, scope));
        case 1:
            return f_and(random_formula(rng, depth - 1, scope),
                         random_formula(rng, depth - 1, scope));
        case 2:
            return f_or(random_formula(rng, depth - 1, scope),
                        random_formula(rng, depth - 1, scope));
        case 3: {
            Var v{"q" + std::to_string(rng.below(3)),
                  rng.chance(1, 3) ? Sort::number : Sort::element};
            scope.push_back(v);
            auto body = random_formula(rng, depth - 1, scope);
            return rng.chance(1, 2) ? f_exists(v, body) : f_forall(v, body);
        }
        case 4: {
            Var v{"c" + std::to_string(rng.below(2)), Sort::element};
            scope.push_back(v);
            return f_count(v, random_formula(rng, depth - 1, scope),
                           random_num_term(rng, scope));
        }
        case 5:
            return random_atomic(rng, scope);
        case 6: {
            Var v{"lx", Sort::element};
            auto inner = scope;
            inner.push_back(v);
            return f_lfp("X", {v},
                         f_or(f_atom("S", {t_var(v)}), f_atom("X", {t_var(v)})),
                         {random_elem_term(rng, scope)});
        }
        default: {
            Var u{"nu", rng.chance(1, 4) ? Sort::number : Sort::element};
            Var v{"nv", u.sort};
            Var p{"np", Sort::number};
            auto inner = scope;
            inner.push_back(u);
            inner.push_back(v);
            auto edge = random_formula(rng, depth - 1, inner, false);
            auto merge = random_formula(rng, depth - 1, inner, false);
            auto lbl_scope = scope;
            lbl_scope.push_back(u);
            lbl_scope.push_back(p);
            auto label = random_formula(rng, depth - 1, lbl_scope, false);
            Term w = u.sort == Sort::element ? random_elem_term(rng, scope)
                                             : random_num_term(rng, scope);
            return f_lrec({u}, {v}, {p}, edge, merge, label, {w},
                          {random_num_term(rng, scope)});
        }
    }
}

}  // namespace

TEST_SUITE_BEGIN("logic");

TEST_CASE("parses atoms, counts, and the fixed-point sentence") {
    auto atom = parse("S(x)");
    CHECK(atom->kind == Formula::Kind::atom);
    CHECK(atom->rel == "S");

    auto lfp = parse("lfp[X,u](S(u) | exists v. exists w. (X(v) & X(w) & R(v,w,u)))(t)");
    CHECK(lfp->kind == Formula::Kind::lfp);
    CHECK(lfp->binders.size() == 1);
    CHECK(lfp->args.size() == 1);
    CHECK(lfp->args[0].kind == Term::Kind::constant);

    auto cnt = parse("count{x : S(x)} = %m");
    CHECK(cnt->kind == Formula::Kind::count);
    CHECK(cnt->numterm.kind == Term::Kind::variable);
    CHECK(cnt->numterm.sort == Sort::number);
}

TEST_CASE("printer examples") {
    CHECK(print_formula(parse("S(x)")) == "S(x)");
    CHECK(print_formula(parse("!(x = y)")) == "!(x = y)");
    auto lrec = parse("lrec[u;v;%p](false; false; S(u))(w; %r)");
    CHECK(print_formula(lrec) == "lrec[u;v;%p](false; false; S(u))(w; %r)");
}

TEST_CASE("parse errors carry positions and reasons") {
    CHECK_THROWS_AS(parse("Q(x)"), ParseError);           // unknown relation
    CHECK_THROWS_AS(parse("S(x,y)"), ParseError);         // arity
    CHECK_THROWS_AS(parse("x = %m"), ParseError);         // sort mismatch
    CHECK_THROWS_AS(parse("S(%m)"), ParseError);          // number in relation
    CHECK_THROWS_AS(parse("S(x) &"), ParseError);         // truncated
    CHECK_THROWS_AS(parse("count{%m : S(x)} = 1"), ParseError);
    CHECK_THROWS_AS(parse("lfp[X,u](!X(u))(t)"), ParseError);  // negative occurrence
    CHECK_THROWS_AS(parse("lrec[u;v,w;%p](false; false; false)(t; 0)"), ParseError);
    CHECK_THROWS_AS(parse("lrec[u;%v;%p](false; false; false)(t; 0)"), ParseError);
}

TEST_CASE("rank follows the measure rules") {
    CHECK(rank(parse("R(x,y,z)")) == 0);
    CHECK(rank(parse("exists x. S(x)")) == 1);
    CHECK(rank(parse("S(x) & exists y. S(y)")) == 1);  // max convention
    CHECK(rank(parse("!S(x)")) == 0);
    // c = 1, d = 1, atomic bodies: max[2+0, 2+0, 1+1+0] = 2.
    CHECK(rank(parse("lrec[u;v;%p](S(u); S(v); %p = 0)(t; 0)")) == 2);
    CHECK(rank(parse("count{x : S(x)} = %m")) == 1);
}

TEST_CASE("iteration degree follows the measure rules") {
    CHECK(iteration_degree(parse("S(x)")) == 0);
    CHECK(iteration_degree(parse("forall x. S(x)")) == 0);
    CHECK(iteration_degree(parse("lrec[u;v;%p](S(u); S(v); %p = 0)(t; %r1,%r2)")) == 2);
    // Degree of an lrec node is exactly max(q, body degrees).
    auto nested = parse(
        "lrec[u;v;%p](lrec[a;b;%q](false; false; false)(u; %r1,%r2,%r3); false; false)(t;)");
    CHECK(iteration_degree(nested) == 3);
    CHECK(rank(parse("exists x. S(x)")) == 1);
}

TEST_CASE("rank and degree are monotone under a quantifier prefix") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        auto f = random_formula(rng, 3, {});
        auto wrapped = f_exists({"zz", Sort::element}, f);
        CHECK(rank(wrapped) == rank(f) + 1);
        CHECK(iteration_degree(wrapped) == iteration_degree(f));
    }
}

TEST_CASE("print/parse round trip on 1000 random formulas") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        auto f = random_formula(rng, 4, {});
        std::string text = print_formula(f);
        FormulaPtr back;
        REQUIRE_NOTHROW(back = parse(text));
        if (!structurally_equal(f, back)) {
            CAPTURE(text);
            CHECK(structurally_equal(f, back));
            break;
        }
    }
}

TEST_CASE("free variable computation scopes binders") {
    auto f = parse("exists x. (S(x) & S(y) & count{z : R(x,z,w)} = %m)");
    auto fv = free_vars(*f);
    CHECK(fv.count({"y", Sort::element}) == 1);
    CHECK(fv.count({"w", Sort::element}) == 1);
    CHECK(fv.count({"m", Sort::number}) == 1);
    CHECK(fv.count({"x", Sort::element}) == 0);
    CHECK(fv.count({"z", Sort::element}) == 0);

    auto g = parse("lrec[u;v;%p](R(u,v,w); false; S(u) & %p = %m)(t; %r)");
    auto gv = free_vars(*g);
    CHECK(gv.count({"u", Sort::element}) == 0);
    CHECK(gv.count({"w", Sort::element}) == 1);
    CHECK(gv.count({"m", Sort::number}) == 1);
    CHECK(gv.count({"r", Sort::number}) == 1);
}

TEST_CASE("free variable renaming avoids capture") {
    auto f = parse("R(u,v,w)");
    std::map<Var, Var> ren{{{"u", Sort::element}, {"x1", Sort::element}},
                           {{"v", Sort::element}, {"y1", Sort::element}}};
    CHECK(print_formula(rename_free_vars(f, ren)) == "R(x1,y1,w)");

    auto trap = parse("exists x1. R(u,x1,w)");
    CHECK_THROWS_AS(rename_free_vars(trap, ren), std::invalid_argument);
}

TEST_SUITE_END();
