#pragma once

#include "lrec/common.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lrec {

enum class Sort { element, number };

struct Var {
    std::string name;
    Sort sort = Sort::element;

    bool operator==(const Var& o) const { return name == o.name && sort == o.sort; }
    bool operator<(const Var& o) const {
        return name != o.name ? name < o.name : sort < o.sort;
    }
};

struct Term {
    enum class Kind { variable, constant, literal };
    Kind kind = Kind::variable;
    Sort sort = Sort::element;
    std::string name;           // variable or constant name
    std::uint64_t value = 0;    // literal

    bool operator==(const Term& o) const {
        return kind == o.kind && sort == o.sort && name == o.name && value == o.value;
    }
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// One node kind per syntactic form. Count is kept in the normal form
// "count{x : phi} = numterm". The lrec node carries its three bodies as
// sub[0] = edge formula, sub[1] = merge formula, sub[2] = label formula.
struct Formula {
    enum class Kind {
        boolean_const,
        atom,
        equality,
        negation,
        conjunction,
        disjunction,
        exists,
        forall,
        count,
        lfp,
        lrec
    };

    Kind kind = Kind::boolean_const;
    bool value = false;                  // boolean_const
    std::string rel;                     // atom / lfp relation variable
    std::vector<Term> args;              // atom args, equality (2), lfp args
    std::vector<FormulaPtr> sub;
    Var var;                             // exists / forall / count binder
    Term numterm;                        // count right-hand side
    std::vector<Var> binders;            // lfp
    std::vector<Var> u_vars, v_vars, p_vars;  // lrec
    std::vector<Term> w_terms, r_terms;       // lrec
};

bool structurally_equal(const Formula& a, const Formula& b);
inline bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
    return structurally_equal(*a, *b);
}

// Construction helpers.
FormulaPtr f_bool(bool v);
FormulaPtr f_atom(std::string rel, std::vector<Term> args);
FormulaPtr f_eq(Term a, Term b);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_exists(Var v, FormulaPtr a);
FormulaPtr f_forall(Var v, FormulaPtr a);
FormulaPtr f_count(Var v, FormulaPtr a, Term numterm);
FormulaPtr f_lfp(std::string relvar, std::vector<Var> binders, FormulaPtr body,
                 std::vector<Term> args);
FormulaPtr f_lrec(std::vector<Var> u, std::vector<Var> v, std::vector<Var> p,
                  FormulaPtr edge, FormulaPtr merge, FormulaPtr label,
                  std::vector<Term> w, std::vector<Term> r);

Term t_var(const Var& v);
Term t_elem_var(std::string name);
Term t_num_var(std::string name);
Term t_const(std::string name);
Term t_lit(std::uint64_t value);

struct Vocabulary {
    std::map<std::string, int> relations;  // name -> arity
    std::set<std::string> constants;

    static Vocabulary psp();  // R/3, S/1, constant t
};

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
};

// Concrete syntax:
//   element variables are bare identifiers, number variables are %-prefixed,
//   number literals are digit runs; "&" binds tighter than "|"; quantifier
//   scope extends maximally after the dot; "count{x : phi} = nu";
//   "lfp[X,u](phi)(t)"; "lrec[u;v;%p](phiE; phiSim; phiC)(w; %r)".
FormulaPtr parse_formula(const std::string& text, const Vocabulary& vocab);

std::string print_formula(const Formula& f);
inline std::string print_formula(const FormulaPtr& f) { return print_formula(*f); }

int rank(const Formula& f);
inline int rank(const FormulaPtr& f) { return rank(*f); }

int iteration_degree(const Formula& f);
inline int iteration_degree(const FormulaPtr& f) { return iteration_degree(*f); }

// Free variables (relation variables excluded).
std::set<Var> free_vars(const Formula& f);

// Renames free occurrences; throws std::invalid_argument when a target name
// would be captured by a binder in f.
FormulaPtr rename_free_vars(const FormulaPtr& f, const std::map<Var, Var>& renames);

}  // namespace lrec
