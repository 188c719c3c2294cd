#pragma once

#include "lrec/common.hpp"
#include "lrec/core.hpp"
#include "lrec/logic.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace lrec {

// A runtime value: an element of the universe or a member of the number
// domain {0..|A|}.
struct Value {
    Sort sort = Sort::element;
    std::uint64_t raw = 0;

    static Value elem(std::uint64_t id) { return {Sort::element, id}; }
    static Value num(std::uint64_t n) { return {Sort::number, n}; }

    bool operator==(const Value& o) const { return sort == o.sort && raw == o.raw; }
    bool operator<(const Value& o) const {
        return sort != o.sort ? sort < o.sort : raw < o.raw;
    }
};

using Assignment = std::map<Var, Value>;

struct EvalBudget {
    std::size_t max_nodes = 20000;
    std::size_t max_pairs = 2000000;
};

// ---------------------------------------------------------------------------
// Labelled graphs, semi-graphs and their quotients
// ---------------------------------------------------------------------------

struct LabelledGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> out, in;
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<std::set<BigInt>> labels;

    static LabelledGraph make(std::size_t n,
                              const std::set<std::pair<std::uint32_t, std::uint32_t>>& edges,
                              std::vector<std::set<BigInt>> labels);
};

struct LabelledSemiGraph {
    std::size_t n = 0;
    std::vector<std::string> names;  // optional, for serialization
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::set<std::pair<std::uint32_t, std::uint32_t>> sim;
    std::vector<std::set<BigInt>> labels;
};

struct QuotientGraph {
    std::vector<std::uint32_t> class_of;             // vertex -> class id
    std::vector<std::vector<std::uint32_t>> members;  // class id -> sorted vertices
    LabelledGraph graph;                              // vertices are class ids
};

// Membership of (u, ell) in the recursive numeric query on a labelled graph:
// (u, ell) holds iff ell >= 0 and the number of successors v that hold at
// floor((ell - 1)/indegree(v)) lies in the label set of u. Memoized; safe for
// counter values far beyond the recursion depth budget of the call stack.
class ChiEvaluator {
  public:
    explicit ChiEvaluator(const LabelledGraph& g) : g_(&g) {}  // caller keeps g alive
    explicit ChiEvaluator(LabelledGraph&& g)
        : owned_(std::make_unique<LabelledGraph>(std::move(g))), g_(owned_.get()) {}
    bool query(std::uint32_t u, const BigInt& ell);

  private:
    std::unique_ptr<LabelledGraph> owned_;
    const LabelledGraph* g_;
    std::map<std::pair<std::uint32_t, BigInt>, bool> memo_;
};

bool chi(const LabelledGraph& g, std::uint32_t u, const BigInt& ell);

// Quotient by the symmetric reflexive transitive closure of sim: classes are
// the connected components, edges project, labels merge by union. Class ids
// are ordered by smallest member.
QuotientGraph quotient(const LabelledSemiGraph& g);

bool chi_hat(const LabelledSemiGraph& g, std::uint32_t u, const BigInt& ell);

// ---------------------------------------------------------------------------
// Node spaces for interpreted graphs
// ---------------------------------------------------------------------------

// The c-fold node domain over a structure. A typed position ranges over the
// universe or the number domain alone; an untyped position over their union.
class NodeSpace {
  public:
    NodeSpace(std::size_t universe_size, std::vector<std::optional<Sort>> position_sorts);

    std::size_t width() const { return sorts_.size(); }
    std::uint64_t size() const { return size_; }
    std::size_t universe_size() const { return universe_size_; }

    std::vector<Value> tuple_of(std::uint64_t index) const;
    std::uint64_t index_of(std::span<const Value> tuple) const;  // throws if outside
    bool contains(std::span<const Value> tuple) const;

  private:
    std::uint64_t radix(std::size_t pos) const;
    std::size_t universe_size_;
    std::vector<std::optional<Sort>> sorts_;
    std::uint64_t size_;
};

std::string value_name(const Structure& s, const Value& v);
std::string tuple_name(const Structure& s, std::span<const Value> tuple);

// ---------------------------------------------------------------------------
// Interpretations
// ---------------------------------------------------------------------------

// A d-dimensional interpretation producing a relational structure, with
// optional domain formula and congruence.
struct Interpretation {
    int dimension = 1;
    std::vector<std::optional<Sort>> position_sorts;  // length = dimension
    std::vector<Var> x_vars;                          // length = dimension
    std::vector<Var> y_vars;                          // for the congruence
    FormulaPtr delta;                                 // may be null
    FormulaPtr eps;                                   // may be null
    struct RelDef {
        std::string name;
        int arity;
        std::vector<Var> vars;  // arity * dimension variables
        FormulaPtr body;
    };
    std::vector<RelDef> relations;
};

// Throws std::invalid_argument when eps is not a congruence, BudgetError when
// materialization exceeds the budget.
Structure apply_interpretation(const Interpretation& interp, const Structure& s,
                               const Assignment& params, const EvalBudget& budget = {});

// The semi-graph reading: edge and merge formulas over pairs of node tuples,
// plus an optional label formula over node x number-tuple.
struct SemiGraphInterp {
    std::vector<Var> u_vars, v_vars;  // length c, matching sorts per position
    std::vector<Var> p_vars;          // number variables, length d <= c
    FormulaPtr edge, merge;           // phi_E, phi_sim
    FormulaPtr label;                 // phi_C; null when labels are not needed
    bool untyped = false;             // node set (U u N(U))^c instead of the sorted product
};

struct MaterializedSemiGraph {
    std::shared_ptr<const NodeSpace> space;
    LabelledSemiGraph graph;
};

MaterializedSemiGraph materialize_semigraph(const SemiGraphInterp& interp,
                                            const Structure& s, const Assignment& params,
                                            const EvalBudget& budget = {});

// ---------------------------------------------------------------------------
// Formula evaluation
// ---------------------------------------------------------------------------

// Tarskian semantics; lfp by stage iteration, count by exact cardinality
// comparison, lrec by materializing the interpreted semi-graph and consulting
// the quotient recursion at the anchor tuple. Throws std::invalid_argument on
// unbound variables or sort-mismatched bindings, BudgetError on blown budgets.
bool eval_formula(const Formula& f, const Structure& s, const Assignment& env,
                  const EvalBudget& budget = {});
inline bool eval_formula(const FormulaPtr& f, const Structure& s, const Assignment& env,
                         const EvalBudget& budget = {}) {
    return eval_formula(*f, s, env, budget);
}

// Evaluation bound to one structure, sharing lrec materializations and chi
// memo tables across calls. Used anywhere one formula is evaluated under many
// assignments.
class Evaluator {
  public:
    Evaluator(const Structure& s, EvalBudget budget = {});
    ~Evaluator();
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    bool eval(const Formula& f, const Assignment& env);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace lrec
