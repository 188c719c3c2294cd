#include "lrec/eval.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace lrec {

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

LabelledGraph LabelledGraph::make(
    std::size_t n, const std::set<std::pair<std::uint32_t, std::uint32_t>>& edges,
    std::vector<std::set<BigInt>> labels) {
    LabelledGraph g;
    g.n = n;
    g.out.resize(n);
    g.in.resize(n);
    g.edges = edges;
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) throw std::invalid_argument("edge references unknown vertex");
        g.out[a].push_back(b);
        g.in[b].push_back(a);
    }
    if (labels.size() != n) labels.resize(n);
    g.labels = std::move(labels);
    return g;
}

bool ChiEvaluator::query(std::uint32_t u, const BigInt& ell) {
    if (ell < 0) return false;
    struct Frame {
        std::uint32_t u;
        BigInt ell;
        std::size_t child = 0;
        std::uint64_t cnt = 0;
    };
    std::vector<Frame> stack;
    stack.push_back({u, ell});
    while (!stack.empty()) {
        Frame& f = stack.back();
        auto it = memo_.find({f.u, f.ell});
        if (it != memo_.end()) {
            stack.pop_back();
            continue;
        }
        bool descended = false;
        while (f.child < g_->out[f.u].size()) {
            std::uint32_t v = g_->out[f.u][f.child];
            BigInt ell2 = floor_div(f.ell - 1, BigInt(g_->in[v].size()));
            bool val;
            if (ell2 < 0) {
                val = false;
            } else {
                auto mit = memo_.find({v, ell2});
                if (mit == memo_.end()) {
                    stack.push_back({v, ell2});
                    descended = true;
                    break;
                }
                val = mit->second;
            }
            f.cnt += val ? 1 : 0;
            ++f.child;
        }
        if (descended) continue;
        bool result = g_->labels[f.u].count(BigInt(f.cnt)) > 0;
        memo_[{f.u, f.ell}] = result;
        stack.pop_back();
    }
    return memo_.at({u, ell});
}

bool chi(const LabelledGraph& g, std::uint32_t u, const BigInt& ell) {
    ChiEvaluator e(g);
    return e.query(u, ell);
}

QuotientGraph quotient(const LabelledSemiGraph& g) {
    QuotientGraph q;
    q.class_of.assign(g.n, UINT32_MAX);

    std::vector<std::vector<std::uint32_t>> adj(g.n);
    for (const auto& [a, b] : g.sim) {
        if (a >= g.n || b >= g.n) throw std::invalid_argument("sim references unknown vertex");
        adj[a].push_back(b);
        adj[b].push_back(a);
    }

    for (std::uint32_t v = 0; v < g.n; ++v) {
        if (q.class_of[v] != UINT32_MAX) continue;
        std::uint32_t cls = static_cast<std::uint32_t>(q.members.size());
        q.members.emplace_back();
        std::deque<std::uint32_t> work{v};
        q.class_of[v] = cls;
        while (!work.empty()) {
            std::uint32_t w = work.front();
            work.pop_front();
            q.members[cls].push_back(w);
            for (std::uint32_t x : adj[w]) {
                if (q.class_of[x] == UINT32_MAX) {
                    q.class_of[x] = cls;
                    work.push_back(x);
                }
            }
        }
        std::sort(q.members[cls].begin(), q.members[cls].end());
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> qedges;
    for (const auto& [a, b] : g.edges) {
        if (a >= g.n || b >= g.n) throw std::invalid_argument("edge references unknown vertex");
        qedges.insert({q.class_of[a], q.class_of[b]});
    }
    std::vector<std::set<BigInt>> qlabels(q.members.size());
    for (std::uint32_t v = 0; v < g.n; ++v) {
        if (v < g.labels.size())
            qlabels[q.class_of[v]].insert(g.labels[v].begin(), g.labels[v].end());
    }
    q.graph = LabelledGraph::make(q.members.size(), qedges, std::move(qlabels));
    return q;
}

bool chi_hat(const LabelledSemiGraph& g, std::uint32_t u, const BigInt& ell) {
    QuotientGraph q = quotient(g);
    return chi(q.graph, q.class_of.at(u), ell);
}

// ---------------------------------------------------------------------------
// Node spaces
// ---------------------------------------------------------------------------

NodeSpace::NodeSpace(std::size_t universe_size, std::vector<std::optional<Sort>> position_sorts)
    : universe_size_(universe_size), sorts_(std::move(position_sorts)) {
    size_ = 1;
    for (std::size_t i = 0; i < sorts_.size(); ++i) {
        std::uint64_t r = radix(i);
        if (size_ > UINT64_MAX / (r == 0 ? 1 : r)) {
            size_ = UINT64_MAX;
            break;
        }
        size_ *= r;
    }
}

std::uint64_t NodeSpace::radix(std::size_t pos) const {
    if (!sorts_[pos]) return 2 * universe_size_ + 1;
    return *sorts_[pos] == Sort::element ? universe_size_ : universe_size_ + 1;
}

std::vector<Value> NodeSpace::tuple_of(std::uint64_t index) const {
    std::vector<Value> out(sorts_.size());
    for (std::size_t i = 0; i < sorts_.size(); ++i) {
        std::uint64_t r = radix(i);
        std::uint64_t digit = index % r;
        index /= r;
        if (!sorts_[i]) {
            out[i] = digit < universe_size_ ? Value::elem(digit)
                                            : Value::num(digit - universe_size_);
        } else if (*sorts_[i] == Sort::element) {
            out[i] = Value::elem(digit);
        } else {
            out[i] = Value::num(digit);
        }
    }
    return out;
}

std::uint64_t NodeSpace::index_of(std::span<const Value> tuple) const {
    if (!contains(tuple)) throw std::invalid_argument("tuple outside node space");
    std::uint64_t index = 0, weight = 1;
    for (std::size_t i = 0; i < sorts_.size(); ++i) {
        std::uint64_t digit;
        if (!sorts_[i]) {
            digit = tuple[i].sort == Sort::element ? tuple[i].raw
                                                   : universe_size_ + tuple[i].raw;
        } else {
            digit = tuple[i].raw;
        }
        index += digit * weight;
        weight *= radix(i);
    }
    return index;
}

bool NodeSpace::contains(std::span<const Value> tuple) const {
    if (tuple.size() != sorts_.size()) return false;
    for (std::size_t i = 0; i < sorts_.size(); ++i) {
        const Value& v = tuple[i];
        if (sorts_[i] && v.sort != *sorts_[i]) return false;
        if (v.sort == Sort::element && v.raw >= universe_size_) return false;
        if (v.sort == Sort::number && v.raw > universe_size_) return false;
    }
    return true;
}

std::string value_name(const Structure& s, const Value& v) {
    return v.sort == Sort::element ? s.name_of(static_cast<ElemId>(v.raw))
                                   : "#" + std::to_string(v.raw);
}

std::string tuple_name(const Structure& s, std::span<const Value> tuple) {
    std::string out = "(";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) out += ",";
        out += value_name(s, tuple[i]);
    }
    return out + ")";
}

// ---------------------------------------------------------------------------
// Evaluation context
// ---------------------------------------------------------------------------

namespace {

struct LrecInstance {
    std::shared_ptr<const NodeSpace> space;
    QuotientGraph q;
    std::unique_ptr<ChiEvaluator> chi;
};

struct Ctx {
    const Structure& s;
    EvalBudget budget;
    std::vector<std::pair<Var, Value>> env;
    std::map<std::string, std::set<std::vector<Value>>> relvars;
    std::map<std::pair<const Formula*, std::string>, std::shared_ptr<LrecInstance>> lrec_cache;

    // Lazy per-(relation, bound-position pattern) indexes used to narrow
    // element quantifiers over conjunctive atoms.
    using PatternIndex =
        std::unordered_map<std::vector<std::uint32_t>, std::vector<ElemId>, VecU32Hash>;
    std::map<std::pair<const void*, std::uint32_t>, PatternIndex> atom_indexes;

    explicit Ctx(const Structure& s_, EvalBudget b) : s(s_), budget(b) {}

    const Value* lookup(const Var& v) const {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->first == v) return &it->second;
        return nullptr;
    }

    void push(const Var& v, const Value& val) { env.emplace_back(v, val); }
    void pop() { env.pop_back(); }
};

bool eval_rec(Ctx& ctx, const Formula& f);

Value value_of(Ctx& ctx, const Term& t) {
    switch (t.kind) {
        case Term::Kind::variable: {
            const Value* v = ctx.lookup({t.name, t.sort});
            if (!v)
                throw std::invalid_argument("unbound variable '" +
                                            (t.sort == Sort::number ? "%" + t.name : t.name) +
                                            "'");
            return *v;
        }
        case Term::Kind::constant: {
            auto id = ctx.s.constant(t.name);
            if (!id) throw std::invalid_argument("unknown constant '" + t.name + "'");
            return Value::elem(*id);
        }
        case Term::Kind::literal:
            if (t.value > ctx.s.number_max())
                throw std::invalid_argument("number literal outside the number domain");
            return Value::num(t.value);
    }
    throw std::logic_error("unreachable");
}

bool eval_atom(Ctx& ctx, const Formula& f) {
    std::vector<Value> vals;
    vals.reserve(f.args.size());
    for (const Term& t : f.args) vals.push_back(value_of(ctx, t));

    auto rv = ctx.relvars.find(f.rel);
    if (rv != ctx.relvars.end()) return rv->second.count(vals) > 0;

    std::vector<ElemId> tuple;
    tuple.reserve(vals.size());
    for (const Value& v : vals) {
        if (v.sort != Sort::element)
            throw std::invalid_argument("relation applied to a number value");
        tuple.push_back(static_cast<ElemId>(v.raw));
    }
    return ctx.s.holds(f.rel, tuple);
}

// An element quantifier whose body has a top-level conjunct atom over a
// structure relation mentioning the quantified variable, with every other
// argument resolvable, only has witnesses among that atom's matching tuples.
// Collect those candidates through a lazily built index; the full body is
// still evaluated per candidate.
void flatten_conjuncts(const Formula& f, std::vector<const Formula*>& out) {
    if (f.kind == Formula::Kind::conjunction) {
        flatten_conjuncts(*f.sub[0], out);
        flatten_conjuncts(*f.sub[1], out);
    } else {
        out.push_back(&f);
    }
}

std::optional<std::vector<ElemId>> quantifier_candidates(Ctx& ctx, const Var& qvar,
                                                         const Formula& body) {
    std::vector<const Formula*> conjuncts;
    flatten_conjuncts(body, conjuncts);
    for (const Formula* c : conjuncts) {
        if (c->kind != Formula::Kind::atom) continue;
        if (ctx.relvars.count(c->rel)) continue;
        const Structure::Relation* rel = ctx.s.relation(c->rel);
        if (!rel) return std::vector<ElemId>{};  // empty relation: no witnesses

        bool mentions = false, usable = true;
        std::uint32_t mask = 0;
        std::vector<std::uint32_t> key;
        int qpos = -1;
        for (std::size_t i = 0; i < c->args.size() && usable; ++i) {
            const Term& t = c->args[i];
            if (t.kind == Term::Kind::variable && Var{t.name, t.sort} == qvar) {
                mentions = true;
                if (qpos < 0) qpos = static_cast<int>(i);
                continue;
            }
            Value v{};
            if (t.kind == Term::Kind::constant) {
                auto id = ctx.s.constant(t.name);
                if (!id) {
                    usable = false;
                    break;
                }
                v = Value::elem(*id);
            } else if (t.kind == Term::Kind::variable) {
                const Value* bound = ctx.lookup({t.name, t.sort});
                if (!bound || bound->sort != Sort::element) {
                    usable = false;
                    break;
                }
                v = *bound;
            } else {
                usable = false;
                break;
            }
            mask |= 1u << i;
            key.push_back(static_cast<std::uint32_t>(v.raw));
        }
        if (!usable || !mentions) continue;

        auto index_key = std::make_pair(static_cast<const void*>(rel), mask);
        auto it = ctx.atom_indexes.find(index_key);
        if (it == ctx.atom_indexes.end()) {
            Ctx::PatternIndex index;
            for (const auto& tuple : rel->tuples) {
                std::vector<std::uint32_t> k;
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    if (mask & (1u << i)) k.push_back(tuple[i]);
                index[k].push_back(tuple[qpos]);
            }
            it = ctx.atom_indexes.emplace(index_key, std::move(index)).first;
        }
        auto hit = it->second.find(key);
        if (hit == it->second.end()) return std::vector<ElemId>{};
        std::vector<ElemId> cands = hit->second;
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        return cands;
    }
    return std::nullopt;
}

bool eval_lfp(Ctx& ctx, const Formula& f) {
    const std::size_t k = f.binders.size();
    const std::size_t n = ctx.s.size();

    std::optional<std::set<std::vector<Value>>> saved;
    if (auto it = ctx.relvars.find(f.rel); it != ctx.relvars.end()) saved = it->second;

    std::set<std::vector<Value>> current;
    while (true) {
        ctx.relvars[f.rel] = current;
        std::set<std::vector<Value>> next;
        std::vector<std::size_t> idx(k, 0);
        while (true) {
            std::vector<Value> tuple(k);
            for (std::size_t i = 0; i < k; ++i) {
                tuple[i] = Value::elem(idx[i]);
                ctx.push(f.binders[i], tuple[i]);
            }
            if (eval_rec(ctx, *f.sub[0])) next.insert(tuple);
            for (std::size_t i = 0; i < k; ++i) ctx.pop();

            std::size_t pos = k;
            while (pos > 0 && ++idx[pos - 1] == n) idx[--pos] = 0;
            if (pos == 0) break;
        }
        if (next == current) break;
        current = std::move(next);
    }

    std::vector<Value> args;
    for (const Term& t : f.args) args.push_back(value_of(ctx, t));
    bool result = current.count(args) > 0;

    if (saved)
        ctx.relvars[f.rel] = *saved;
    else
        ctx.relvars.erase(f.rel);
    return result;
}

std::shared_ptr<LrecInstance> lrec_instance(Ctx& ctx, const Formula& f);

bool eval_lrec_node(Ctx& ctx, const Formula& f) {
    auto inst = lrec_instance(ctx, f);

    std::vector<Value> w;
    for (const Term& t : f.w_terms) w.push_back(value_of(ctx, t));
    std::vector<std::uint64_t> digits;
    for (const Term& t : f.r_terms) {
        Value v = value_of(ctx, t);
        digits.push_back(v.raw);
    }
    BigInt ell = encode_number_tuple(digits, ctx.s.number_max());

    std::uint64_t idx = inst->space->index_of(w);
    return inst->chi->query(inst->q.class_of.at(idx), ell);
}

bool eval_rec(Ctx& ctx, const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::boolean_const:
            return f.value;
        case K::atom:
            return eval_atom(ctx, f);
        case K::equality:
            return value_of(ctx, f.args[0]) == value_of(ctx, f.args[1]);
        case K::negation:
            return !eval_rec(ctx, *f.sub[0]);
        case K::conjunction:
            return eval_rec(ctx, *f.sub[0]) && eval_rec(ctx, *f.sub[1]);
        case K::disjunction:
            return eval_rec(ctx, *f.sub[0]) || eval_rec(ctx, *f.sub[1]);
        case K::exists:
        case K::forall: {
            bool want = f.kind == K::exists;
            if (want && f.var.sort == Sort::element) {
                if (auto cands = quantifier_candidates(ctx, f.var, *f.sub[0])) {
                    for (ElemId e : *cands) {
                        ctx.push(f.var, Value::elem(e));
                        bool r = eval_rec(ctx, *f.sub[0]);
                        ctx.pop();
                        if (r) return true;
                    }
                    return false;
                }
            }
            std::uint64_t limit =
                f.var.sort == Sort::element ? ctx.s.size() : ctx.s.number_max() + 1;
            for (std::uint64_t i = 0; i < limit; ++i) {
                Value v = f.var.sort == Sort::element ? Value::elem(i) : Value::num(i);
                ctx.push(f.var, v);
                bool r = eval_rec(ctx, *f.sub[0]);
                ctx.pop();
                if (r == want) return want;
            }
            return !want;
        }
        case K::count: {
            std::uint64_t cnt = 0;
            // Values outside the candidate set fail the indexed conjunct, so
            // they never contribute to the count.
            if (auto cands = quantifier_candidates(ctx, f.var, *f.sub[0])) {
                for (ElemId e : *cands) {
                    ctx.push(f.var, Value::elem(e));
                    if (eval_rec(ctx, *f.sub[0])) ++cnt;
                    ctx.pop();
                }
            } else {
                for (std::uint64_t i = 0; i < ctx.s.size(); ++i) {
                    ctx.push(f.var, Value::elem(i));
                    if (eval_rec(ctx, *f.sub[0])) ++cnt;
                    ctx.pop();
                }
            }
            Value target = value_of(ctx, f.numterm);
            return target.sort == Sort::number && target.raw == cnt;
        }
        case K::lfp:
            return eval_lfp(ctx, f);
        case K::lrec:
            return eval_lrec_node(ctx, f);
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Semi-graph materialization
// ---------------------------------------------------------------------------

bool sorts_conform(std::span<const Var> vars, std::span<const Value> tuple) {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].sort != tuple[i].sort) return false;
    return true;
}

bool is_const_false(const Formula& f) {
    return f.kind == Formula::Kind::boolean_const && !f.value;
}

// Evaluates phi over all node pairs, binding uv/vv to the tuple entries. A
// pair whose entries do not match the declared variable sorts is simply not
// in the relation.
void relation_over_pairs(Ctx& ctx, const Formula& phi, std::span<const Var> uv,
                         std::span<const Var> vv, const std::vector<std::vector<Value>>& nodes,
                         const std::vector<bool>& u_conform, const std::vector<bool>& v_conform,
                         std::set<std::pair<std::uint32_t, std::uint32_t>>& out) {
    if (is_const_false(phi)) return;
    const std::size_t c = uv.size();
    const std::size_t base = ctx.env.size();
    for (std::size_t i = 0; i < c; ++i) ctx.push(uv[i], Value{});
    for (std::size_t i = 0; i < c; ++i) ctx.push(vv[i], Value{});

    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        if (!u_conform[i]) continue;
        for (std::size_t k = 0; k < c; ++k) ctx.env[base + k].second = nodes[i][k];
        for (std::uint32_t j = 0; j < nodes.size(); ++j) {
            if (!v_conform[j]) continue;
            for (std::size_t k = 0; k < c; ++k) ctx.env[base + c + k].second = nodes[j][k];
            if (eval_rec(ctx, phi)) out.insert({i, j});
        }
    }
    for (std::size_t i = 0; i < 2 * c; ++i) ctx.pop();
}

MaterializedSemiGraph materialize_with_ctx(Ctx& ctx, const SemiGraphInterp& interp) {
    const Structure& s = ctx.s;
    const std::size_t c = interp.u_vars.size();
    if (c == 0 || interp.v_vars.size() != c)
        throw std::invalid_argument("malformed semi-graph interpretation");

    std::vector<std::optional<Sort>> sorts(c);
    if (!interp.untyped)
        for (std::size_t i = 0; i < c; ++i) sorts[i] = interp.u_vars[i].sort;

    auto space = std::make_shared<NodeSpace>(s.size(), sorts);
    if (space->size() > ctx.budget.max_nodes)
        throw BudgetError("semi-graph node budget exceeded: " + std::to_string(space->size()) +
                          " nodes > " + std::to_string(ctx.budget.max_nodes));
    const std::size_t W = static_cast<std::size_t>(space->size());
    if (!is_const_false(*interp.edge) || !is_const_false(*interp.merge)) {
        if (static_cast<std::uint64_t>(W) * W > ctx.budget.max_pairs)
            throw BudgetError("semi-graph pair budget exceeded");
    }

    std::vector<std::vector<Value>> nodes(W);
    for (std::uint32_t i = 0; i < W; ++i) nodes[i] = space->tuple_of(i);

    std::vector<bool> u_conform(W), v_conform(W);
    for (std::uint32_t i = 0; i < W; ++i) {
        u_conform[i] = sorts_conform(interp.u_vars, nodes[i]);
        v_conform[i] = sorts_conform(interp.v_vars, nodes[i]);
    }

    LabelledSemiGraph g;
    g.n = W;
    relation_over_pairs(ctx, *interp.edge, interp.u_vars, interp.v_vars, nodes, u_conform,
                        v_conform, g.edges);
    relation_over_pairs(ctx, *interp.merge, interp.u_vars, interp.v_vars, nodes, u_conform,
                        v_conform, g.sim);

    g.labels.resize(W);
    if (interp.label && !is_const_false(*interp.label)) {
        const std::size_t d = interp.p_vars.size();
        std::uint64_t ncount = s.number_max() + 1;
        std::uint64_t combos = 1;
        for (std::size_t i = 0; i < d; ++i) combos *= ncount;
        if (static_cast<std::uint64_t>(W) * combos > ctx.budget.max_pairs)
            throw BudgetError("semi-graph label budget exceeded");

        const std::size_t base = ctx.env.size();
        for (std::size_t i = 0; i < c; ++i) ctx.push(interp.u_vars[i], Value{});
        for (std::size_t i = 0; i < d; ++i) ctx.push(interp.p_vars[i], Value::num(0));

        std::vector<std::uint64_t> digits(d, 0);
        for (std::uint32_t i = 0; i < W; ++i) {
            if (!u_conform[i]) continue;
            for (std::size_t k = 0; k < c; ++k) ctx.env[base + k].second = nodes[i][k];
            std::fill(digits.begin(), digits.end(), 0);
            while (true) {
                for (std::size_t k = 0; k < d; ++k)
                    ctx.env[base + c + k].second = Value::num(digits[k]);
                if (eval_rec(ctx, *interp.label))
                    g.labels[i].insert(encode_number_tuple(digits, s.number_max()));
                std::size_t pos = d;
                while (pos > 0 && ++digits[pos - 1] == ncount) digits[--pos] = 0;
                if (pos == 0) break;
            }
        }
        for (std::size_t i = 0; i < c + d; ++i) ctx.pop();
    }

    g.names.resize(W);
    for (std::uint32_t i = 0; i < W; ++i) g.names[i] = tuple_name(s, nodes[i]);

    MaterializedSemiGraph out;
    out.space = space;
    out.graph = std::move(g);
    return out;
}

std::string param_signature(Ctx& ctx, const Formula& f) {
    std::set<Var> fv = free_vars(f);
    std::string sig;
    for (const Var& v : fv) {
        const Value* val = ctx.lookup(v);
        if (!val)
            throw std::invalid_argument("unbound variable '" + v.name + "' in lrec node");
        sig += v.name;
        sig += v.sort == Sort::number ? "#" : "@";
        sig += std::to_string(val->raw);
        sig += ";";
    }
    return sig;
}

std::shared_ptr<LrecInstance> lrec_instance(Ctx& ctx, const Formula& f) {
    std::string sig = param_signature(ctx, f);
    auto key = std::make_pair(&f, sig);
    auto it = ctx.lrec_cache.find(key);
    if (it != ctx.lrec_cache.end()) return it->second;

    SemiGraphInterp si;
    si.u_vars = f.u_vars;
    si.v_vars = f.v_vars;
    si.p_vars = f.p_vars;
    si.edge = f.sub[0];
    si.merge = f.sub[1];
    si.label = f.sub[2];
    si.untyped = false;

    MaterializedSemiGraph msg = materialize_with_ctx(ctx, si);
    auto inst = std::make_shared<LrecInstance>();
    inst->space = msg.space;
    inst->q = quotient(msg.graph);
    inst->chi = std::make_unique<ChiEvaluator>(inst->q.graph);
    ctx.lrec_cache[key] = inst;
    return inst;
}

void seed_env(Ctx& ctx, const Assignment& env) {
    for (const auto& [var, val] : env) {
        if (var.sort != val.sort)
            throw std::invalid_argument("sort mismatch in binding of '" + var.name + "'");
        if (val.sort == Sort::element && val.raw >= ctx.s.size())
            throw std::invalid_argument("element binding outside the universe");
        if (val.sort == Sort::number && val.raw > ctx.s.number_max())
            throw std::invalid_argument("number binding outside the number domain");
        ctx.push(var, val);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

bool eval_formula(const Formula& f, const Structure& s, const Assignment& env,
                  const EvalBudget& budget) {
    Ctx ctx(s, budget);
    seed_env(ctx, env);
    return eval_rec(ctx, f);
}

struct Evaluator::Impl {
    Ctx ctx;
    Impl(const Structure& s, EvalBudget b) : ctx(s, b) {}
};

Evaluator::Evaluator(const Structure& s, EvalBudget budget)
    : impl_(std::make_unique<Impl>(s, budget)) {}

Evaluator::~Evaluator() = default;

bool Evaluator::eval(const Formula& f, const Assignment& env) {
    impl_->ctx.env.clear();
    seed_env(impl_->ctx, env);
    return eval_rec(impl_->ctx, f);
}

MaterializedSemiGraph materialize_semigraph(const SemiGraphInterp& interp,
                                            const Structure& s, const Assignment& params,
                                            const EvalBudget& budget) {
    Ctx ctx(s, budget);
    seed_env(ctx, params);
    return materialize_with_ctx(ctx, interp);
}

Structure apply_interpretation(const Interpretation& interp, const Structure& s,
                               const Assignment& params, const EvalBudget& budget) {
    Ctx ctx(s, budget);
    seed_env(ctx, params);

    const std::size_t d = static_cast<std::size_t>(interp.dimension);
    if (interp.x_vars.size() != d)
        throw std::invalid_argument("interpretation domain variables must match the dimension");
    if (interp.eps && interp.y_vars.size() != d)
        throw std::invalid_argument("interpretation congruence variables must match the dimension");
    std::vector<std::optional<Sort>> sorts = interp.position_sorts;
    if (sorts.empty()) sorts.assign(d, std::nullopt);

    NodeSpace space(s.size(), sorts);
    if (space.size() > budget.max_nodes) throw BudgetError("interpretation node budget exceeded");
    const std::size_t W = static_cast<std::size_t>(space.size());

    std::vector<std::vector<Value>> nodes(W);
    for (std::uint32_t i = 0; i < W; ++i) nodes[i] = space.tuple_of(i);

    // Domain restriction. A tuple that does not conform to the declared
    // variable sorts satisfies no formula; without a domain formula it stays
    // in the universe as an isolated point.
    std::vector<std::uint32_t> domain;
    std::vector<bool> conforming(W, false);
    for (std::uint32_t i = 0; i < W; ++i) {
        conforming[i] = sorts_conform(interp.x_vars, nodes[i]);
        if (!interp.delta) {
            domain.push_back(i);
            continue;
        }
        if (!conforming[i]) continue;
        for (std::size_t k = 0; k < d; ++k) ctx.push(interp.x_vars[k], nodes[i][k]);
        bool keep = eval_rec(ctx, *interp.delta);
        for (std::size_t k = 0; k < d; ++k) ctx.pop();
        if (keep) domain.push_back(i);
    }
    if (domain.empty())
        throw std::invalid_argument("interpretation produces an empty universe");

    // Congruence classes. Non-conforming domain members satisfy no formula
    // and sit in singleton classes.
    std::vector<std::uint32_t> cls(W, UINT32_MAX);
    std::size_t nclasses = 0;
    if (interp.eps) {
        if (static_cast<std::uint64_t>(domain.size()) * domain.size() > budget.max_pairs)
            throw BudgetError("interpretation pair budget exceeded");
        std::vector<std::vector<bool>> eq(domain.size(),
                                          std::vector<bool>(domain.size(), false));
        for (std::size_t a = 0; a < domain.size(); ++a) {
            if (!conforming[domain[a]]) continue;
            for (std::size_t b = 0; b < domain.size(); ++b) {
                if (!conforming[domain[b]]) continue;
                for (std::size_t k = 0; k < d; ++k) ctx.push(interp.x_vars[k], nodes[domain[a]][k]);
                for (std::size_t k = 0; k < d; ++k) ctx.push(interp.y_vars[k], nodes[domain[b]][k]);
                eq[a][b] = eval_rec(ctx, *interp.eps);
                for (std::size_t k = 0; k < 2 * d; ++k) ctx.pop();
            }
        }
        // Union components, then require the relation to exactly match them
        // over the conforming slice.
        std::vector<std::uint32_t> comp(domain.size(), UINT32_MAX);
        for (std::size_t a = 0; a < domain.size(); ++a) {
            if (comp[a] != UINT32_MAX) continue;
            std::deque<std::size_t> work{a};
            comp[a] = static_cast<std::uint32_t>(nclasses);
            while (!work.empty()) {
                std::size_t x = work.front();
                work.pop_front();
                for (std::size_t b = 0; b < domain.size(); ++b) {
                    if ((eq[x][b] || eq[b][x]) && comp[b] == UINT32_MAX) {
                        comp[b] = static_cast<std::uint32_t>(nclasses);
                        work.push_back(b);
                    }
                }
            }
            ++nclasses;
        }
        for (std::size_t a = 0; a < domain.size(); ++a) {
            if (!conforming[domain[a]]) continue;
            for (std::size_t b = 0; b < domain.size(); ++b) {
                if (!conforming[domain[b]]) continue;
                if (eq[a][b] != (comp[a] == comp[b]))
                    throw std::invalid_argument(
                        "interpretation congruence formula is not an equivalence relation");
            }
        }
        for (std::size_t a = 0; a < domain.size(); ++a) cls[domain[a]] = comp[a];
    } else {
        for (std::size_t a = 0; a < domain.size(); ++a)
            cls[domain[a]] = static_cast<std::uint32_t>(a);
        nclasses = domain.size();
    }

    // Class names: tuple name of the smallest member.
    std::vector<std::string> class_name(nclasses);
    for (std::size_t a = 0; a < domain.size(); ++a) {
        std::string nm = tuple_name(s, nodes[domain[a]]);
        std::string& slot = class_name[cls[domain[a]]];
        if (slot.empty() || nm < slot) slot = nm;
    }

    StructureData data;
    data.universe = class_name;

    for (const auto& rd : interp.relations) {
        if (rd.vars.size() != static_cast<std::size_t>(rd.arity) * d)
            throw std::invalid_argument("relation definition variable count mismatch");
        StructureData::Rel rel;
        rel.arity = rd.arity;
        std::set<std::vector<std::string>> tuples;
        std::set<std::vector<std::uint32_t>> holds;

        std::uint64_t combos = 1;
        for (int k = 0; k < rd.arity; ++k) combos *= domain.size();
        if (combos > budget.max_pairs)
            throw BudgetError("interpretation relation budget exceeded");

        std::vector<std::size_t> idx(rd.arity, 0);
        while (true) {
            bool args_conform = true;
            for (int k = 0; k < rd.arity && args_conform; ++k) {
                args_conform = conforming[domain[idx[k]]] &&
                               sorts_conform(std::span<const Var>(rd.vars).subspan(k * d, d),
                                             nodes[domain[idx[k]]]);
            }
            bool val = false;
            if (args_conform) {
                for (int k = 0; k < rd.arity; ++k)
                    for (std::size_t j = 0; j < d; ++j)
                        ctx.push(rd.vars[k * d + j], nodes[domain[idx[k]]][j]);
                val = eval_rec(ctx, *rd.body);
                for (std::size_t k = 0; k < static_cast<std::size_t>(rd.arity) * d; ++k)
                    ctx.pop();
            }

            if (val) {
                std::vector<std::uint32_t> ct(rd.arity);
                std::vector<std::string> names(rd.arity);
                for (int k = 0; k < rd.arity; ++k) {
                    ct[k] = cls[domain[idx[k]]];
                    names[k] = class_name[ct[k]];
                }
                holds.insert(ct);
                tuples.insert(names);
            }

            std::size_t pos = idx.size();
            while (pos > 0 && ++idx[pos - 1] == domain.size()) idx[--pos] = 0;
            if (pos == 0) break;
        }

        // Congruence of the relation with respect to eps: no class tuple may
        // be found both holding and not holding across representatives.
        if (interp.eps) {
            std::vector<std::size_t> idx2(rd.arity, 0);
            while (true) {
                bool args_conform = true;
                for (int k = 0; k < rd.arity && args_conform; ++k) {
                    args_conform =
                        conforming[domain[idx2[k]]] &&
                        sorts_conform(std::span<const Var>(rd.vars).subspan(k * d, d),
                                      nodes[domain[idx2[k]]]);
                }
                bool val = false;
                if (args_conform) {
                    for (int k = 0; k < rd.arity; ++k)
                        for (std::size_t j = 0; j < d; ++j)
                            ctx.push(rd.vars[k * d + j], nodes[domain[idx2[k]]][j]);
                    val = eval_rec(ctx, *rd.body);
                    for (std::size_t k = 0; k < static_cast<std::size_t>(rd.arity) * d; ++k)
                        ctx.pop();
                }
                std::vector<std::uint32_t> ct(rd.arity);
                for (int k = 0; k < rd.arity; ++k) ct[k] = cls[domain[idx2[k]]];
                if (!val && holds.count(ct))
                    throw std::invalid_argument(
                        "interpretation congruence is not compatible with relation '" +
                        rd.name + "'");
                std::size_t pos = idx2.size();
                while (pos > 0 && ++idx2[pos - 1] == domain.size()) idx2[--pos] = 0;
                if (pos == 0) break;
            }
        }

        rel.tuples.assign(tuples.begin(), tuples.end());
        data.relations[rd.name] = std::move(rel);
    }

    return Structure::from_data(data);
}

}  // namespace lrec
