#include "lrec/strategy.hpp"

#include <algorithm>
#include <sstream>

namespace lrec {

// ---------------------------------------------------------------------------
// Tree-pair decoding
// ---------------------------------------------------------------------------

std::optional<TreePairContext> TreePairContext::try_build(const Structure& a,
                                                          const Structure& b) {
    if (a.size() != b.size() || a.universe_fingerprint() != b.universe_fingerprint())
        return std::nullopt;
    if (!a.constant("t") || !b.constant("t")) return std::nullopt;

    NodeId max_node = 0;
    int max_res = -1;
    std::vector<std::pair<NodeId, int>> decoded(a.size());
    for (ElemId e = 0; e < a.size(); ++e) {
        NodeId v;
        int r;
        if (!parse_psp_element_name(a.name_of(e), &v, &r)) return std::nullopt;
        decoded[e] = {v, r};
        max_node = std::max(max_node, v);
        max_res = std::max(max_res, r);
    }
    int p = max_res + 1;
    if (!is_prime(p)) return std::nullopt;

    // Node ids must be exactly 1..2^(h+1)-1.
    std::uint32_t count = max_node;
    if (count < 3 || (count & (count + 1)) != 0) return std::nullopt;
    int height = 0;
    while ((2u << height) - 1 < count) ++height;
    if ((2u << height) - 1 != count) return std::nullopt;
    if (a.size() != static_cast<std::size_t>(count) * p) return std::nullopt;

    TreePairContext ctx{BinTree(height), p, 0, {}, {}, {}};
    ctx.node_of.resize(a.size());
    ctx.residue_of.resize(a.size());
    ctx.elem_of.assign(count + 1, std::vector<ElemId>(p, 0));
    for (ElemId e = 0; e < a.size(); ++e) {
        auto [v, r] = decoded[e];
        if (v < 1 || v > count || r < 0 || r >= p) return std::nullopt;
        ctx.node_of[e] = v;
        ctx.residue_of[e] = r;
        ctx.elem_of[v][r] = e;
    }

    ElemId ta = *a.constant("t"), tb = *b.constant("t");
    if (ctx.node_of[ta] != ctx.tree.root() || ctx.node_of[tb] != ctx.tree.root())
        return std::nullopt;
    ctx.root_offset = ((ctx.residue_of[tb] - ctx.residue_of[ta]) % p + p) % p;
    return ctx;
}

std::optional<int> null_height(const BinTree& t, const OffsetFn& rho) {
    std::optional<int> min_h;
    for (const auto& [v, val] : rho.values) {
        if (val == 0) continue;
        int h = t.height_of(v);
        if (!min_h || h < *min_h) min_h = h;
    }
    if (!min_h) return std::nullopt;
    return *min_h - 1;
}

std::vector<ElemId> offset_permutation(const TreePairContext& ctx, const OffsetFn& rho) {
    std::vector<ElemId> g(ctx.node_of.size());
    for (ElemId e = 0; e < g.size(); ++e) g[e] = e;
    for (const auto& [v, val] : rho.values) {
        if (val == 0) continue;
        for (int r = 0; r < ctx.p; ++r) g[ctx.element(v, r)] = ctx.element(v, r + val);
    }
    return g;
}

PartialInjection offset_injection(const TreePairContext& ctx, const OffsetFn& rho,
                                  const NodeSet& nodes) {
    PartialInjection out;
    for (NodeId v : nodes) {
        if (!rho.defined(v))
            throw std::invalid_argument("offset function misses a requested node");
        for (int r = 0; r < ctx.p; ++r)
            out.insert(ctx.element(v, r), ctx.element(v, r + rho.at(v)));
    }
    return out;
}

std::optional<OffsetFn> position_offsets(const TreePairContext& ctx,
                                         const PartialInjection& f) {
    OffsetFn rho;
    rho.p = ctx.p;
    rho.set(ctx.tree.root(), ctx.root_offset);
    for (const auto& [x, y] : f.pairs()) {
        NodeId v = ctx.node_of[x];
        if (ctx.node_of[y] != v) return std::nullopt;
        int off = ((ctx.residue_of[y] - ctx.residue_of[x]) % ctx.p + ctx.p) % ctx.p;
        if (rho.defined(v)) {
            if (rho.at(v) != off) return std::nullopt;
        } else {
            rho.set(v, off);
        }
    }
    return rho;
}

bool is_free_in_class(const TreePairContext& ctx, const GraphSide& side,
                      std::span<const Value> tuple, NodeId u, const NodeSet& beta,
                      int spike) {
    NodeSet proj;
    for (const Value& v : tuple)
        if (v.sort == Sort::element) proj.insert(ctx.node_of[v.raw]);
    NodeSet m = frontier_of_closed(ctx.tree, closure(ctx.tree, proj));

    OffsetFn mu;
    mu.p = ctx.p;
    for (NodeId v : beta) mu.set(v, 0);
    for (NodeId v : m) mu.set(v, 0);
    mu.set(u, spike);

    auto ext = try_extend_consistent(ctx.tree, mu);
    if (!ext) return false;

    std::vector<Value> image(tuple.begin(), tuple.end());
    for (Value& v : image) {
        if (v.sort != Sort::element) continue;
        NodeId node = ctx.node_of[v.raw];
        int off = ext->defined(node) ? ext->at(node) : 0;
        v = Value::elem(ctx.element(node, ctx.residue_of[v.raw] + off));
    }
    return side.class_of_tuple(image) == side.class_of_tuple(tuple);
}

// ---------------------------------------------------------------------------
// Identity duplicator
// ---------------------------------------------------------------------------

std::vector<ElemId> IdentityDuplicator::extension_bijection(Match& m) {
    std::vector<ElemId> g(m.universe_size());
    for (ElemId e = 0; e < g.size(); ++e) g[e] = e;
    return g;
}

GraphReply IdentityDuplicator::graph_response(Match& m) {
    const auto& st = m.graph_state();
    GraphReply reply;
    // Identity on every element touched by the current tuple or the round
    // injections; enough to cover the legality constraint on g.
    for (const Value& v : st.current) {
        if (v.sort != Sort::element) continue;
        ElemId e = static_cast<ElemId>(v.raw);
        reply.g.insert(e, e);
        if (auto fe = m.position().apply(e)) reply.g.insert(*fe, *fe);
        if (auto he = st.h.apply(e)) reply.g.insert(*he, *he);
    }
    reply.h_provider = [](const std::vector<ElemId>& y) -> std::optional<PartialInjection> {
        PartialInjection h;
        for (ElemId e : y) h.insert(e, e);
        return h;
    };
    return reply;
}

// ---------------------------------------------------------------------------
// Paper duplicator
// ---------------------------------------------------------------------------

PaperDuplicator PaperDuplicator::for_match(const Structure& a, const Structure& b) {
    auto ctx = TreePairContext::try_build(a, b);
    if (!ctx) return PaperDuplicator();
    return PaperDuplicator(std::move(*ctx));
}

OffsetFn PaperDuplicator::extension_offsets(const PartialInjection& f) const {
    auto rho = position_offsets(*ctx_, f);
    if (!rho) throw std::invalid_argument("position is not offset-shaped");
    return extend_consistent(ctx_->tree, *rho);
}

std::vector<ElemId> PaperDuplicator::extension_bijection(Match& m) {
    if (!ctx_) return fallback_.extension_bijection(m);
    auto rho = position_offsets(*ctx_, m.position());
    if (!rho || !is_consistent(ctx_->tree, *rho)) return fallback_.extension_bijection(m);
    // The consistent closure of the pebble offsets, zero elsewhere.
    return offset_permutation(*ctx_, extend_consistent(ctx_->tree, *rho));
}

GraphReply PaperDuplicator::graph_response(Match& m) {
    if (!ctx_) return fallback_.graph_response(m);
    const TreePairContext& ctx = *ctx_;
    const auto& st = m.graph_state();

    auto peb = position_offsets(ctx, m.position());
    if (!peb) return fallback_.graph_response(m);

    // Round offsets: pebble offsets plus the offsets carried by h_i.
    OffsetFn rho_i = *peb;
    for (const auto& [x, y] : st.h.pairs()) {
        NodeId v = ctx.node_of[x];
        if (ctx.node_of[y] != v) return fallback_.graph_response(m);
        int off = ((ctx.residue_of[y] - ctx.residue_of[x]) % ctx.p + ctx.p) % ctx.p;
        if (rho_i.defined(v) && rho_i.at(v) != off) return fallback_.graph_response(m);
        rho_i.set(v, off);
    }

    NodeSet beta;
    for (const auto& [v, _] : peb->values) beta.insert(v);

    NodeSet proj;
    for (const Value& v : st.current)
        if (v.sort == Sort::element) proj.insert(ctx.node_of[v.raw]);

    // sigma_i: zero at class-free frontier nodes, rho_i elsewhere.
    OffsetFn sigma = *peb;
    if (!proj.empty()) {
        NodeSet frontier = frontier_of_closed(ctx.tree, closure(ctx.tree, proj));
        for (NodeId v : proj) {
            int val = rho_i.defined(v) ? rho_i.at(v) : 0;
            bool zero = false;
            if (frontier.count(v) && !beta.count(v) && val != 0)
                zero = is_free_in_class(ctx, *st.side_a, st.current, v, beta);
            if (sigma.defined(v)) {
                if (!zero && sigma.at(v) != val) return fallback_.graph_response(m);
            } else {
                sigma.set(v, zero ? 0 : val);
            }
        }
        // Zeroing a frontier node can only break consistency when the tuple's
        // closure carries an internal constraint; restore such nodes.
        if (!is_consistent(ctx.tree, sigma)) {
            for (NodeId v : proj) {
                if (!rho_i.defined(v)) continue;
                if (sigma.at(v) != rho_i.at(v)) {
                    sigma.set(v, rho_i.at(v));
                    if (is_consistent(ctx.tree, sigma)) break;
                }
            }
        }
    }
    if (!is_consistent(ctx.tree, sigma)) return fallback_.graph_response(m);

    GraphReply reply;
    if (!proj.empty()) {
        OffsetFn closed = extend_consistent(ctx.tree, sigma);
        OffsetFn on_proj;
        on_proj.p = ctx.p;
        for (NodeId v : proj) on_proj.set(v, closed.defined(v) ? closed.at(v) : 0);
        reply.g = offset_injection(ctx, on_proj, proj);
    }

    // Each pebble subset gets the single-step lift of sigma onto its tree
    // projection.
    OffsetFn sigma_copy = sigma;
    int c = st.c;
    TreePairContext ctx_copy = ctx;
    reply.h_provider = [sigma_copy, c,
                        ctx_copy](const std::vector<ElemId>& y)
        -> std::optional<PartialInjection> {
        NodeSet vy;
        for (ElemId e : y) vy.insert(ctx_copy.node_of[e]);
        PartialInjection h;
        if (vy.empty()) return h;
        try {
            auto lifts = lift_sequence(ctx_copy.tree, sigma_copy.domain(), sigma_copy, {vy},
                                       std::max<std::size_t>(c, vy.size()));
            const OffsetFn& eta = lifts.at(0);
            for (ElemId e : y) {
                NodeId v = ctx_copy.node_of[e];
                h.insert(e, ctx_copy.element(v, ctx_copy.residue_of[e] + eta.at(v)));
            }
            return h;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    return reply;
}

// ---------------------------------------------------------------------------
// Random spoiler
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> random_formula_pool(const Structure& s, int rank_cap) {
    std::vector<std::string> pool = {"false", "x1 = y1"};
    for (const auto& [name, rel] : s.relations()) {
        std::string self;
        for (int i = 0; i < rel.arity; ++i) self += (i ? "," : "") + std::string("x1");
        pool.push_back(name + "(" + self + ")");
        if (rel.arity >= 2) {
            std::string mixed;
            for (int i = 0; i < rel.arity; ++i)
                mixed += (i ? "," : "") + std::string(i % 2 == 0 ? "x1" : "y1");
            pool.push_back(name + "(" + mixed + ")");
        }
        if (rank_cap >= 1 && rel.arity >= 2) {
            std::string args;
            for (int i = 0; i < rel.arity; ++i) {
                if (i) args += ",";
                args += (i == 0 ? "x1" : (i == 1 ? "z" : "y1"));
            }
            pool.push_back("exists z. " + name + "(" + args + ")");
            std::string args2;
            for (int i = 0; i < rel.arity; ++i) {
                if (i) args2 += ",";
                args2 += (i == rel.arity - 1 ? "y1" : (i == 0 ? "z" : "x1"));
            }
            pool.push_back("exists z. " + name + "(" + args2 + ")");
        }
    }
    return pool;
}

Vocabulary vocab_of(const Structure& s) {
    Vocabulary v;
    for (const auto& [name, rel] : s.relations()) v.relations[name] = rel.arity;
    for (const auto& [name, _] : s.constants()) v.constants.insert(name);
    return v;
}

}  // namespace

SpoilerAgent::MainAction RandomSpoiler::select_action(Match& m) {
    MainAction act;
    const auto& cfg = m.config();
    int beta = static_cast<int>(m.position().size());
    std::uint64_t n = m.universe_size();
    std::uint64_t w = 2 * n + 1;

    bool graph_possible = cfg.k - beta >= 2 && graph_moves_opened_ < 2 &&
                          w <= cfg.budget.max_nodes && w * w <= cfg.budget.max_pairs;
    if (!graph_possible || !rng_.chance(1, 3)) return act;  // extension

    ++graph_moves_opened_;
    act.graph_move = true;
    act.open.c = 1;
    int rank_cap = cfg.k - beta - 2;

    // Every quantifier in a formula multiplies the per-pair evaluation cost
    // by roughly the universe size; budget accordingly.
    auto affordable = [&](const FormulaPtr& f) {
        std::uint64_t cost = w * w;
        for (int r = rank(f); r > 0; --r) {
            if (cost > cfg.budget.max_pairs) return false;
            cost *= n + 1;
        }
        return cost <= cfg.budget.max_pairs;
    };

    auto pool = random_formula_pool(m.structure_a(), rank_cap);
    Vocabulary voc = vocab_of(m.structure_a());
    FormulaPtr edge, sim;
    for (int tries = 0; tries < 20 && !edge; ++tries) {
        auto f = parse_formula(rng_.pick(pool), voc);
        if (rank(f) <= rank_cap && iteration_degree(f) <= cfg.q && affordable(f)) edge = f;
    }
    for (int tries = 0; tries < 20 && !sim; ++tries) {
        auto f = parse_formula(pool[rng_.below(std::min<std::size_t>(pool.size(), 4))], voc);
        if (rank(f) <= rank_cap && iteration_degree(f) <= cfg.q && affordable(f)) sim = f;
    }
    if (!edge) edge = f_bool(false);
    if (!sim) sim = f_bool(false);
    act.open.phi_edge = edge;
    act.open.phi_sim = sim;

    auto pebbles = m.pebbled();
    if (!pebbles.empty() && rng_.chance(1, 2)) {
        act.open.a0 = {Value::elem(pebbles[rng_.below(pebbles.size())])};
    } else {
        act.open.a0 = {Value::num(rng_.below(n + 1))};
    }
    std::uint64_t ell_cap = cfg.q == 0 ? 1 : std::min<std::uint64_t>(n, 60);
    act.open.ell0 = BigInt(rng_.below(ell_cap + 1));
    return act;
}

ElemId RandomSpoiler::extension_pick(Match& m, const std::vector<ElemId>& g) {
    (void)g;
    std::vector<ElemId> fresh;
    for (ElemId e = 0; e < m.universe_size(); ++e)
        if (!m.position().defined(e)) fresh.push_back(e);
    if (fresh.empty()) return static_cast<ElemId>(rng_.below(m.universe_size()));
    return fresh[rng_.below(fresh.size())];
}

SpoilerAgent::GraphAction RandomSpoiler::graph_action(Match& m) {
    const auto& st = m.graph_state();
    std::uint32_t cls = st.side_a->class_of_tuple(st.current);
    bool has_succ = !st.side_a->q.graph.out[cls].empty();
    return {.exit = !has_succ || rng_.chance(1, 3)};
}

std::vector<Value> RandomSpoiler::graph_step(
    Match& m, const std::function<std::vector<Value>(std::uint64_t)>& image_of) {
    (void)image_of;
    const auto& st = m.graph_state();
    std::uint32_t cls = st.side_a->class_of_tuple(st.current);
    auto succ = st.side_a->q.graph.out[cls];
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    std::uint32_t target = succ[rng_.below(succ.size())];
    const auto& members = st.side_a->q.members[target];
    std::uint32_t rep = members[rng_.below(members.size())];
    return st.side_a->space->tuple_of(rep);
}

// ---------------------------------------------------------------------------
// Greedy spoiler
// ---------------------------------------------------------------------------

SpoilerAgent::MainAction GreedySpoiler::select_action(Match& m) {
    (void)m;
    return {};
}

ElemId GreedySpoiler::extension_pick(Match& m, const std::vector<ElemId>& g) {
    const Structure& a = m.structure_a();
    const Structure& b = m.structure_b();

    std::vector<ElemId> fresh;
    for (ElemId e = 0; e < m.universe_size(); ++e)
        if (!m.position().defined(e)) fresh.push_back(e);
    if (fresh.empty()) return 0;

    // A pick that breaks the partial isomorphism immediately.
    for (ElemId e : fresh) {
        PartialInjection f2 = m.position();
        f2.insert(e, g[e]);
        if (!is_partial_isomorphism(f2, a, b)) return e;
    }

    // Otherwise prefer elements sharing a relation tuple with a pebble.
    for (const auto& [name, rel] : a.relations()) {
        for (const auto& tuple : rel.tuples) {
            bool touches = false, has_fresh = false;
            ElemId candidate = 0;
            for (ElemId e : tuple) {
                if (m.position().defined(e)) touches = true;
                if (!m.position().defined(e)) {
                    has_fresh = true;
                    candidate = e;
                }
            }
            if (touches && has_fresh) return candidate;
        }
    }
    return fresh[rng_.below(fresh.size())];
}

SpoilerAgent::GraphAction GreedySpoiler::graph_action(Match& m) {
    (void)m;
    return {.exit = true};
}

std::vector<Value> GreedySpoiler::graph_step(
    Match& m, const std::function<std::vector<Value>(std::uint64_t)>&) {
    (void)m;
    throw std::logic_error("greedy spoiler never steps in graph moves");
}

// ---------------------------------------------------------------------------
// Formula spoiler
// ---------------------------------------------------------------------------

FormulaSpoiler::FormulaSpoiler(FormulaPtr formula, Assignment env)
    : cur_(std::move(formula)), env_a_(std::move(env)) {}

bool FormulaSpoiler::eval_a(const Formula& f, Match& m) const {
    return eval_formula(f, m.structure_a(), env_a_, m.config().budget);
}

Assignment FormulaSpoiler::env_b(Match& m) const {
    Assignment out;
    for (const auto& [var, val] : env_a_) {
        Value v = val;
        if (v.sort == Sort::element) {
            auto mapped = m.position().apply(static_cast<ElemId>(v.raw));
            if (!mapped) throw std::logic_error("formula spoiler env value not pebbled");
            v = Value::elem(*mapped);
        }
        out[var] = v;
    }
    return out;
}

bool FormulaSpoiler::eval_b(const Formula& f, Match& m) const {
    return eval_formula(f, m.structure_b(), env_b(m), m.config().budget);
}

// Walk into the first subformula whose truth values differ across the two
// structures, without spending moves: connectives, negations, and number
// quantifiers (number values are shared, no bijection is involved).
void FormulaSpoiler::descend(Match& m) {
    for (;;) {
        switch (cur_->kind) {
            case Formula::Kind::negation:
                cur_ = cur_->sub[0];
                continue;
            case Formula::Kind::conjunction:
            case Formula::Kind::disjunction: {
                bool moved = false;
                for (const auto& child : cur_->sub) {
                    if (eval_a(*child, m) != eval_b(*child, m)) {
                        cur_ = child;
                        moved = true;
                        break;
                    }
                }
                if (!moved) return;  // no distinguishing child; stop descending
                continue;
            }
            case Formula::Kind::exists:
            case Formula::Kind::forall: {
                if (cur_->var.sort != Sort::number) return;
                bool found = false;
                for (std::uint64_t r = 0; r <= m.structure_a().number_max() && !found; ++r) {
                    env_a_[cur_->var] = Value::num(r);
                    if (eval_a(*cur_->sub[0], m) != eval_b(*cur_->sub[0], m)) {
                        cur_ = cur_->sub[0];
                        found = true;
                    }
                }
                if (!found) {
                    env_a_.erase(cur_->var);
                    return;
                }
                continue;
            }
            default:
                return;
        }
    }
}

namespace {

void collect_constants(const Formula& f, std::set<std::string>& out) {
    for (const Term& t : f.args)
        if (t.kind == Term::Kind::constant) out.insert(t.name);
    for (const Term& t : f.w_terms)
        if (t.kind == Term::Kind::constant) out.insert(t.name);
    if (f.numterm.kind == Term::Kind::constant) out.insert(f.numterm.name);
    for (const auto& s : f.sub) collect_constants(*s, out);
}

}  // namespace

SpoilerAgent::MainAction FormulaSpoiler::select_action(Match& m) {
    MainAction act;
    descend(m);

    // Relation tuples are only compared over pebbled points, so any constant
    // the formula talks about must be pebbled for its atoms to bite (and a
    // bijection that misplaces a pebbled constant loses on the spot).
    {
        std::set<std::string> consts;
        collect_constants(*cur_, consts);
        for (const auto& name : consts) {
            auto id = m.structure_a().constant(name);
            if (id && !m.position().defined(*id) &&
                static_cast<int>(m.position().size()) < m.config().k) {
                pending_constant_ = *id;
                return act;  // extension move to pebble the constant
            }
        }
    }

    if (cur_->kind == Formula::Kind::lrec) {
        int c = static_cast<int>(cur_->u_vars.size());
        std::map<Var, Var> ren;
        for (int i = 0; i < c; ++i) {
            ren[cur_->u_vars[i]] = {"x" + std::to_string(i + 1), cur_->u_vars[i].sort};
            ren[cur_->v_vars[i]] = {"y" + std::to_string(i + 1), cur_->v_vars[i].sort};
        }
        act.graph_move = true;
        act.open.c = c;
        act.open.phi_edge = rename_free_vars(cur_->sub[0], ren);
        act.open.phi_sim = rename_free_vars(cur_->sub[1], ren);

        std::set<Var> fv;
        {
            auto fe = free_vars(*act.open.phi_edge);
            auto fs = free_vars(*act.open.phi_sim);
            fv.insert(fe.begin(), fe.end());
            fv.insert(fs.begin(), fs.end());
        }
        for (const Var& v : fv) {
            if (v.name.size() >= 2 && (v.name[0] == 'x' || v.name[0] == 'y')) {
                bool is_node_var = false;
                for (int i = 0; i < c; ++i)
                    if (v.name == "x" + std::to_string(i + 1) ||
                        v.name == "y" + std::to_string(i + 1))
                        is_node_var = true;
                if (is_node_var) continue;
            }
            auto it = env_a_.find(v);
            if (it == env_a_.end())
                throw std::logic_error("unbound parameter in recursion bodies");
            act.open.params[v] = it->second;
        }

        auto term_value = [&](const Term& t) -> Value {
            if (t.kind == Term::Kind::literal) return Value::num(t.value);
            if (t.kind == Term::Kind::constant)
                return Value::elem(*m.structure_a().constant(t.name));
            return env_a_.at({t.name, t.sort});
        };
        for (const Term& t : cur_->w_terms) act.open.a0.push_back(term_value(t));
        std::vector<std::uint64_t> digits;
        for (const Term& t : cur_->r_terms) digits.push_back(term_value(t).raw);
        act.open.ell0 = encode_number_tuple(digits, m.structure_a().number_max());

        plan_ = GraphPlan{};
        plan_->node = cur_.get();
        plan_kept_ = cur_;
        return act;
    }

    // Quantifier or count: extension move, the witness is picked after the
    // bijection arrives. Anything else is already decided by the position.
    return act;
}

ElemId FormulaSpoiler::extension_pick(Match& m, const std::vector<ElemId>& g) {
    if (pending_constant_) {
        ElemId e = *pending_constant_;
        pending_constant_.reset();
        return e;
    }

    if (cur_->kind == Formula::Kind::exists || cur_->kind == Formula::Kind::forall ||
        cur_->kind == Formula::Kind::count) {
        const Formula& body = *cur_->sub[0];
        Var x = cur_->var;
        Assignment envb = env_b(m);
        for (ElemId u = 0; u < m.universe_size(); ++u) {
            env_a_[x] = Value::elem(u);
            envb[x] = Value::elem(g[u]);
            bool va = eval_formula(body, m.structure_a(), env_a_, m.config().budget);
            bool vb = eval_formula(body, m.structure_b(), envb, m.config().budget);
            if (va != vb) {
                cur_ = cur_->sub[0];
                return u;
            }
        }
        env_a_.erase(x);
        // No differing witness; the formula did not distinguish here. Pebble
        // something fresh and keep playing.
    }
    for (ElemId e = 0; e < m.universe_size(); ++e)
        if (!m.position().defined(e)) return e;
    return 0;
}

namespace {

// Label sets for one side's quotient, from the label body of a recursion
// operator: every class collects the encodings of the number tuples its
// members satisfy.
std::shared_ptr<ChiEvaluator> labelled_chi(const Structure& s, const GraphSide& side,
                                           const Formula& node, const Assignment& env,
                                           const EvalBudget& budget) {
    const std::size_t d = node.p_vars.size();
    const std::uint64_t ncount = s.number_max() + 1;
    LabelledGraph lg = side.q.graph;

    const Formula& body = *node.sub[2];
    if (!(body.kind == Formula::Kind::boolean_const && !body.value)) {
        Assignment e = env;
        for (const auto& v : node.u_vars) e.erase(v);
        for (const auto& v : node.p_vars) e.erase(v);

        for (std::uint64_t idx = 0; idx < side.space->size(); ++idx) {
            std::vector<Value> tuple = side.space->tuple_of(idx);
            bool conform = true;
            for (std::size_t i = 0; i < node.u_vars.size() && conform; ++i)
                conform = node.u_vars[i].sort == tuple[i].sort;
            if (!conform) continue;
            for (std::size_t i = 0; i < node.u_vars.size(); ++i)
                e[node.u_vars[i]] = tuple[i];

            std::vector<std::uint64_t> digits(d, 0);
            while (true) {
                for (std::size_t i = 0; i < d; ++i) e[node.p_vars[i]] = Value::num(digits[i]);
                if (eval_formula(body, s, e, budget)) {
                    lg.labels[side.q.class_of[idx]].insert(
                        encode_number_tuple(digits, s.number_max()));
                }
                std::size_t pos = d;
                while (pos > 0 && ++digits[pos - 1] == ncount) digits[--pos] = 0;
                if (pos == 0) break;
            }
        }
    }
    return std::make_shared<ChiEvaluator>(std::move(lg));
}

}  // namespace

SpoilerAgent::GraphAction FormulaSpoiler::graph_action(Match& m) {
    const auto& st = m.graph_state();
    if (!plan_ || plan_->node == nullptr) return {.exit = true};

    if (!plan_->chi_a) {
        plan_->side_a = st.side_a;
        plan_->side_b = st.side_b;
        plan_->chi_a = labelled_chi(m.structure_a(), *st.side_a, *plan_->node, env_a_,
                                    m.config().budget);
        plan_->chi_b = labelled_chi(m.structure_b(), *st.side_b, *plan_->node, env_b(m),
                                    m.config().budget);
    }

    auto counts = [&](const GraphSide& side, ChiEvaluator& chi_eval,
                      std::uint32_t cls) -> std::uint64_t {
        std::uint64_t cnt = 0;
        auto succ = side.q.graph.out[cls];
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        for (std::uint32_t k : succ) {
            BigInt ell2 = floor_div(st.ell - 1, BigInt(side.q.graph.in[k].size()));
            if (chi_eval.query(k, ell2)) ++cnt;
        }
        return cnt;
    };

    std::uint32_t cls_a = st.side_a->class_of_tuple(st.current);
    std::uint64_t m_a = counts(*st.side_a, *plan_->chi_a, cls_a);

    std::string why;
    auto fi = compose_injection(m.position(), st.h, &why);
    std::uint64_t m_b = m_a + 1;  // forces a step when the image is unusable
    if (fi) {
        std::vector<Value> img = st.current;
        bool ok = true;
        for (Value& v : img) {
            if (v.sort != Sort::element) continue;
            auto e = fi->apply(static_cast<ElemId>(v.raw));
            if (!e) {
                ok = false;
                break;
            }
            v = Value::elem(*e);
        }
        if (ok) m_b = counts(*st.side_b, *plan_->chi_b, st.side_b->class_of_tuple(img));
    }

    if (m_a == m_b) {
        plan_->last_m = m_a;
        return {.exit = true};
    }
    return {.exit = false};
}

std::vector<Value> FormulaSpoiler::graph_step(
    Match& m, const std::function<std::vector<Value>(std::uint64_t)>& image_of) {
    const auto& st = m.graph_state();
    std::uint32_t cls_a = st.side_a->class_of_tuple(st.current);

    std::optional<std::uint64_t> fallback;
    for (std::uint64_t idx = 0; idx < st.side_a->space->size(); ++idx) {
        std::uint32_t k = st.side_a->q.class_of[idx];
        if (!st.side_a->q.graph.edges.count({cls_a, k})) continue;
        if (!fallback) fallback = idx;
        BigInt ell2 = floor_div(st.ell - 1, BigInt(st.side_a->q.graph.in[k].size()));
        bool va = plan_ && plan_->chi_a ? plan_->chi_a->query(k, ell2) : false;
        std::vector<Value> img = image_of(idx);
        std::uint32_t kb = st.side_b->class_of_tuple(img);
        bool vb = plan_ && plan_->chi_b ? plan_->chi_b->query(kb, ell2) : false;
        if (va != vb) return st.side_a->space->tuple_of(idx);
    }
    if (fallback) return st.side_a->space->tuple_of(*fallback);
    throw std::logic_error("no successor available for a graph step");
}

void FormulaSpoiler::on_graph_end(Match& m) {
    if (!plan_ || plan_->node == nullptr) return;
    const auto& st = m.graph_state();
    const Formula& node = *plan_->node;

    std::uint64_t m_val = st.ell == 0 ? 0 : plan_->last_m;

    // Continue on the label formula at the final tuple and the shared count.
    bool conform = true;
    for (std::size_t i = 0; i < node.u_vars.size(); ++i)
        conform = conform && node.u_vars[i].sort == st.current[i].sort;
    if (!conform) {
        cur_ = f_bool(false);  // label formula is vacuous off the typed slice
        plan_.reset();
        plan_kept_.reset();
        return;
    }
    for (std::size_t i = 0; i < node.u_vars.size(); ++i)
        env_a_[node.u_vars[i]] = st.current[i];
    const std::size_t d = node.p_vars.size();
    try {
        auto digits = decode_number_tuple(BigInt(m_val), m.structure_a().number_max(), d);
        for (std::size_t i = 0; i < d; ++i) env_a_[node.p_vars[i]] = Value::num(digits[i]);
    } catch (const std::exception&) {
        for (std::size_t i = 0; i < d; ++i) env_a_[node.p_vars[i]] = Value::num(0);
    }
    cur_ = node.sub[2];
    plan_.reset();
    plan_kept_.reset();
}

}  // namespace lrec
