#include "lrec/game.hpp"

#include "json.hpp"

#include <algorithm>
#include <sstream>

namespace lrec {

using nlohmann::json;

namespace {

std::string value_key(const Structure& s, const Value& v) {
    return v.sort == Sort::element ? "e:" + s.name_of(static_cast<ElemId>(v.raw))
                                   : "#" + std::to_string(v.raw);
}

json value_json(const Structure& s, const Value& v) { return value_key(s, v); }

std::optional<Value> value_from_json(const Structure& s, const json& j) {
    if (!j.is_string()) return std::nullopt;
    std::string text = j.get<std::string>();
    if (text.rfind("e:", 0) == 0) {
        auto id = s.id_of(text.substr(2));
        if (!id) return std::nullopt;
        return Value::elem(*id);
    }
    if (text.rfind("#", 0) == 0) {
        try {
            return Value::num(std::stoull(text.substr(1)));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

json injection_json(const Structure& s, const PartialInjection& f) {
    json out = json::array();
    for (const auto& [a, b] : f.pairs()) out.push_back({s.name_of(a), s.name_of(b)});
    return out;
}

std::optional<PartialInjection> injection_from_json(const Structure& s, const json& j) {
    PartialInjection f;
    if (!j.is_array()) return std::nullopt;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) return std::nullopt;
        auto a = s.id_of(pair[0].get<std::string>());
        auto b = s.id_of(pair[1].get<std::string>());
        if (!a || !b || !f.insert(*a, *b)) return std::nullopt;
    }
    return f;
}

std::vector<ElemId> tuple_elements(std::span<const Value> tuple) {
    std::vector<ElemId> out;
    for (const Value& v : tuple)
        if (v.sort == Sort::element) out.push_back(static_cast<ElemId>(v.raw));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BigInt pow_bigint(std::uint64_t base, int exp) {
    BigInt r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Match
// ---------------------------------------------------------------------------

Match::Match(const GameConfig& cfg, const Structure& a, const Structure& b,
             PartialInjection f0)
    : cfg_(cfg), a_(&a), b_(&b), f_(std::move(f0)) {
    if (a.size() != b.size() || a.universe_fingerprint() != b.universe_fingerprint())
        throw std::invalid_argument("game structures must share a universe");
    if (static_cast<int>(f_.size()) > cfg.k)
        throw std::invalid_argument("initial injection larger than the step budget");
    std::set<std::string> cnames;
    for (const auto& [n, _] : a.constants()) cnames.insert(n);
    for (const auto& [n, _] : b.constants()) cnames.insert(n);
    for (const auto& name : cnames) {
        auto ea = a.constant(name), eb = b.constant(name);
        if (ea && f_.defined(*ea) && (!eb || f_.apply(*ea) != *eb))
            throw std::invalid_argument("initial injection conflicts with constant '" + name +
                                        "'");
    }
}

std::vector<ElemId> Match::pebbled() const {
    std::vector<ElemId> out;
    for (const auto& [a, _] : f_.pairs()) out.push_back(a);
    return out;
}

std::uint64_t Match::state_hash() const {
    std::ostringstream os;
    for (const auto& [a, b] : f_.pairs()) os << a << ">" << b << ";";
    os << "|" << moves_ << "|";
    if (graph_) {
        os << "g" << graph_->round << ":" << graph_->ell.str() << ":";
        for (const Value& v : graph_->current) os << value_key(*a_, v) << ",";
        os << ":";
        for (const auto& [a, b] : graph_->h.pairs()) os << a << ">" << b << ";";
    }
    return fnv1a(os.str());
}

std::optional<Outcome> Match::check_position() {
    if (!is_partial_isomorphism(f_, *a_, *b_))
        return Outcome{Winner::spoiler, "position is not a partial isomorphism"};
    if (!graph_ && static_cast<int>(f_.size()) >= cfg_.k)
        return Outcome{Winner::duplicator, "pebble budget reached with a partial isomorphism"};
    return std::nullopt;
}

std::shared_ptr<const GraphSide> Match::materialize_side(const Structure& s,
                                                         const GraphOpenMove& mv,
                                                         bool b_side) {
    // Parameters on the B side run through f.
    Assignment params;
    for (const auto& [var, val] : mv.params) {
        Value v = val;
        if (b_side && v.sort == Sort::element) {
            auto mapped = f_.apply(static_cast<ElemId>(v.raw));
            if (!mapped) throw std::invalid_argument("graph-move parameter is not pebbled");
            v = Value::elem(*mapped);
        }
        params[var] = v;
    }

    std::ostringstream key;
    key << (b_side ? "B|" : "A|") << mv.c << "|" << print_formula(mv.phi_edge) << "|"
        << print_formula(mv.phi_sim) << "|";
    for (const auto& [var, val] : params)
        key << var.name << (var.sort == Sort::number ? "#" : "@") << val.raw << ";";

    auto it = side_cache_.find(key.str());
    if (it != side_cache_.end()) return it->second;

    // Node tuple variables are x1..xc and y1..yc by convention; their sorts
    // follow the formulas' use. Non-conforming tuples of the untyped node set
    // simply fall outside the defined relations.
    SemiGraphInterp si;
    si.untyped = true;
    std::set<Var> fv;
    {
        auto fe = free_vars(*mv.phi_edge);
        auto fs = free_vars(*mv.phi_sim);
        fv.insert(fe.begin(), fe.end());
        fv.insert(fs.begin(), fs.end());
    }
    for (int i = 0; i < mv.c; ++i) {
        std::string xn = "x" + std::to_string(i + 1);
        std::string yn = "y" + std::to_string(i + 1);
        si.u_vars.push_back({xn, fv.count({xn, Sort::number}) ? Sort::number : Sort::element});
        si.v_vars.push_back({yn, fv.count({yn, Sort::number}) ? Sort::number : Sort::element});
    }
    si.edge = mv.phi_edge;
    si.merge = mv.phi_sim;
    si.label = nullptr;

    MaterializedSemiGraph msg = materialize_semigraph(si, s, params, cfg_.budget);
    auto side = std::make_shared<GraphSide>();
    side->space = msg.space;
    side->graph = std::move(msg.graph);
    side->q = quotient(side->graph);
    auto shared = std::shared_ptr<const GraphSide>(std::move(side));
    side_cache_[key.str()] = shared;
    return shared;
}

std::optional<Outcome> Match::start_graph_move(const GraphOpenMove& mv, std::string* reject) {
    auto fail = [&](const std::string& why) -> std::optional<Outcome> {
        if (reject) *reject = why;
        return std::nullopt;
    };
    if (graph_) return fail("already inside a graph move");
    int beta = static_cast<int>(f_.size());
    if (mv.c < 1 || 2 * mv.c > cfg_.k - beta)
        return fail("node width exceeds (k - |pebbles|)/2");
    int rank_cap = cfg_.k - beta - 2 * mv.c;
    if (rank(mv.phi_edge) > rank_cap || rank(mv.phi_sim) > rank_cap)
        return fail("formula rank exceeds the budget");
    if (iteration_degree(mv.phi_edge) > cfg_.q || iteration_degree(mv.phi_sim) > cfg_.q)
        return fail("formula iteration-degree exceeds the budget");
    if (static_cast<int>(mv.a0.size()) != mv.c) return fail("starting tuple width mismatch");
    for (const Value& v : mv.a0) {
        if (v.sort == Sort::element && !f_.defined(static_cast<ElemId>(v.raw)))
            return fail("starting tuple uses an unpebbled element");
        if (v.sort == Sort::number && v.raw > a_->number_max())
            return fail("starting tuple number out of range");
    }
    for (const auto& [var, val] : mv.params) {
        if (val.sort == Sort::element && !f_.defined(static_cast<ElemId>(val.raw)))
            return fail("graph-move parameter uses an unpebbled element");
    }
    if (mv.ell0 < 0 || mv.ell0 > pow_bigint(a_->size(), cfg_.q))
        return fail("starting counter exceeds n^q");

    GraphRoundState st;
    st.c = mv.c;
    try {
        st.side_a = materialize_side(*a_, mv, false);
        st.side_b = materialize_side(*b_, mv, true);
    } catch (const BudgetError& e) {
        return fail(std::string("budget: ") + e.what());
    }
    st.current = mv.a0;
    st.ell = mv.ell0;
    st.round = 0;
    st.opened_with = mv;
    graph_ = std::move(st);
    node_h_.clear();
    last_h_.clear();
    return std::nullopt;
}

std::optional<Outcome> Match::apply_extension(const std::vector<ElemId>& g, ElemId pick,
                                              std::string* reject) {
    auto fail = [&](const std::string& why) -> std::optional<Outcome> {
        if (reject) *reject = why;
        return std::nullopt;
    };
    if (graph_) return fail("extension move inside a graph move");
    if (g.size() != a_->size()) return fail("bijection has the wrong size");
    std::vector<bool> seen(g.size(), false);
    for (ElemId img : g) {
        if (img >= g.size() || seen[img]) return fail("not a bijection");
        seen[img] = true;
    }
    for (const auto& [x, y] : f_.pairs())
        if (g[x] != y) return fail("bijection does not extend the position");
    if (pick >= g.size()) return fail("picked element outside the universe");

    f_.insert(pick, g[pick]);  // g extends f and is injective, so this holds
    return check_position();
}

std::optional<Outcome> Match::apply_graph_reply(const GraphReply& reply, std::string* reject) {
    auto lose = [&](const std::string& why) -> std::optional<Outcome> {
        return Outcome{Winner::spoiler, "duplicator loses: " + why};
    };
    auto fail = [&](const std::string& why) -> std::optional<Outcome> {
        if (reject) *reject = why;
        return std::nullopt;
    };
    if (!graph_) return fail("graph reply outside a graph move");
    GraphRoundState& st = *graph_;

    std::string why;
    auto fi = compose_injection(f_, st.h, &why);
    if (!fi) return lose("position and round injection conflict: " + why);

    // g^{-1} applied to f_i(a_i) must stay in the A-side class of a_i.
    std::vector<Value> fia = st.current;
    for (Value& v : fia) {
        if (v.sort != Sort::element) continue;
        auto m = fi->apply(static_cast<ElemId>(v.raw));
        if (!m) return lose("current tuple leaves the round injection domain");
        v = Value::elem(*m);
    }
    std::vector<Value> ga = fia;
    for (Value& v : ga) {
        if (v.sort != Sort::element) continue;
        auto m = reply.g.apply_inverse(static_cast<ElemId>(v.raw));
        if (!m) return lose("g does not cover the image of the current tuple");
        v = Value::elem(*m);
    }
    if (st.side_a->class_of_tuple(ga) != st.side_a->class_of_tuple(st.current))
        return lose("g moves the current tuple out of its class");

    // g applied to a_i, for the B side of condition (a).
    std::vector<Value> g_of_a = st.current;
    for (Value& v : g_of_a) {
        if (v.sort != Sort::element) continue;
        auto m = reply.g.apply(static_cast<ElemId>(v.raw));
        if (!m) return lose("g does not cover the current tuple");
        v = Value::elem(*m);
    }
    std::uint32_t cls_a_cur = st.side_a->class_of_tuple(st.current);
    std::uint32_t cls_b_img = st.side_b->class_of_tuple(g_of_a);

    const std::uint64_t W = st.side_a->space->size();
    node_h_.assign(static_cast<std::size_t>(W), std::nullopt);
    last_h_.clear();
    std::map<std::vector<ElemId>, PartialInjection> h_cache;
    std::unordered_map<std::uint64_t, std::uint64_t> image_seen;
    image_seen.reserve(static_cast<std::size_t>(W) * 2);

    const auto& qa = st.side_a->q;
    const auto& qb = st.side_b->q;

    for (std::uint64_t idx = 0; idx < W; ++idx) {
        std::vector<Value> node = st.side_a->space->tuple_of(idx);
        std::vector<ElemId> y = tuple_elements(node);

        auto cached = h_cache.find(y);
        if (cached == h_cache.end()) {
            auto hy = reply.h_provider(y);
            if (!hy) return lose("no injection offered for a pebble subset");
            // Keep exactly the requested domain so |dom h_i| stays <= c.
            PartialInjection trimmed;
            for (ElemId e : y) {
                auto img = hy->apply(e);
                if (!img) return lose("offered injection misses part of its domain");
                trimmed.insert(e, *img);
            }
            cached = h_cache.emplace(y, std::move(trimmed)).first;
            last_h_.push_back({y, cached->second});
        }
        const PartialInjection& hy = cached->second;

        std::vector<Value> img = node;
        for (Value& v : img) {
            if (v.sort != Sort::element) continue;
            v = Value::elem(*hy.apply(static_cast<ElemId>(v.raw)));
        }
        std::uint64_t img_idx = st.side_b->space->index_of(img);
        auto [it, fresh] = image_seen.emplace(img_idx, idx);
        if (!fresh && it->second != idx)
            return lose("two distinct tuples share an image (injectivity)");
        node_h_[static_cast<std::size_t>(idx)] = hy;

        std::uint32_t ca = qa.class_of[static_cast<std::size_t>(idx)];
        std::uint32_t cb = qb.class_of[static_cast<std::size_t>(img_idx)];

        bool edge_a = qa.graph.edges.count({cls_a_cur, ca}) > 0;
        bool edge_b = qb.graph.edges.count({cls_b_img, cb}) > 0;
        if (edge_a != edge_b) return lose("edge correspondence fails (condition a)");

        if (qa.graph.in[ca].size() != qb.graph.in[cb].size())
            return lose("in-degree mismatch (condition b)");
    }

    last_g_ = reply.g;
    return std::nullopt;
}

std::vector<Value> Match::image_of_node(std::uint64_t idx) const {
    const GraphRoundState& st = *graph_;
    std::vector<Value> img = st.side_a->space->tuple_of(idx);
    const auto& hy = node_h_.at(static_cast<std::size_t>(idx));
    for (Value& v : img) {
        if (v.sort != Sort::element) continue;
        v = Value::elem(*hy->apply(static_cast<ElemId>(v.raw)));
    }
    return img;
}

std::optional<Outcome> Match::apply_graph_step(const std::vector<Value>& next,
                                               std::string* reject) {
    auto fail = [&](const std::string& why) -> std::optional<Outcome> {
        if (reject) *reject = why;
        return std::nullopt;
    };
    if (!graph_) return fail("graph step outside a graph move");
    GraphRoundState& st = *graph_;
    if (static_cast<int>(next.size()) != st.c) return fail("step tuple width mismatch");
    if (!st.side_a->space->contains(next)) return fail("step tuple outside the node set");

    std::uint64_t next_idx = st.side_a->space->index_of(next);
    std::uint32_t cls_cur = st.side_a->class_of_tuple(st.current);
    std::uint32_t cls_next = st.side_a->q.class_of[static_cast<std::size_t>(next_idx)];
    if (!st.side_a->q.graph.edges.count({cls_cur, cls_next}))
        return fail("step target is not a successor class");

    const auto& hopt = node_h_.at(static_cast<std::size_t>(next_idx));
    if (!hopt) return fail("no committed injection for the step target");

    std::size_t indeg = st.side_a->q.graph.in[cls_next].size();
    BigInt ell_next = floor_div(st.ell - 1, BigInt(indeg));
    if (ell_next >= st.ell) throw std::logic_error("counter failed to decrease");

    st.ell = ell_next;
    st.current = next;
    st.h = *hopt;
    st.round += 1;
    return std::nullopt;
}

std::optional<Outcome> Match::exit_graph_move() {
    if (!graph_) throw std::logic_error("not inside a graph move");
    std::string why;
    auto merged = compose_injection(f_, graph_->h, &why);
    graph_.reset();
    node_h_.clear();
    if (!merged)
        return Outcome{Winner::spoiler, "duplicator loses: exit injection conflicts: " + why};
    f_ = std::move(*merged);
    return check_position();
}

// ---------------------------------------------------------------------------
// run_match
// ---------------------------------------------------------------------------

namespace {

struct Recorder {
    Transcript out;

    void header(const GameConfig& cfg, const Structure& a, const Structure& b,
                const PartialInjection& f0, std::uint64_t seed) {
        json j{{"type", "header"},
               {"seed", seed},
               {"k", cfg.k},
               {"q", cfg.q},
               {"move_cap", cfg.move_cap},
               {"fa", a.fingerprint()},
               {"fb", b.fingerprint()},
               {"f0", injection_json(a, f0)}};
        out.lines.push_back(j.dump());
    }

    void event(Match& m, json j) {
        j["state_hash"] = m.state_hash();
        out.lines.push_back(j.dump());
    }

    void outcome(const Outcome& o) {
        json j{{"type", "outcome"},
               {"winner", o.winner == Winner::spoiler ? "Spoiler" : "Duplicator"},
               {"reason", o.reason}};
        out.lines.push_back(j.dump());
    }
};

json graph_open_json(const Structure& s, const GraphOpenMove& mv) {
    json params = json::array();
    for (const auto& [var, val] : mv.params)
        params.push_back(
            {(var.sort == Sort::number ? "%" : "") + var.name, value_json(s, val)});
    json a0 = json::array();
    for (const Value& v : mv.a0) a0.push_back(value_json(s, v));
    return json{{"type", "graph-open"},
                {"actor", "S"},
                {"c", mv.c},
                {"phiE", print_formula(mv.phi_edge)},
                {"phiSim", print_formula(mv.phi_sim)},
                {"params", params},
                {"a0", a0},
                {"l0", mv.ell0.str()}};
}

json graph_reply_json(const Structure& s, const Match& m, const GraphReply& reply) {
    json h = json::array();
    for (const auto& [y, inj] : m.last_h_queries()) {
        json ynames = json::array();
        for (ElemId e : y) ynames.push_back(s.name_of(e));
        h.push_back({ynames, injection_json(s, inj)});
    }
    return json{{"type", "graph-reply"},
                {"actor", "D"},
                {"g", injection_json(s, reply.g)},
                {"h", h}};
}

}  // namespace

MatchResult run_match(const GameConfig& cfg, const Structure& a, const Structure& b,
                      PartialInjection f0, SpoilerAgent& spoiler,
                      DuplicatorAgent& duplicator, std::uint64_t seed) {
    Match m(cfg, a, b, std::move(f0));
    Recorder rec;
    rec.header(cfg, a, b, m.position(), seed);

    auto finish = [&](const Outcome& o) {
        rec.outcome(o);
        return MatchResult{o, std::move(rec.out)};
    };
    auto forfeit = [&](Winner loser, const std::string& why) {
        Outcome o{loser == Winner::spoiler ? Winner::duplicator : Winner::spoiler,
                  std::string(loser == Winner::spoiler ? "spoiler" : "duplicator") +
                      " forfeits: " + why};
        json j{{"type", "forfeit"},
               {"actor", loser == Winner::spoiler ? "S" : "D"},
               {"reason", why}};
        rec.out.lines.push_back(j.dump());
        return finish(o);
    };

    if (auto o = m.check_position()) return finish(*o);

    while (true) {
        if (m.bump_moves() > cfg.move_cap)
            return finish({Winner::duplicator, "move cap reached without spoiler progress"});

        if (!m.in_graph_phase()) {
            SpoilerAgent::MainAction act;
            try {
                act = spoiler.select_action(m);
            } catch (const std::exception& e) {
                return forfeit(Winner::spoiler, e.what());
            }

            if (act.graph_move) {
                std::string rej;
                auto o = m.start_graph_move(act.open, &rej);
                if (!rej.empty()) return forfeit(Winner::spoiler, rej);
                rec.event(m, graph_open_json(a, act.open));
                if (o) return finish(*o);
                continue;
            }

            std::vector<ElemId> g;
            try {
                g = duplicator.extension_bijection(m);
            } catch (const std::exception& e) {
                return forfeit(Winner::duplicator, e.what());
            }
            ElemId pick = 0;
            std::string rej;
            {
                // Validate the bijection before handing it to Spoiler.
                std::string why;
                bool ok = g.size() == a.size();
                std::vector<bool> seen(g.size(), false);
                for (ElemId img : g) {
                    if (!ok) break;
                    if (img >= g.size() || seen[img]) {
                        ok = false;
                        why = "not a bijection";
                        break;
                    }
                    seen[img] = true;
                }
                if (ok)
                    for (const auto& [x, yv] : m.position().pairs())
                        if (g[x] != yv) {
                            ok = false;
                            why = "bijection does not extend the position";
                            break;
                        }
                if (!ok) return forfeit(Winner::duplicator, why.empty() ? "bad bijection" : why);
            }
            try {
                pick = spoiler.extension_pick(m, g);
            } catch (const std::exception& e) {
                return forfeit(Winner::spoiler, e.what());
            }
            auto o = m.apply_extension(g, pick, &rej);
            if (!rej.empty()) return forfeit(Winner::spoiler, rej);
            json gj = json::array();
            for (ElemId x = 0; x < g.size(); ++x)
                if (g[x] != x) gj.push_back({a.name_of(x), a.name_of(g[x])});
            // The bijection line carries no state hash: it takes effect only
            // at the pick.
            rec.out.lines.push_back(
                json{{"type", "bijection"}, {"actor", "D"}, {"g", gj}}.dump());
            rec.event(m, json{{"type", "pick"}, {"actor", "S"}, {"a", a.name_of(pick)}});
            if (o) return finish(*o);
            continue;
        }

        // Graph phase. Spoiler agents observe the closing round state before
        // the exit folds it into the main position.
        if (m.graph_state().ell == 0) {
            spoiler.on_graph_end(m);
            auto o = m.exit_graph_move();
            rec.event(m, json{{"type", "graph-auto-exit"}, {"actor", "S"}});
            if (o) return finish(*o);
            continue;
        }

        SpoilerAgent::GraphAction ga;
        try {
            ga = spoiler.graph_action(m);
        } catch (const std::exception& e) {
            return forfeit(Winner::spoiler, e.what());
        }
        if (ga.exit) {
            spoiler.on_graph_end(m);
            auto o = m.exit_graph_move();
            rec.event(m, json{{"type", "graph-exit"}, {"actor", "S"}});
            if (o) return finish(*o);
            continue;
        }

        GraphReply reply;
        try {
            reply = duplicator.graph_response(m);
        } catch (const std::exception& e) {
            return forfeit(Winner::duplicator, e.what());
        }
        std::string rej;
        auto o = m.apply_graph_reply(reply, &rej);
        if (!rej.empty()) return forfeit(Winner::duplicator, rej);
        rec.event(m, graph_reply_json(a, m, reply));
        if (o) return finish(*o);

        std::vector<Value> next;
        try {
            next = spoiler.graph_step(m,
                                      [&m](std::uint64_t idx) { return m.image_of_node(idx); });
        } catch (const std::exception& e) {
            return forfeit(Winner::spoiler, e.what());
        }
        rej.clear();
        o = m.apply_graph_step(next, &rej);
        if (!rej.empty()) return forfeit(Winner::spoiler, rej);
        json nj = json::array();
        for (const Value& v : next) nj.push_back(value_json(a, v));
        rec.event(m, json{{"type", "graph-step"}, {"actor", "S"}, {"next", nj}});
        if (o) return finish(*o);
    }
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

ReplayResult replay_transcript(const GameConfig& cfg, const Structure& a,
                               const Structure& b, const Transcript& t) {
    ReplayResult res;
    auto err = [&](const std::string& e) {
        res.ok = false;
        res.error = e;
        return res;
    };
    if (t.lines.empty()) return err("empty transcript");

    json header;
    try {
        header = json::parse(t.lines[0]);
    } catch (const std::exception& e) {
        return err(std::string("bad header: ") + e.what());
    }
    if (header.value("type", "") != "header") return err("missing header line");
    if (header.value("fa", std::uint64_t(0)) != a.fingerprint() ||
        header.value("fb", std::uint64_t(0)) != b.fingerprint())
        return err("transcript was recorded on different structures");

    auto f0 = injection_from_json(a, header["f0"]);
    if (!f0) return err("bad initial injection");

    Match m(cfg, a, b, *f0);
    std::optional<Outcome> pending = m.check_position();
    std::vector<ElemId> pending_bijection;
    bool have_bijection = false;

    for (std::size_t li = 1; li < t.lines.size(); ++li) {
        json j;
        try {
            j = json::parse(t.lines[li]);
        } catch (const std::exception& e) {
            return err(std::string("bad line: ") + e.what());
        }
        std::string type = j.value("type", "");

        if (type == "outcome") {
            if (!pending) return err("outcome line without a decided position");
            std::string cw = pending->winner == Winner::spoiler ? "Spoiler" : "Duplicator";
            if (cw != j.value("winner", ""))
                return err("replayed outcome disagrees with the transcript");
            res.ok = true;
            res.outcome = pending;
            return res;
        }
        if (type == "forfeit") {
            std::string actor = j.value("actor", "");
            pending = Outcome{actor == "S" ? Winner::duplicator : Winner::spoiler,
                              "forfeit (recorded)"};
            continue;
        }

        std::optional<Outcome> o;
        std::string rej;
        if (type == "bijection") {
            pending_bijection.assign(a.size(), 0);
            for (ElemId x = 0; x < a.size(); ++x) pending_bijection[x] = x;
            for (const auto& pr : j["g"]) {
                auto x = a.id_of(pr[0].get<std::string>());
                auto y = a.id_of(pr[1].get<std::string>());
                if (!x || !y) return err("bad bijection entry");
                pending_bijection[*x] = *y;
            }
            have_bijection = true;
        } else if (type == "pick") {
            if (!have_bijection) return err("pick before bijection");
            auto pick = a.id_of(j.value("a", ""));
            if (!pick) return err("bad pick");
            m.bump_moves();
            o = m.apply_extension(pending_bijection, *pick, &rej);
            have_bijection = false;
        } else if (type == "graph-open") {
            GraphOpenMove mv;
            mv.c = j.value("c", 1);
            try {
                Vocabulary voc;
                for (const auto& [name, rel] : a.relations()) voc.relations[name] = rel.arity;
                for (const auto& [name, _] : a.constants()) voc.constants.insert(name);
                mv.phi_edge = parse_formula(j.value("phiE", ""), voc);
                mv.phi_sim = parse_formula(j.value("phiSim", ""), voc);
            } catch (const std::exception& e) {
                return err(std::string("bad graph-open formulas: ") + e.what());
            }
            for (const auto& pv : j["params"]) {
                std::string nm = pv[0].get<std::string>();
                Var var = nm.rfind('%', 0) == 0 ? Var{nm.substr(1), Sort::number}
                                                : Var{nm, Sort::element};
                auto val = value_from_json(a, pv[1]);
                if (!val) return err("bad graph-open parameter");
                mv.params[var] = *val;
            }
            for (const auto& vj : j["a0"]) {
                auto v = value_from_json(a, vj);
                if (!v) return err("bad starting tuple entry");
                mv.a0.push_back(*v);
            }
            mv.ell0 = BigInt(j.value("l0", "0"));
            m.bump_moves();
            o = m.start_graph_move(mv, &rej);
        } else if (type == "graph-reply") {
            auto table = std::make_shared<std::map<std::vector<ElemId>, PartialInjection>>();
            for (const auto& entry : j["h"]) {
                std::vector<ElemId> y;
                for (const auto& nm : entry[0]) {
                    auto id = a.id_of(nm.get<std::string>());
                    if (!id) return err("bad h_Y domain");
                    y.push_back(*id);
                }
                auto inj = injection_from_json(a, entry[1]);
                if (!inj) return err("bad h_Y injection");
                (*table)[y] = *inj;
            }
            auto g = injection_from_json(a, j["g"]);
            if (!g) return err("bad g injection");
            GraphReply reply;
            reply.g = *g;
            reply.h_provider =
                [table](const std::vector<ElemId>& y) -> std::optional<PartialInjection> {
                auto it = table->find(y);
                if (it == table->end()) return std::nullopt;
                return it->second;
            };
            m.bump_moves();
            o = m.apply_graph_reply(reply, &rej);
        } else if (type == "graph-step") {
            std::vector<Value> next;
            for (const auto& vj : j["next"]) {
                auto v = value_from_json(a, vj);
                if (!v) return err("bad step tuple entry");
                next.push_back(*v);
            }
            o = m.apply_graph_step(next, &rej);
        } else if (type == "graph-exit" || type == "graph-auto-exit") {
            m.bump_moves();
            o = m.exit_graph_move();
        } else {
            return err("unknown transcript event '" + type + "'");
        }

        if (!rej.empty()) return err("transcript replays an illegal move: " + rej);
        if (j.contains("state_hash")) {
            std::uint64_t want = j["state_hash"].get<std::uint64_t>();
            if (want != m.state_hash())
                return err("state hash mismatch at line " + std::to_string(li + 1));
        }
        if (o) pending = o;
    }
    return err("transcript ended without an outcome");
}

// ---------------------------------------------------------------------------
// Bijection game oracle
// ---------------------------------------------------------------------------

namespace {

std::string injection_key(const PartialInjection& f) {
    std::string k;
    for (const auto& [a, b] : f.pairs()) {
        k += std::to_string(a);
        k += '>';
        k += std::to_string(b);
        k += ';';
    }
    return k;
}

bool bijection_game_rec(const Structure& a, const Structure& b, const PartialInjection& f,
                        int rounds, std::map<std::string, bool>& memo) {
    if (!is_partial_isomorphism(f, a, b)) return false;
    if (rounds == 0) return true;

    std::string key = injection_key(f) + "@" + std::to_string(rounds);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    const std::size_t n = a.size();
    std::vector<ElemId> free_dom, free_rng;
    std::vector<bool> in_dom(n, false), in_rng(n, false);
    for (const auto& [x, y] : f.pairs()) {
        in_dom[x] = true;
        in_rng[y] = true;
    }
    for (ElemId x = 0; x < n; ++x) {
        if (!in_dom[x]) free_dom.push_back(x);
        if (!in_rng[x]) free_rng.push_back(x);
    }

    // Spoiler may also re-pebble a pebbled point, repeating the position with
    // one round less.
    bool dup_wins = false;
    if (!f.empty() && !bijection_game_rec(a, b, f, rounds - 1, memo)) {
        dup_wins = false;
    } else if (free_dom.empty()) {
        dup_wins = true;
    } else {
        std::vector<ElemId> perm = free_rng;
        std::sort(perm.begin(), perm.end());
        do {
            bool all_picks_ok = true;
            for (std::size_t i = 0; i < free_dom.size() && all_picks_ok; ++i) {
                PartialInjection f2 = f;
                f2.insert(free_dom[i], perm[i]);
                if (!bijection_game_rec(a, b, f2, rounds - 1, memo)) all_picks_ok = false;
            }
            if (all_picks_ok) dup_wins = true;
        } while (!dup_wins && std::next_permutation(perm.begin(), perm.end()));
    }

    memo[key] = dup_wins;
    return dup_wins;
}

}  // namespace

bool bijection_game_oracle(const Structure& a, const Structure& b, int rounds) {
    if (a.size() > 6 || rounds > 3)
        throw std::invalid_argument("bijection game oracle is capped at |U| <= 6, r <= 3");
    if (a.size() != b.size() || a.universe_fingerprint() != b.universe_fingerprint())
        throw std::invalid_argument("structures must share a universe");
    std::map<std::string, bool> memo;
    return bijection_game_rec(a, b, PartialInjection{}, rounds, memo);
}

}  // namespace lrec
