#include "lrec/logic.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace lrec {

bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind || a.value != b.value || a.rel != b.rel || a.args != b.args ||
        !(a.var == b.var) || !(a.numterm == b.numterm) || a.binders != b.binders ||
        a.u_vars != b.u_vars || a.v_vars != b.v_vars || a.p_vars != b.p_vars ||
        a.w_terms != b.w_terms || a.r_terms != b.r_terms ||
        a.sub.size() != b.sub.size())
        return false;
    for (std::size_t i = 0; i < a.sub.size(); ++i)
        if (!structurally_equal(*a.sub[i], *b.sub[i])) return false;
    return true;
}

FormulaPtr f_bool(bool v) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::boolean_const;
    f->value = v;
    return f;
}

FormulaPtr f_atom(std::string rel, std::vector<Term> args) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::atom;
    f->rel = std::move(rel);
    f->args = std::move(args);
    return f;
}

FormulaPtr f_eq(Term a, Term b) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::equality;
    f->args = {std::move(a), std::move(b)};
    return f;
}

FormulaPtr f_not(FormulaPtr a) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::negation;
    f->sub = {std::move(a)};
    return f;
}

static FormulaPtr binary(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->sub = {std::move(a), std::move(b)};
    return f;
}

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
    return binary(Formula::Kind::conjunction, std::move(a), std::move(b));
}

FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    return binary(Formula::Kind::disjunction, std::move(a), std::move(b));
}

static FormulaPtr quantifier(Formula::Kind k, Var v, FormulaPtr a) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->var = std::move(v);
    f->sub = {std::move(a)};
    return f;
}

FormulaPtr f_exists(Var v, FormulaPtr a) {
    return quantifier(Formula::Kind::exists, std::move(v), std::move(a));
}

FormulaPtr f_forall(Var v, FormulaPtr a) {
    return quantifier(Formula::Kind::forall, std::move(v), std::move(a));
}

FormulaPtr f_count(Var v, FormulaPtr a, Term numterm) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::count;
    f->var = std::move(v);
    f->sub = {std::move(a)};
    f->numterm = std::move(numterm);
    return f;
}

FormulaPtr f_lfp(std::string relvar, std::vector<Var> binders, FormulaPtr body,
                 std::vector<Term> args) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::lfp;
    f->rel = std::move(relvar);
    f->binders = std::move(binders);
    f->sub = {std::move(body)};
    f->args = std::move(args);
    return f;
}

FormulaPtr f_lrec(std::vector<Var> u, std::vector<Var> v, std::vector<Var> p,
                  FormulaPtr edge, FormulaPtr merge, FormulaPtr label,
                  std::vector<Term> w, std::vector<Term> r) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::lrec;
    f->u_vars = std::move(u);
    f->v_vars = std::move(v);
    f->p_vars = std::move(p);
    f->sub = {std::move(edge), std::move(merge), std::move(label)};
    f->w_terms = std::move(w);
    f->r_terms = std::move(r);
    return f;
}

Term t_var(const Var& v) {
    Term t;
    t.kind = Term::Kind::variable;
    t.sort = v.sort;
    t.name = v.name;
    return t;
}

Term t_elem_var(std::string name) { return t_var({std::move(name), Sort::element}); }
Term t_num_var(std::string name) { return t_var({std::move(name), Sort::number}); }

Term t_const(std::string name) {
    Term t;
    t.kind = Term::Kind::constant;
    t.sort = Sort::element;
    t.name = std::move(name);
    return t;
}

Term t_lit(std::uint64_t value) {
    Term t;
    t.kind = Term::Kind::literal;
    t.sort = Sort::number;
    t.value = value;
    return t;
}

Vocabulary Vocabulary::psp() {
    Vocabulary v;
    v.relations = {{"R", 3}, {"S", 1}};
    v.constants = {"t"};
    return v;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Kind { ident, numvar, number, symbol, end };
    Kind kind;
    std::string text;
    std::uint64_t number = 0;
    std::size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        cur_.pos = i_;
        if (i_ >= text_.size()) {
            cur_ = {Token::Kind::end, "", 0, i_};
            return;
        }
        char c = text_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
                ++j;
            cur_ = {Token::Kind::ident, text_.substr(i_, j - i_), 0, i_};
            i_ = j;
            return;
        }
        if (c == '%') {
            std::size_t j = i_ + 1;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
                ++j;
            if (j == i_ + 1) throw ParseError("expected identifier after '%'", i_);
            cur_ = {Token::Kind::numvar, text_.substr(i_ + 1, j - i_ - 1), 0, i_};
            i_ = j;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i_;
            std::uint64_t v = 0;
            while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) {
                v = v * 10 + static_cast<std::uint64_t>(text_[j] - '0');
                ++j;
            }
            cur_ = {Token::Kind::number, text_.substr(i_, j - i_), v, i_};
            i_ = j;
            return;
        }
        static const std::string symbols = "(){}[],;.:=&|!";
        if (symbols.find(c) != std::string::npos) {
            cur_ = {Token::Kind::symbol, std::string(1, c), 0, i_};
            ++i_;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }

    const std::string& text_;
    std::size_t i_ = 0;
    Token cur_;
};

class Parser {
  public:
    Parser(const std::string& text, const Vocabulary& vocab) : lex_(text), vocab_(vocab) {}

    FormulaPtr parse() {
        FormulaPtr f = formula();
        expect_end();
        return f;
    }

  private:
    [[noreturn]] void fail(const std::string& msg, std::size_t pos) {
        throw ParseError(msg, pos);
    }

    bool is_symbol(const char* s) const {
        return lex_.peek().kind == Token::Kind::symbol && lex_.peek().text == s;
    }

    bool is_keyword(const char* s) const {
        return lex_.peek().kind == Token::Kind::ident && lex_.peek().text == s;
    }

    void expect_symbol(const char* s) {
        if (!is_symbol(s)) fail(std::string("expected '") + s + "'", lex_.peek().pos);
        lex_.take();
    }

    void expect_end() {
        if (lex_.peek().kind != Token::Kind::end)
            fail("trailing input after formula", lex_.peek().pos);
    }

    FormulaPtr formula() { return disjunction(); }

    FormulaPtr disjunction() {
        FormulaPtr f = conjunction();
        while (is_symbol("|")) {
            lex_.take();
            f = f_or(f, conjunction());
        }
        return f;
    }

    FormulaPtr conjunction() {
        FormulaPtr f = unary();
        while (is_symbol("&")) {
            lex_.take();
            f = f_and(f, unary());
        }
        return f;
    }

    FormulaPtr unary() {
        if (is_symbol("!")) {
            lex_.take();
            return f_not(unary());
        }
        if (is_keyword("exists") || is_keyword("forall")) {
            bool ex = lex_.take().text == "exists";
            Var v = binder_var();
            expect_symbol(".");
            FormulaPtr body = formula();
            return ex ? f_exists(v, body) : f_forall(v, body);
        }
        return primary();
    }

    Var binder_var() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::ident) {
            if (vocab_.constants.count(t.text))
                fail("constant '" + t.text + "' cannot be bound", t.pos);
            return {lex_.take().text, Sort::element};
        }
        if (t.kind == Token::Kind::numvar) return {lex_.take().text, Sort::number};
        fail("expected a variable", t.pos);
    }

    FormulaPtr primary() {
        if (is_symbol("(")) {
            lex_.take();
            FormulaPtr f = formula();
            expect_symbol(")");
            return f;
        }
        if (is_keyword("true") || is_keyword("false")) return f_bool(lex_.take().text == "true");
        if (is_keyword("count")) return count();
        if (is_keyword("lfp")) return lfp();
        if (is_keyword("lrec")) return lrec();
        return atom_or_equality();
    }

    FormulaPtr count() {
        lex_.take();
        expect_symbol("{");
        Var v = binder_var();
        if (v.sort != Sort::element)
            fail("count binds an element variable", lex_.peek().pos);
        expect_symbol(":");
        FormulaPtr body = formula();
        expect_symbol("}");
        expect_symbol("=");
        Term n = term();
        if (n.sort != Sort::number)
            fail("count compares against a number term", lex_.peek().pos);
        return f_count(v, body, n);
    }

    FormulaPtr lfp() {
        std::size_t pos = lex_.take().pos;
        expect_symbol("[");
        const Token& rv = lex_.peek();
        if (rv.kind != Token::Kind::ident) fail("expected relation variable", rv.pos);
        std::string relvar = lex_.take().text;
        std::vector<Var> binders;
        while (is_symbol(",")) {
            lex_.take();
            Var v = binder_var();
            if (v.sort != Sort::element) fail("lfp binds element variables", pos);
            binders.push_back(v);
        }
        if (binders.empty()) fail("lfp needs at least one bound variable", pos);
        expect_symbol("]");
        expect_symbol("(");
        relvars_.push_back({relvar, static_cast<int>(binders.size())});
        FormulaPtr body = formula();
        relvars_.pop_back();
        expect_symbol(")");
        expect_symbol("(");
        std::vector<Term> args = term_list();
        expect_symbol(")");
        if (args.size() != binders.size()) fail("lfp argument count mismatch", pos);
        for (const Term& a : args)
            if (a.sort != Sort::element) fail("lfp arguments must be element terms", pos);
        check_positive(*body, relvar, true, pos);
        return f_lfp(relvar, binders, body, args);
    }

    // The lfp relation variable may occur only positively in its body.
    void check_positive(const Formula& f, const std::string& relvar, bool positive,
                        std::size_t pos) {
        switch (f.kind) {
            case Formula::Kind::atom:
                if (f.rel == relvar && !positive)
                    fail("relation variable '" + relvar + "' occurs negatively", pos);
                return;
            case Formula::Kind::negation:
                check_positive(*f.sub[0], relvar, !positive, pos);
                return;
            default:
                for (const auto& s : f.sub) check_positive(*s, relvar, positive, pos);
                return;
        }
    }

    FormulaPtr lrec() {
        std::size_t pos = lex_.take().pos;
        expect_symbol("[");
        std::vector<Var> u = var_list();
        expect_symbol(";");
        std::vector<Var> v = var_list();
        expect_symbol(";");
        std::vector<Var> p = var_list();
        expect_symbol("]");
        if (u.empty()) fail("lrec needs at least one node variable", pos);
        if (u.size() != v.size()) fail("lrec node variable tuples differ in length", pos);
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u[i].sort != v[i].sort)
                fail("lrec node variable sorts differ at position " + std::to_string(i + 1), pos);
        if (p.size() > u.size()) fail("lrec has more counter variables than node variables", pos);
        for (const Var& pv : p)
            if (pv.sort != Sort::number) fail("lrec counter variables must be number variables", pos);

        expect_symbol("(");
        FormulaPtr edge = formula();
        expect_symbol(";");
        FormulaPtr merge = formula();
        expect_symbol(";");
        FormulaPtr label = formula();
        expect_symbol(")");
        expect_symbol("(");
        std::vector<Term> w = term_list();
        expect_symbol(";");
        std::vector<Term> r;
        if (!is_symbol(")")) r = term_list();
        expect_symbol(")");

        if (w.size() != u.size()) fail("lrec anchor tuple length mismatch", pos);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i].sort != u[i].sort)
                fail("lrec anchor sort mismatch at position " + std::to_string(i + 1), pos);
        for (const Term& rt : r)
            if (rt.sort != Sort::number)
                fail("lrec counter arguments must be number terms", pos);
        return f_lrec(u, v, p, edge, merge, label, w, r);
    }

    std::vector<Var> var_list() {
        std::vector<Var> out;
        if (lex_.peek().kind != Token::Kind::ident && lex_.peek().kind != Token::Kind::numvar)
            return out;
        out.push_back(binder_var());
        while (is_symbol(",")) {
            lex_.take();
            out.push_back(binder_var());
        }
        return out;
    }

    std::vector<Term> term_list() {
        std::vector<Term> out;
        out.push_back(term());
        while (is_symbol(",")) {
            lex_.take();
            out.push_back(term());
        }
        return out;
    }

    Term term() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::ident) {
            Token tok = lex_.take();
            if (vocab_.constants.count(tok.text)) return t_const(tok.text);
            return t_elem_var(tok.text);
        }
        if (t.kind == Token::Kind::numvar) return t_num_var(lex_.take().text);
        if (t.kind == Token::Kind::number) return t_lit(lex_.take().number);
        fail("expected a term", t.pos);
    }

    FormulaPtr atom_or_equality() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::ident && !vocab_.constants.count(t.text)) {
            // Lookahead for an atom: identifier followed by '('.
            Token head = lex_.take();
            if (is_symbol("(")) {
                lex_.take();
                std::vector<Term> args = term_list();
                expect_symbol(")");
                int arity = -1;
                bool known = false;
                for (auto it = relvars_.rbegin(); it != relvars_.rend(); ++it) {
                    if (it->first == head.text) {
                        arity = it->second;
                        known = true;
                        break;
                    }
                }
                if (!known) {
                    auto it = vocab_.relations.find(head.text);
                    if (it == vocab_.relations.end())
                        fail("unknown relation '" + head.text + "'", head.pos);
                    arity = it->second;
                }
                if (static_cast<int>(args.size()) != arity)
                    fail("relation '" + head.text + "' expects " + std::to_string(arity) +
                             " arguments, got " + std::to_string(args.size()),
                         head.pos);
                for (const Term& a : args)
                    if (a.sort != Sort::element)
                        fail("relation arguments must be element terms", head.pos);
                return f_atom(head.text, args);
            }
            // Plain element variable: must be an equality.
            Term lhs = t_elem_var(head.text);
            return equality_with(lhs, head.pos);
        }
        Term lhs = term();
        return equality_with(lhs, t.pos);
    }

    FormulaPtr equality_with(Term lhs, std::size_t pos) {
        if (!is_symbol("=")) fail("expected '=' after term", lex_.peek().pos);
        lex_.take();
        Term rhs = term();
        if (lhs.sort != rhs.sort) fail("equality between different sorts", pos);
        return f_eq(lhs, rhs);
    }

    Lexer lex_;
    const Vocabulary& vocab_;
    std::vector<std::pair<std::string, int>> relvars_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const Vocabulary& vocab) {
    return Parser(text, vocab).parse();
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

std::string print_term(const Term& t) {
    switch (t.kind) {
        case Term::Kind::variable:
            return t.sort == Sort::number ? "%" + t.name : t.name;
        case Term::Kind::constant:
            return t.name;
        case Term::Kind::literal:
            return std::to_string(t.value);
    }
    return {};
}

std::string print_var(const Var& v) {
    return v.sort == Sort::number ? "%" + v.name : v.name;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, const char* sep, F f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += f(xs[i]);
    }
    return out;
}

}  // namespace

std::string print_formula(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::boolean_const:
            return f.value ? "true" : "false";
        case K::atom:
            return f.rel + "(" + join(f.args, ",", print_term) + ")";
        case K::equality:
            return print_term(f.args[0]) + " = " + print_term(f.args[1]);
        case K::negation: {
            const Formula& c = *f.sub[0];
            bool bare = c.kind == K::atom || c.kind == K::boolean_const ||
                        c.kind == K::negation || c.kind == K::count || c.kind == K::lfp ||
                        c.kind == K::lrec;
            return bare ? "!" + print_formula(c) : "!(" + print_formula(c) + ")";
        }
        case K::conjunction:
        case K::disjunction: {
            // Quantifier scope is maximal, so quantified operands need their
            // own parentheses inside a connective.
            auto operand = [](const Formula& c) {
                bool greedy = c.kind == K::exists || c.kind == K::forall;
                return greedy ? "(" + print_formula(c) + ")" : print_formula(c);
            };
            const char* op = f.kind == K::conjunction ? " & " : " | ";
            return "(" + operand(*f.sub[0]) + op + operand(*f.sub[1]) + ")";
        }
        case K::exists:
            return "exists " + print_var(f.var) + ". " + print_formula(*f.sub[0]);
        case K::forall:
            return "forall " + print_var(f.var) + ". " + print_formula(*f.sub[0]);
        case K::count:
            return "count{" + print_var(f.var) + " : " + print_formula(*f.sub[0]) + "} = " +
                   print_term(f.numterm);
        case K::lfp:
            return "lfp[" + f.rel + "," + join(f.binders, ",", print_var) + "](" +
                   print_formula(*f.sub[0]) + ")(" + join(f.args, ",", print_term) + ")";
        case K::lrec:
            return "lrec[" + join(f.u_vars, ",", print_var) + ";" +
                   join(f.v_vars, ",", print_var) + ";" + join(f.p_vars, ",", print_var) +
                   "](" + print_formula(*f.sub[0]) + "; " + print_formula(*f.sub[1]) + "; " +
                   print_formula(*f.sub[2]) + ")(" + join(f.w_terms, ",", print_term) + "; " +
                   join(f.r_terms, ",", print_term) + ")";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Size measures
// ---------------------------------------------------------------------------

int rank(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::boolean_const:
        case K::atom:
        case K::equality:
            return 0;
        case K::negation:
            return rank(*f.sub[0]);
        case K::conjunction:
        case K::disjunction:
            return std::max(rank(*f.sub[0]), rank(*f.sub[1]));
        case K::exists:
        case K::forall:
        case K::count:
            return 1 + rank(*f.sub[0]);
        case K::lfp:
            return 1 + rank(*f.sub[0]);
        case K::lrec: {
            int c = static_cast<int>(f.u_vars.size());
            int d = static_cast<int>(f.p_vars.size());
            return std::max({2 * c + rank(*f.sub[1]), 2 * c + rank(*f.sub[0]),
                             c + d + rank(*f.sub[2])});
        }
    }
    return 0;
}

int iteration_degree(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::boolean_const:
        case K::atom:
        case K::equality:
            return 0;
        case K::negation:
        case K::exists:
        case K::forall:
        case K::count:
        case K::lfp:
            return iteration_degree(*f.sub[0]);
        case K::conjunction:
        case K::disjunction:
            return std::max(iteration_degree(*f.sub[0]), iteration_degree(*f.sub[1]));
        case K::lrec: {
            int q = static_cast<int>(f.r_terms.size());
            return std::max({q, iteration_degree(*f.sub[1]), iteration_degree(*f.sub[0]),
                             iteration_degree(*f.sub[2])});
        }
    }
    return 0;
}

namespace {

void collect_free(const Formula& f, std::set<Var>& bound, std::set<Var>& out) {
    auto visit_term = [&](const Term& t) {
        if (t.kind == Term::Kind::variable) {
            Var v{t.name, t.sort};
            if (!bound.count(v)) out.insert(v);
        }
    };
    using K = Formula::Kind;
    switch (f.kind) {
        case K::boolean_const:
            return;
        case K::atom:
        case K::equality:
            for (const auto& t : f.args) visit_term(t);
            return;
        case K::negation:
            collect_free(*f.sub[0], bound, out);
            return;
        case K::conjunction:
        case K::disjunction:
            collect_free(*f.sub[0], bound, out);
            collect_free(*f.sub[1], bound, out);
            return;
        case K::exists:
        case K::forall:
        case K::count: {
            bool inserted = bound.insert(f.var).second;
            collect_free(*f.sub[0], bound, out);
            if (inserted) bound.erase(f.var);
            if (f.kind == K::count) visit_term(f.numterm);
            return;
        }
        case K::lfp: {
            std::vector<Var> inserted;
            for (const auto& v : f.binders)
                if (bound.insert(v).second) inserted.push_back(v);
            collect_free(*f.sub[0], bound, out);
            for (const auto& v : inserted) bound.erase(v);
            for (const auto& t : f.args) visit_term(t);
            return;
        }
        case K::lrec: {
            auto scoped = [&](const Formula& body, const std::vector<const std::vector<Var>*>& lists) {
                std::vector<Var> inserted;
                for (const auto* lst : lists)
                    for (const auto& v : *lst)
                        if (bound.insert(v).second) inserted.push_back(v);
                collect_free(body, bound, out);
                for (const auto& v : inserted) bound.erase(v);
            };
            scoped(*f.sub[0], {&f.u_vars, &f.v_vars});
            scoped(*f.sub[1], {&f.u_vars, &f.v_vars});
            scoped(*f.sub[2], {&f.u_vars, &f.p_vars});
            for (const auto& t : f.w_terms) visit_term(t);
            for (const auto& t : f.r_terms) visit_term(t);
            return;
        }
    }
}

}  // namespace

std::set<Var> free_vars(const Formula& f) {
    std::set<Var> bound, out;
    collect_free(f, bound, out);
    return out;
}

namespace {

Term rename_term(const Term& t, const std::map<Var, Var>& renames,
                 const std::set<Var>& bound) {
    if (t.kind != Term::Kind::variable) return t;
    Var v{t.name, t.sort};
    if (bound.count(v)) return t;
    auto it = renames.find(v);
    if (it == renames.end()) return t;
    return t_var(it->second);
}

FormulaPtr rename_rec(const Formula& f, const std::map<Var, Var>& renames,
                      std::set<Var>& bound) {
    for (const auto& [from, to] : renames) {
        (void)from;
        bool binds = false;
        if (f.kind == Formula::Kind::exists || f.kind == Formula::Kind::forall ||
            f.kind == Formula::Kind::count)
            binds = f.var == to;
        for (const auto& v : f.binders) binds = binds || v == to;
        for (const auto& v : f.u_vars) binds = binds || v == to;
        for (const auto& v : f.v_vars) binds = binds || v == to;
        for (const auto& v : f.p_vars) binds = binds || v == to;
        if (binds && !bound.count(from))
            throw std::invalid_argument("variable rename would be captured");
    }

    auto g = std::make_shared<Formula>(f);
    auto scoped_children = [&](const std::vector<const std::vector<Var>*>& lists,
                               const FormulaPtr& child) {
        std::vector<Var> inserted;
        for (const auto* lst : lists)
            for (const auto& v : *lst)
                if (bound.insert(v).second) inserted.push_back(v);
        FormulaPtr out = rename_rec(*child, renames, bound);
        for (const auto& v : inserted) bound.erase(v);
        return out;
    };

    using K = Formula::Kind;
    switch (f.kind) {
        case K::boolean_const:
            break;
        case K::atom:
        case K::equality:
            for (auto& t : g->args) t = rename_term(t, renames, bound);
            break;
        case K::negation:
        case K::conjunction:
        case K::disjunction:
            for (std::size_t i = 0; i < f.sub.size(); ++i)
                g->sub[i] = rename_rec(*f.sub[i], renames, bound);
            break;
        case K::exists:
        case K::forall:
        case K::count: {
            std::vector<Var> one{f.var};
            g->sub[0] = scoped_children({&one}, f.sub[0]);
            if (f.kind == K::count) g->numterm = rename_term(f.numterm, renames, bound);
            break;
        }
        case K::lfp:
            g->sub[0] = scoped_children({&f.binders}, f.sub[0]);
            for (auto& t : g->args) t = rename_term(t, renames, bound);
            break;
        case K::lrec:
            g->sub[0] = scoped_children({&f.u_vars, &f.v_vars}, f.sub[0]);
            g->sub[1] = scoped_children({&f.u_vars, &f.v_vars}, f.sub[1]);
            g->sub[2] = scoped_children({&f.u_vars, &f.p_vars}, f.sub[2]);
            for (auto& t : g->w_terms) t = rename_term(t, renames, bound);
            for (auto& t : g->r_terms) t = rename_term(t, renames, bound);
            break;
    }
    return g;
}

}  // namespace

FormulaPtr rename_free_vars(const FormulaPtr& f, const std::map<Var, Var>& renames) {
    std::set<Var> bound;
    return rename_rec(*f, renames, bound);
}

}  // namespace lrec
