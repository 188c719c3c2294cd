// lrecwb: workbench CLI for finite-model logic evaluation, path-systems
// instances, pebble games with graph moves, and the verification suites.

#include "CLI11.hpp"

#include "lrec/eval.hpp"
#include "lrec/game.hpp"
#include "lrec/json_io.hpp"
#include "lrec/logic.hpp"
#include "lrec/psp.hpp"
#include "lrec/strategy.hpp"
#include "lrec/verify.hpp"

#include <iostream>
#include <memory>

using namespace lrec;

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

Vocabulary vocab_of(const Structure& s) {
    Vocabulary v;
    for (const auto& [name, rel] : s.relations()) v.relations[name] = rel.arity;
    for (const auto& [name, _] : s.constants()) v.constants.insert(name);
    return v;
}

std::string load_formula_text(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') return read_file(arg.substr(1));
    return arg;
}

// "x=u3" or "%m=5"
Assignment parse_env(const Structure& s, const std::vector<std::string>& bindings) {
    Assignment env;
    for (const auto& b : bindings) {
        auto eq = b.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("binding '" + b + "' is not name=value");
        std::string name = b.substr(0, eq);
        std::string value = b.substr(eq + 1);
        if (!name.empty() && name[0] == '%') {
            env[{name.substr(1), Sort::number}] = Value::num(std::stoull(value));
        } else {
            auto id = s.id_of(value);
            if (!id) throw std::invalid_argument("unknown element '" + value + "'");
            env[{name, Sort::element}] = Value::elem(*id);
        }
    }
    return env;
}

struct GameSetup {
    Structure a, b;
};

GameSetup load_pair(const std::string& a_path, const std::string& b_path,
                    const std::string& psp_arg) {
    if (!psp_arg.empty()) {
        // h,p,t,t'[,sigma0,sigma1,...]; omitted sigma entries default to zero.
        std::vector<int> nums;
        std::string cur;
        for (char c : psp_arg + ",") {
            if (c == ',') {
                if (!cur.empty()) nums.push_back(std::stoi(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (nums.size() < 4) throw std::invalid_argument("--psp needs h,p,t,t'");
        TreeGroupSpec sa;
        sa.h = nums[0];
        sa.p = nums[1];
        sa.t = nums[2];
        sa.sigma.assign(std::size_t(1) << sa.h, 0);
        for (std::size_t i = 4; i < nums.size() && i - 4 < sa.sigma.size(); ++i)
            sa.sigma[i - 4] = nums[i];
        TreeGroupSpec sb = sa;
        sb.t = nums[3];
        return {generate_instance(sa).structure, generate_instance(sb).structure};
    }
    if (a_path.empty() || b_path.empty())
        throw std::invalid_argument("provide --A and --B (or --psp)");
    return {structure_from_json(read_file(a_path)), structure_from_json(read_file(b_path))};
}

std::unique_ptr<SpoilerAgent> make_spoiler(const std::string& kind, std::uint64_t seed,
                                           const Structure& a) {
    if (kind == "random") return std::make_unique<RandomSpoiler>(seed);
    if (kind == "greedy") return std::make_unique<GreedySpoiler>(seed);
    if (kind.rfind("formula:", 0) == 0) {
        std::string text = load_formula_text(kind.substr(8));
        return std::make_unique<FormulaSpoiler>(parse_formula(text, vocab_of(a)));
    }
    throw std::invalid_argument("unknown spoiler '" + kind + "'");
}

std::unique_ptr<DuplicatorAgent> make_duplicator(const std::string& kind, const Structure& a,
                                                 const Structure& b) {
    if (kind == "identity") return std::make_unique<IdentityDuplicator>();
    if (kind == "paper")
        return std::make_unique<PaperDuplicator>(PaperDuplicator::for_match(a, b));
    throw std::invalid_argument("unknown duplicator '" + kind + "'");
}

// A Spoiler driven from stdin, with legal-move listings.
class InteractiveSpoiler : public SpoilerAgent {
  public:
    std::string name() const override { return "interactive"; }

    MainAction select_action(Match& m) override {
        const Structure& a = m.structure_a();
        std::cout << "\n-- position: " << m.position().size() << "/" << m.config().k
                  << " pebbles --\n";
        for (const auto& [x, y] : m.position().pairs())
            std::cout << "   " << a.name_of(x) << " -> " << a.name_of(y) << "\n";
        for (;;) {
            std::cout << "move (extension | graph | help): " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) throw std::runtime_error("input closed");
            if (line == "extension") return {};
            if (line == "help") {
                std::cout << "  extension: duplicator offers a bijection, you pebble a point\n"
                          << "  graph: open a graph move (prompts for c, the two formulas\n"
                          << "         over x1.. and y1.., the start tuple and the counter)\n";
                continue;
            }
            if (line == "graph") {
                MainAction act;
                act.graph_move = true;
                try {
                    std::cout << "  c: " << std::flush;
                    std::string s;
                    std::getline(std::cin, s);
                    act.open.c = std::stoi(s);
                    Vocabulary voc = vocab_of(a);
                    std::cout << "  edge formula: " << std::flush;
                    std::getline(std::cin, s);
                    act.open.phi_edge = parse_formula(s, voc);
                    std::cout << "  merge formula: " << std::flush;
                    std::getline(std::cin, s);
                    act.open.phi_sim = parse_formula(s, voc);
                    for (int i = 0; i < act.open.c; ++i) {
                        std::cout << "  start entry " << i + 1
                                  << " (element name or #number): " << std::flush;
                        std::getline(std::cin, s);
                        if (!s.empty() && s[0] == '#') {
                            act.open.a0.push_back(Value::num(std::stoull(s.substr(1))));
                        } else {
                            auto id = a.id_of(s);
                            if (!id) throw std::invalid_argument("unknown element");
                            act.open.a0.push_back(Value::elem(*id));
                        }
                    }
                    std::cout << "  counter: " << std::flush;
                    std::getline(std::cin, s);
                    act.open.ell0 = BigInt(s);
                    return act;
                } catch (const std::exception& e) {
                    std::cout << "  rejected: " << e.what() << "\n";
                    continue;
                }
            }
            std::cout << "  unknown move\n";
        }
    }

    ElemId extension_pick(Match& m, const std::vector<ElemId>& g) override {
        const Structure& a = m.structure_a();
        std::cout << "duplicator's bijection (non-identity part, first 20):\n";
        int shown = 0;
        for (ElemId x = 0; x < g.size() && shown < 20; ++x)
            if (g[x] != x) {
                std::cout << "   " << a.name_of(x) << " -> " << a.name_of(g[x]) << "\n";
                ++shown;
            }
        if (shown == 0) std::cout << "   (identity)\n";
        for (;;) {
            std::cout << "pebble which element? " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) throw std::runtime_error("input closed");
            auto id = a.id_of(line);
            if (id) return *id;
            std::cout << "  unknown element\n";
        }
    }

    GraphAction graph_action(Match& m) override {
        const auto& st = m.graph_state();
        std::cout << "-- graph round " << st.round << ", counter " << st.ell.str() << " --\n";
        for (;;) {
            std::cout << "graph move (step | exit): " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) throw std::runtime_error("input closed");
            if (line == "exit") return {.exit = true};
            if (line == "step") return {.exit = false};
        }
    }

    std::vector<Value> graph_step(
        Match& m, const std::function<std::vector<Value>(std::uint64_t)>&) override {
        const auto& st = m.graph_state();
        const Structure& a = m.structure_a();
        std::uint32_t cls = st.side_a->class_of_tuple(st.current);
        std::cout << "successor classes (first 20 representatives):\n";
        auto succ = st.side_a->q.graph.out[cls];
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        int shown = 0;
        for (std::uint32_t kcls : succ) {
            std::uint32_t rep = st.side_a->q.members[kcls].front();
            std::cout << "   " << st.side_a->graph.names[rep] << "\n";
            if (++shown >= 20) break;
        }
        for (;;) {
            std::cout << "step to (comma-separated entries, element name or #number): "
                      << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) throw std::runtime_error("input closed");
            try {
                std::vector<Value> tuple;
                std::string cur;
                for (char c : line + ",") {
                    if (c == ',') {
                        if (cur.empty()) continue;
                        if (cur[0] == '#') {
                            tuple.push_back(Value::num(std::stoull(cur.substr(1))));
                        } else {
                            auto id = a.id_of(cur);
                            if (!id) throw std::invalid_argument("unknown element " + cur);
                            tuple.push_back(Value::elem(*id));
                        }
                        cur.clear();
                    } else if (c != ' ') {
                        cur += c;
                    }
                }
                return tuple;
            } catch (const std::exception& e) {
                std::cout << "  rejected: " << e.what() << "\n";
            }
        }
    }
};

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    verify::SuiteReport rep;
    if (suite == "core")
        rep = verify::core_suite(seed);
    else if (suite == "chi")
        rep = verify::chi_suite(seed);
    else if (suite == "quotient")
        rep = verify::quotient_suite(seed);
    else if (suite == "psp")
        rep = verify::psp_suite(seed);
    else if (suite == "treecomb")
        rep = verify::treecomb_suite(seed, 200);
    else if (suite == "game")
        rep = verify::game_suite(seed, 60);
    else if (suite == "strategy") {
        verify::StrategyOptions opts;
        opts.matches = 60;  // quick profile; the acceptance suite runs the full scale
        opts.h_lo = 6;
        opts.h_hi = 8;
        rep = verify::strategy_suite(seed, opts);
    } else {
        std::cerr << "unknown suite '" << suite
                  << "' (core|chi|quotient|psp|treecomb|game|strategy)\n";
        return kExitUsage;
    }
    std::cout << rep.summary_text() << "\n" << rep.summary_json() << "\n";
    return rep.ok() ? kExitTrue : kExitFalse;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-model-theory workbench"};
    app.require_subcommand(1);

    std::string structure_path, formula_arg, out_path;
    std::vector<std::string> bindings;
    std::size_t max_nodes = EvalBudget{}.max_nodes;
    std::size_t max_pairs = EvalBudget{}.max_pairs;
    std::uint64_t seed = 12345;

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula on a structure");
    eval_cmd->add_option("--structure", structure_path, "structure JSON file")->required();
    eval_cmd->add_option("--formula", formula_arg, "formula text or @file")->required();
    eval_cmd->add_option("--env", bindings, "bindings name=element or %name=number");
    eval_cmd->add_option("--max-nodes", max_nodes, "semi-graph node budget");
    eval_cmd->add_option("--max-pairs", max_pairs, "semi-graph pair budget");

    auto* rank_cmd = app.add_subcommand("rank", "rank and iteration-degree of a formula");
    rank_cmd->add_option("--structure", structure_path, "structure JSON for the vocabulary");
    rank_cmd->add_option("--formula", formula_arg, "formula text or @file")->required();

    std::string psp_spec_path, method = "direct";
    auto* gen_cmd = app.add_subcommand("psp-gen", "generate a tree-group instance");
    gen_cmd->add_option("--spec", psp_spec_path, "spec JSON ({\"h\",\"p\",\"sigma\",\"t\"})")
        ->required();
    gen_cmd->add_option("--out", out_path, "output path (default stdout)");

    auto* solve_cmd = app.add_subcommand("psp-solve", "decide a path-systems instance");
    solve_cmd->add_option("--structure", structure_path, "instance JSON file");
    solve_cmd->add_option("--spec", psp_spec_path, "tree-group spec JSON file");
    solve_cmd->add_option("--method", method, "direct | lfp | expected");

    auto* quot_cmd = app.add_subcommand("quotient", "quotient of a labelled semi-graph");
    quot_cmd->add_option("--structure", structure_path, "semi-graph JSON file")->required();
    quot_cmd->add_option("--out", out_path, "output path (default stdout)");

    std::string vertex;
    std::string ell_text = "0";
    bool hat = false;
    auto* chi_cmd = app.add_subcommand("chi", "recursive counting query membership");
    chi_cmd->add_option("--structure", structure_path, "labelled (semi-)graph JSON")->required();
    chi_cmd->add_option("--vertex", vertex, "vertex name")->required();
    chi_cmd->add_option("--ell", ell_text, "counter value")->required();
    chi_cmd->add_flag("--hat", hat, "quotient by SIM first");

    std::string a_path, b_path, psp_arg, spoiler_kind = "random", dup_kind = "identity";
    std::string transcript_path;
    int k = 3, q = 1;
    auto add_game_common = [&](CLI::App* cmd) {
        cmd->add_option("-A,--A", a_path, "first structure JSON");
        cmd->add_option("-B,--B", b_path, "second structure JSON");
        cmd->add_option("--psp", psp_arg, "tree-group pair h,p,t,t'[,sigma...]");
        cmd->add_option("--k", k, "step budget");
        cmd->add_option("--q", q, "iteration-degree budget");
        cmd->add_option("--max-nodes", max_nodes, "semi-graph node budget");
        cmd->add_option("--max-pairs", max_pairs, "semi-graph pair budget");
    };

    auto* run_cmd = app.add_subcommand("game-run", "play a match");
    add_game_common(run_cmd);
    run_cmd->add_option("--spoiler", spoiler_kind, "random | greedy | formula:<text-or-@file>");
    run_cmd->add_option("--duplicator", dup_kind, "identity | paper");
    run_cmd->add_option("--seed", seed, "seed (printed)");
    run_cmd->add_option("--transcript", transcript_path, "transcript output path");

    auto* replay_cmd = app.add_subcommand("game-replay", "replay and verify a transcript");
    add_game_common(replay_cmd);
    replay_cmd->add_option("--transcript", transcript_path, "transcript JSONL path")->required();

    auto* inter_cmd = app.add_subcommand("game-interactive", "play spoiler by hand");
    add_game_common(inter_cmd);
    inter_cmd->add_option("--duplicator", dup_kind, "identity | paper");
    inter_cmd->add_option("--seed", seed, "seed (printed)");

    std::string suite;
    auto* verify_cmd = app.add_subcommand("verify", "run a property suite");
    verify_cmd->add_option("suite", suite, "core|chi|quotient|psp|treecomb|game|strategy")
        ->required();
    verify_cmd->add_option("--seed", seed, "seed (printed)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval_cmd->parsed()) {
            Structure s = structure_from_json(read_file(structure_path));
            FormulaPtr phi = parse_formula(load_formula_text(formula_arg), vocab_of(s));
            EvalBudget budget{max_nodes, max_pairs};
            bool result = eval_formula(phi, s, parse_env(s, bindings), budget);
            std::cout << (result ? "true" : "false") << "\n";
            return result ? kExitTrue : kExitFalse;
        }

        if (rank_cmd->parsed()) {
            Vocabulary voc = Vocabulary::psp();
            if (!structure_path.empty())
                voc = vocab_of(structure_from_json(read_file(structure_path)));
            FormulaPtr phi = parse_formula(load_formula_text(formula_arg), voc);
            std::cout << "rank " << rank(phi) << "\n"
                      << "iteration-degree " << iteration_degree(phi) << "\n";
            return kExitTrue;
        }

        if (gen_cmd->parsed()) {
            TreeGroupSpec spec = treegroup_from_json(read_file(psp_spec_path));
            std::string text = structure_to_json(generate_instance(spec).structure);
            if (out_path.empty())
                std::cout << text;
            else
                write_file(out_path, text);
            return kExitTrue;
        }

        if (solve_cmd->parsed()) {
            bool result;
            if (method == "expected") {
                if (psp_spec_path.empty()) {
                    std::cerr << "--method expected needs --spec\n";
                    return kExitUsage;
                }
                result = expected_positivity(treegroup_from_json(read_file(psp_spec_path)));
            } else if (method == "direct" || method == "lfp") {
                PspInstance inst =
                    !structure_path.empty()
                        ? PspInstance::wrap(structure_from_json(read_file(structure_path)))
                        : generate_instance(treegroup_from_json(read_file(psp_spec_path)));
                result = method == "lfp" ? solve_via_lfp(inst) : solve_direct(inst);
            } else {
                std::cerr << "unknown method '" << method << "'\n";
                return kExitUsage;
            }
            std::cout << (result ? "true" : "false") << "\n";
            return result ? kExitTrue : kExitFalse;
        }

        if (quot_cmd->parsed()) {
            LabelledSemiGraph g = semigraph_from_json(read_file(structure_path));
            QuotientGraph qg = quotient(g);
            LabelledSemiGraph out;
            out.n = qg.members.size();
            for (const auto& members : qg.members) {
                std::string name = g.names.empty() ? "c" + std::to_string(out.names.size())
                                                   : g.names[members.front()];
                out.names.push_back(name);
            }
            out.edges = qg.graph.edges;
            out.labels = qg.graph.labels;
            std::string text = semigraph_to_json(out);
            if (out_path.empty())
                std::cout << text;
            else
                write_file(out_path, text);
            return kExitTrue;
        }

        if (chi_cmd->parsed()) {
            LabelledSemiGraph g = semigraph_from_json(read_file(structure_path));
            auto it = std::find(g.names.begin(), g.names.end(), vertex);
            if (it == g.names.end()) {
                std::cerr << "unknown vertex '" << vertex << "'\n";
                return kExitUsage;
            }
            std::uint32_t v = static_cast<std::uint32_t>(it - g.names.begin());
            BigInt ell(ell_text);
            bool result;
            if (hat) {
                result = chi_hat(g, v, ell);
            } else {
                if (!g.sim.empty()) {
                    std::cerr << "graph has SIM pairs; use --hat\n";
                    return kExitUsage;
                }
                LabelledGraph lg = LabelledGraph::make(g.n, g.edges, g.labels);
                result = chi(lg, v, ell);
            }
            std::cout << (result ? "true" : "false") << "\n";
            return result ? kExitTrue : kExitFalse;
        }

        if (run_cmd->parsed() || inter_cmd->parsed()) {
            GameSetup setup = load_pair(a_path, b_path, psp_arg);
            GameConfig cfg;
            cfg.k = k;
            cfg.q = q;
            cfg.budget = {max_nodes, max_pairs};
            std::cout << "seed " << seed << "\n";
            auto dup = make_duplicator(dup_kind, setup.a, setup.b);
            std::unique_ptr<SpoilerAgent> spoiler;
            if (inter_cmd->parsed())
                spoiler = std::make_unique<InteractiveSpoiler>();
            else
                spoiler = make_spoiler(spoiler_kind, seed, setup.a);
            MatchResult r = run_match(cfg, setup.a, setup.b, {}, *spoiler, *dup, seed);
            std::cout << (r.outcome.winner == Winner::spoiler ? "Spoiler wins"
                                                              : "Duplicator wins")
                      << ": " << r.outcome.reason << "\n";
            if (!transcript_path.empty())
                write_file(transcript_path, transcript_to_text(r.transcript));
            return kExitTrue;
        }

        if (replay_cmd->parsed()) {
            GameSetup setup = load_pair(a_path, b_path, psp_arg);
            GameConfig cfg;
            cfg.k = k;
            cfg.q = q;
            cfg.budget = {max_nodes, max_pairs};
            Transcript t = transcript_from_text(read_file(transcript_path));
            ReplayResult r = replay_transcript(cfg, setup.a, setup.b, t);
            if (!r.ok) {
                std::cerr << "replay error: " << r.error << "\n";
                return kExitUsage;
            }
            std::cout << "replay ok: "
                      << (r.outcome->winner == Winner::spoiler ? "Spoiler wins"
                                                               : "Duplicator wins")
                      << ": " << r.outcome->reason << "\n";
            return kExitTrue;
        }

        if (verify_cmd->parsed()) {
            std::cout << "seed " << seed << "\n";
            return cmd_verify(suite, seed);
        }
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
