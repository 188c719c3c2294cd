#pragma once

#include "lrec/core.hpp"
#include "lrec/eval.hpp"
#include "lrec/logic.hpp"
#include "lrec/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lrec {

// ---------------------------------------------------------------------------
// The k-step, q-degree pebble game with graph moves.
//
// Position: a partial injection f on the shared universe, respecting pebbled
// constants. Spoiler may play extension moves (Duplicator offers a bijection,
// Spoiler pebbles one point of it) or open a graph round on a pair of
// interpreted semi-graphs over (U u N(U))^c. Spoiler wins as soon as f stops
// being a partial isomorphism; Duplicator wins when |dom f| reaches k.
// ---------------------------------------------------------------------------

struct GameConfig {
    int k = 2;
    int q = 0;
    EvalBudget budget;
    int move_cap = 64;  // a Spoiler that cannot make progress loses
};

struct GraphOpenMove {
    int c = 1;
    FormulaPtr phi_edge, phi_sim;
    Assignment params;             // values for free variables beyond the node tuples
    std::vector<Value> a0;         // starting tuple over (pebbled U) u N(U)
    BigInt ell0;
};

// One side's materialized semi-graph with its quotient.
struct GraphSide {
    std::shared_ptr<const NodeSpace> space;
    LabelledSemiGraph graph;
    QuotientGraph q;

    std::uint32_t class_of_tuple(std::span<const Value> t) const {
        return q.class_of.at(static_cast<std::size_t>(space->index_of(t)));
    }
};

struct GraphRoundState {
    int c = 1;
    std::shared_ptr<const GraphSide> side_a, side_b;
    std::vector<Value> current;       // a_i, a concrete tuple
    PartialInjection h;               // h_i, |dom| <= c
    BigInt ell;                       // l_i
    int round = 0;
    GraphOpenMove opened_with;
};

enum class Winner { spoiler, duplicator };

struct Outcome {
    Winner winner;
    std::string reason;
};

// Duplicator's reply in a graph round: the partial bijection g_i and a
// provider for the per-subset injections h_Y (queried lazily; Y is passed as
// a sorted list of element ids, |Y| <= c).
struct GraphReply {
    PartialInjection g;
    std::function<std::optional<PartialInjection>(const std::vector<ElemId>&)> h_provider;
};

class Match;

struct SpoilerAgent {
    virtual ~SpoilerAgent() = default;
    virtual std::string name() const = 0;

    struct MainAction {
        bool graph_move = false;
        GraphOpenMove open;  // when graph_move
    };
    virtual MainAction select_action(Match& m) = 0;

    // After Duplicator committed the bijection g (a full permutation of U).
    virtual ElemId extension_pick(Match& m, const std::vector<ElemId>& g) = 0;

    struct GraphAction {
        bool exit = false;
    };
    virtual GraphAction graph_action(Match& m) = 0;

    // Choose a_{i+1}; its class must be an out-neighbour of [a_i] in side A.
    // `image_of` gives Duplicator's committed image h_{U(v)}(v) per node index.
    virtual std::vector<Value> graph_step(
        Match& m, const std::function<std::vector<Value>(std::uint64_t)>& image_of) = 0;

    virtual void on_graph_end(Match& m) { (void)m; }
};

struct DuplicatorAgent {
    virtual ~DuplicatorAgent() = default;
    virtual std::string name() const = 0;

    // A permutation of U extending f, given as image vector indexed by ElemId.
    virtual std::vector<ElemId> extension_bijection(Match& m) = 0;

    virtual GraphReply graph_response(Match& m) = 0;
};

// Transcript: JSON lines; one header, one line per committed event, one
// outcome line. Replaying feeds the recorded payloads back through the engine
// and checks the per-event state hashes.
struct Transcript {
    std::vector<std::string> lines;
};

class Match {
  public:
    Match(const GameConfig& cfg, const Structure& a, const Structure& b,
          PartialInjection f0);

    const GameConfig& config() const { return cfg_; }
    const Structure& structure_a() const { return *a_; }
    const Structure& structure_b() const { return *b_; }
    const PartialInjection& position() const { return f_; }
    bool in_graph_phase() const { return graph_.has_value(); }
    const GraphRoundState& graph_state() const { return *graph_; }
    int moves_played() const { return moves_; }

    std::uint64_t state_hash() const;

    // Legality data shared with agents.
    std::vector<ElemId> pebbled() const;  // sorted dom(f)
    std::size_t universe_size() const { return a_->size(); }

    // --- engine steps; each returns an outcome when the game ended ---
    std::optional<Outcome> check_position();
    std::optional<Outcome> start_graph_move(const GraphOpenMove& mv, std::string* reject);
    std::optional<Outcome> apply_extension(const std::vector<ElemId>& g, ElemId pick,
                                           std::string* reject);
    // Runs Duplicator's reply checks (conditions (a)-(c)); Duplicator loses on
    // violation. On success stores per-node images for the step.
    std::optional<Outcome> apply_graph_reply(const GraphReply& reply, std::string* reject);
    std::optional<Outcome> apply_graph_step(const std::vector<Value>& next,
                                            std::string* reject);
    std::optional<Outcome> exit_graph_move();

    // Images committed by the last accepted graph reply.
    std::vector<Value> image_of_node(std::uint64_t idx) const;
    const PartialInjection& last_g() const { return last_g_; }

    // Graph-side caching across moves of one match.
    std::shared_ptr<const GraphSide> materialize_side(const Structure& s,
                                                      const GraphOpenMove& mv,
                                                      bool b_side);

    // Recorded h_Y queries of the last reply, in query order.
    const std::vector<std::pair<std::vector<ElemId>, PartialInjection>>& last_h_queries() const {
        return last_h_;
    }

    int bump_moves() { return ++moves_; }

  private:
    GameConfig cfg_;
    const Structure* a_;
    const Structure* b_;
    PartialInjection f_;
    std::optional<GraphRoundState> graph_;
    int moves_ = 0;

    PartialInjection last_g_;
    std::vector<std::pair<std::vector<ElemId>, PartialInjection>> last_h_;
    std::vector<std::optional<PartialInjection>> node_h_;  // per node index
    std::map<std::string, std::shared_ptr<const GraphSide>> side_cache_;
};

struct MatchResult {
    Outcome outcome;
    Transcript transcript;
};

// Plays a full match. Deterministic given the seed and deterministic agents.
MatchResult run_match(const GameConfig& cfg, const Structure& a, const Structure& b,
                      PartialInjection f0, SpoilerAgent& spoiler,
                      DuplicatorAgent& duplicator, std::uint64_t seed);

// Re-executes a transcript, checking per-event state hashes; returns the
// outcome or an error description.
struct ReplayResult {
    bool ok = false;
    std::string error;
    std::optional<Outcome> outcome;
};
ReplayResult replay_transcript(const GameConfig& cfg, const Structure& a,
                               const Structure& b, const Transcript& t);

// Exhaustive r-round bijection game decision (Duplicator wins?). Hard-capped
// to |U| <= 6, r <= 3.
bool bijection_game_oracle(const Structure& a, const Structure& b, int rounds);

}  // namespace lrec
