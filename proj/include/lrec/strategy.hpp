#pragma once

#include "lrec/game.hpp"
#include "lrec/psp.hpp"
#include "lrec/treecomb.hpp"

#include <optional>

namespace lrec {

// Decoding layer between a generated tree-group instance pair and the tree
// combinatorics. Both structures share the universe (tree node x residue).
struct TreePairContext {
    BinTree tree;
    int p;
    int root_offset;  // t_B - t_A mod p
    std::vector<NodeId> node_of;   // ElemId -> tree node
    std::vector<int> residue_of;   // ElemId -> residue
    std::vector<std::vector<ElemId>> elem_of;  // node -> residue -> ElemId

    ElemId element(NodeId v, int residue) const {
        return elem_of[v][((residue % p) + p) % p];
    }

    static std::optional<TreePairContext> try_build(const Structure& a, const Structure& b);
};

// null-height: one less than the minimum height of the nonzero support;
// nullopt when the function is identically zero.
std::optional<int> null_height(const BinTree& t, const OffsetFn& rho);

// The bijection induced by an offset function: (v, a) -> (v, a + rho(v)),
// identity elsewhere. Full-universe permutation form.
std::vector<ElemId> offset_permutation(const TreePairContext& ctx, const OffsetFn& rho);

// Restriction to (nodes x Z_p) as a partial injection.
PartialInjection offset_injection(const TreePairContext& ctx, const OffsetFn& rho,
                                  const NodeSet& nodes);

// Spike test for quotient-class freeness of a frontier node u: a unit spike
// at u over beta u frontier, propagated by the consistent closure and applied
// to the tuple as an offset bijection, must keep the tuple's class. An
// inconsistent spike means bounded.
bool is_free_in_class(const TreePairContext& ctx, const GraphSide& side,
                      std::span<const Value> tuple, NodeId u, const NodeSet& beta,
                      int spike = 1);

// Offsets carried by a position: root offset plus one offset per pebbled tree
// node. Fails when the position is not offset-shaped.
std::optional<OffsetFn> position_offsets(const TreePairContext& ctx,
                                         const PartialInjection& f);

// ---------------------------------------------------------------------------
// Duplicator agents
// ---------------------------------------------------------------------------

class IdentityDuplicator : public DuplicatorAgent {
  public:
    std::string name() const override { return "identity"; }
    std::vector<ElemId> extension_bijection(Match& m) override;
    GraphReply graph_response(Match& m) override;
};

// The constructive strategy for tree-group instance pairs: extension moves
// play the consistent closure of the pebble offsets extended by zero; graph
// rounds zero the offsets at class-free frontier nodes and lift them onto
// each queried pebble subset. On structures that do not decode as a
// tree-group pair it degrades to the identity strategy.
class PaperDuplicator : public DuplicatorAgent {
  public:
    PaperDuplicator() = default;
    explicit PaperDuplicator(TreePairContext ctx) : ctx_(std::move(ctx)) {}
    static PaperDuplicator for_match(const Structure& a, const Structure& b);

    std::string name() const override { return "paper"; }
    std::vector<ElemId> extension_bijection(Match& m) override;
    GraphReply graph_response(Match& m) override;

    // Exposed for tests: the extension-move offsets for a position.
    OffsetFn extension_offsets(const PartialInjection& f) const;

  private:
    std::optional<TreePairContext> ctx_;
    IdentityDuplicator fallback_;
};

// ---------------------------------------------------------------------------
// Spoiler agents
// ---------------------------------------------------------------------------

class RandomSpoiler : public SpoilerAgent {
  public:
    explicit RandomSpoiler(std::uint64_t seed) : rng_(seed) {}
    std::string name() const override { return "random"; }
    MainAction select_action(Match& m) override;
    ElemId extension_pick(Match& m, const std::vector<ElemId>& g) override;
    GraphAction graph_action(Match& m) override;
    std::vector<Value> graph_step(
        Match& m, const std::function<std::vector<Value>(std::uint64_t)>& image_of) override;

  private:
    Rng rng_;
    int graph_moves_opened_ = 0;
};

// Extension moves only; pebbles a point that breaks the partial isomorphism
// when one exists, otherwise an element related to the pebbled ones.
class GreedySpoiler : public SpoilerAgent {
  public:
    explicit GreedySpoiler(std::uint64_t seed) : rng_(seed) {}
    std::string name() const override { return "greedy"; }
    MainAction select_action(Match& m) override;
    ElemId extension_pick(Match& m, const std::vector<ElemId>& g) override;
    GraphAction graph_action(Match& m) override;
    std::vector<Value> graph_step(
        Match& m, const std::function<std::vector<Value>(std::uint64_t)>& image_of) override;

  private:
    Rng rng_;
};

// Plays the constructive strategy extracted from a formula that is true in A
// and false in B under the tracked assignment: descends through connectives,
// pebbles a differing witness after each bijection, opens a graph round on
// the interpreted semi-graphs at recursion operators, and exits the round to
// the label formula once both sides count the same.
class FormulaSpoiler : public SpoilerAgent {
  public:
    FormulaSpoiler(FormulaPtr formula, Assignment env = {});
    std::string name() const override { return "formula"; }
    MainAction select_action(Match& m) override;
    ElemId extension_pick(Match& m, const std::vector<ElemId>& g) override;
    GraphAction graph_action(Match& m) override;
    std::vector<Value> graph_step(
        Match& m, const std::function<std::vector<Value>(std::uint64_t)>& image_of) override;
    void on_graph_end(Match& m) override;

  private:
    struct GraphPlan {
        const Formula* node = nullptr;
        std::shared_ptr<ChiEvaluator> chi_a, chi_b;
        std::shared_ptr<const GraphSide> side_a, side_b;
        std::uint64_t last_m = 0;  // agreed count at exit time
    };

    bool eval_a(const Formula& f, Match& m) const;
    bool eval_b(const Formula& f, Match& m) const;
    Assignment env_b(Match& m) const;
    void descend(Match& m);

    FormulaPtr cur_;
    Assignment env_a_;
    std::optional<ElemId> pending_constant_;
    std::optional<GraphPlan> plan_;
    FormulaPtr plan_kept_;  // keeps the recursion node alive while planned
};

}  // namespace lrec
