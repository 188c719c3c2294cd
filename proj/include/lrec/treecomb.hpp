#pragma once

#include "lrec/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace lrec {

using NodeId = std::uint32_t;
using NodeSet = std::set<NodeId>;

// Complete binary tree of a given height, nodes addressed heap-style:
// root = 1, children of v are 2v and 2v+1. height_of(v) is the distance from
// v to a leaf. A related triple is a node together with its two children; a
// set is closed when any two members of a related triple force the third.
class BinTree {
  public:
    explicit BinTree(int height);

    int height() const { return height_; }
    std::uint32_t node_count() const { return node_count_; }
    NodeId root() const { return 1; }

    bool valid(NodeId v) const { return v >= 1 && v <= node_count_; }
    bool is_leaf(NodeId v) const { return v >= (node_count_ + 1) / 2; }
    NodeId parent(NodeId v) const { return v / 2; }  // 0 when v is the root
    NodeId sibling(NodeId v) const { return v ^ 1u; }
    NodeId left(NodeId v) const { return 2 * v; }
    NodeId right(NodeId v) const { return 2 * v + 1; }
    bool has_grandparent(NodeId v) const { return v >= 4; }

    int depth_of(NodeId v) const;
    int height_of(NodeId v) const { return height_ - depth_of(v); }

    // True when a lies on the path from the root to v (inclusive).
    bool is_ancestor_or_self(NodeId a, NodeId v) const;

    std::vector<NodeId> leaves() const;

  private:
    int height_;
    std::uint32_t node_count_;
};

// A partial map node -> Z_p. Values are always normalized into [0, p).
struct OffsetFn {
    int p = 2;
    std::map<NodeId, int> values;

    bool defined(NodeId v) const { return values.count(v) > 0; }
    int at(NodeId v) const { return values.at(v); }
    void set(NodeId v, int value) { values[v] = ((value % p) + p) % p; }
    NodeSet domain() const;
    bool is_zero() const;
};

struct ClosedComponent {
    NodeSet nodes;
    NodeId head = 0;      // the unique maximum-height node
    NodeSet frontier;     // members with no child in the component
    int component_height = 0;  // height(head) - min-h(nodes)
};

// Smallest closed superset of x.
NodeSet closure(const BinTree& t, const NodeSet& x);

int min_height(const BinTree& t, const NodeSet& x);  // throws on empty set
int max_height(const BinTree& t, const NodeSet& x);

// Decomposition of a closed set into maximal closed connected components.
// Throws std::invalid_argument when x is not closed.
std::vector<ClosedComponent> components(const BinTree& t, const NodeSet& x);

// Union of the component frontiers of a closed set.
NodeSet frontier_of_closed(const BinTree& t, const NodeSet& x);

// f encloses v when every descending path from v to a leaf meets f (v itself
// counts as being on the path).
bool encloses(const BinTree& t, const NodeSet& f, NodeId v);
bool minimally_encloses(const BinTree& t, const NodeSet& f, NodeId v);

// Consistency: rho extends to a function on the closure of its domain where
// every in-domain related triple satisfies parent = left + right.
bool is_consistent(const BinTree& t, const OffsetFn& rho);

enum class ExtendOrder { breadth_first, depth_first };

// The unique consistent extension of rho to the closure of its domain, or
// nullopt when rho is inconsistent.
std::optional<OffsetFn> try_extend_consistent(const BinTree& t, const OffsetFn& rho,
                                              ExtendOrder order = ExtendOrder::breadth_first);

// Same, but throws std::invalid_argument on inconsistent input.
OffsetFn extend_consistent(const BinTree& t, const OffsetFn& rho,
                           ExtendOrder order = ExtendOrder::breadth_first);

// Enumerates every closed connected subset of `within`, reported as
// (head, frontier, node set). Heads and frontiers determine the set: the
// nodes are exactly those on paths from the head to a frontier member.
struct HeadFrontierSet {
    NodeId head;
    NodeSet frontier;
    NodeSet nodes;
};
std::vector<HeadFrontierSet> closed_connected_subsets(const BinTree& t,
                                                      const NodeSet& within);

// Elements of cl(y) that are free over rho: for every closed connected
// S within cl(y) with head hx and frontier F containing the element, either
// every dom(rho) member of F u {hx} has value zero, or some dom(rho) member
// of S lies strictly inside (not in F u {hx}).
NodeSet free_elements(const BinTree& t, const NodeSet& x, const NodeSet& y,
                      const OffsetFn& rho);

// rho extended by zero on exactly the free elements of cl(y); consistent by
// construction (verified, throws on violation).
OffsetFn forced_extension(const BinTree& t, const NodeSet& x, const NodeSet& y,
                          const OffsetFn& rho);

// Grandparent-condition set used by lift_sequence; exposed for tests.
// ys is 1-based conceptually: ys[0] is Y_1.
NodeSet lift_obstruction_set(const BinTree& t, const NodeSet& x, const OffsetFn& rho,
                             const std::vector<NodeSet>& ys, std::size_t i);

// Per-round extensions sigma_1..sigma_r of a consistent rho onto the sets ys,
// such that rho u sigma_i u sigma_{i+1} is consistent for consecutive rounds
// and every nonzero sigma_i(y) is within height 2(|X|+s) below some nonzero
// point of rho. Both conditions are re-verified on the output; violations
// throw std::logic_error.
std::vector<OffsetFn> lift_sequence(const BinTree& t, const NodeSet& x,
                                    const OffsetFn& rho, const std::vector<NodeSet>& ys,
                                    std::size_t s);

}  // namespace lrec
