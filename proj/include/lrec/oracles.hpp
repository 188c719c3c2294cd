#pragma once

#include "lrec/eval.hpp"
#include "lrec/treecomb.hpp"

#include <optional>

namespace lrec {
namespace oracles {

// Literal unmemoized recursion for the labelled-graph query. `fuel` bounds
// the number of recursive calls; nullopt when exhausted. Kept deliberately
// separate from the production evaluator.
std::optional<bool> naive_chi(const LabelledGraph& g, std::uint32_t u, const BigInt& ell,
                              std::uint64_t& fuel);

// Estimated call count of naive_chi, for filtering generated cases.
std::uint64_t naive_chi_cost(const LabelledGraph& g, std::uint32_t u, const BigInt& ell);

// Union-find construction of the semi-graph quotient.
QuotientGraph dsu_quotient(const LabelledSemiGraph& g);

// Consistency via the enclosing-sum characterization, enumerated directly
// over every (x, F) pair with F a minimal enclosing subset of the domain.
bool consistent_by_enclosing_sums(const BinTree& t, const OffsetFn& rho);

// Free elements by brute force over all subsets of cl(y): a subset that is
// closed and connected blocks its boundary when both freeness clauses fail.
// Exponential; trees of height <= 3 only.
NodeSet free_elements_bitmask(const BinTree& t, const NodeSet& x, const NodeSet& y,
                              const OffsetFn& rho);

}  // namespace oracles
}  // namespace lrec
