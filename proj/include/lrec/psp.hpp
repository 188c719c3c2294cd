#pragma once

#include "lrec/core.hpp"
#include "lrec/logic.hpp"
#include "lrec/treecomb.hpp"

#include <string>
#include <vector>

namespace lrec {

// A path-systems instance: ternary R, unary S, constant t. The decision
// problem asks whether t lies in the upward closure of S under
// a,b in Y and R(a,b,c) => c in Y.
struct PspInstance {
    Structure structure;

    static PspInstance wrap(Structure s);  // validates the vocabulary shape
};

// Parameters for the hard instances: a complete binary tree of height h
// crossed with Z_p, leaf values sigma, target residue t at the root.
struct TreeGroupSpec {
    int h = 1;
    int p = 2;
    std::vector<int> sigma;  // one value per leaf, in leaf order
    int t = 0;

    std::vector<std::string> validate() const;  // empty when well formed
};

bool is_prime(int p);

// Element naming: "n<nodeId>_r<a>" with heap node ids (root = 1). R relates
// the two distinct children of a node to their parent with residues summing
// mod p; S pins the leaf values; t names (root, t).
PspInstance generate_instance(const TreeGroupSpec& spec);

std::string psp_element_name(NodeId node, int residue);
bool parse_psp_element_name(const std::string& name, NodeId* node, int* residue);

// Worklist computation of the upward closure; true iff t is a member.
bool solve_direct(const PspInstance& inst);

// The fixed-point sentence route:
// lfp[X,u](S(u) | exists v. exists w. (X(v) & X(w) & R(v,w,u)))(t).
extern const char* const kPspLfpSentence;
bool solve_via_lfp(const PspInstance& inst);

// t = sum of leaf values mod p, computed without building the structure.
bool expected_positivity(const TreeGroupSpec& spec);

// The full upward closure, exposed for the uniqueness property check.
std::set<ElemId> upward_closure(const PspInstance& inst);

}  // namespace lrec
