#include "lrec/psp.hpp"

#include "lrec/eval.hpp"

#include <deque>
#include <sstream>

namespace lrec {

PspInstance PspInstance::wrap(Structure s) {
    const auto* r = s.relation("R");
    const auto* sr = s.relation("S");
    if (!r || r->arity != 3) throw std::invalid_argument("PSP instance needs ternary R");
    if (!sr || sr->arity != 1) throw std::invalid_argument("PSP instance needs unary S");
    if (!s.constant("t")) throw std::invalid_argument("PSP instance needs constant t");
    return PspInstance{std::move(s)};
}

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

std::vector<std::string> TreeGroupSpec::validate() const {
    std::vector<std::string> errors;
    if (h < 1) errors.push_back("tree height must be at least 1");
    if (!is_prime(p)) errors.push_back("modulus must be prime");
    if (h >= 1 && sigma.size() != (1u << h))
        errors.push_back("sigma must assign a value to each of the 2^h leaves");
    for (int v : sigma)
        if (v < 0 || v >= p) errors.push_back("sigma value outside Z_p");
    if (t < 0 || t >= p) errors.push_back("target outside Z_p");
    return errors;
}

std::string psp_element_name(NodeId node, int residue) {
    return "n" + std::to_string(node) + "_r" + std::to_string(residue);
}

bool parse_psp_element_name(const std::string& name, NodeId* node, int* residue) {
    if (name.size() < 4 || name[0] != 'n') return false;
    std::size_t sep = name.find("_r");
    if (sep == std::string::npos || sep == 1) return false;
    try {
        std::size_t used = 0;
        unsigned long n = std::stoul(name.substr(1, sep - 1), &used);
        if (used != sep - 1) return false;
        unsigned long r = std::stoul(name.substr(sep + 2), &used);
        if (used != name.size() - sep - 2) return false;
        *node = static_cast<NodeId>(n);
        *residue = static_cast<int>(r);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

PspInstance generate_instance(const TreeGroupSpec& spec) {
    auto errors = spec.validate();
    if (!errors.empty()) {
        std::string msg = "invalid tree-group spec:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }

    BinTree tree(spec.h);
    StructureData data;
    for (NodeId v = 1; v <= tree.node_count(); ++v)
        for (int a = 0; a < spec.p; ++a) data.universe.push_back(psp_element_name(v, a));

    StructureData::Rel r;
    r.arity = 3;
    for (NodeId w = 1; w <= tree.node_count(); ++w) {
        if (tree.is_leaf(w)) continue;
        NodeId kids[2] = {tree.left(w), tree.right(w)};
        // Both orders of the two distinct children.
        for (int first : {0, 1}) {
            NodeId u = kids[first], v = kids[1 - first];
            for (int a = 0; a < spec.p; ++a) {
                for (int b = 0; b < spec.p; ++b) {
                    r.tuples.push_back({psp_element_name(u, a), psp_element_name(v, b),
                                        psp_element_name(w, (a + b) % spec.p)});
                }
            }
        }
    }
    data.relations["R"] = std::move(r);

    StructureData::Rel srel;
    srel.arity = 1;
    auto leaves = tree.leaves();
    for (std::size_t i = 0; i < leaves.size(); ++i)
        srel.tuples.push_back({psp_element_name(leaves[i], spec.sigma[i])});
    data.relations["S"] = std::move(srel);

    data.constants["t"] = psp_element_name(tree.root(), spec.t);
    return PspInstance{Structure::from_data(data)};
}

std::set<ElemId> upward_closure(const PspInstance& inst) {
    const Structure& s = inst.structure;
    const auto* r = s.relation("R");
    const auto* srel = s.relation("S");

    // Index triples by each premise position.
    std::unordered_map<ElemId, std::vector<const std::vector<ElemId>*>> by_first, by_second;
    for (const auto& t : r->tuples) {
        by_first[t[0]].push_back(&t);
        by_second[t[1]].push_back(&t);
    }

    std::set<ElemId> closed;
    std::deque<ElemId> work;
    auto add = [&](ElemId e) {
        if (closed.insert(e).second) work.push_back(e);
    };
    for (const auto& t : srel->tuples) add(t[0]);

    while (!work.empty()) {
        ElemId e = work.front();
        work.pop_front();
        auto fire = [&](const std::vector<const std::vector<ElemId>*>* triples, int other) {
            if (!triples) return;
            for (const auto* t : *triples)
                if (closed.count((*t)[other])) add((*t)[2]);
        };
        auto f1 = by_first.find(e);
        fire(f1 == by_first.end() ? nullptr : &f1->second, 1);
        auto f2 = by_second.find(e);
        fire(f2 == by_second.end() ? nullptr : &f2->second, 0);
    }
    return closed;
}

bool solve_direct(const PspInstance& inst) {
    auto closed = upward_closure(inst);
    return closed.count(*inst.structure.constant("t")) > 0;
}

const char* const kPspLfpSentence =
    "lfp[X,u](S(u) | exists v. exists w. (X(v) & X(w) & R(v,w,u)))(t)";

bool solve_via_lfp(const PspInstance& inst) {
    static const FormulaPtr sentence = parse_formula(kPspLfpSentence, Vocabulary::psp());
    return eval_formula(sentence, inst.structure, {});
}

bool expected_positivity(const TreeGroupSpec& spec) {
    int sum = 0;
    for (int v : spec.sigma) sum = (sum + v) % spec.p;
    return sum == spec.t;
}

}  // namespace lrec
