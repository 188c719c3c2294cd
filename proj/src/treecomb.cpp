#include "lrec/treecomb.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace lrec {

namespace {

std::optional<OffsetFn> try_union_offsets(const OffsetFn& a, const OffsetFn& b) {
    OffsetFn out = a;
    for (const auto& [v, val] : b.values) {
        auto it = out.values.find(v);
        if (it != out.values.end()) {
            if (it->second != val) return std::nullopt;
        } else {
            out.values[v] = val;
        }
    }
    return out;
}

}  // namespace

BinTree::BinTree(int height) : height_(height) {
    if (height < 0 || height > 30) throw std::invalid_argument("tree height out of range");
    node_count_ = (2u << height) - 1;
}

int BinTree::depth_of(NodeId v) const {
    int d = -1;
    while (v != 0) {
        v >>= 1;
        ++d;
    }
    return d;
}

bool BinTree::is_ancestor_or_self(NodeId a, NodeId v) const {
    while (v > a) v >>= 1;
    return v == a;
}

std::vector<NodeId> BinTree::leaves() const {
    std::vector<NodeId> out;
    for (NodeId v = (node_count_ + 1) / 2; v <= node_count_; ++v) out.push_back(v);
    return out;
}

NodeSet OffsetFn::domain() const {
    NodeSet d;
    for (const auto& [v, _] : values) d.insert(v);
    return d;
}

bool OffsetFn::is_zero() const {
    for (const auto& [_, val] : values)
        if (val != 0) return false;
    return true;
}

NodeSet closure(const BinTree& t, const NodeSet& x) {
    NodeSet s = x;
    std::deque<NodeId> work(x.begin(), x.end());
    auto add = [&](NodeId v) {
        if (s.insert(v).second) work.push_back(v);
    };
    while (!work.empty()) {
        NodeId v = work.front();
        work.pop_front();
        // Triple where v is the parent.
        if (!t.is_leaf(v)) {
            bool l = s.count(t.left(v)), r = s.count(t.right(v));
            if (l && !r) add(t.right(v));
            if (r && !l) add(t.left(v));
        }
        // Triple where v is a child.
        if (v != t.root()) {
            bool p = s.count(t.parent(v)), sib = s.count(t.sibling(v));
            if (p && !sib) add(t.sibling(v));
            if (sib && !p) add(t.parent(v));
        }
    }
    return s;
}

int min_height(const BinTree& t, const NodeSet& x) {
    if (x.empty()) throw std::invalid_argument("min_height of empty set");
    int m = t.height();
    for (NodeId v : x) m = std::min(m, t.height_of(v));
    return m;
}

int max_height(const BinTree& t, const NodeSet& x) {
    if (x.empty()) throw std::invalid_argument("max_height of empty set");
    int m = 0;
    for (NodeId v : x) m = std::max(m, t.height_of(v));
    return m;
}

std::vector<ClosedComponent> components(const BinTree& t, const NodeSet& x) {
    // Closedness: every related triple with two members present has the third.
    for (NodeId v : x) {
        if (!t.is_leaf(v)) {
            int present = 1 + (x.count(t.left(v)) ? 1 : 0) + (x.count(t.right(v)) ? 1 : 0);
            if (present == 2) throw std::invalid_argument("set is not closed");
        }
        if (v != t.root() && !x.count(t.parent(v)) && x.count(t.sibling(v)))
            throw std::invalid_argument("set is not closed");
    }

    std::vector<ClosedComponent> out;
    NodeSet visited;
    for (NodeId start : x) {
        if (visited.count(start)) continue;
        ClosedComponent comp;
        std::deque<NodeId> work{start};
        visited.insert(start);
        while (!work.empty()) {
            NodeId v = work.front();
            work.pop_front();
            comp.nodes.insert(v);
            auto touch = [&](NodeId w) {
                if (t.valid(w) && x.count(w) && !visited.count(w)) {
                    visited.insert(w);
                    work.push_back(w);
                }
            };
            if (v != t.root()) touch(t.parent(v));
            if (!t.is_leaf(v)) {
                touch(t.left(v));
                touch(t.right(v));
            }
        }
        comp.head = *comp.nodes.begin();
        for (NodeId v : comp.nodes)
            if (t.height_of(v) > t.height_of(comp.head)) comp.head = v;
        for (NodeId v : comp.nodes) {
            bool child_in = !t.is_leaf(v) &&
                            (comp.nodes.count(t.left(v)) || comp.nodes.count(t.right(v)));
            if (!child_in) comp.frontier.insert(v);
        }
        comp.component_height = t.height_of(comp.head) - min_height(t, comp.nodes);
        out.push_back(std::move(comp));
    }
    return out;
}

NodeSet frontier_of_closed(const BinTree& t, const NodeSet& x) {
    NodeSet out;
    for (const auto& comp : components(t, x)) out.insert(comp.frontier.begin(), comp.frontier.end());
    return out;
}

bool encloses(const BinTree& t, const NodeSet& f, NodeId v) {
    if (f.count(v)) return true;
    if (t.is_leaf(v)) return false;
    return encloses(t, f, t.left(v)) && encloses(t, f, t.right(v));
}

bool minimally_encloses(const BinTree& t, const NodeSet& f, NodeId v) {
    if (!encloses(t, f, v)) return false;
    for (NodeId y : f) {
        NodeSet reduced = f;
        reduced.erase(y);
        if (encloses(t, reduced, v)) return false;
    }
    return true;
}

std::optional<OffsetFn> try_extend_consistent(const BinTree& t, const OffsetFn& rho,
                                              ExtendOrder order) {
    const int p = rho.p;
    std::map<NodeId, int> val = rho.values;
    std::deque<NodeId> work;
    for (const auto& [v, _] : val) work.push_back(v);

    auto assign = [&](NodeId v, int value) {
        value = ((value % p) + p) % p;
        auto it = val.find(v);
        if (it != val.end()) return;  // first assignment wins; verified below
        val[v] = value;
        if (order == ExtendOrder::breadth_first)
            work.push_back(v);
        else
            work.push_front(v);
    };

    while (!work.empty()) {
        NodeId v = work.front();
        work.pop_front();
        int vv = val.at(v);
        if (!t.is_leaf(v)) {
            auto l = val.find(t.left(v)), r = val.find(t.right(v));
            if (l != val.end() && r == val.end()) assign(t.right(v), vv - l->second);
            if (r != val.end() && l == val.end()) assign(t.left(v), vv - r->second);
        }
        if (v != t.root()) {
            auto pa = val.find(t.parent(v)), sib = val.find(t.sibling(v));
            if (pa != val.end() && sib == val.end()) assign(t.sibling(v), pa->second - vv);
            if (sib != val.end() && pa == val.end()) assign(t.parent(v), vv + sib->second);
        }
    }

    // Every fully assigned triple must satisfy parent = left + right.
    for (const auto& [v, vv] : val) {
        if (t.is_leaf(v)) continue;
        auto l = val.find(t.left(v)), r = val.find(t.right(v));
        if (l != val.end() && r != val.end()) {
            if (((l->second + r->second) % p) != vv) return std::nullopt;
        }
    }

    OffsetFn out;
    out.p = p;
    out.values = std::move(val);
    return out;
}

bool is_consistent(const BinTree& t, const OffsetFn& rho) {
    return try_extend_consistent(t, rho).has_value();
}

OffsetFn extend_consistent(const BinTree& t, const OffsetFn& rho, ExtendOrder order) {
    auto out = try_extend_consistent(t, rho, order);
    if (!out) throw std::invalid_argument("offset function is not consistent");
    return *out;
}

std::vector<HeadFrontierSet> closed_connected_subsets(const BinTree& t,
                                                      const NodeSet& within) {
    constexpr std::size_t kCap = 200000;
    std::vector<HeadFrontierSet> out;
    std::map<NodeId, std::vector<std::pair<NodeSet, NodeSet>>> memo;  // frontier, nodes

    auto rec = [&](auto&& self, NodeId v) -> const std::vector<std::pair<NodeSet, NodeSet>>& {
        auto it = memo.find(v);
        if (it != memo.end()) return it->second;
        std::vector<std::pair<NodeSet, NodeSet>> res;
        res.push_back({NodeSet{v}, NodeSet{v}});
        if (!t.is_leaf(v) && within.count(t.left(v)) && within.count(t.right(v))) {
            const auto& ls = self(self, t.left(v));
            const auto& rs = self(self, t.right(v));
            for (const auto& [f1, n1] : ls) {
                for (const auto& [f2, n2] : rs) {
                    NodeSet f = f1, n = n1;
                    f.insert(f2.begin(), f2.end());
                    n.insert(n2.begin(), n2.end());
                    n.insert(v);
                    res.push_back({std::move(f), std::move(n)});
                    if (res.size() > kCap)
                        throw BudgetError("closed connected subset enumeration too large");
                }
            }
        }
        return memo.emplace(v, std::move(res)).first->second;
    };

    for (NodeId head : within) {
        for (const auto& [f, n] : rec(rec, head)) {
            out.push_back({head, f, n});
            if (out.size() > kCap)
                throw BudgetError("closed connected subset enumeration too large");
        }
    }
    return out;
}

NodeSet free_elements(const BinTree& t, const NodeSet& x, const NodeSet& y,
                      const OffsetFn& rho) {
    if (rho.domain() != x) throw std::invalid_argument("rho must be defined exactly on x");
    if (!std::includes(y.begin(), y.end(), x.begin(), x.end()))
        throw std::invalid_argument("x must be a subset of y");
    if (!is_consistent(t, rho)) throw std::invalid_argument("rho is not consistent");

    NodeSet cl_y = closure(t, y);
    NodeSet blocked;
    for (const auto& sub : closed_connected_subsets(t, cl_y)) {
        NodeSet boundary = sub.frontier;
        boundary.insert(sub.head);

        bool clause_zero = true;  // every dom(rho) member of the boundary is zero
        for (NodeId z : boundary) {
            if (x.count(z) && rho.at(z) != 0) {
                clause_zero = false;
                break;
            }
        }
        if (clause_zero) continue;

        bool clause_interior = false;  // some dom(rho) member strictly inside
        for (NodeId w : sub.nodes) {
            if (x.count(w) && !boundary.count(w)) {
                clause_interior = true;
                break;
            }
        }
        if (clause_interior) continue;

        blocked.insert(boundary.begin(), boundary.end());
    }

    NodeSet out;
    for (NodeId v : cl_y)
        if (!blocked.count(v)) out.insert(v);
    return out;
}

OffsetFn forced_extension(const BinTree& t, const NodeSet& x, const NodeSet& y,
                          const OffsetFn& rho) {
    NodeSet free = free_elements(t, x, y, rho);
    OffsetFn out = rho;
    for (NodeId v : free) {
        if (!out.defined(v)) out.set(v, 0);
        // Free members of dom(rho) already carry zero.
    }
    if (!is_consistent(t, out))
        throw std::logic_error("forced extension is inconsistent");
    return out;
}

NodeSet lift_obstruction_set(const BinTree& t, const NodeSet& x, const OffsetFn& rho,
                             const std::vector<NodeSet>& ys, std::size_t i) {
    const std::size_t r = ys.size();
    std::vector<NodeId> nonzero;
    for (const auto& [v, val] : rho.values)
        if (val != 0) nonzero.push_back(v);

    // All elements of Y_j u X that are in T(v) are in T(u); `nonempty`
    // reports whether T(v) holds any such element at all. The membership
    // condition below demands a non-empty witness (otherwise sibling nodes
    // could co-occur), while the grandchild exclusion is literal and treats
    // an empty intersection as trivially contained.
    auto contained = [&](const NodeSet& yj, NodeId v, NodeId u, bool* nonempty) {
        bool any = false, cont = true;
        for (NodeId w : yj) {
            if (t.is_ancestor_or_self(v, w)) {
                any = true;
                if (!t.is_ancestor_or_self(u, w)) cont = false;
            }
        }
        for (NodeId w : x) {
            if (t.is_ancestor_or_self(v, w)) {
                any = true;
                if (!t.is_ancestor_or_self(u, w)) cont = false;
            }
        }
        if (nonempty) *nonempty = any;
        return cont;
    };

    NodeSet h;
    for (NodeId u = 4; u <= t.node_count(); ++u) {
        NodeId v = u >> 2;  // grandparent

        bool nz_below = false;
        for (NodeId z : nonzero)
            if (t.is_ancestor_or_self(v, z)) {
                nz_below = true;
                break;
            }
        if (nz_below) continue;

        std::size_t j = i;
        while (j <= r) {
            bool nonempty = false;
            if (contained(ys[j - 1], v, u, &nonempty) && nonempty) break;
            ++j;
        }
        if (j > r) continue;

        bool ok = true;
        for (std::size_t jp = i; jp < j && ok; ++jp) {
            for (NodeId w = 4 * v; w <= 4 * v + 3 && ok; ++w) {
                if (t.valid(w) && contained(ys[jp - 1], v, w, nullptr)) ok = false;
            }
        }
        if (ok) h.insert(u);
    }
    return h;
}

std::vector<OffsetFn> lift_sequence(const BinTree& t, const NodeSet& x,
                                    const OffsetFn& rho, const std::vector<NodeSet>& ys,
                                    std::size_t s) {
    if (rho.domain() != x) throw std::invalid_argument("rho must be defined exactly on x");
    if (!is_consistent(t, rho)) throw std::invalid_argument("rho is not consistent");
    for (const auto& y : ys)
        if (y.size() > s) throw std::invalid_argument("a target set exceeds the size bound");

    const int height_slack = 2 * static_cast<int>(x.size() + s);

    std::vector<OffsetFn> out;
    OffsetFn sigma_prev;
    sigma_prev.p = rho.p;

    for (std::size_t i = 1; i <= ys.size(); ++i) {
        NodeSet h = lift_obstruction_set(t, x, rho, ys, i);

        OffsetFn rho_i = rho;
        for (NodeId v : h)
            if (!rho_i.defined(v)) rho_i.set(v, 0);

        // eta = rho_i u sigma_prev; on conflict the obstruction zeros yield,
        // and as a last resort the obstruction set is dropped entirely. The
        // output conditions are re-verified below either way.
        std::optional<OffsetFn> ext;
        for (int attempt = 0; attempt < 3 && !ext; ++attempt) {
            std::optional<OffsetFn> eta;
            if (attempt == 0) {
                eta = try_union_offsets(sigma_prev, rho_i);
            } else if (attempt == 1) {
                OffsetFn base = sigma_prev;
                for (const auto& [v, val] : rho.values) base.values[v] = val;
                for (NodeId v : h)
                    if (!base.defined(v)) base.set(v, 0);
                eta = base;
            } else {
                eta = try_union_offsets(sigma_prev, rho);
            }
            if (eta) ext = try_extend_consistent(t, *eta);
        }
        if (!ext) throw std::logic_error("lift construction failed: no consistent base");

        // Fill the target set from the forced extension; nodes outside the
        // closure take zero one at a time, re-closing after each (two
        // unconstrained nodes need not be independently zeroable).
        OffsetFn sigma_i;
        sigma_i.p = rho.p;
        for (NodeId yv : ys[i - 1]) {
            if (!ext->defined(yv)) {
                OffsetFn grown = *ext;
                grown.set(yv, 0);
                auto next = try_extend_consistent(t, grown);
                if (!next) throw std::logic_error("lift zero-fill lost consistency");
                ext = std::move(next);
            }
            sigma_i.set(yv, ext->at(yv));
        }

        auto joint = try_union_offsets(rho, sigma_prev);
        if (joint) joint = try_union_offsets(*joint, sigma_i);
        if (!joint || !is_consistent(t, *joint))
            throw std::logic_error("lift output violates pairwise consistency");

        for (NodeId yv : ys[i - 1]) {
            if (sigma_i.at(yv) == 0) continue;
            bool witnessed = false;
            for (const auto& [z, val] : rho.values) {
                if (val != 0 && t.height_of(yv) >= t.height_of(z) - height_slack) {
                    witnessed = true;
                    break;
                }
            }
            if (!witnessed) {
                std::ostringstream os;
                os << "lift output violates the height-gap condition at node " << yv;
                throw std::logic_error(os.str());
            }
        }

        out.push_back(sigma_i);
        sigma_prev = sigma_i;
    }
    return out;
}

}  // namespace lrec
