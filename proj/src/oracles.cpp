#include "lrec/oracles.hpp"

#include <algorithm>
#include <map>

namespace lrec {
namespace oracles {

std::optional<bool> naive_chi(const LabelledGraph& g, std::uint32_t u, const BigInt& ell,
                              std::uint64_t& fuel) {
    if (fuel == 0) return std::nullopt;
    --fuel;
    if (ell < 0) return false;
    std::uint64_t cnt = 0;
    for (std::uint32_t v : g.out[u]) {
        BigInt ell2 = floor_div(ell - 1, BigInt(g.in[v].size()));
        auto r = naive_chi(g, v, ell2, fuel);
        if (!r) return std::nullopt;
        if (*r) ++cnt;
    }
    return g.labels[u].count(BigInt(cnt)) > 0;
}

namespace {

std::uint64_t cost_rec(const LabelledGraph& g, std::uint32_t u, const BigInt& ell,
                       std::map<std::pair<std::uint32_t, BigInt>, std::uint64_t>& memo) {
    if (ell < 0) return 1;
    auto key = std::make_pair(u, ell);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::uint64_t total = 1;
    for (std::uint32_t v : g.out[u]) {
        BigInt ell2 = floor_div(ell - 1, BigInt(g.in[v].size()));
        std::uint64_t c = cost_rec(g, v, ell2, memo);
        if (total > UINT64_MAX - c) {
            total = UINT64_MAX;
            break;
        }
        total += c;
    }
    return memo[key] = total;
}

}  // namespace

std::uint64_t naive_chi_cost(const LabelledGraph& g, std::uint32_t u, const BigInt& ell) {
    std::map<std::pair<std::uint32_t, BigInt>, std::uint64_t> memo;
    return cost_rec(g, u, ell, memo);
}

namespace {

struct Dsu {
    std::vector<std::uint32_t> parent;
    explicit Dsu(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
    }
    std::uint32_t find(std::uint32_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

QuotientGraph dsu_quotient(const LabelledSemiGraph& g) {
    Dsu dsu(g.n);
    for (const auto& [a, b] : g.sim) dsu.unite(a, b);

    QuotientGraph q;
    q.class_of.assign(g.n, UINT32_MAX);
    std::map<std::uint32_t, std::uint32_t> root_to_class;
    for (std::uint32_t v = 0; v < g.n; ++v) {
        std::uint32_t r = dsu.find(v);
        auto it = root_to_class.find(r);
        if (it == root_to_class.end()) {
            it = root_to_class.emplace(r, static_cast<std::uint32_t>(q.members.size())).first;
            q.members.emplace_back();
        }
        q.class_of[v] = it->second;
        q.members[it->second].push_back(v);
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> qedges;
    for (const auto& [a, b] : g.edges) qedges.insert({q.class_of[a], q.class_of[b]});
    std::vector<std::set<BigInt>> labels(q.members.size());
    for (std::uint32_t v = 0; v < g.n; ++v)
        if (v < g.labels.size())
            labels[q.class_of[v]].insert(g.labels[v].begin(), g.labels[v].end());
    q.graph = LabelledGraph::make(q.members.size(), qedges, std::move(labels));
    return q;
}

bool consistent_by_enclosing_sums(const BinTree& t, const OffsetFn& rho) {
    NodeSet dom = rho.domain();
    std::vector<NodeId> nodes(dom.begin(), dom.end());
    const std::size_t n = nodes.size();
    if (n > 20)
        throw std::invalid_argument("enclosing-sum oracle is exponential; keep |dom| small");

    for (NodeId x : dom) {
        for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
            NodeSet f;
            int sum = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1ull << i)) {
                    f.insert(nodes[i]);
                    sum = (sum + rho.at(nodes[i])) % rho.p;
                }
            }
            if (!minimally_encloses(t, f, x)) continue;
            if (sum != rho.at(x)) return false;
        }
    }
    return true;
}

NodeSet free_elements_bitmask(const BinTree& t, const NodeSet& x, const NodeSet& y,
                              const OffsetFn& rho) {
    NodeSet cl_y = closure(t, y);
    std::vector<NodeId> nodes(cl_y.begin(), cl_y.end());
    const std::size_t n = nodes.size();
    if (n > 20) throw std::invalid_argument("bitmask oracle limited to small closures");

    auto is_connected = [&](const NodeSet& s) {
        if (s.empty()) return false;
        NodeSet seen;
        std::vector<NodeId> work{*s.begin()};
        seen.insert(*s.begin());
        while (!work.empty()) {
            NodeId v = work.back();
            work.pop_back();
            auto touch = [&](NodeId w) {
                if (w >= 1 && t.valid(w) && s.count(w) && !seen.count(w)) {
                    seen.insert(w);
                    work.push_back(w);
                }
            };
            if (v != t.root()) touch(t.parent(v));
            if (!t.is_leaf(v)) {
                touch(t.left(v));
                touch(t.right(v));
            }
        }
        return seen == s;
    };
    auto is_closed = [&](const NodeSet& s) {
        for (NodeId v : s) {
            if (!t.is_leaf(v)) {
                int present = 1 + (s.count(t.left(v)) ? 1 : 0) + (s.count(t.right(v)) ? 1 : 0);
                if (present == 2) return false;
            }
            if (v != t.root() && !s.count(t.parent(v)) && s.count(t.sibling(v))) return false;
        }
        return true;
    };

    NodeSet blocked;
    for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
        NodeSet s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ull << i)) s.insert(nodes[i]);
        if (!is_closed(s) || !is_connected(s)) continue;

        NodeId head = *s.begin();
        for (NodeId v : s)
            if (t.height_of(v) > t.height_of(head)) head = v;
        NodeSet boundary;
        for (NodeId v : s) {
            bool child_in = !t.is_leaf(v) && (s.count(t.left(v)) || s.count(t.right(v)));
            if (!child_in) boundary.insert(v);
        }
        boundary.insert(head);

        bool clause_zero = true;
        for (NodeId z : boundary)
            if (x.count(z) && rho.at(z) != 0) {
                clause_zero = false;
                break;
            }
        if (clause_zero) continue;

        bool clause_interior = false;
        for (NodeId w : s)
            if (x.count(w) && !boundary.count(w)) {
                clause_interior = true;
                break;
            }
        if (clause_interior) continue;

        blocked.insert(boundary.begin(), boundary.end());
    }

    NodeSet out;
    for (NodeId v : cl_y)
        if (!blocked.count(v)) out.insert(v);
    return out;
}

}  // namespace oracles
}  // namespace lrec
