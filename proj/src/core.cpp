#include "lrec/core.hpp"

#include <algorithm>
#include <sstream>

namespace lrec {

std::vector<std::string> validate_structure(const StructureData& data) {
    std::vector<std::string> errors;
    if (data.universe.empty()) errors.push_back("empty universe");

    std::set<std::string> seen;
    for (const auto& e : data.universe) {
        if (!seen.insert(e).second)
            errors.push_back("duplicate element '" + e + "' in universe");
    }

    for (const auto& [name, rel] : data.relations) {
        if (rel.arity <= 0)
            errors.push_back("relation '" + name + "' has non-positive arity");
        for (const auto& tuple : rel.tuples) {
            if (static_cast<int>(tuple.size()) != rel.arity) {
                std::ostringstream os;
                os << "arity mismatch in relation '" << name << "': tuple of length "
                   << tuple.size() << ", declared arity " << rel.arity;
                errors.push_back(os.str());
            }
            for (const auto& e : tuple) {
                if (seen.count(e) == 0)
                    errors.push_back("unknown element '" + e + "' in relation '" + name + "'");
            }
        }
    }

    for (const auto& [name, target] : data.constants) {
        if (seen.count(target) == 0)
            errors.push_back("unknown element '" + target + "' for constant '" + name + "'");
    }
    return errors;
}

Structure Structure::from_data(const StructureData& data) {
    auto errors = validate_structure(data);
    if (!errors.empty()) {
        std::string msg = "invalid structure:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }

    Structure s;
    s.universe_ = data.universe;
    std::sort(s.universe_.begin(), s.universe_.end());
    for (ElemId i = 0; i < s.universe_.size(); ++i) s.ids_[s.universe_[i]] = i;

    for (const auto& [name, rel] : data.relations) {
        Relation r;
        r.arity = rel.arity;
        std::set<std::vector<ElemId>> uniq;
        for (const auto& tuple : rel.tuples) {
            std::vector<ElemId> t;
            t.reserve(tuple.size());
            for (const auto& e : tuple) t.push_back(s.ids_.at(e));
            uniq.insert(std::move(t));
        }
        r.tuples.assign(uniq.begin(), uniq.end());
        for (const auto& t : r.tuples) r.index.insert(t);
        s.relations_[name] = std::move(r);
    }
    for (const auto& [name, target] : data.constants) s.constants_[name] = s.ids_.at(target);

    std::uint64_t h = fnv1a("structure");
    for (const auto& e : s.universe_) h = fnv1a(e, hash_combine(h, 1));
    s.universe_fingerprint_ = h;
    for (const auto& [name, rel] : s.relations_) {
        h = fnv1a(name, hash_combine(h, 2));
        for (const auto& t : rel.tuples)
            for (auto x : t) h = hash_combine(h, x);
    }
    for (const auto& [name, c] : s.constants_) h = hash_combine(fnv1a(name, h), c);
    s.fingerprint_ = h;
    return s;
}

std::optional<ElemId> Structure::id_of(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const Structure::Relation* Structure::relation(const std::string& name) const {
    auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : &it->second;
}

bool Structure::holds(const std::string& rel, const std::vector<ElemId>& tuple) const {
    const Relation* r = relation(rel);
    return r != nullptr && r->contains(tuple);
}

std::optional<ElemId> Structure::constant(const std::string& name) const {
    auto it = constants_.find(name);
    if (it == constants_.end()) return std::nullopt;
    return it->second;
}

StructureData Structure::to_data() const {
    StructureData d;
    d.universe = universe_;
    for (const auto& [name, rel] : relations_) {
        StructureData::Rel r;
        r.arity = rel.arity;
        for (const auto& t : rel.tuples) {
            std::vector<std::string> names;
            names.reserve(t.size());
            for (auto e : t) names.push_back(universe_[e]);
            r.tuples.push_back(std::move(names));
        }
        d.relations[name] = std::move(r);
    }
    for (const auto& [name, c] : constants_) d.constants[name] = universe_[c];
    return d;
}

BigInt encode_number_tuple(std::span<const std::uint64_t> r, std::uint64_t n) {
    BigInt result = 0;
    BigInt weight = 1;
    const BigInt base = BigInt(n) + 1;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] > n) {
            std::ostringstream os;
            os << "number tuple component " << r[i] << " exceeds domain max " << n;
            throw std::invalid_argument(os.str());
        }
        result += weight * r[i];
        weight *= base;
    }
    return result;
}

std::vector<std::uint64_t> decode_number_tuple(const BigInt& m, std::uint64_t n,
                                               std::size_t width) {
    if (m < 0) throw std::invalid_argument("cannot decode negative value");
    const BigInt base = BigInt(n) + 1;
    BigInt rest = m;
    std::vector<std::uint64_t> digits(width, 0);
    for (std::size_t i = 0; i < width; ++i) {
        digits[i] = static_cast<std::uint64_t>(rest % base);
        rest /= base;
    }
    if (rest != 0) throw std::invalid_argument("value does not fit in number tuple");
    return digits;
}

bool PartialInjection::insert(ElemId a, ElemId b) {
    auto f = fwd_.find(a);
    if (f != fwd_.end()) return f->second == b;
    auto i = inv_.find(b);
    if (i != inv_.end()) return i->second == a;
    fwd_[a] = b;
    inv_[b] = a;
    return true;
}

std::optional<ElemId> PartialInjection::apply(ElemId a) const {
    auto it = fwd_.find(a);
    if (it == fwd_.end()) return std::nullopt;
    return it->second;
}

std::optional<ElemId> PartialInjection::apply_inverse(ElemId b) const {
    auto it = inv_.find(b);
    if (it == inv_.end()) return std::nullopt;
    return it->second;
}

PartialInjection PartialInjection::inverse() const {
    PartialInjection r;
    for (const auto& [a, b] : fwd_) r.insert(b, a);
    return r;
}

std::optional<PartialInjection> compose_injection(const PartialInjection& f,
                                                  const PartialInjection& g,
                                                  std::string* why) {
    PartialInjection out = f;
    for (const auto& [a, b] : g.pairs()) {
        if (auto existing = f.apply(a)) {
            if (*existing != b) {
                if (why) *why = "maps disagree on shared domain point";
                return std::nullopt;
            }
            continue;
        }
        if (!out.insert(a, b)) {
            if (why) *why = "union is not injective";
            return std::nullopt;
        }
    }
    return out;
}

bool is_partial_isomorphism(const PartialInjection& f, const Structure& a,
                            const Structure& b) {
    if (&a != &b &&
        (a.size() != b.size() || a.universe_fingerprint() != b.universe_fingerprint()))
        throw std::invalid_argument("structures do not share a universe");

    // Constants, both directions.
    std::set<std::string> cnames;
    for (const auto& [n, _] : a.constants()) cnames.insert(n);
    for (const auto& [n, _] : b.constants()) cnames.insert(n);
    for (const auto& name : cnames) {
        auto ea = a.constant(name);
        auto eb = b.constant(name);
        if (ea && f.defined(*ea)) {
            if (!eb || f.apply(*ea) != *eb) return false;
        }
        if (eb && f.apply_inverse(*eb)) {
            if (!ea || f.apply_inverse(*eb) != *ea) return false;
        }
    }

    // Relations: enumerate dom(f)^arity; the image side then ranges over
    // range(f)^arity exactly, so one direction of tuples covers both.
    std::vector<ElemId> dom;
    dom.reserve(f.size());
    for (const auto& [x, _] : f.pairs()) dom.push_back(x);

    std::set<std::string> rnames;
    for (const auto& [n, _] : a.relations()) rnames.insert(n);
    for (const auto& [n, _] : b.relations()) rnames.insert(n);

    for (const auto& name : rnames) {
        const auto* ra = a.relation(name);
        const auto* rb = b.relation(name);
        int arity = ra ? ra->arity : rb->arity;
        if (ra && rb && ra->arity != rb->arity) return false;

        std::vector<ElemId> tuple(arity), image(arity);
        std::vector<std::size_t> idx(arity, 0);
        if (dom.empty() && arity > 0) continue;
        while (true) {
            for (int i = 0; i < arity; ++i) {
                tuple[i] = dom[idx[i]];
                image[i] = *f.apply(tuple[i]);
            }
            bool in_a = ra != nullptr && ra->contains(tuple);
            bool in_b = rb != nullptr && rb->contains(image);
            if (in_a != in_b) return false;

            int pos = arity - 1;
            while (pos >= 0 && ++idx[pos] == dom.size()) idx[pos--] = 0;
            if (pos < 0) break;
        }
    }
    return true;
}

}  // namespace lrec
