#pragma once

#include "lrec/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lrec {

using ElemId = std::uint32_t;  // index into a structure's ordered universe

// Raw, unvalidated structure contents as they appear in a JSON file.
struct StructureData {
    std::vector<std::string> universe;
    struct Rel {
        int arity = 0;
        std::vector<std::vector<std::string>> tuples;
    };
    std::map<std::string, Rel> relations;
    std::map<std::string, std::string> constants;
};

// Lists every invariant violation; empty result means the data is well formed.
std::vector<std::string> validate_structure(const StructureData& data);

// A finite relational structure over named elements, with the implicit number
// domain {0,...,|universe|}. Immutable after construction. The universe is
// kept in lexicographic order so iteration and serialization are
// deterministic.
class Structure {
  public:
    struct Relation {
        int arity = 0;
        std::vector<std::vector<ElemId>> tuples;  // sorted
        std::unordered_set<std::vector<std::uint32_t>, VecU32Hash> index;

        bool contains(const std::vector<ElemId>& t) const { return index.count(t) > 0; }
    };

    // Throws std::invalid_argument when validate_structure(data) is non-empty.
    static Structure from_data(const StructureData& data);

    std::size_t size() const { return universe_.size(); }
    std::uint64_t number_max() const { return universe_.size(); }  // N(A) = {0..|A|}

    const std::vector<std::string>& universe() const { return universe_; }
    const std::string& name_of(ElemId e) const { return universe_[e]; }
    std::optional<ElemId> id_of(const std::string& name) const;

    const std::map<std::string, Relation>& relations() const { return relations_; }
    const Relation* relation(const std::string& name) const;
    bool holds(const std::string& rel, const std::vector<ElemId>& tuple) const;

    const std::map<std::string, ElemId>& constants() const { return constants_; }
    std::optional<ElemId> constant(const std::string& name) const;

    StructureData to_data() const;

    std::uint64_t fingerprint() const { return fingerprint_; }
    std::uint64_t universe_fingerprint() const { return universe_fingerprint_; }

  private:
    std::vector<std::string> universe_;
    std::unordered_map<std::string, ElemId> ids_;
    std::map<std::string, Relation> relations_;
    std::map<std::string, ElemId> constants_;
    std::uint64_t fingerprint_ = 0;
    std::uint64_t universe_fingerprint_ = 0;
};

// encode_number_tuple: <r> = sum_i (n+1)^(i-1) * r_i for a tuple over {0..n}.
// Throws std::invalid_argument when a component exceeds n.
BigInt encode_number_tuple(std::span<const std::uint64_t> r, std::uint64_t n);

// Decode m into `width` base-(n+1) digits; inverse of encode on its range.
std::vector<std::uint64_t> decode_number_tuple(const BigInt& m, std::uint64_t n,
                                               std::size_t width);

// A partial injection over element ids of one universe.
class PartialInjection {
  public:
    PartialInjection() = default;

    // False when the pair would break functionality or injectivity.
    bool insert(ElemId a, ElemId b);

    std::optional<ElemId> apply(ElemId a) const;
    std::optional<ElemId> apply_inverse(ElemId b) const;
    bool defined(ElemId a) const { return fwd_.count(a) > 0; }
    std::size_t size() const { return fwd_.size(); }
    bool empty() const { return fwd_.empty(); }

    const std::map<ElemId, ElemId>& pairs() const { return fwd_; }

    PartialInjection inverse() const;

    bool operator==(const PartialInjection& o) const { return fwd_ == o.fwd_; }

  private:
    std::map<ElemId, ElemId> fwd_;
    std::map<ElemId, ElemId> inv_;
};

// f (union) g: defined as f on dom(f) and as g elsewhere on dom(g). Fails when
// the two disagree on a shared point or the union is not injective; `why`
// receives a message in that case.
std::optional<PartialInjection> compose_injection(const PartialInjection& f,
                                                  const PartialInjection& g,
                                                  std::string* why = nullptr);

// True iff for every relation R and every tuple a over dom(f),
// R^a(a) <=> R^b(f(a)), and pebbled constants are matched in both directions.
// Throws std::invalid_argument when the structures have different universes.
bool is_partial_isomorphism(const PartialInjection& f, const Structure& a,
                            const Structure& b);

}  // namespace lrec
