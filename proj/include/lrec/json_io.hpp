#pragma once

#include "lrec/core.hpp"
#include "lrec/eval.hpp"
#include "lrec/game.hpp"
#include "lrec/psp.hpp"

#include <string>

namespace lrec {

// Structure file format:
//   {"universe":[...],
//    "relations":{"R":{"arity":3,"tuples":[[...],...]}},
//    "constants":{"t":"..."}}
// Canonical form sorts the universe and every tuple list.
std::string structure_to_json(const Structure& s);
Structure structure_from_json(const std::string& text);  // throws on invalid input

// Semi-graph as a structure-shaped document with binary relations "E" and
// "SIM" over the vertex list and a mixed label relation "C" of
// [vertex, number] pairs.
std::string semigraph_to_json(const LabelledSemiGraph& g);
LabelledSemiGraph semigraph_from_json(const std::string& text);

// {"h":2,"p":3,"sigma":[1,0,2,1],"t":1}
std::string treegroup_to_json(const TreeGroupSpec& spec);
TreeGroupSpec treegroup_from_json(const std::string& text);

std::string transcript_to_text(const Transcript& t);
Transcript transcript_from_text(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace lrec
