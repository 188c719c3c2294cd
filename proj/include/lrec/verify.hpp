#pragma once

#include "lrec/eval.hpp"
#include "lrec/game.hpp"
#include "lrec/psp.hpp"
#include "lrec/rng.hpp"
#include "lrec/treecomb.hpp"

#include <string>
#include <vector>

namespace lrec {
namespace verify {

struct SuiteReport {
    std::string name;
    int cases = 0;
    int failures = 0;
    std::string first_counterexample;
    std::vector<std::string> notes;

    bool ok() const { return failures == 0 && cases > 0; }
    void fail(const std::string& what) {
        ++failures;
        if (first_counterexample.empty()) first_counterexample = what;
    }
    std::string summary_json() const;
    std::string summary_text() const;
};

// Generators shared by suites and tests. All deterministic in the Rng.
LabelledGraph random_labelled_graph(Rng& rng, int max_vertices, int max_label);
LabelledSemiGraph random_semigraph(Rng& rng, int max_vertices);
TreeGroupSpec random_treegroup(Rng& rng, int h, int p);
OffsetFn random_consistent_offsets(Rng& rng, const BinTree& t, int p, int support);

// Property suites. Counts are the number of generated cases.
SuiteReport core_suite(std::uint64_t seed, int cases = 300);
SuiteReport chi_suite(std::uint64_t seed, int cases = 500);
SuiteReport quotient_suite(std::uint64_t seed, int cases = 500);
SuiteReport psp_suite(std::uint64_t seed, int cases = 200);
SuiteReport treecomb_suite(std::uint64_t seed, int lift_cases = 500);
SuiteReport game_suite(std::uint64_t seed, int matches = 100);

// Paper-strategy robustness: tree-group instance pairs differing in the
// target, played against random and greedy spoilers. The duplicator must
// neither forfeit nor lose. `matches` is the total count; heights cycle
// through [h_lo, h_hi], moduli through {5, 7}, k through {2, 3}, q = 1.
struct StrategyOptions {
    int matches = 500;
    int h_lo = 6, h_hi = 10;
    double per_match_seconds = 5.0;
};
SuiteReport strategy_suite(std::uint64_t seed, const StrategyOptions& opts = {});

// Curated fixtures.
struct GameFixture {
    std::string name;
    Structure a, b;
    std::string formula;  // parsed against the pair's vocabulary
    Assignment env;
    int k = 3, q = 1;
};
std::vector<GameFixture> formula_game_fixtures();

struct BijectionFixture {
    std::string name;
    Structure a, b;
    int rounds;
    bool duplicator_wins;  // frozen hand classification
};
std::vector<BijectionFixture> bijection_fixtures();

// Sentences of rank <= 3, degree <= 1 over the path-systems vocabulary,
// a number of them carrying recursion operators.
std::vector<std::string> low_rank_sentences();

// Suites built on the fixtures.
SuiteReport formula_game_suite(std::uint64_t seed);
SuiteReport bijection_oracle_suite();
SuiteReport low_rank_agreement_suite(const TreeGroupSpec& spec_a, int t_b,
                                     const EvalBudget& budget);

}  // namespace verify
}  // namespace lrec
