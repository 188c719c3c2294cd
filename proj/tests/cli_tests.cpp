// End-to-end checks of the command-line tool: exit codes, file formats,
// deterministic transcripts, replay verification.

#include "lrec/json_io.hpp"
#include "lrec/psp.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

namespace {

int failures = 0;

void expect(bool cond, const std::string& what) {
    if (!cond) {
        std::cerr << "[FAIL] " << what << "\n";
        ++failures;
    } else {
        std::cout << "[ok] " << what << "\n";
    }
}

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(LRECWB_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int status = pclose(pipe);
    int code = status == -1 ? -1 : WEXITSTATUS(status);
    return {code, out};
}

std::string path(const std::string& name) { return std::string(WORK_DIR) + "/" + name; }

}  // namespace

int main() {
    using namespace lrec;

    // Fixture files.
    TreeGroupSpec pos;
    pos.h = 1;
    pos.p = 2;
    pos.sigma = {1, 1};
    pos.t = 0;
    write_file(path("spec_pos.json"), treegroup_to_json(pos));
    TreeGroupSpec neg = pos;
    neg.t = 1;
    write_file(path("spec_neg.json"), treegroup_to_json(neg));
    write_file(path("bad_spec.json"), "{\"h\":1,\"p\":4,\"sigma\":[0,0],\"t\":0}\n");

    // psp-gen writes the canonical structure file.
    auto gen = run("psp-gen --spec " + path("spec_pos.json") + " --out " + path("pos.json"));
    expect(gen.code == 0, "psp-gen exits 0");
    auto gen2 = run("psp-gen --spec " + path("spec_neg.json") + " --out " + path("neg.json"));
    expect(gen2.code == 0, "psp-gen (negative target) exits 0");
    expect(run("psp-gen --spec " + path("bad_spec.json")).code == 2,
           "psp-gen rejects a non-prime modulus with exit 2");

    // The fixed-point sentence on generated instances: exit 0 / 1.
    std::string sentence = "\"lfp[X,u](S(u) | exists v. exists w. (X(v) & X(w) & "
                           "R(v,w,u)))(t)\"";
    auto ev = run("eval --structure " + path("pos.json") + " --formula " + sentence);
    expect(ev.code == 0 && ev.out.find("true") != std::string::npos,
           "fixed-point sentence on a positive instance prints true, exit 0");
    ev = run("eval --structure " + path("neg.json") + " --formula " + sentence);
    expect(ev.code == 1 && ev.out.find("false") != std::string::npos,
           "fixed-point sentence on a negative instance prints false, exit 1");
    ev = run("eval --structure " + path("pos.json") + " --formula \"S(\"");
    expect(ev.code == 2, "malformed formula exits 2");

    // Solvers agree across methods.
    expect(run("psp-solve --spec " + path("spec_pos.json") + " --method direct").code == 0,
           "psp-solve direct of a positive instance exits 0");
    expect(run("psp-solve --spec " + path("spec_pos.json") + " --method lfp").code == 0,
           "psp-solve lfp of a positive instance exits 0");
    expect(run("psp-solve --spec " + path("spec_neg.json") + " --method expected").code == 1,
           "psp-solve expected of a negative instance exits 1");

    // rank subcommand.
    auto rk = run("rank --formula " + sentence);
    expect(rk.code == 0 && rk.out.find("rank") != std::string::npos, "rank prints measures");

    // chi / quotient on a small labelled semi-graph document.
    write_file(path("semigraph.json"), R"({
      "universe": ["a", "b"],
      "relations": {
        "E": {"arity": 2, "tuples": []},
        "SIM": {"arity": 2, "tuples": [["a","b"]]},
        "C": {"arity": 2, "tuples": [["a", 0]]}
      }
    })");
    auto ch = run("chi --structure " + path("semigraph.json") + " --vertex b --ell 5 --hat");
    expect(ch.code == 0 && ch.out.find("true") != std::string::npos,
           "hat recursion sees the merged label");
    auto qt = run("quotient --structure " + path("semigraph.json"));
    expect(qt.code == 0 && qt.out.find("\"a\"") != std::string::npos,
           "quotient prints the merged class under the smallest member's name");

    // Deterministic matches: identical transcripts for one seed, replay ok.
    std::string game_args = "--psp 3,3,0,1 --k 3 --q 1 --spoiler random --duplicator paper "
                            "--seed 99";
    auto g1 = run("game-run " + game_args + " --transcript " + path("t1.jsonl"));
    auto g2 = run("game-run " + game_args + " --transcript " + path("t2.jsonl"));
    expect(g1.code == 0 && g2.code == 0, "game-run exits 0");
    expect(read_file(path("t1.jsonl")) == read_file(path("t2.jsonl")),
           "same seed gives byte-identical transcripts");

    auto rp = run("game-replay --psp 3,3,0,1 --k 3 --q 1 --transcript " + path("t1.jsonl"));
    expect(rp.code == 0 && rp.out.find("replay ok") != std::string::npos,
           "replay verifies the transcript");

    // Tampering breaks replay.
    std::string tampered = read_file(path("t1.jsonl"));
    auto hash_pos = tampered.find("\"state_hash\":");
    if (hash_pos != std::string::npos) {
        tampered.replace(hash_pos, 14, "\"state_hash\":9");
        write_file(path("t3.jsonl"), tampered);
        auto bad = run("game-replay --psp 3,3,0,1 --k 3 --q 1 --transcript " + path("t3.jsonl"));
        expect(bad.code == 2 && bad.out.find("hash") != std::string::npos,
               "tampered transcript is rejected with a hash mismatch");
    }

    // Unknown verify suite.
    expect(run("verify nonsense").code == 2, "unknown verify suite exits 2");

    if (failures == 0) std::cout << "all cli checks passed\n";
    return failures == 0 ? 0 : 1;
}
