// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "ceihorn/harness.hpp"
#include "evm.hpp"
#include "fidelity.hpp"
#include "pipeline.hpp"
#include "programs.hpp"

using namespace ceihorn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kCorpus = fs::path(CEIHORN_SOURCE_DIR) / "corpus";

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << s << " s";
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

AnalyzeOptions z3_options(std::chrono::seconds timeout = std::chrono::seconds(60)) {
    AnalyzeOptions o;
    o.solver = CEIHORN_Z3;
    o.timeout = timeout;
    return o;
}

void corpus_counts() {
    const auto entries = load_manifest(kCorpus / "manifest.json");
    // Labels first, by exhaustive concrete exploration of attacker chains.
    std::string mislabeled;
    for (const auto& e : entries) {
        const oracle::ChainVerdict c = oracle::explore_chains(parse_hex(slurp(e.bytecode)));
        const bool vulnerable = e.label == Label::Vulnerable;
        if (c.vulnerable != vulnerable || (!vulnerable && !c.exhausted)) mislabeled += " " + e.name;
    }
    CorpusOptions o;
    o.timeout = std::chrono::seconds(60);
    o.analyze = z3_options();
    o.workers = 2;
    const CorpusSummary s = run_corpus(entries, o);
    std::ostringstream d;
    d << "TP=" << s.tp << " TN=" << s.tn << " FP=" << s.fp << " FN=" << s.fn << " Timeout=" << s.timeout
      << " Unknown=" << s.unknown << " Error=" << s.error;
    if (!mislabeled.empty()) d << "; labels contradicted by concrete exploration:" << mislabeled;
    verdict(mislabeled.empty() && s.tp == 5 && s.tn == 5 && s.fp == 0 && s.fn == 0 && s.timeout == 0 &&
                s.unknown == 0 && s.error == 0,
            "corpus-confusion-matrix", d.str());
}

bool has_edge(const Cfg& cfg, std::size_t from, std::size_t to) {
    auto a = cfg.block_at(from), b = cfg.block_at(to);
    if (!a || !b) return false;
    for (const auto& e : cfg.out_edges(*a))
        if (e.dst == *b) return true;
    return false;
}

void cfg_completeness() {
    const auto t0 = Clock::now();
    std::size_t observed = 0, missing = 0, bad_returns = 0;
    std::vector<oracle::Program> programs;
    for (std::uint32_t seed = 0; seed < 50; ++seed) programs.push_back(oracle::random_program(seed, {40, 0, true}));
    const auto subs = oracle::subroutine_programs();
    programs.insert(programs.end(), subs.begin(), subs.end());
    for (const auto& p : programs) {
        const Cfg cfg = build_cfg(p.code);
        for (auto [a, b] : oracle::observed_transitions(p.code)) {
            ++observed;
            if (!has_edge(cfg, a, b)) ++missing;
        }
    }
    for (const auto& p : subs) {
        const Cfg cfg = build_cfg(p.code);
        if (cfg.calls.empty()) ++bad_returns;
        for (const auto& c : cfg.calls) {
            std::size_t n = 0;
            for (const auto& e : cfg.out_edges(c.return_block))
                if (e.kind == EdgeKind::JumpReturn && e.dst == c.return_site) ++n;
            if (n != 1) ++bad_returns;
        }
    }
    const double took = seconds_since(t0);
    std::ostringstream d;
    d << programs.size() << " programs, " << observed << " observed transitions, " << missing << " missing, "
      << bad_returns << " call sites without exactly one return edge, " << fmt_seconds(took);
    verdict(missing == 0 && bad_returns == 0 && took < 10, "cfg-completeness", d.str());
}

void semantic_fidelity() {
    const auto t0 = Clock::now();
    const auto r = oracle::precise_fidelity(1000, 20261015, CEIHORN_Z3);
    const double took = seconds_since(t0);
    std::ostringstream d;
    d << r.opcodes << " opcodes, " << r.instances << " instances, " << r.violations.size() << " violations, "
      << fmt_seconds(took);
    if (!r.violations.empty()) d << "; first: " << r.violations.front();
    verdict(r.violations.empty() && r.opcodes > 0 && took < 30, "semantic-fidelity", d.str());
}

const std::regex kBitVectorSymbols(R"(BitVec|\(_ bv|bvand|bvor|bvxor|bvnot|bvshl|bvlshr|bvashr|int2bv|bv2nat|extract)");

void bitvector_economy() {
    const char* arithmetic = "PUSH 0 CALLDATALOAD PUSH 3 MUL PUSH 1 ADD CALLER SLOAD ADD CALLER SSTORE STOP";
    const std::string plain = emit_smt2(oracle::Pipeline(std::string(arithmetic)).sys);
    const std::size_t bv_hits = std::distance(std::sregex_iterator(plain.begin(), plain.end(), kBitVectorSymbols),
                                              std::sregex_iterator());

    // The AND result sits on top of the exit stack; no constraint and no
    // entry argument may mention it.
    oracle::Pipeline p(std::string("PUSH 0 CALLDATALOAD PUSH 3 AND STOP"));
    bool and_free = false;
    for (const auto& c : p.sys.clauses) {
        if (c.family != Family::InvV || c.block != p.layered.entry) continue;
        const Term top = c.head->args.at(p.enc->layout().size());
        and_free = top->kind == TermNode::Kind::Var && top->sort == Sort::bv256();
        for (const auto& k : c.constraints) {
            std::vector<Term> vars;
            std::map<std::string, Sort> seen;
            collect_vars(k, vars, seen);
            if (seen.contains(top->name)) and_free = false;
        }
        for (const auto& a : c.body.at(0).args)
            if (to_smt(a) == top->name) and_free = false;
    }
    std::ostringstream d;
    d << bv_hits << " bit-vector symbols in the arithmetic-only script; AND result "
      << (and_free ? "unconstrained" : "constrained");
    verdict(bv_hits == 0 && and_free, "bitvector-economy", d.str());
}

void isomorphism() {
    std::string mismatched;
    std::size_t checked = 0;
    for (const auto& f : oracle::corpus_files()) {
        oracle::Pipeline p(f.code);
        ++checked;
        const bool blocks = p.sys.count(Family::InvV) == p.enc->blocks().size() &&
                            p.enc->blocks().size() == p.layered.blocks.size();
        const bool edges = p.sys.count(Family::InvE) == p.layered.edges.size();
        if (!blocks || !edges) {
            std::ostringstream d;
            d << " " << f.name << "(V " << p.sys.count(Family::InvV) << "/" << p.layered.blocks.size() << ", E "
              << p.sys.count(Family::InvE) << "/" << p.layered.edges.size() << ")";
            mismatched += d.str();
        }
    }
    verdict(checked == 10 && mismatched.empty(), "clause-isomorphism",
            std::to_string(checked) + " corpus entries" + (mismatched.empty() ? ", all exact" : ";" + mismatched));
}

std::string without_lock_writes(const std::string& source) {
    std::istringstream in(source);
    std::string out, line;
    while (std::getline(in, line))
        if (line.find("; lock-set") == std::string::npos && line.find("; lock-clear") == std::string::npos)
            out += line + "\n";
    return out;
}

void lock_simulation() {
    const std::string source = slurp(kCorpus / "src" / "lock_protected_withdraw.evm");
    const Bytes locked = assemble(source);
    const Bytes twin = assemble(without_lock_writes(source));
    const bool bundled = locked == parse_hex(slurp(kCorpus / "lock_protected_withdraw.hex")) &&
                         twin == parse_hex(slurp(kCorpus / "missing_lock_withdraw.hex"));
    const Report a = analyze_code(locked, "lock_protected_withdraw", z3_options()).report;
    const Report b = analyze_code(twin, "lock_protected_withdraw_unlocked", z3_options()).report;
    verdict(bundled && a.verdict == VerdictKind::Safe && !a.error && b.verdict == VerdictKind::Vulnerable && !b.error,
            "lock-simulation",
            "locked " + verdict_label(a) + ", unlocked twin " + verdict_label(b) +
                (bundled ? ", twin matches the bundled missing-lock entry" : ", twin differs from the bundled entry"));
}

void path_validity() {
    std::size_t vulnerable = 0;
    std::string bad;
    for (const auto& e : load_manifest(kCorpus / "manifest.json")) {
        const Report r = analyze(e.bytecode, z3_options()).report;
        if (r.verdict != VerdictKind::Vulnerable) continue;
        ++vulnerable;
        const bool ok = r.path && !r.path->steps.empty() && r.path->replayed == true &&
                        r.path->steps.back().event == "error";
        if (!ok) bad += " " + e.name;
    }
    verdict(vulnerable > 0 && bad.empty(), "path-validity",
            std::to_string(vulnerable) + " vulnerable verdicts" + (bad.empty() ? ", all replayed and end in error" : "; bad:" + bad));
}

void determinism() {
    const fs::path dir = fs::temp_directory_path() / ("ceihorn_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::regex timing("\"analysis_millis\": [0-9]+");
    std::string differing;
    std::size_t checked = 0;
    for (const auto& e : load_manifest(kCorpus / "manifest.json")) {
        std::string outputs[2];
        for (int run = 0; run < 2; ++run) {
            AnalyzeOptions o = z3_options();
            const std::string stem = (dir / (e.name + "_" + std::to_string(run))).string();
            o.smt2 = stem + ".smt2";
            o.dot = stem + ".dot";
            o.json = stem + ".json";
            analyze(e.bytecode, o);
            outputs[run] = slurp(*o.smt2) + "\x1f" + slurp(*o.dot) + "\x1f" +
                           std::regex_replace(slurp(*o.json), timing, "");
        }
        ++checked;
        if (outputs[0] != outputs[1] || outputs[0].size() < 3) differing += " " + e.name;
    }
    fs::remove_all(dir);
    verdict(checked == 10 && differing.empty(), "determinism",
            std::to_string(checked) + " entries analyzed twice" +
                (differing.empty() ? ", SMT2, DOT and JSON identical" : "; differing:" + differing));
}

}  // namespace

int main() {
    const std::pair<const char*, void (*)()> criteria[] = {
        {"corpus-confusion-matrix", corpus_counts}, {"cfg-completeness", cfg_completeness},
        {"semantic-fidelity", semantic_fidelity},   {"bitvector-economy", bitvector_economy},
        {"clause-isomorphism", isomorphism},        {"lock-simulation", lock_simulation},
        {"path-validity", path_validity},           {"determinism", determinism},
    };
    for (const auto& [name, check] : criteria) {
        try {
            check();
        } catch (const std::exception& e) {
            verdict(false, name, std::string("threw: ") + e.what());
        }
    }
    return failures;
}
