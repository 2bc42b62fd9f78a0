// Command-line front end: analyze one contract or evaluate a labeled corpus.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ceihorn/harness.hpp"

using namespace ceihorn;

namespace {

void print_report(const Analysis& a) {
    const Report& r = a.report;
    std::cout << r.contract_id << ": " << verdict_label(r) << " (" << r.analysis_millis << " ms, " << r.cfg.blocks
              << " blocks, " << r.cfg.edges << " edges, " << r.cfg.layers << " layers)\n";
    if (r.error) std::cout << "  " << r.error->kind << ": " << r.error->message << "\n";
    for (const auto& w : r.warnings) std::cout << "  warning: " << w << "\n";
    if (r.path) {
        std::cout << "  path (reentry " << r.path->reentry_count << "):\n";
        for (const auto& s : r.path->steps)
            std::cout << "    tx " << s.transaction << "  b" << s.block << "  [" << s.pc_begin << ".." << s.pc_end
                      << "]  " << s.event << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reentrancy analysis of EVM bytecode via constrained Horn clauses"};
    app.require_subcommand(1);

    AnalyzeOptions opts;
    std::string input;
    std::string dot, dot_layers, smt2, json;
    long timeout = 3600;
    bool no_opt = false, dump_ssa = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze one contract");
    analyze_cmd->add_option("file", input, "Runtime bytecode (hex text unless --binary)")->required();
    analyze_cmd->add_option("--dot", dot, "Write the recovered CFG as Graphviz");
    analyze_cmd->add_option("--dot-layers", dot_layers, "Write the function-layered CFG as Graphviz");
    analyze_cmd->add_option("--smt2", smt2, "Write the Horn clause script");
    analyze_cmd->add_option("--json", json, "Write the JSON report");
    analyze_cmd->add_option("--timeout", timeout, "Solver timeout in seconds")->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--max-reentry", opts.max_reentry, "Bound on attacker transactions and reentries");
    analyze_cmd->add_option("--inline-threshold", opts.inline_threshold, "Inline functions up to this many blocks");
    analyze_cmd->add_flag("--no-opt", no_opt, "Skip function layering and inlining");
    analyze_cmd->add_flag("--binary", opts.binary, "Input is raw bytes");
    analyze_cmd->add_flag("--creation", opts.creation, "Input is creation code; extract the runtime part");
    analyze_cmd->add_flag("--keep-proof", opts.keep_proof, "Save the solver refutation beside the report");
    analyze_cmd->add_flag("--dump-ssa", dump_ssa, "Print the typed SSA form");

    std::string manifest, summary_path;
    CorpusOptions copts;
    long corpus_timeout = 60;
    auto* corpus_cmd = app.add_subcommand("corpus", "Analyze every entry of a labeled manifest");
    corpus_cmd->add_option("manifest", manifest, "Corpus manifest (JSON)")->required();
    corpus_cmd->add_option("--workers", copts.workers, "Concurrent analyses")->check(CLI::PositiveNumber);
    corpus_cmd->add_option("--timeout", corpus_timeout, "Per-entry solver timeout in seconds")
        ->check(CLI::PositiveNumber);
    corpus_cmd->add_option("--json", summary_path, "Write the summary as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    if (*analyze_cmd) {
        if (!dot.empty()) opts.dot = dot;
        if (!dot_layers.empty()) opts.dot_layers = dot_layers;
        if (!smt2.empty()) opts.smt2 = smt2;
        if (!json.empty()) opts.json = json;
        opts.timeout = std::chrono::seconds(timeout);
        opts.optimize = !no_opt;
        try {
            Analysis a = analyze(input, opts);
            if (dump_ssa) std::cout << a.ssa;
            print_report(a);
            return exit_code(a.report);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 3;
        }
    }

    copts.timeout = std::chrono::seconds(corpus_timeout);
    try {
        CorpusSummary s = run_corpus(manifest, copts);
        std::cout << summary_text(s);
        if (!summary_path.empty()) {
            std::ofstream f(summary_path);
            f << summary_json(s);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
