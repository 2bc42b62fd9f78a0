#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ceihorn/report.hpp"

namespace ceihorn {

struct AnalyzeOptions {
    std::optional<std::filesystem::path> dot;
    std::optional<std::filesystem::path> dot_layers;
    std::optional<std::filesystem::path> smt2;
    std::optional<std::filesystem::path> json;
    std::optional<std::filesystem::path> ssa;
    std::chrono::seconds timeout{3600};
    std::size_t max_reentry = 2;
    std::size_t inline_threshold = 3;
    bool optimize = true;
    /// Input is raw bytes rather than hex text.
    bool binary = false;
    /// Input is creation code; the runtime segment is extracted first.
    bool creation = false;
    bool keep_proof = false;
    /// Solver executable; empty means CEIHORN_SOLVER or z3.
    std::string solver;
};

/// Report plus the textual artifacts of one run.
struct Analysis {
    Report report;
    std::string smt2;
    std::string dot;
    std::string layers_dot;
    std::string ssa;
    std::string proof;
};

/// parse -> disassemble -> partition -> recover -> layer -> inline -> SSA/types
/// -> encode -> assemble -> emit -> check -> extract. Stage errors end up in
/// the report rather than escaping.
Analysis analyze_code(const Bytes& code, const std::string& contract_id, const AnalyzeOptions& options);

/// Reads the file, runs the pipeline and writes the requested artifacts.
Analysis analyze(const std::filesystem::path& input, const AnalyzeOptions& options);

/// 0 Safe, 1 Vulnerable, 2 Timeout/Unknown, 3 input or solver error.
int exit_code(const Report& r);

enum class Label { Vulnerable, Safe };

struct CorpusEntry {
    std::string name;
    std::filesystem::path bytecode;
    Label label = Label::Safe;
    /// same-function, cross-function, lock-protected, cei-compliant, no-external-call.
    std::string vclass;
};

class ManifestError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Paths in the manifest are relative to its directory.
std::vector<CorpusEntry> load_manifest(const std::filesystem::path& manifest);

struct CorpusOptions {
    std::size_t workers = 1;
    std::chrono::seconds timeout{60};
    AnalyzeOptions analyze;
};

struct EntryResult {
    CorpusEntry entry;
    Report report;
    /// TP, TN, FP, FN, Timeout, Unknown or Error.
    std::string outcome;
};

struct CorpusSummary {
    std::vector<EntryResult> entries;
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0, timeout = 0, unknown = 0, error = 0;
};

CorpusSummary run_corpus(const std::vector<CorpusEntry>& entries, const CorpusOptions& options);
CorpusSummary run_corpus(const std::filesystem::path& manifest, const CorpusOptions& options);

std::string summary_text(const CorpusSummary& s);
/// Omits per-entry timings so repeated runs compare equal.
std::string summary_json(const CorpusSummary& s);

}  // namespace ceihorn
