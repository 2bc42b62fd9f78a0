#include "ceihorn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "ceihorn/cfg.hpp"
#include "ceihorn/cfgopt.hpp"
#include "ceihorn/chc.hpp"
#include "ceihorn/typeinfer.hpp"
#include "json.hpp"

namespace ceihorn {

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

std::set<BlockId> halting_blocks(const Cfg& cfg) {
    std::set<BlockId> out;
    for (const auto& [id, b] : cfg.blocks)
        if (b.terminator != Terminator::Jump && b.terminator != Terminator::JumpI &&
            b.terminator != Terminator::Fallthrough)
            out.insert(id);
    return out;
}

}  // namespace

Analysis analyze_code(const Bytes& input, const std::string& contract_id, const AnalyzeOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    Analysis a;
    Report& r = a.report;
    r.contract_id = contract_id;
    auto finish = [&]() -> Analysis& {
        r.analysis_millis =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        return a;
    };

    Bytes code = input;
    if (options.creation) {
        try {
            code = extract_runtime(input);
        } catch (const NoRuntimeSegment& e) {
            r.error = ReportError{"NoRuntimeSegment", e.what()};
            return finish();
        }
    }

    try {
        auto instructions = disassemble(code);
        Cfg cfg = recover_cfg(partition_blocks(instructions));
        r.warnings.insert(r.warnings.end(), cfg.warnings.begin(), cfg.warnings.end());
        a.dot = emit_dot(cfg, DotStyle{{cfg.entry}, halting_blocks(cfg)});

        LayeredCfg layered = options.optimize
                                 ? inline_functions(layer_functions(cfg, detect_functions(cfg)),
                                                    InlineOptions{options.inline_threshold})
                                 : single_layer(cfg);
        a.layers_dot = emit_layers_dot(layered);
        r.cfg.blocks = layered.blocks.size();
        r.cfg.edges = layered.edges.size();
        r.cfg.layers = layered.layers.size();
        r.cfg.unresolved_jumps = layered.unresolved.size();

        SsaForm ssa = build_ssa(layered);
        DomainAssignment domains = infer_types(ssa, layered);
        a.ssa = dump_ssa(ssa, domains);

        Encoding enc(layered, ssa, domains, EncodeOptions{options.max_reentry, 31});
        ChcSystem sys = encode(enc);
        r.cfg.encoded_blocks = enc.blocks().size();
        r.cfg.encoded_edges = enc.edges().size();
        r.clauses = ClauseStats{sys.count(Family::Init),      sys.count(Family::InvV),
                                sys.count(Family::InvE),      sys.count(Family::InvStatus),
                                sys.count(Family::InvSafe),   sys.count(Family::InvError)};
        for (const auto& w : sys.warnings)
            if (std::find(r.warnings.begin(), r.warnings.end(), w) == r.warnings.end()) r.warnings.push_back(w);
        a.smt2 = emit_smt2(sys);

        SolverConfig sc;
        sc.executable = options.solver;
        sc.timeout = options.timeout;
        Verdict v = check(a.smt2, sys, sc);
        r.verdict = v.kind;
        r.path = v.path;
        r.warnings.insert(r.warnings.end(), v.warnings.begin(), v.warnings.end());
        if (v.kind == VerdictKind::Unknown) r.warnings.push_back("solver answered: " + v.raw.substr(0, v.raw.find('\n')));
        if (v.kind == VerdictKind::Vulnerable) a.proof = v.raw;
    } catch (const SolverUnavailable& e) {
        r.error = ReportError{"SolverUnavailable", e.what()};
    } catch (const std::exception& e) {
        r.error = ReportError{"InternalError", e.what()};
    }
    return finish();
}

Analysis analyze(const std::filesystem::path& input, const AnalyzeOptions& options) {
    Analysis a;
    std::string id = input.stem().string();
    std::ifstream f(input, std::ios::binary);
    if (!f) {
        a.report.contract_id = id;
        a.report.error = ReportError{"InputError", "cannot read " + input.string()};
    } else {
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        try {
            Bytes code = options.binary ? Bytes(text.begin(), text.end()) : parse_hex(text);
            a = analyze_code(code, id, options);
        } catch (const MalformedHex& e) {
            a.report.contract_id = id;
            a.report.error = ReportError{"MalformedHex", e.what()};
        }
    }
    if (options.dot && !a.dot.empty()) write_file(*options.dot, a.dot);
    if (options.dot_layers && !a.layers_dot.empty()) write_file(*options.dot_layers, a.layers_dot);
    if (options.smt2 && !a.smt2.empty()) write_file(*options.smt2, a.smt2);
    if (options.ssa && !a.ssa.empty()) write_file(*options.ssa, a.ssa);
    if (options.json) write_file(*options.json, to_json(a.report));
    if (options.keep_proof && !a.proof.empty()) {
        std::filesystem::path p = options.json ? *options.json : input;
        p += ".proof";
        write_file(p, a.proof);
    }
    return a;
}

int exit_code(const Report& r) {
    if (r.error) return 3;
    switch (r.verdict) {
        case VerdictKind::Safe: return 0;
        case VerdictKind::Vulnerable: return 1;
        default: return 2;
    }
}

namespace {

const std::map<std::string, Label> kClassLabel = {{"same-function", Label::Vulnerable},
                                                  {"cross-function", Label::Vulnerable},
                                                  {"lock-protected", Label::Safe},
                                                  {"cei-compliant", Label::Safe},
                                                  {"no-external-call", Label::Safe}};

}  // namespace

std::vector<CorpusEntry> load_manifest(const std::filesystem::path& manifest) {
    std::ifstream f(manifest);
    if (!f) throw ManifestError("cannot read manifest " + manifest.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
        throw ManifestError("manifest needs an \"entries\" array");
    std::vector<CorpusEntry> out;
    for (const auto& e : j["entries"]) {
        CorpusEntry c;
        try {
            c.name = e.at("name").get<std::string>();
            c.bytecode = manifest.parent_path() / e.at("bytecode").get<std::string>();
            std::string label = e.at("label").get<std::string>();
            c.vclass = e.at("class").get<std::string>();
            if (label != "vulnerable" && label != "safe") throw ManifestError("bad label '" + label + "'");
            c.label = label == "vulnerable" ? Label::Vulnerable : Label::Safe;
        } catch (const nlohmann::json::exception& ex) {
            throw ManifestError(std::string("malformed manifest entry: ") + ex.what());
        }
        auto it = kClassLabel.find(c.vclass);
        if (it == kClassLabel.end()) throw ManifestError("unknown class '" + c.vclass + "' for " + c.name);
        if (it->second != c.label) throw ManifestError("label of " + c.name + " contradicts class " + c.vclass);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

std::string outcome(const CorpusEntry& e, const Report& r) {
    if (r.error) return "Error";
    switch (r.verdict) {
        case VerdictKind::Vulnerable: return e.label == Label::Vulnerable ? "TP" : "FP";
        case VerdictKind::Safe: return e.label == Label::Safe ? "TN" : "FN";
        case VerdictKind::Timeout: return "Timeout";
        case VerdictKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

}  // namespace

CorpusSummary run_corpus(const std::vector<CorpusEntry>& entries, const CorpusOptions& options) {
    CorpusSummary s;
    s.entries.resize(entries.size());
    AnalyzeOptions ao = options.analyze;
    ao.timeout = options.timeout;
    ao.dot.reset();
    ao.dot_layers.reset();
    ao.smt2.reset();
    ao.json.reset();
    ao.ssa.reset();
    ao.keep_proof = false;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < entries.size();) {
            Report r;
            try {
                r = analyze(entries[i].bytecode, ao).report;
            } catch (const std::exception& e) {
                r.contract_id = entries[i].name;
                r.error = ReportError{"InternalError", e.what()};
            }
            s.entries[i] = EntryResult{entries[i], r, outcome(entries[i], r)};
        }
    };
    std::size_t n = std::max<std::size_t>(1, std::min(options.workers, entries.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& e : s.entries) {
        const std::string& o = e.outcome;
        if (o == "TP") ++s.tp;
        else if (o == "TN") ++s.tn;
        else if (o == "FP") ++s.fp;
        else if (o == "FN") ++s.fn;
        else if (o == "Timeout") ++s.timeout;
        else if (o == "Unknown") ++s.unknown;
        else ++s.error;
    }
    return s;
}

CorpusSummary run_corpus(const std::filesystem::path& manifest, const CorpusOptions& options) {
    return run_corpus(load_manifest(manifest), options);
}

std::string summary_text(const CorpusSummary& s) {
    std::ostringstream os;
    os << std::left << std::setw(32) << "entry" << std::setw(18) << "class" << std::setw(12) << "label"
       << std::setw(12) << "verdict" << std::setw(9) << "outcome" << "millis\n";
    for (const auto& e : s.entries)
        os << std::setw(32) << e.entry.name << std::setw(18) << e.entry.vclass << std::setw(12)
           << (e.entry.label == Label::Vulnerable ? "vulnerable" : "safe") << std::setw(12) << verdict_label(e.report)
           << std::setw(9) << e.outcome << e.report.analysis_millis << "\n";
    os << "\nTP " << s.tp << "  TN " << s.tn << "  FP " << s.fp << "  FN " << s.fn << "  Timeout " << s.timeout
       << "  Unknown " << s.unknown << "  Error " << s.error << "\n";
    return os.str();
}

std::string summary_json(const CorpusSummary& s) {
    nlohmann::ordered_json j;
    j["totals"] = {{"tp", s.tp},           {"tn", s.tn},           {"fp", s.fp},     {"fn", s.fn},
                   {"timeout", s.timeout}, {"unknown", s.unknown}, {"error", s.error}};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& e : s.entries)
        rows.push_back({{"name", e.entry.name},
                        {"class", e.entry.vclass},
                        {"label", e.entry.label == Label::Vulnerable ? "vulnerable" : "safe"},
                        {"verdict", verdict_label(e.report)},
                        {"outcome", e.outcome}});
    j["entries"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace ceihorn
