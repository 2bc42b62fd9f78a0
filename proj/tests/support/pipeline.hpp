#pragma once

// Bytecode to clause system, keeping every intermediate alive.

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "ceihorn/assembler.hpp"
#include "ceihorn/cfgopt.hpp"
#include "ceihorn/chc.hpp"
#include "ceihorn/typeinfer.hpp"

namespace oracle {

struct Pipeline {
    ceihorn::Bytes code;
    ceihorn::Cfg cfg;
    ceihorn::LayeredCfg layered;
    ceihorn::SsaForm ssa;
    ceihorn::DomainAssignment domains;
    std::unique_ptr<ceihorn::Encoding> enc;
    ceihorn::ChcSystem sys;

    explicit Pipeline(ceihorn::Bytes bytes, bool optimize = true, ceihorn::EncodeOptions options = {})
        : code(std::move(bytes)) {
        using namespace ceihorn;
        cfg = build_cfg(code);
        layered = optimize ? inline_functions(layer_functions(cfg, detect_functions(cfg))) : single_layer(cfg);
        ssa = build_ssa(layered);
        domains = infer_types(ssa, layered);
        enc = std::make_unique<Encoding>(layered, ssa, domains, options);
        sys = encode(*enc);
    }
    explicit Pipeline(const std::string& source, bool optimize = true)
        : Pipeline(ceihorn::assemble(source), optimize) {}

    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;
};

struct CorpusFile {
    std::string name;
    ceihorn::Bytes code;
};

/// The .hex files of the in-repo corpus, by name.
inline std::vector<CorpusFile> corpus_files() {
    std::vector<CorpusFile> out;
    for (const auto& f : std::filesystem::directory_iterator(std::string(CEIHORN_SOURCE_DIR) + "/corpus")) {
        if (f.path().extension() != ".hex") continue;
        std::ifstream in(f.path());
        std::string text((std::istreambuf_iterator<char>(in)), {});
        out.push_back({f.path().stem().string(), ceihorn::parse_hex(text)});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

}  // namespace oracle
