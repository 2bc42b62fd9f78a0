#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ceihorn/cfg.hpp"

namespace ceihorn {

/// Blocks of one function, in original CFG ids.
struct FunctionInfo {
    int id = 0;
    BlockId entry = 0;
    std::set<BlockId> blocks;
    std::set<BlockId> exits;
};

/// Function 0 is the external dispatcher rooted at offset 0.
struct FunctionPartition {
    std::vector<FunctionInfo> functions;
};

FunctionPartition detect_functions(const Cfg& cfg);

struct FunctionLayer {
    int function_id = 0;
    BlockId entry = 0;
    std::set<BlockId> exits;
    std::set<BlockId> blocks;
    /// Cloned block id -> original CFG block id. Blocks keeping their original id are not listed.
    std::map<BlockId, BlockId> clone_map;
};

/// A CFG whose blocks may be per-layer clones of the recovered blocks.
struct LayeredCfg {
    std::map<BlockId, BasicBlock> blocks;
    std::set<Edge> edges;
    BlockId entry = 0;
    std::vector<FunctionLayer> layers;
    /// Calls that still cross layers.
    std::set<CallSite> calls;
    /// Every block id -> original CFG block id.
    std::map<BlockId, BlockId> origin;
    std::map<BlockId, int> layer_of;
    std::set<BlockId> unresolved;
    std::set<BlockId> invalid_jump;

    BlockId original(BlockId id) const { return origin.at(id); }
    std::vector<Edge> out_edges(BlockId b) const;
    const FunctionLayer* layer(int function_id) const;
    /// Edges that connect a call site to a callee entry or a callee exit to a return site.
    bool is_call_edge(const Edge& e) const;
    bool is_return_edge(const Edge& e) const;
};

/// Clones blocks shared by several functions so every layer owns its blocks.
LayeredCfg layer_functions(const Cfg& cfg, const FunctionPartition& partition);

/// The recovered CFG as a single layer, for runs with optimizations off.
LayeredCfg single_layer(const Cfg& cfg);

struct InlineOptions {
    std::size_t threshold = 3;
};

/// Inlines callees with at most `threshold` blocks or exactly one call site,
/// to fixpoint. Functions on a call-graph cycle are never inlined.
LayeredCfg inline_functions(LayeredCfg layered, const InlineOptions& options = {});

/// Layered diagram: one cluster per layer, entries green, exits purple.
std::string emit_layers_dot(const LayeredCfg& layered);

}  // namespace ceihorn
