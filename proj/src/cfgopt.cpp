#include "ceihorn/cfgopt.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace ceihorn {

namespace {

bool is_halting_block(const BasicBlock& b) {
    return b.terminator != Terminator::Jump && b.terminator != Terminator::JumpI &&
           b.terminator != Terminator::Fallthrough;
}

}  // namespace

FunctionPartition detect_functions(const Cfg& cfg) {
    FunctionPartition part;
    if (cfg.blocks.empty()) return part;

    std::set<std::pair<BlockId, BlockId>> call_edges, return_edges;
    std::map<BlockId, std::set<BlockId>> summary;  // caller block -> return sites
    std::set<BlockId> callees;
    for (const auto& cs : cfg.calls) {
        call_edges.emplace(cs.caller, cs.callee);
        return_edges.emplace(cs.return_block, cs.return_site);
        summary[cs.caller].insert(cs.return_site);
        if (cs.callee != cfg.entry) callees.insert(cs.callee);
    }

    std::vector<BlockId> entries{cfg.entry};
    entries.insert(entries.end(), callees.begin(), callees.end());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        FunctionInfo f;
        f.id = static_cast<int>(i);
        f.entry = entries[i];
        std::deque<BlockId> work{f.entry};
        while (!work.empty()) {
            BlockId b = work.front();
            work.pop_front();
            if (!f.blocks.insert(b).second) continue;
            for (const auto& e : cfg.out_edges(b)) {
                if (call_edges.contains({e.src, e.dst}) || return_edges.contains({e.src, e.dst})) continue;
                work.push_back(e.dst);
            }
            if (auto s = summary.find(b); s != summary.end())
                for (BlockId r : s->second) work.push_back(r);
        }
        for (BlockId b : f.blocks) {
            bool returns = std::any_of(cfg.calls.begin(), cfg.calls.end(), [&](const CallSite& cs) {
                return cs.callee == f.entry && cs.return_block == b;
            });
            if (returns || is_halting_block(cfg.blocks.at(b))) f.exits.insert(b);
        }
        part.functions.push_back(std::move(f));
    }
    return part;
}

std::vector<Edge> LayeredCfg::out_edges(BlockId b) const {
    std::vector<Edge> out;
    for (auto it = edges.lower_bound(Edge{b, 0, EdgeKind::JumpConst}); it != edges.end() && it->src == b; ++it)
        out.push_back(*it);
    return out;
}

const FunctionLayer* LayeredCfg::layer(int function_id) const {
    for (const auto& l : layers)
        if (l.function_id == function_id) return &l;
    return nullptr;
}

bool LayeredCfg::is_call_edge(const Edge& e) const {
    return std::any_of(calls.begin(), calls.end(),
                       [&](const CallSite& cs) { return cs.caller == e.src && cs.callee == e.dst; });
}

bool LayeredCfg::is_return_edge(const Edge& e) const {
    return std::any_of(calls.begin(), calls.end(), [&](const CallSite& cs) {
        return cs.return_block == e.src && cs.return_site == e.dst;
    });
}

LayeredCfg layer_functions(const Cfg& cfg, const FunctionPartition& partition) {
    LayeredCfg out;
    std::map<BlockId, int> owners;
    for (const auto& f : partition.functions)
        for (BlockId b : f.blocks) ++owners[b];

    BlockId next_id = cfg.blocks.empty() ? 0 : cfg.blocks.rbegin()->first + 1;
    std::map<std::pair<int, BlockId>, BlockId> nid;  // (function, original) -> layered id
    std::map<BlockId, int> function_of_entry;
    for (const auto& f : partition.functions) {
        function_of_entry[f.entry] = f.id;
        FunctionLayer layer;
        layer.function_id = f.id;
        for (BlockId b : f.blocks) {
            BlockId id = owners[b] == 1 ? b : next_id++;
            nid[{f.id, b}] = id;
            if (id != b) layer.clone_map[id] = b;
            BasicBlock copy = cfg.blocks.at(b);
            copy.id = id;
            out.blocks.emplace(id, std::move(copy));
            out.origin[id] = b;
            out.layer_of[id] = f.id;
            layer.blocks.insert(id);
            if (cfg.unresolved.contains(b)) out.unresolved.insert(id);
            if (cfg.invalid_jump.contains(b)) out.invalid_jump.insert(id);
        }
        layer.entry = nid.at({f.id, f.entry});
        for (BlockId b : f.exits) layer.exits.insert(nid.at({f.id, b}));
        out.layers.push_back(std::move(layer));
    }
    out.entry = cfg.blocks.empty() ? 0 : nid.at({0, cfg.entry});

    auto in_function = [&](int fid, BlockId b) { return nid.contains({fid, b}); };

    for (const auto& cs : cfg.calls) {
        int callee_fn = function_of_entry.at(cs.callee == cfg.entry ? cfg.entry : cs.callee);
        for (const auto& f : partition.functions) {
            if (!in_function(f.id, cs.caller)) continue;
            if (!in_function(f.id, cs.return_site) || !in_function(callee_fn, cs.return_block)) continue;
            CallSite lcs{nid.at({f.id, cs.caller}), nid.at({callee_fn, cs.callee}),
                         nid.at({callee_fn, cs.return_block}), nid.at({f.id, cs.return_site})};
            out.calls.insert(lcs);
        }
    }

    std::set<std::pair<BlockId, BlockId>> call_edges, return_edges;
    for (const auto& cs : cfg.calls) {
        call_edges.emplace(cs.caller, cs.callee);
        return_edges.emplace(cs.return_block, cs.return_site);
    }
    for (const auto& e : cfg.edges) {
        bool is_call = call_edges.contains({e.src, e.dst});
        bool is_ret = return_edges.contains({e.src, e.dst});
        if (is_call || is_ret) {
            for (const auto& lcs : out.calls) {
                if (is_call && out.origin.at(lcs.caller) == e.src && out.origin.at(lcs.callee) == e.dst)
                    out.edges.insert(Edge{lcs.caller, lcs.callee, e.kind});
                if (is_ret && out.origin.at(lcs.return_block) == e.src && out.origin.at(lcs.return_site) == e.dst)
                    out.edges.insert(Edge{lcs.return_block, lcs.return_site, e.kind});
            }
            continue;
        }
        for (const auto& f : partition.functions)
            if (in_function(f.id, e.src) && in_function(f.id, e.dst))
                out.edges.insert(Edge{nid.at({f.id, e.src}), nid.at({f.id, e.dst}), e.kind});
    }
    return out;
}

LayeredCfg single_layer(const Cfg& cfg) {
    LayeredCfg out;
    out.blocks = cfg.blocks;
    out.edges = cfg.edges;
    out.entry = cfg.entry;
    out.unresolved = cfg.unresolved;
    out.invalid_jump = cfg.invalid_jump;
    FunctionLayer layer;
    layer.function_id = 0;
    layer.entry = cfg.entry;
    for (const auto& [id, b] : cfg.blocks) {
        out.origin[id] = id;
        out.layer_of[id] = 0;
        layer.blocks.insert(id);
        if (is_halting_block(b)) layer.exits.insert(id);
    }
    out.layers.push_back(std::move(layer));
    return out;
}

namespace {

/// Functions reachable from themselves through calls.
std::set<int> recursive_functions(const LayeredCfg& g) {
    std::map<int, std::set<int>> calls;
    for (const auto& cs : g.calls) calls[g.layer_of.at(cs.caller)].insert(g.layer_of.at(cs.callee));
    std::set<int> out;
    for (const auto& [f, _] : calls) {
        std::set<int> seen;
        std::vector<int> work(calls[f].begin(), calls[f].end());
        while (!work.empty()) {
            int x = work.back();
            work.pop_back();
            if (x == f) {
                out.insert(f);
                break;
            }
            if (!seen.insert(x).second) continue;
            for (int y : calls[x]) work.push_back(y);
        }
    }
    return out;
}

FunctionLayer* find_layer(LayeredCfg& g, int fid) {
    for (auto& l : g.layers)
        if (l.function_id == fid) return &l;
    return nullptr;
}

void inline_one(LayeredCfg& g, int fid) {
    FunctionLayer callee = *find_layer(g, fid);
    BlockId next_id = g.blocks.rbegin()->first + 1;

    // Call sites grouped by (caller block, return site).
    std::map<std::pair<BlockId, BlockId>, std::vector<CallSite>> groups;
    for (const auto& cs : g.calls)
        if (cs.callee == callee.entry) groups[{cs.caller, cs.return_site}].push_back(cs);

    const std::set<CallSite> calls_before = g.calls;
    for (const auto& [key, sites] : groups) {
        auto [caller, ret] = key;
        int caller_fn = g.layer_of.at(caller);
        FunctionLayer* host = find_layer(g, caller_fn);
        std::map<BlockId, BlockId> copy;
        for (BlockId b : callee.blocks) {
            BlockId id = next_id++;
            copy[b] = id;
            BasicBlock nb = g.blocks.at(b);
            nb.id = id;
            g.blocks.emplace(id, std::move(nb));
            g.origin[id] = g.origin.at(b);
            g.layer_of[id] = caller_fn;
            host->blocks.insert(id);
            host->clone_map[id] = g.origin.at(b);
            if (g.unresolved.contains(b)) g.unresolved.insert(id);
            if (g.invalid_jump.contains(b)) g.invalid_jump.insert(id);
            if (is_halting_block(g.blocks.at(id))) host->exits.insert(id);
        }
        // Body edges.
        for (const auto& e : std::set<Edge>(g.edges)) {
            if (!callee.blocks.contains(e.src)) continue;
            if (callee.blocks.contains(e.dst)) {
                g.edges.insert(Edge{copy.at(e.src), copy.at(e.dst), e.kind});
            }
        }
        // Entry and return edges for this site.
        EdgeKind call_kind = EdgeKind::JumpConst;
        for (const auto& e : g.out_edges(caller))
            if (e.dst == callee.entry) call_kind = e.kind;
        g.edges.insert(Edge{caller, copy.at(callee.entry), call_kind});
        for (const auto& cs : sites) {
            g.edges.insert(Edge{copy.at(cs.return_block), ret, EdgeKind::JumpReturn});
            g.calls.erase(cs);
        }
        // Calls made from inside the body now originate from the copy.
        for (const auto& cs : calls_before) {
            if (!callee.blocks.contains(cs.caller) || cs.callee == callee.entry) continue;
            CallSite moved{copy.at(cs.caller), cs.callee, cs.return_block, copy.at(cs.return_site)};
            g.calls.insert(moved);
            for (const auto& e : g.out_edges(cs.caller))
                if (e.dst == cs.callee) g.edges.insert(Edge{moved.caller, cs.callee, e.kind});
            g.edges.insert(Edge{cs.return_block, moved.return_site, EdgeKind::JumpReturn});
        }
    }

    // Drop the callee layer: its blocks, their edges, calls originating in it,
    // and the call/return edges of the sites just inlined.
    for (auto it = g.edges.begin(); it != g.edges.end();) {
        bool touches = callee.blocks.contains(it->src) || callee.blocks.contains(it->dst);
        it = touches ? g.edges.erase(it) : std::next(it);
    }
    for (auto it = g.calls.begin(); it != g.calls.end();) {
        bool inside = callee.blocks.contains(it->caller) || callee.blocks.contains(it->return_site);
        it = inside ? g.calls.erase(it) : std::next(it);
    }
    for (BlockId b : callee.blocks) {
        g.blocks.erase(b);
        g.origin.erase(b);
        g.layer_of.erase(b);
        g.unresolved.erase(b);
        g.invalid_jump.erase(b);
    }
    std::erase_if(g.layers, [&](const FunctionLayer& l) { return l.function_id == fid; });
}

}  // namespace

LayeredCfg inline_functions(LayeredCfg g, const InlineOptions& options) {
    while (true) {
        auto recursive = recursive_functions(g);
        std::optional<int> pick;
        for (const auto& layer : g.layers) {
            if (layer.function_id == 0 || recursive.contains(layer.function_id)) continue;
            std::set<std::pair<BlockId, BlockId>> sites;
            for (const auto& cs : g.calls)
                if (cs.callee == layer.entry) sites.emplace(cs.caller, cs.return_site);
            if (sites.empty()) continue;
            if (layer.blocks.size() <= options.threshold || sites.size() == 1) {
                pick = layer.function_id;
                break;
            }
        }
        if (!pick) break;
        inline_one(g, *pick);
    }
    return g;
}

std::string emit_layers_dot(const LayeredCfg& g) {
    std::ostringstream os;
    os << "digraph layers {\n  compound=true;\n  node [shape=box, fontname=\"monospace\"];\n";
    for (const auto& layer : g.layers) {
        os << "  subgraph cluster_f" << layer.function_id << " {\n    label=\"function " << layer.function_id
           << "\";\n";
        for (BlockId id : layer.blocks) {
            const auto& b = g.blocks.at(id);
            os << "    b" << id << " [label=\"" << block_label(b);
            if (g.original(id) != id) os << " (from b" << g.original(id) << ')';
            os << '"';
            if (id == layer.entry) os << ", style=filled, fillcolor=\"palegreen\"";
            else if (layer.exits.contains(id)) os << ", style=filled, fillcolor=\"plum\"";
            os << "];\n";
        }
        os << "  }\n";
    }
    for (const auto& e : g.edges)
        os << "  b" << e.src << " -> b" << e.dst << " [label=\"" << to_string(e.kind) << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace ceihorn
