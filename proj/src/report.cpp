#include "ceihorn/report.hpp"

#include "json.hpp"

namespace ceihorn {

std::string verdict_label(const Report& r) {
    return r.error ? "Error" : std::string(to_string(r.verdict));
}

std::string to_json(const Report& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["contract_id"] = r.contract_id;
    j["verdict"] = verdict_label(r);
    j["analysis_millis"] = r.analysis_millis;
    j["cfg_stats"] = {{"blocks", r.cfg.blocks},
                      {"edges", r.cfg.edges},
                      {"layers", r.cfg.layers},
                      {"unresolved_jumps", r.cfg.unresolved_jumps},
                      {"encoded_blocks", r.cfg.encoded_blocks},
                      {"encoded_edges", r.cfg.encoded_edges}};
    j["clause_stats"] = {{"init", r.clauses.init},         {"inv_v", r.clauses.inv_v},
                         {"inv_e", r.clauses.inv_e},       {"inv_status", r.clauses.inv_status},
                         {"inv_safe", r.clauses.inv_safe}, {"inv_error", r.clauses.inv_error}};
    if (r.path) {
        ordered_json steps = ordered_json::array();
        for (const auto& s : r.path->steps)
            steps.push_back({{"transaction", s.transaction},
                             {"block", s.block},
                             {"pc_begin", s.pc_begin},
                             {"pc_end", s.pc_end},
                             {"event", s.event}});
        ordered_json p;
        p["reentry_count"] = r.path->reentry_count;
        p["replayed"] = r.path->replayed ? ordered_json(*r.path->replayed) : ordered_json(nullptr);
        p["steps"] = steps;
        j["path"] = p;
    } else {
        j["path"] = nullptr;
    }
    j["warnings"] = r.warnings;
    if (r.error) j["error"] = {{"kind", r.error->kind}, {"message", r.error->message}};
    else j["error"] = nullptr;
    return j.dump(2) + "\n";
}

}  // namespace ceihorn
