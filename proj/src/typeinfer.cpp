#include "ceihorn/typeinfer.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace ceihorn {

std::string_view to_string(Domain d) { return d == Domain::Nat ? "Nat" : "BV256"; }

std::size_t SsaForm::def_count() const {
    std::size_t n = 0;
    for (const auto& v : vars)
        if (v.instr_index >= 0) ++n;
    return n;
}

namespace {

std::optional<u256> fold(Opcode op, const std::vector<std::optional<u256>>& a) {
    for (const auto& x : a)
        if (!x) return std::nullopt;
    switch (op) {
        case Opcode::ADD: return *a[0] + *a[1];
        case Opcode::SUB: return *a[0] - *a[1];
        case Opcode::MUL: return *a[0] * *a[1];
        case Opcode::AND: return *a[0] & *a[1];
        case Opcode::OR: return *a[0] | *a[1];
        case Opcode::XOR: return *a[0] ^ *a[1];
        case Opcode::NOT: return ~*a[0];
        case Opcode::EQ: return u256(*a[0] == *a[1] ? 1 : 0);
        case Opcode::LT: return u256(*a[0] < *a[1] ? 1 : 0);
        case Opcode::GT: return u256(*a[0] > *a[1] ? 1 : 0);
        case Opcode::ISZERO: return u256(*a[0] == 0 ? 1 : 0);
        case Opcode::SHL: return *a[0] >= 256 ? u256(0) : u256(*a[1] << static_cast<unsigned>(*a[0]));
        case Opcode::SHR: return *a[0] >= 256 ? u256(0) : u256(*a[1] >> static_cast<unsigned>(*a[0]));
        default: return std::nullopt;
    }
}

}  // namespace

SsaForm build_ssa(const LayeredCfg& cfg) {
    SsaForm ssa;
    // Entry depths by propagation from the entry block.
    std::map<BlockId, int> depth;
    std::map<BlockId, bool> conflict;
    std::deque<BlockId> work;
    if (!cfg.blocks.empty()) {
        depth[cfg.entry] = 0;
        work.push_back(cfg.entry);
    }
    while (!work.empty()) {
        BlockId b = work.front();
        work.pop_front();
        const auto& bb = cfg.blocks.at(b);
        int d = depth.at(b);
        if (bb.min_stack_in > d) continue;  // underflows, no successors
        int out = d + bb.stack_delta;
        for (const auto& e : cfg.out_edges(b)) {
            auto it = depth.find(e.dst);
            if (it == depth.end()) {
                depth[e.dst] = out;
                work.push_back(e.dst);
            } else if (it->second != out) {
                conflict[e.dst] = true;
            }
        }
    }

    auto fresh = [&](BlockId b, int instr, int slot) {
        VarId id = static_cast<VarId>(ssa.vars.size());
        ssa.vars.push_back(SsaVar{id, b, instr, slot, std::nullopt});
        return id;
    };

    for (const auto& [id, bb] : cfg.blocks) {
        SsaBlock sb;
        sb.id = id;
        auto dit = depth.find(id);
        sb.reachable = dit != depth.end();
        sb.depth_conflict = conflict[id];
        if (sb.depth_conflict)
            ssa.warnings.push_back("StackDepthConflict: block " + std::to_string(id) + " excluded from encoding");
        sb.entry_depth = sb.reachable ? dit->second : 0;
        std::vector<VarId> stack;  // top first
        for (int i = 0; i < sb.entry_depth; ++i) {
            VarId v = fresh(id, -1, i);
            sb.params.push_back(v);
            stack.push_back(v);
        }
        for (std::size_t idx = 0; idx < bb.instructions.size(); ++idx) {
            const Instruction& ins = bb.instructions[idx];
            Opcode op = ins.opcode;
            SsaInstr si{ins, {}, {}};
            auto eff = stack_effect(op);
            int needed = is_dup(op) ? dup_index(op) : is_swap(op) ? swap_index(op) + 1 : eff.pops;
            if (static_cast<int>(stack.size()) < needed) {
                sb.underflow = true;
                sb.instrs.push_back(std::move(si));
                break;
            }
            if (is_dup(op)) {
                stack.insert(stack.begin(), stack[dup_index(op) - 1]);
            } else if (is_swap(op)) {
                std::swap(stack[0], stack[swap_index(op)]);
            } else if (op == Opcode::POP) {
                si.operands.push_back(stack.front());
                stack.erase(stack.begin());
            } else {
                std::vector<std::optional<u256>> consts;
                for (int i = 0; i < eff.pops; ++i) {
                    si.operands.push_back(stack.front());
                    consts.push_back(ssa.vars[stack.front()].constant);
                    stack.erase(stack.begin());
                }
                for (int i = 0; i < eff.pushes; ++i) {
                    VarId v = fresh(id, static_cast<int>(idx), i);
                    if (ins.operand) ssa.vars[v].constant = *ins.operand;
                    else if (op == Opcode::PC) ssa.vars[v].constant = u256(ins.offset);
                    else ssa.vars[v].constant = fold(op, consts);
                    si.results.push_back(v);
                }
                for (auto it = si.results.rbegin(); it != si.results.rend(); ++it) stack.insert(stack.begin(), *it);
                if (op == Opcode::JUMP) sb.jump_target = si.operands[0];
                if (op == Opcode::JUMPI) {
                    sb.jump_target = si.operands[0];
                    sb.condition = si.operands[1];
                }
                if (is_external_call(op)) sb.call_index = sb.instrs.size();
            }
            sb.instrs.push_back(std::move(si));
        }
        sb.exit_stack = stack;
        ssa.blocks.emplace(id, std::move(sb));
    }
    return ssa;
}

namespace {

DomainAssignment infer_from(const SsaForm& ssa, const LayeredCfg& cfg, std::vector<Domain> dom) {
    bool changed = true;
    while (changed) {
        changed = false;
        auto raise = [&](VarId v) {
            if (dom[v] != Domain::BV256) {
                dom[v] = Domain::BV256;
                changed = true;
            }
        };
        for (const auto& [id, sb] : ssa.blocks) {
            for (const auto& si : sb.instrs) {
                if (!is_bitwise(si.ins.opcode)) continue;
                for (VarId v : si.operands) raise(v);
                for (VarId v : si.results) raise(v);
            }
        }
    }

    DomainAssignment out;
    out.of_var = std::move(dom);
    for (const auto& [id, sb] : ssa.blocks) {
        for (std::size_t i = 0; i < sb.instrs.size(); ++i) {
            const auto& si = sb.instrs[i];
            if (is_bitwise(si.ins.opcode) || si.ins.opcode == Opcode::POP) continue;
            for (VarId v : si.operands)
                if (out.of_var[v] == Domain::BV256)
                    out.conversions.push_back(Conversion{v, Domain::BV256, Domain::Nat, std::pair{id, i}, std::nullopt});
        }
    }
    for (const auto& e : cfg.edges) {
        auto s = ssa.blocks.find(e.src);
        auto d = ssa.blocks.find(e.dst);
        if (s == ssa.blocks.end() || d == ssa.blocks.end()) continue;
        std::size_t n = std::min(s->second.exit_stack.size(), d->second.params.size());
        for (std::size_t i = 0; i < n; ++i) {
            VarId from = s->second.exit_stack[i];
            VarId to = d->second.params[i];
            if (out.of_var[from] != out.of_var[to])
                out.conversions.push_back(Conversion{from, out.of_var[from], out.of_var[to], std::nullopt, to});
        }
    }
    std::sort(out.conversions.begin(), out.conversions.end());
    out.conversions.erase(std::unique(out.conversions.begin(), out.conversions.end()), out.conversions.end());
    return out;
}

}  // namespace

DomainAssignment infer_types(const SsaForm& ssa, const LayeredCfg& cfg) {
    return infer_from(ssa, cfg, std::vector<Domain>(ssa.vars.size(), Domain::Nat));
}

DomainAssignment infer_types(const SsaForm& ssa, const LayeredCfg& cfg, const DomainAssignment& seed) {
    return infer_from(ssa, cfg, seed.of_var);
}

std::string dump_ssa(const SsaForm& ssa, const DomainAssignment& domains) {
    std::ostringstream os;
    auto name = [&](VarId v) { return "v" + std::to_string(v) + ":" + std::string(to_string(domains[v])); };
    for (const auto& [id, sb] : ssa.blocks) {
        if (!sb.reachable) continue;
        os << "block b" << id << " depth " << sb.entry_depth << (sb.depth_conflict ? " CONFLICT" : "")
           << (sb.underflow ? " UNDERFLOW" : "") << "\n  params:";
        for (VarId v : sb.params) os << ' ' << name(v);
        os << '\n';
        for (const auto& si : sb.instrs) {
            os << "  ";
            for (std::size_t i = 0; i < si.results.size(); ++i) os << (i ? ", " : "") << name(si.results[i]);
            if (!si.results.empty()) os << " = ";
            os << mnemonic(si.ins.opcode);
            if (si.ins.operand) os << " 0x" << std::hex << *si.ins.operand << std::dec;
            for (VarId v : si.operands) os << ' ' << name(v);
            os << '\n';
        }
        os << "  exit:";
        for (VarId v : sb.exit_stack) os << ' ' << name(v);
        os << '\n';
    }
    for (const auto& c : domains.conversions) {
        os << "convert v" << c.var << ' ' << to_string(c.from) << "->" << to_string(c.to);
        if (c.use) os << " at b" << c.use->first << '#' << c.use->second;
        if (c.param) os << " into v" << *c.param;
        os << '\n';
    }
    return os.str();
}

}  // namespace ceihorn
