#include "ceihorn/cfg.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace ceihorn {

std::string_view to_string(Terminator t) {
    switch (t) {
        case Terminator::Jump: return "JUMP";
        case Terminator::JumpI: return "JUMPI";
        case Terminator::Stop: return "STOP";
        case Terminator::Return: return "RETURN";
        case Terminator::Revert: return "REVERT";
        case Terminator::SelfDestruct: return "SELFDESTRUCT";
        case Terminator::Invalid: return "INVALID";
        case Terminator::Fallthrough: return "FALLTHROUGH";
    }
    return "?";
}

std::string_view to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::JumpConst: return "jump";
        case EdgeKind::JumpReturn: return "return";
        case EdgeKind::BranchTaken: return "taken";
        case EdgeKind::BranchFall: return "fall";
        case EdgeKind::Fallthrough: return "fallthrough";
    }
    return "?";
}

SymSlot SymbolicStack::pop() {
    materialize(1);
    SymSlot s = slots.front();
    slots.erase(slots.begin());
    return s;
}

void SymbolicStack::materialize(std::size_t n) {
    while (slots.size() < n) slots.push_back(SymSlot::entry(underflow_depth++));
}

SymSlot SymbolicStack::at(std::size_t k) const {
    if (k < slots.size()) return slots[k];
    return SymSlot::entry(underflow_depth + static_cast<int>(k - slots.size()));
}

namespace {

Terminator terminator_of(const Instruction& ins) {
    switch (ins.opcode) {
        case Opcode::JUMP: return Terminator::Jump;
        case Opcode::JUMPI: return Terminator::JumpI;
        case Opcode::STOP: return Terminator::Stop;
        case Opcode::RETURN: return Terminator::Return;
        case Opcode::REVERT: return Terminator::Revert;
        case Opcode::SELFDESTRUCT: return Terminator::SelfDestruct;
        case Opcode::INVALID: return Terminator::Invalid;
        default: return Terminator::Fallthrough;
    }
}

void finish_block(BasicBlock& b, bool is_last) {
    const auto& last = b.instructions.back();
    b.terminator = terminator_of(last);
    if (last.truncated) {
        b.truncated = true;
        b.terminator = Terminator::Invalid;
    } else if (b.terminator == Terminator::Fallthrough && is_last && !b.ends_in_call()) {
        // Running off the end of code halts like STOP.
        b.terminator = Terminator::Stop;
    }
    int depth = 0;
    int lowest = 0;
    for (const auto& ins : b.instructions) {
        auto eff = stack_effect(ins.opcode);
        lowest = std::min(lowest, depth - eff.pops);
        depth += eff.pushes - eff.pops;
    }
    b.stack_delta = depth;
    b.min_stack_in = -lowest;
}

}  // namespace

std::vector<BasicBlock> partition_blocks(std::span<const Instruction> instructions) {
    std::vector<BasicBlock> blocks;
    bool leader = true;
    for (const auto& ins : instructions) {
        if (ins.opcode == Opcode::JUMPDEST) leader = true;
        if (leader) {
            if (!blocks.empty()) finish_block(blocks.back(), false);
            BasicBlock b;
            b.id = static_cast<BlockId>(blocks.size());
            b.start = ins.offset;
            blocks.push_back(std::move(b));
            leader = false;
        }
        blocks.back().instructions.push_back(ins);
        if (is_terminator(ins.opcode) || is_external_call(ins.opcode) || ins.truncated) leader = true;
    }
    if (!blocks.empty()) finish_block(blocks.back(), true);
    return blocks;
}

BlockEval eval_block(const BasicBlock& block, SymbolicStack entry) {
    BlockEval out;
    SymbolicStack& st = entry;
    for (const auto& ins : block.instructions) {
        Opcode op = ins.opcode;
        if (ins.operand) {
            st.push(SymSlot::constant(*ins.operand));
            continue;
        }
        if (is_dup(op)) {
            auto n = static_cast<std::size_t>(dup_index(op));
            st.materialize(n);
            st.push(st.slots[n - 1]);
            continue;
        }
        if (is_swap(op)) {
            auto n = static_cast<std::size_t>(swap_index(op));
            st.materialize(n + 1);
            std::swap(st.slots[0], st.slots[n]);
            continue;
        }
        switch (op) {
            case Opcode::JUMP:
                out.jump_target = st.pop();
                continue;
            case Opcode::JUMPI:
                out.jump_target = st.pop();
                out.condition = st.pop();
                continue;
            case Opcode::PC:
                st.push(SymSlot::constant(ins.offset));
                continue;
            case Opcode::ADD:
            case Opcode::SUB:
            case Opcode::MUL:
            case Opcode::AND:
            case Opcode::OR: {
                SymSlot a = st.pop();
                SymSlot b = st.pop();
                if (a.is_const() && b.is_const()) {
                    u256 r = op == Opcode::ADD   ? *a.value + *b.value
                             : op == Opcode::SUB ? *a.value - *b.value
                             : op == Opcode::MUL ? *a.value * *b.value
                             : op == Opcode::AND ? (*a.value & *b.value)
                                                 : (*a.value | *b.value);
                    st.push(SymSlot::constant(r));
                } else {
                    st.push(SymSlot::opaque());
                }
                continue;
            }
            default: {
                auto eff = stack_effect(op);
                for (int i = 0; i < eff.pops; ++i) st.pop();
                for (int i = 0; i < eff.pushes; ++i) st.push(SymSlot::opaque());
            }
        }
    }
    out.exit = std::move(entry);
    return out;
}

std::vector<Edge> Cfg::out_edges(BlockId b) const {
    std::vector<Edge> out;
    for (auto it = edges.lower_bound(Edge{b, 0, EdgeKind::JumpConst}); it != edges.end() && it->src == b; ++it)
        out.push_back(*it);
    return out;
}

std::vector<Edge> Cfg::in_edges(BlockId b) const {
    std::vector<Edge> out;
    for (const auto& e : edges)
        if (e.dst == b) out.push_back(e);
    return out;
}

std::optional<BlockId> Cfg::block_at(std::size_t offset) const {
    for (const auto& [id, b] : blocks)
        if (b.start == offset) return id;
    return std::nullopt;
}

namespace {

/// Stack contents composed along the current path: top first, nullopt = runtime value.
using ComposedStack = std::vector<std::optional<u256>>;

struct Frame {
    BlockId block = 0;
    std::optional<EdgeKind> entered_via;
    SymbolicStack exit;
    ComposedStack composed_exit;
};

class Recovery {
  public:
    Recovery(const std::vector<BasicBlock>& blocks, const RecoveryLimits& limits)
        : blocks_(blocks), limits_(limits) {
        for (const auto& b : blocks_) by_offset_[b.start] = b.id;
    }

    Cfg run() {
        if (blocks_.empty()) return cfg_;
        cfg_.entry = blocks_.front().id;
        visit(cfg_.entry, std::nullopt, ComposedStack{});
        for (BlockId id : reached_) cfg_.blocks.emplace(id, blocks_[id]);
        return std::move(cfg_);
    }

  private:
    struct Resolution {
        u256 value;
        std::size_t supplier;  // index into path_
    };

    std::optional<Resolution> resolve(int k) const {
        // Walk the path stack downward from the frame below the current one.
        int idx = k;
        for (std::size_t f = path_.size() - 1; f-- > 0;) {
            const SymbolicStack& ex = path_[f].exit;
            if (static_cast<std::size_t>(idx) < ex.slots.size()) {
                const SymSlot& s = ex.slots[idx];
                if (s.is_const()) return Resolution{*s.value, f};
                if (!s.entry_index) return std::nullopt;
                idx = *s.entry_index;
            } else {
                idx = ex.underflow_depth + (idx - static_cast<int>(ex.slots.size()));
            }
        }
        return std::nullopt;
    }

    static ComposedStack compose(const SymbolicStack& exit, const ComposedStack& entry) {
        ComposedStack out;
        out.reserve(exit.slots.size() + entry.size());
        for (const auto& s : exit.slots) {
            if (s.is_const()) out.push_back(s.value);
            else if (s.entry_index && static_cast<std::size_t>(*s.entry_index) < entry.size())
                out.push_back(entry[*s.entry_index]);
            else out.push_back(std::nullopt);
        }
        for (std::size_t i = static_cast<std::size_t>(exit.underflow_depth); i < entry.size(); ++i)
            out.push_back(entry[i]);
        return out;
    }

    std::optional<BlockId> jumpdest_at(const u256& target) const {
        if (target > u256(std::numeric_limits<std::size_t>::max())) return std::nullopt;
        auto it = by_offset_.find(static_cast<std::size_t>(target));
        if (it == by_offset_.end() || !blocks_[it->second].starts_with_jumpdest()) return std::nullopt;
        return it->second;
    }

    void visit(BlockId id, std::optional<EdgeKind> via, const ComposedStack& entry) {
        reached_.insert(id);
        auto& seen = contexts_[id];
        if (seen.contains(entry)) return;
        if (seen.size() >= limits_.max_contexts_per_block || path_.size() >= limits_.max_path_length) {
            if (!capped_.contains(id)) {
                capped_.insert(id);
                cfg_.warnings.push_back("context limit reached at block " + std::to_string(id));
            }
            return;
        }
        seen.insert(entry);

        const BasicBlock& b = blocks_[id];
        BlockEval ev = eval_block(b);
        path_.push_back(Frame{id, via, ev.exit, compose(ev.exit, entry)});
        const ComposedStack composed = path_.back().composed_exit;

        auto follow_jump = [&](const SymSlot& target, EdgeKind const_kind) {
            std::optional<u256> value;
            EdgeKind kind = const_kind;
            std::optional<std::size_t> supplier;
            if (target.is_const()) {
                value = target.value;
            } else if (target.entry_index) {
                if (auto r = resolve(*target.entry_index)) {
                    value = r->value;
                    supplier = r->supplier;
                    if (const_kind == EdgeKind::JumpConst) kind = EdgeKind::JumpReturn;
                }
            }
            if (!value) {
                cfg_.unresolved.insert(id);
                return;
            }
            auto dst = jumpdest_at(*value);
            if (!dst) {
                cfg_.invalid_jump.insert(id);
                return;
            }
            cfg_.edges.insert(Edge{id, *dst, kind});
            if (supplier && *supplier + 1 < path_.size()) {
                const Frame& callee = path_[*supplier + 1];
                if (callee.entered_via == EdgeKind::JumpConst || callee.entered_via == EdgeKind::BranchTaken)
                    cfg_.calls.insert(CallSite{path_[*supplier].block, callee.block, id, *dst});
            }
            visit(*dst, kind, composed);
        };

        auto fall_to_next = [&](EdgeKind kind) {
            if (id + 1 < blocks_.size()) {
                cfg_.edges.insert(Edge{id, id + 1, kind});
                visit(id + 1, kind, composed);
            }
        };

        switch (b.terminator) {
            case Terminator::Jump:
                follow_jump(*ev.jump_target, EdgeKind::JumpConst);
                break;
            case Terminator::JumpI:
                follow_jump(*ev.jump_target, EdgeKind::BranchTaken);
                fall_to_next(EdgeKind::BranchFall);
                break;
            case Terminator::Fallthrough:
                fall_to_next(EdgeKind::Fallthrough);
                break;
            default:
                break;
        }
        path_.pop_back();
    }

    const std::vector<BasicBlock>& blocks_;
    RecoveryLimits limits_;
    std::map<std::size_t, BlockId> by_offset_;
    std::map<BlockId, std::set<ComposedStack>> contexts_;
    std::set<BlockId> reached_;
    std::set<BlockId> capped_;
    std::vector<Frame> path_;
    Cfg cfg_;
};

}  // namespace

Cfg recover_cfg(const std::vector<BasicBlock>& blocks, const RecoveryLimits& limits) {
    return Recovery(blocks, limits).run();
}

Cfg build_cfg(std::span<const std::uint8_t> code) {
    auto instrs = disassemble(code);
    return recover_cfg(partition_blocks(instrs));
}

std::string block_label(const BasicBlock& b) {
    std::ostringstream os;
    os << 'b' << b.id << " [0x" << std::hex << b.start << "-0x" << b.last_offset() << std::dec << "] "
       << (b.ends_in_call() ? std::string_view{mnemonic(b.instructions.back().opcode)} : to_string(b.terminator));
    return os.str();
}

std::string emit_dot(const Cfg& cfg, const DotStyle& style) {
    std::ostringstream os;
    os << "digraph cfg {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (const auto& [id, b] : cfg.blocks) {
        os << "  b" << id << " [label=\"" << block_label(b) << '"';
        if (style.entries.contains(id)) os << ", style=filled, fillcolor=\"palegreen\"";
        else if (style.exits.contains(id)) os << ", style=filled, fillcolor=\"plum\"";
        os << "];\n";
    }
    for (const auto& e : cfg.edges)
        os << "  b" << e.src << " -> b" << e.dst << " [label=\"" << to_string(e.kind) << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace ceihorn
