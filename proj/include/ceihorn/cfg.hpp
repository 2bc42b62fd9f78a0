#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ceihorn/bytecode.hpp"

namespace ceihorn {

using BlockId = std::uint32_t;

enum class Terminator { Jump, JumpI, Stop, Return, Revert, SelfDestruct, Invalid, Fallthrough };
std::string_view to_string(Terminator t);

struct BasicBlock {
    BlockId id = 0;
    std::size_t start = 0;
    std::vector<Instruction> instructions;
    Terminator terminator = Terminator::Fallthrough;
    /// Net stack growth across the block.
    int stack_delta = 0;
    /// Entry depth needed to run the block without underflow.
    int min_stack_in = 0;
    bool truncated = false;

    std::size_t last_offset() const { return instructions.back().offset; }
    std::size_t end_offset() const { return instructions.back().next_offset(); }
    bool starts_with_jumpdest() const { return instructions.front().opcode == Opcode::JUMPDEST; }
    /// Blocks are split after external calls so the call status can be observed at a block exit.
    bool ends_in_call() const { return is_external_call(instructions.back().opcode); }
};

enum class EdgeKind { JumpConst, JumpReturn, BranchTaken, BranchFall, Fallthrough };
std::string_view to_string(EdgeKind k);

struct Edge {
    BlockId src = 0;
    BlockId dst = 0;
    EdgeKind kind = EdgeKind::Fallthrough;
    auto operator<=>(const Edge&) const = default;
};

/// One slot of a block-local symbolic stack.
struct SymSlot {
    /// Set for constants.
    std::optional<u256> value;
    /// Set for caller-provided slots: index into the block's entry stack (0 = top).
    std::optional<int> entry_index;

    static SymSlot constant(u256 v) { return SymSlot{v, std::nullopt}; }
    static SymSlot entry(int k) { return SymSlot{std::nullopt, k}; }
    static SymSlot opaque() { return SymSlot{}; }
    bool is_const() const { return value.has_value(); }
    bool operator==(const SymSlot&) const = default;
};

class SymbolicStack {
  public:
    /// Top first.
    std::vector<SymSlot> slots;
    /// Count of caller-provided slots consumed so far.
    int underflow_depth = 0;

    void push(SymSlot s) { slots.insert(slots.begin(), std::move(s)); }
    SymSlot pop();
    /// Ensures at least `n` listed slots, pulling fresh caller slots from below.
    void materialize(std::size_t n);
    /// Slot `k` (0 = top) including the implicit caller region below the listed slots.
    SymSlot at(std::size_t k) const;
};

struct BlockEval {
    SymbolicStack exit;
    std::optional<SymSlot> jump_target;
    std::optional<SymSlot> condition;
};

/// Splits instructions at leaders: offset 0, every JUMPDEST, every instruction
/// after a terminator or after an external call.
std::vector<BasicBlock> partition_blocks(std::span<const Instruction> instructions);

/// Symbolically runs one block, folding ADD/SUB/MUL/AND/OR over constants.
BlockEval eval_block(const BasicBlock& block, SymbolicStack entry = {});

/// A resolved internal call: `caller` jumps to `callee` having pushed the return
/// address that `return_block` later jumps to (`return_site`).
struct CallSite {
    BlockId caller = 0;
    BlockId callee = 0;
    BlockId return_block = 0;
    BlockId return_site = 0;
    auto operator<=>(const CallSite&) const = default;
};

struct Cfg {
    std::map<BlockId, BasicBlock> blocks;
    std::set<Edge> edges;
    BlockId entry = 0;
    std::set<CallSite> calls;
    std::set<BlockId> unresolved;
    std::set<BlockId> invalid_jump;
    std::vector<std::string> warnings;

    std::vector<Edge> out_edges(BlockId b) const;
    std::vector<Edge> in_edges(BlockId b) const;
    std::optional<BlockId> block_at(std::size_t offset) const;
};

struct RecoveryLimits {
    /// Distinct entry-stack shapes explored per block before further shapes are dropped.
    std::size_t max_contexts_per_block = 64;
    std::size_t max_path_length = 4096;
};

/// Recursive-descent recovery from the block at offset 0. Dynamic jump targets
/// are resolved by walking the path stack back to the frame that pushed them.
Cfg recover_cfg(const std::vector<BasicBlock>& blocks, const RecoveryLimits& limits = {});

/// Convenience: disassemble + partition + recover.
Cfg build_cfg(std::span<const std::uint8_t> code);

struct DotStyle {
    std::set<BlockId> entries;
    std::set<BlockId> exits;
};

std::string block_label(const BasicBlock& b);

/// Deterministic Graphviz rendering. Entries are filled green, exits purple.
std::string emit_dot(const Cfg& cfg, const DotStyle& style = {});

}  // namespace ceihorn
