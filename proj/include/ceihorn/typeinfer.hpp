#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceihorn/cfgopt.hpp"

namespace ceihorn {

/// Abstract domain of an SSA variable. Both domains contain a top element,
/// realized at the constraint level as an unconstrained variable.
enum class Domain { Nat, BV256 };
std::string_view to_string(Domain d);

using VarId = std::uint32_t;

struct SsaVar {
    VarId id = 0;
    BlockId block = 0;
    /// -1 for block parameters.
    int instr_index = -1;
    /// Parameter position, or result position of the defining instruction.
    int result_slot = 0;
    std::optional<u256> constant;
};

struct SsaInstr {
    Instruction ins;
    /// Top first.
    std::vector<VarId> operands;
    std::vector<VarId> results;
};

struct SsaBlock {
    BlockId id = 0;
    int entry_depth = 0;
    /// Entry stack, top first.
    std::vector<VarId> params;
    std::vector<SsaInstr> instrs;
    /// Stack after the block, top first. JUMP/JUMPI operands are not part of it.
    std::vector<VarId> exit_stack;
    std::optional<VarId> jump_target;
    std::optional<VarId> condition;
    /// Index into `instrs` of the external call ending the block, if any.
    std::optional<std::size_t> call_index;
    /// Predecessors disagree on entry depth; the block is left out of the encoding.
    bool depth_conflict = false;
    /// The block pops below its entry stack and halts exceptionally.
    bool underflow = false;
    bool reachable = false;
};

class StackDepthConflict : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SsaForm {
    std::map<BlockId, SsaBlock> blocks;
    std::vector<SsaVar> vars;
    std::vector<std::string> warnings;

    const SsaVar& var(VarId v) const { return vars.at(v); }
    bool encodable(BlockId b) const {
        auto it = blocks.find(b);
        return it != blocks.end() && it->second.reachable && !it->second.depth_conflict;
    }
    std::size_t def_count() const;
};

/// Stack slots become SSA variables: block entry slots are parameters, every
/// value-producing instruction defines fresh results. Edges map the source
/// exit stack positionally onto the destination parameters.
SsaForm build_ssa(const LayeredCfg& cfg);

/// Where a value changes domain.
struct Conversion {
    VarId var = 0;
    Domain from = Domain::Nat;
    Domain to = Domain::BV256;
    /// Set for a use inside a block: (block, instruction index).
    std::optional<std::pair<BlockId, std::size_t>> use;
    /// Set for a crossing on an edge: destination parameter.
    std::optional<VarId> param;
    auto operator<=>(const Conversion&) const = default;
};

struct DomainAssignment {
    std::vector<Domain> of_var;
    std::vector<Conversion> conversions;

    Domain operator[](VarId v) const { return of_var.at(v); }
    bool operator==(const DomainAssignment&) const = default;
};

/// Least fixpoint of: operands and results of bitwise opcodes are BV256,
/// everything else Nat. Crossings between domains become conversion points.
DomainAssignment infer_types(const SsaForm& ssa, const LayeredCfg& cfg);

/// Seeds the fixpoint with a previous assignment (used to check stability).
DomainAssignment infer_types(const SsaForm& ssa, const LayeredCfg& cfg, const DomainAssignment& seed);

std::string dump_ssa(const SsaForm& ssa, const DomainAssignment& domains);

}  // namespace ceihorn
