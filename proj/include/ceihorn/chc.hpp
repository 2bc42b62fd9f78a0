#pragma once

#include <map>
#include <string>
#include <vector>

#include "ceihorn/horn.hpp"
#include "ceihorn/statemodel.hpp"
#include "ceihorn/typeinfer.hpp"

namespace ceihorn {

struct EncodeOptions {
    std::size_t max_reentry = 2;
    /// Constant storage slots tracked individually; the rest share one class.
    std::size_t max_tracked_slots = 31;
};

/// Everything the clause builders read. Built once per contract.
class Encoding {
  public:
    Encoding(const LayeredCfg& cfg, const SsaForm& ssa, const DomainAssignment& domains,
             const EncodeOptions& options = {});

    const LayeredCfg& cfg() const { return cfg_; }
    const SsaForm& ssa() const { return ssa_; }
    const DomainAssignment& domains() const { return domains_; }
    const EncodeOptions& options() const { return options_; }
    const ContextLayout& layout() const { return layout_; }

    /// Blocks that get predicates, in id order.
    const std::vector<BlockId>& blocks() const { return blocks_; }
    bool encoded(BlockId b) const;
    /// Edges whose endpoints are both encoded.
    std::vector<Edge> edges() const;

    std::string entry_pred(BlockId b) const;
    std::string exit_pred(BlockId b) const;
    Predicate entry_predicate(BlockId b) const;
    Predicate exit_predicate(BlockId b) const;

    Status exit_status(BlockId b) const;
    /// Constant slot -> read-flag index; the last flag is the shared class.
    const std::map<u256, std::size_t>& slot_classes() const { return slots_; }
    std::size_t slot_class(const std::optional<u256>& key) const;

    Sort sort_of(VarId v) const;
    Term var_term(VarId v) const;

  private:
    const LayeredCfg& cfg_;
    const SsaForm& ssa_;
    const DomainAssignment& domains_;
    EncodeOptions options_;
    ContextLayout layout_;
    std::vector<BlockId> blocks_;
    std::map<u256, std::size_t> slots_;
};

/// Inv_V: entry predicate and the composed instruction constraints imply the exit predicate.
HornClause encode_block(const Encoding& enc, BlockId block);
std::vector<HornClause> encode_blocks(const Encoding& enc);

/// Inv_E: one clause per encoded edge.
std::vector<HornClause> encode_edges(const Encoding& enc);

/// Inv_Safe: for every block with an SSTORE, the same relation as Inv_V that
/// additionally clears `safe` when the write hits a slot read before the call
/// of a frame whose callee reentered.
std::vector<HornClause> encode_safety(const Encoding& enc);

/// Inv_Status over the block exits of the contract.
std::vector<HornClause> encode_status(const Encoding& enc);

/// Adds Init and the Error query, declares predicates and checks signatures.
ChcSystem assemble(const Encoding& enc, std::vector<HornClause> inv_v, std::vector<HornClause> inv_e,
                   std::vector<HornClause> inv_status, std::vector<HornClause> inv_safe);

/// All of the above.
ChcSystem encode(const Encoding& enc);

std::string emit_smt2(const ChcSystem& system);

}  // namespace ceihorn
