#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceihorn/horn.hpp"

namespace ceihorn {

enum class Status : int { Execute = 0, Stop = 1, Revert = 2, Call = 3, Error = 4 };
std::string_view to_string(Status s);

enum class RuleKind { Precise, Top, Terminator, External };

struct SemanticRule {
    Opcode opcode = Opcode::STOP;
    RuleKind kind = RuleKind::Top;
    StackEffect effect;
    /// Frame status after a terminator or external rule.
    std::optional<Status> status;
};

SemanticRule rule_for(Opcode op);

/// Frame values a precise rule may read.
struct FrameTerms {
    Term storage;
    Term caller;
    Term callvalue;
    Term cdsize;
};

/// Result of a precise rule over Nat operand terms (top first). Wraparound
/// modulo 2^256 is explicit. Returns nullopt where the rule yields top.
std::optional<Term> precise_result(const Instruction& ins, const std::vector<Term>& operands, const FrameTerms& frame);

/// Fixed prefix of every block predicate: the global state, the frame
/// environment and the per-frame flags, followed by one read flag per tracked
/// storage-slot class.
class ContextLayout {
  public:
    enum Field : std::size_t {
        Safe, Reentry, Path, Storage, StorageIn, ReentryIn, Nested, Attacker,
        Gas, Caller, CallValue, CallDataSize, Called, Reentered, Pc, StatusField, kFixed
    };

    explicit ContextLayout(std::size_t read_flags = 1) : read_flags_(read_flags) {}

    std::size_t size() const { return kFixed + read_flags_; }
    std::size_t read_flags() const { return read_flags_; }
    std::size_t read_flag(std::size_t k) const { return kFixed + k; }
    std::string name(std::size_t i) const;
    Sort sort(std::size_t i) const;
    /// Variables named after the fields, with an optional suffix.
    std::vector<Term> vars(const std::string& suffix = "") const;

  private:
    std::size_t read_flags_;
};

/// A block exit consumed by the status transitions.
struct ExitSite {
    std::string pred;
    BlockId block = 0;
    /// Exit stack slots following the context.
    std::size_t stack = 0;
    /// Sorts of the exit stack slots.
    std::vector<Sort> stack_sorts;
};

struct TransitionConfig {
    ContextLayout layout;
    std::size_t max_reentry = 2;
    /// Entry predicate of the dispatcher.
    std::string entry_pred;
    std::vector<ExitSite> stops;
    /// Call exits carry (gas, addr) after the stack; slot 0 is the call result.
    std::vector<ExitSite> calls;
};

inline constexpr const char* kReentPred = "reent";
inline constexpr const char* kErrPred = "err";

Predicate reent_predicate();
Predicate err_predicate();

/// Stop/Call transitions of the transaction-chain model, plus the caller of the
/// first transaction via `init_clause`.
std::vector<HornClause> status_transition_clauses(const TransitionConfig& config);

HornClause init_clause(const ContextLayout& layout, const std::string& entry_pred);

/// Bounds 0 <= v <= 2^256 - 1.
Term word_bounds(const Term& v);

}  // namespace ceihorn
