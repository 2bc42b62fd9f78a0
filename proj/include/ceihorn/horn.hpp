#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ceihorn/cfg.hpp"
#include "ceihorn/term.hpp"

namespace ceihorn {

enum class Family { Init, InvV, InvE, InvStatus, InvError, InvSafe };
std::string_view to_string(Family f);

/// Which status-transition template produced a clause.
enum class StatusRule {
    None,
    StopUnsafe,  // Stop with no parent while unsafe -> Error
    Restart,     // Stop with no parent -> attacker starts a new chain
    Resume,      // Stop of a reentrant frame -> summary for the caller
    Reenter,     // Call to the attacker with enough gas -> reentrant frame
    Return,      // Call continues after a completed reentrant frame
    Skip,        // Call continues with an unconstrained result
};
std::string_view to_string(StatusRule r);

struct Predicate {
    std::string name;
    std::vector<std::string> arg_names;
    std::vector<Sort> sorts;
    std::optional<BlockId> block;
    int layer = 0;
    bool exit = false;
};

struct PredApp {
    std::string pred;
    std::vector<Term> args;
};

struct HornClause {
    Family family = Family::InvV;
    StatusRule rule = StatusRule::None;
    std::vector<PredApp> body;
    std::vector<Term> constraints;
    /// Absent for the query.
    std::optional<PredApp> head;
    std::optional<BlockId> block;
    std::optional<Edge> edge;
    /// Offsets of the first and last instruction of `block`.
    std::size_t pc_begin = 0;
    std::size_t pc_end = 0;
    /// The block reads storage.
    bool reads_storage = false;
    bool writes_storage = false;
};

/// Variables of a clause, in order of first occurrence (body, constraints, head).
std::vector<Term> clause_vars(const HornClause& c);

/// Ground values for the argument positions of one clause instance.
using ArgValues = std::vector<std::optional<Value>>;

struct Instance {
    /// One entry per body application, in clause order.
    std::vector<ArgValues> body;
    ArgValues head;
};

enum class CheckResult { Holds, Violated, Undetermined };

/// Checks a ground instance: arguments that are plain variables are bound from
/// the values, definitional equalities (= x e) bind remaining variables, then
/// every constraint and every compound argument is evaluated. Variables left
/// unbound make the result Undetermined unless something evaluates false.
CheckResult check_instance(const HornClause& c, const Instance& inst, Env* env_out = nullptr);

/// Renames every variable of `term` by appending `suffix`.
Term rename(const Term& term, const std::string& suffix);

struct ChcSystem {
    /// Declaration order.
    std::vector<Predicate> predicates;
    std::vector<HornClause> clauses;
    std::vector<std::string> warnings;

    const Predicate& predicate(const std::string& name) const;
    bool has_predicate(const std::string& name) const;
    std::size_t count(Family f) const;
};

}  // namespace ceihorn
