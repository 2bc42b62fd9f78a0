#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceihorn/horn.hpp"

namespace ceihorn {

enum class VerdictKind { Safe, Vulnerable, Timeout, Unknown };
std::string_view to_string(VerdictKind k);

class SolverUnavailable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One clause instance of a refutation, premises first.
struct DerivationStep {
    std::size_t clause = 0;
    /// Indices of earlier steps, one per body application in clause order.
    std::vector<std::size_t> premises;
    /// Ground head arguments as printed by the solver.
    ArgValues conclusion;
    std::size_t transaction = 0;
};

struct Derivation {
    /// Execution order; the last step is the query.
    std::vector<DerivationStep> steps;
};

struct PathStep {
    std::size_t transaction = 0;
    BlockId block = 0;
    std::size_t pc_begin = 0;
    std::size_t pc_end = 0;
    /// sload, call-out, reenter, sstore, stop or error.
    std::string event;
};

struct VulnPath {
    std::vector<PathStep> steps;
    std::size_t reentry_count = 0;
    /// Set once a secondary solver call confirmed the unrolled chain.
    std::optional<bool> replayed;
};

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    /// Solver output: the answer line, plus the proof when one was produced.
    std::string raw;
    std::optional<Derivation> derivation;
    std::optional<VulnPath> path;
    std::vector<std::string> warnings;
};

struct SolverConfig {
    std::string executable;
    std::vector<std::string> extra_args;
    std::chrono::milliseconds timeout{3600 * 1000};
    bool want_proof = true;
    bool replay = true;
};

/// CEIHORN_SOLVER, else "z3" on PATH.
std::string default_solver();

/// sat -> Safe, unsat -> Vulnerable (with a refutation when requested),
/// timeout -> Timeout, anything else -> Unknown.
Verdict check(const std::string& script, const ChcSystem& system, const SolverConfig& config);

/// Runs an SMT-LIB script and returns what the solver printed.
using ScriptRunner = std::function<std::string(const std::string&)>;

/// Maps a refutation onto the clauses of `system`. Proof steps that the solver
/// built from several clauses (predicates it inlined away) are split back into
/// clause instances; `run` decides between candidate splits and may be empty
/// when the proof only uses clauses of `system` directly. Throws SexprError or
/// std::runtime_error when the proof cannot be read.
Derivation parse_derivation(const std::string& proof_text, const ChcSystem& system, const ScriptRunner& run = {});

VulnPath extract_path(const Derivation& d, const ChcSystem& system);

/// Conjunction of the clause instances along the derivation with fresh
/// variables per step, premises linked to conclusions.
std::string replay_script(const Derivation& d, const ChcSystem& system);

/// Runs the replay script; true when the solver answers sat.
std::optional<bool> replay(const Derivation& d, const ChcSystem& system, const SolverConfig& config);

/// Options that keep the rule structure visible in refutations.
std::string proof_preamble();

}  // namespace ceihorn
