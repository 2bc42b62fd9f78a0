#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceihorn/solver.hpp"

namespace ceihorn {

struct CfgStats {
    std::size_t blocks = 0;
    std::size_t edges = 0;
    std::size_t layers = 0;
    std::size_t unresolved_jumps = 0;
    std::size_t encoded_blocks = 0;
    std::size_t encoded_edges = 0;
};

struct ClauseStats {
    std::size_t init = 0;
    std::size_t inv_v = 0;
    std::size_t inv_e = 0;
    std::size_t inv_status = 0;
    std::size_t inv_safe = 0;
    std::size_t inv_error = 0;
};

struct ReportError {
    /// MalformedHex, NoRuntimeSegment, SolverUnavailable, InputError, InternalError.
    std::string kind;
    std::string message;
};

struct Report {
    std::string contract_id;
    VerdictKind verdict = VerdictKind::Unknown;
    std::optional<ReportError> error;
    long long analysis_millis = 0;
    CfgStats cfg;
    ClauseStats clauses;
    std::optional<VulnPath> path;
    std::vector<std::string> warnings;
};

/// "Error" when `error` is set, else the verdict name.
std::string verdict_label(const Report& r);

/// Stable key order, two-space indent, trailing newline.
std::string to_json(const Report& r);

}  // namespace ceihorn
