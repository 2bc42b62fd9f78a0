#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ceihorn {

struct SexprNode;
/// Immutable and shared, so let-expansion keeps the DAG shape of the input.
using Sexpr = std::shared_ptr<const SexprNode>;

struct SexprNode {
    bool atom = true;
    std::string text;
    std::vector<Sexpr> items;

    bool is(std::string_view s) const { return atom && text == s; }
    /// List whose first item is the atom `head`.
    bool starts_with(std::string_view head) const {
        return !atom && !items.empty() && items[0]->is(head);
    }
};

class SexprError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Sexpr make_atom(std::string text);
Sexpr make_list(std::vector<Sexpr> items);

/// Parses every top-level expression. Comments start with ';'. Quoted |symbols|
/// and "strings" are kept as single atoms including their delimiters.
std::vector<Sexpr> parse_sexprs(std::string_view text);

/// Replaces (let ((x e) ...) body) by body with the bindings substituted.
/// Shared bindings stay shared.
Sexpr expand_lets(const Sexpr& e);

std::string to_string(const Sexpr& e);

}  // namespace ceihorn
