#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ceihorn/bytecode.hpp"

namespace ceihorn {

enum class SortKind { Bool, Int, BV256, IntArray };

struct Sort {
    SortKind kind = SortKind::Int;
    static Sort boolean() { return {SortKind::Bool}; }
    static Sort integer() { return {SortKind::Int}; }
    static Sort bv256() { return {SortKind::BV256}; }
    static Sort int_array() { return {SortKind::IntArray}; }
    std::string smt() const;
    bool operator==(const Sort&) const = default;
};

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
    enum class Kind { Var, IntLit, BoolLit, BvLit, App };
    Kind kind = Kind::Var;
    Sort sort;
    /// Variable name or function symbol.
    std::string name;
    bigint value;
    std::vector<Term> args;
};

namespace t {

Term var(std::string name, Sort sort);
Term int_lit(const bigint& v);
Term bool_lit(bool b);
Term bv_lit(const bigint& v);
Term app(std::string op, Sort sort, std::vector<Term> args);

Term add(Term a, Term b);
Term sub(Term a, Term b);
Term mul(Term a, Term b);
Term div(Term a, Term b);
Term mod(Term a, Term b);
Term eq(Term a, Term b);
Term distinct(Term a, Term b);
Term lt(Term a, Term b);
Term le(Term a, Term b);
Term gt(Term a, Term b);
Term ge(Term a, Term b);
Term not_(Term a);
Term and_(std::vector<Term> args);
Term or_(std::vector<Term> args);
Term ite(Term c, Term a, Term b);
Term select(Term array, Term key);
Term store(Term array, Term key, Term value);
Term int2bv(Term a);

}  // namespace t

/// 2^256 and 2^256 - 1.
const bigint& word_modulus();
const bigint& word_max();

std::string to_smt(const Term& term);
bool is_literal(const Term& term);
/// Free variables in order of first occurrence.
void collect_vars(const Term& term, std::vector<Term>& out, std::map<std::string, Sort>& seen);

struct ArrayValue {
    bigint fallback;
    std::map<bigint, bigint> entries;
    bigint get(const bigint& k) const;
    bool operator==(const ArrayValue& o) const;
};

using Value = std::variant<bigint, bool, ArrayValue>;
using Env = std::map<std::string, Value>;

/// Ground evaluation; nullopt when a variable is unbound or the symbol is unknown.
std::optional<Value> eval(const Term& term, const Env& env);

}  // namespace ceihorn
