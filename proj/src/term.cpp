#include "ceihorn/term.hpp"

#include <sstream>

namespace ceihorn {

std::string Sort::smt() const {
    switch (kind) {
        case SortKind::Bool: return "Bool";
        case SortKind::Int: return "Int";
        case SortKind::BV256: return "(_ BitVec 256)";
        case SortKind::IntArray: return "(Array Int Int)";
    }
    return "?";
}

const bigint& word_modulus() {
    static const bigint m = bigint(1) << 256;
    return m;
}

const bigint& word_max() {
    static const bigint m = (bigint(1) << 256) - 1;
    return m;
}

namespace t {

namespace {

Term make(TermNode n) { return std::make_shared<const TermNode>(std::move(n)); }

}  // namespace

Term var(std::string name, Sort sort) { return make({TermNode::Kind::Var, sort, std::move(name), 0, {}}); }
Term int_lit(const bigint& v) { return make({TermNode::Kind::IntLit, Sort::integer(), "", v, {}}); }
Term bool_lit(bool b) { return make({TermNode::Kind::BoolLit, Sort::boolean(), "", b ? 1 : 0, {}}); }
Term bv_lit(const bigint& v) { return make({TermNode::Kind::BvLit, Sort::bv256(), "", v, {}}); }
Term app(std::string op, Sort sort, std::vector<Term> args) {
    return make({TermNode::Kind::App, sort, std::move(op), 0, std::move(args)});
}

Term add(Term a, Term b) { return app("+", Sort::integer(), {a, b}); }
Term sub(Term a, Term b) { return app("-", Sort::integer(), {a, b}); }
Term mul(Term a, Term b) { return app("*", Sort::integer(), {a, b}); }
Term div(Term a, Term b) { return app("div", Sort::integer(), {a, b}); }
Term mod(Term a, Term b) { return app("mod", Sort::integer(), {a, b}); }
Term eq(Term a, Term b) { return app("=", Sort::boolean(), {a, b}); }
Term distinct(Term a, Term b) { return app("distinct", Sort::boolean(), {a, b}); }
Term lt(Term a, Term b) { return app("<", Sort::boolean(), {a, b}); }
Term le(Term a, Term b) { return app("<=", Sort::boolean(), {a, b}); }
Term gt(Term a, Term b) { return app(">", Sort::boolean(), {a, b}); }
Term ge(Term a, Term b) { return app(">=", Sort::boolean(), {a, b}); }
Term not_(Term a) { return app("not", Sort::boolean(), {a}); }
Term and_(std::vector<Term> args) {
    if (args.empty()) return bool_lit(true);
    if (args.size() == 1) return args[0];
    return app("and", Sort::boolean(), std::move(args));
}
Term or_(std::vector<Term> args) {
    if (args.empty()) return bool_lit(false);
    if (args.size() == 1) return args[0];
    return app("or", Sort::boolean(), std::move(args));
}
Term ite(Term c, Term a, Term b) {
    Sort s = a->sort;
    return app("ite", s, {c, a, b});
}
Term select(Term array, Term key) { return app("select", Sort::integer(), {array, key}); }
Term store(Term array, Term key, Term value) { return app("store", Sort::int_array(), {array, key, value}); }
Term int2bv(Term a) { return app("(_ int2bv 256)", Sort::bv256(), {a}); }

}  // namespace t

namespace {

void print(std::ostream& os, const Term& term) {
    switch (term->kind) {
        case TermNode::Kind::Var: os << term->name; return;
        case TermNode::Kind::IntLit:
            if (term->value < 0) os << "(- " << -term->value << ')';
            else os << term->value;
            return;
        case TermNode::Kind::BoolLit: os << (term->value != 0 ? "true" : "false"); return;
        case TermNode::Kind::BvLit: os << "(_ bv" << term->value << " 256)"; return;
        case TermNode::Kind::App:
            os << '(' << term->name;
            for (const auto& a : term->args) {
                os << ' ';
                print(os, a);
            }
            os << ')';
            return;
    }
}

}  // namespace

std::string to_smt(const Term& term) {
    std::ostringstream os;
    print(os, term);
    return os.str();
}

bool is_literal(const Term& term) {
    return term->kind == TermNode::Kind::IntLit || term->kind == TermNode::Kind::BoolLit ||
           term->kind == TermNode::Kind::BvLit;
}

void collect_vars(const Term& term, std::vector<Term>& out, std::map<std::string, Sort>& seen) {
    if (term->kind == TermNode::Kind::Var) {
        if (seen.emplace(term->name, term->sort).second) out.push_back(term);
        return;
    }
    for (const auto& a : term->args) collect_vars(a, out, seen);
}

bigint ArrayValue::get(const bigint& k) const {
    auto it = entries.find(k);
    return it == entries.end() ? fallback : it->second;
}

bool ArrayValue::operator==(const ArrayValue& o) const {
    auto covers = [](const ArrayValue& a, const ArrayValue& b) {
        for (const auto& [k, v] : a.entries)
            if (b.get(k) != v) return false;
        return true;
    };
    return fallback == o.fallback && covers(*this, o) && covers(o, *this);
}

namespace {

// Floor division and non-negative remainder as in SMT-LIB Int.
bigint smt_div(const bigint& a, const bigint& b) {
    bigint q = a / b;
    bigint r = a - q * b;
    if (r < 0) q += b > 0 ? -1 : 1;
    return q;
}

bigint smt_mod(const bigint& a, const bigint& b) {
    bigint r = a % b;
    if (r < 0) r += b > 0 ? b : -b;
    return r;
}

}  // namespace

std::optional<Value> eval(const Term& term, const Env& env) {
    using K = TermNode::Kind;
    switch (term->kind) {
        case K::Var: {
            auto it = env.find(term->name);
            if (it == env.end()) return std::nullopt;
            return it->second;
        }
        case K::IntLit:
        case K::BvLit: return Value{term->value};
        case K::BoolLit: return Value{term->value != 0};
        case K::App: break;
    }
    const std::string& op = term->name;
    if (op == "ite") {
        auto c = eval(term->args[0], env);
        if (!c) return std::nullopt;
        return eval(term->args[std::get<bool>(*c) ? 1 : 2], env);
    }
    std::vector<Value> a;
    for (const auto& arg : term->args) {
        auto v = eval(arg, env);
        if (!v) return std::nullopt;
        a.push_back(std::move(*v));
    }
    auto I = [&](std::size_t i) -> const bigint& { return std::get<bigint>(a[i]); };
    auto B = [&](std::size_t i) { return std::get<bool>(a[i]); };
    if (op == "+") {
        bigint s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += I(i);
        return Value{s};
    }
    if (op == "-") return a.size() == 1 ? Value{bigint(-I(0))} : Value{bigint(I(0) - I(1))};
    if (op == "*") {
        bigint p = 1;
        for (std::size_t i = 0; i < a.size(); ++i) p *= I(i);
        return Value{p};
    }
    if (op == "div") return I(1) == 0 ? std::optional<Value>{} : Value{smt_div(I(0), I(1))};
    if (op == "mod") return I(1) == 0 ? std::optional<Value>{} : Value{smt_mod(I(0), I(1))};
    if (op == "=") return Value{a[0] == a[1]};
    if (op == "distinct") return Value{!(a[0] == a[1])};
    if (op == "<") return Value{I(0) < I(1)};
    if (op == "<=") return Value{I(0) <= I(1)};
    if (op == ">") return Value{I(0) > I(1)};
    if (op == ">=") return Value{I(0) >= I(1)};
    if (op == "not") return Value{!B(0)};
    if (op == "and") {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!B(i)) return Value{false};
        return Value{true};
    }
    if (op == "or") {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (B(i)) return Value{true};
        return Value{false};
    }
    if (op == "=>") return Value{!B(0) || B(1)};
    if (op == "select") return Value{std::get<ArrayValue>(a[0]).get(I(1))};
    if (op == "store") {
        ArrayValue arr = std::get<ArrayValue>(a[0]);
        arr.entries[I(1)] = I(2);
        return Value{arr};
    }
    if (op == "(_ int2bv 256)") return Value{smt_mod(I(0), word_modulus())};
    if (op == "bv2nat") return Value{I(0)};
    return std::nullopt;
}

}  // namespace ceihorn
