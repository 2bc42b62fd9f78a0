#include "ceihorn/statemodel.hpp"

#include <algorithm>

namespace ceihorn {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Execute: return "Execute";
        case Status::Stop: return "Stop";
        case Status::Revert: return "Revert";
        case Status::Call: return "Call";
        case Status::Error: return "Error";
    }
    return "?";
}

SemanticRule rule_for(Opcode op) {
    SemanticRule r;
    r.opcode = op;
    r.effect = stack_effect(op);
    switch (op) {
        case Opcode::ADD: case Opcode::SUB: case Opcode::MUL: case Opcode::DIV:
        case Opcode::MOD: case Opcode::ADDMOD: case Opcode::MULMOD: case Opcode::EXP:
        case Opcode::LT: case Opcode::GT: case Opcode::EQ: case Opcode::ISZERO:
        case Opcode::POP: case Opcode::SLOAD: case Opcode::SSTORE:
        case Opcode::CALLER: case Opcode::CALLVALUE: case Opcode::CALLDATASIZE:
        case Opcode::PC: case Opcode::JUMPDEST: case Opcode::JUMP: case Opcode::JUMPI:
        case Opcode::PUSH0:
            r.kind = RuleKind::Precise;
            return r;
        case Opcode::STOP:
        case Opcode::RETURN:
            r.kind = RuleKind::Terminator;
            r.status = Status::Stop;
            return r;
        case Opcode::REVERT:
        case Opcode::SELFDESTRUCT:
            r.kind = RuleKind::Terminator;
            r.status = Status::Revert;
            return r;
        case Opcode::INVALID:
            r.kind = RuleKind::Terminator;
            r.status = Status::Error;
            return r;
        default:
            break;
    }
    if (is_push(op) || is_dup(op) || is_swap(op)) {
        r.kind = RuleKind::Precise;
    } else if (is_external_call(op)) {
        r.kind = RuleKind::External;
        r.status = Status::Call;
    } else if (!is_defined(static_cast<std::uint8_t>(op))) {
        r.kind = RuleKind::Terminator;
        r.status = Status::Error;
    } else {
        r.kind = RuleKind::Top;
    }
    return r;
}

Term word_bounds(const Term& v) {
    return t::and_({t::le(t::int_lit(0), v), t::le(v, t::int_lit(word_max()))});
}

namespace {

std::optional<u256> literal(const Term& x) {
    if (x->kind != TermNode::Kind::IntLit || x->value < 0 || x->value > word_max()) return std::nullopt;
    return u256(x->value);
}

std::optional<u256> fold(Opcode op, const std::vector<u256>& a) {
    auto wide = [](const u256& x) { return bigint(x); };
    switch (op) {
        case Opcode::ADD: return a[0] + a[1];
        case Opcode::SUB: return a[0] - a[1];
        case Opcode::MUL: return a[0] * a[1];
        case Opcode::DIV: return a[1] == 0 ? u256(0) : u256(a[0] / a[1]);
        case Opcode::MOD: return a[1] == 0 ? u256(0) : u256(a[0] % a[1]);
        case Opcode::ADDMOD:
            return a[2] == 0 ? u256(0) : u256((wide(a[0]) + wide(a[1])) % wide(a[2]));
        case Opcode::MULMOD:
            return a[2] == 0 ? u256(0) : u256((wide(a[0]) * wide(a[1])) % wide(a[2]));
        case Opcode::EXP: {
            u256 r = 1, b = a[0], e = a[1];
            for (; e != 0; e >>= 1, b *= b)
                if ((e & 1) != 0) r *= b;
            return r;
        }
        case Opcode::LT: return u256(a[0] < a[1] ? 1 : 0);
        case Opcode::GT: return u256(a[0] > a[1] ? 1 : 0);
        case Opcode::EQ: return u256(a[0] == a[1] ? 1 : 0);
        case Opcode::ISZERO: return u256(a[0] == 0 ? 1 : 0);
        default: return std::nullopt;
    }
}

}  // namespace

std::optional<Term> precise_result(const Instruction& ins, const std::vector<Term>& ops, const FrameTerms& frame) {
    using namespace t;
    const Opcode op = ins.opcode;
    if (is_push(op) || op == Opcode::PUSH0) return int_lit(bigint(ins.operand.value_or(0)));
    if (op == Opcode::PC) return int_lit(ins.offset);
    if (op == Opcode::CALLER) return frame.caller;
    if (op == Opcode::CALLVALUE) return frame.callvalue;
    if (op == Opcode::CALLDATASIZE) return frame.cdsize;
    if (op == Opcode::SLOAD) return select(frame.storage, ops[0]);

    if (op != Opcode::EXP) {
        std::vector<u256> lits;
        for (const auto& o : ops)
            if (auto v = literal(o)) lits.push_back(*v);
        if (!ops.empty() && lits.size() == ops.size())
            if (auto r = fold(op, lits)) return int_lit(bigint(*r));
    }

    const Term M = int_lit(word_modulus());
    const Term zero = int_lit(0), one = int_lit(1);
    switch (op) {
        case Opcode::ADD: {
            Term s = add(ops[0], ops[1]);
            return ite(ge(s, M), sub(s, M), s);
        }
        case Opcode::SUB:
            return ite(ge(ops[0], ops[1]), sub(ops[0], ops[1]), add(sub(ops[0], ops[1]), M));
        case Opcode::MUL: return mod(mul(ops[0], ops[1]), M);
        case Opcode::DIV: return ite(eq(ops[1], zero), zero, div(ops[0], ops[1]));
        case Opcode::MOD: return ite(eq(ops[1], zero), zero, mod(ops[0], ops[1]));
        case Opcode::ADDMOD: return ite(eq(ops[2], zero), zero, mod(add(ops[0], ops[1]), ops[2]));
        case Opcode::MULMOD: return ite(eq(ops[2], zero), zero, mod(mul(ops[0], ops[1]), ops[2]));
        case Opcode::EXP: {
            auto k = literal(ops[1]);
            if (!k) return std::nullopt;
            if (auto b = literal(ops[0])) return int_lit(bigint(*fold(op, {*b, *k})));
            if (*k > 16) return std::nullopt;
            if (*k == 0) return one;
            Term r = ops[0];
            for (unsigned i = 1; i < static_cast<unsigned>(*k); ++i) r = mod(mul(r, ops[0]), M);
            return r;
        }
        case Opcode::LT: return ite(lt(ops[0], ops[1]), one, zero);
        case Opcode::GT: return ite(gt(ops[0], ops[1]), one, zero);
        case Opcode::EQ: return ite(eq(ops[0], ops[1]), one, zero);
        case Opcode::ISZERO: return ite(eq(ops[0], zero), one, zero);
        default: return std::nullopt;
    }
}

std::string ContextLayout::name(std::size_t i) const {
    static const char* fixed[] = {"safe",   "reentry", "path",   "st",     "st_in",     "reentry_in",
                                  "nested", "attacker", "gas",   "caller", "callvalue", "cdsize",
                                  "called", "reentered", "pc",   "status"};
    if (i < kFixed) return fixed[i];
    return "rd" + std::to_string(i - kFixed);
}

Sort ContextLayout::sort(std::size_t i) const {
    switch (i) {
        case Safe: case Nested: case Called: case Reentered: return Sort::boolean();
        case Storage: case StorageIn: return Sort::int_array();
        default: return i >= kFixed ? Sort::boolean() : Sort::integer();
    }
}

std::vector<Term> ContextLayout::vars(const std::string& suffix) const {
    std::vector<Term> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(t::var(name(i) + suffix, sort(i)));
    return out;
}

Predicate reent_predicate() {
    return Predicate{kReentPred,
                     {"st_in", "reentry_in", "attacker", "st_out", "reentry_out", "safe_out"},
                     {Sort::int_array(), Sort::integer(), Sort::integer(), Sort::int_array(), Sort::integer(),
                      Sort::boolean()},
                     std::nullopt, 0, false};
}

Predicate err_predicate() {
    return Predicate{kErrPred,
                     {"safe", "reentry", "path", "st", "status"},
                     {Sort::boolean(), Sort::integer(), Sort::integer(), Sort::int_array(), Sort::integer()},
                     std::nullopt, 0, false};
}

namespace {

using L = ContextLayout;

Term status_lit(Status s) { return t::int_lit(static_cast<int>(s)); }

/// Context of a frame started by the attacker: fresh message, flags cleared.
std::vector<Term> fresh_frame(const L& layout, const std::vector<Term>& c, bool nested, Term safe,
                              std::vector<Term>& constraints) {
    using namespace t;
    Term gas = var("gas_new", Sort::integer());
    Term value = var("callvalue_new", Sort::integer());
    Term size = var("cdsize_new", Sort::integer());
    constraints.push_back(word_bounds(gas));
    constraints.push_back(word_bounds(value));
    constraints.push_back(word_bounds(size));
    std::vector<Term> h = c;
    Term next = add(c[L::Reentry], int_lit(1));
    h[L::Safe] = safe;
    h[L::Reentry] = next;
    h[L::Path] = add(c[L::Path], int_lit(1));
    h[L::StorageIn] = c[L::Storage];
    h[L::ReentryIn] = next;
    h[L::Nested] = bool_lit(nested);
    h[L::Gas] = gas;
    h[L::Caller] = c[L::Attacker];
    h[L::CallValue] = value;
    h[L::CallDataSize] = size;
    h[L::Called] = bool_lit(false);
    h[L::Reentered] = bool_lit(false);
    h[L::Pc] = int_lit(0);
    h[L::StatusField] = status_lit(Status::Execute);
    for (std::size_t k = 0; k < layout.read_flags(); ++k) h[layout.read_flag(k)] = bool_lit(false);
    return h;
}

std::vector<Term> stack_vars(const ExitSite& site) {
    std::vector<Term> out;
    for (std::size_t i = 0; i < site.stack; ++i)
        out.push_back(t::var("s" + std::to_string(i), site.stack_sorts.at(i)));
    return out;
}

std::vector<Term> concat(std::vector<Term> a, const std::vector<Term>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

HornClause init_clause(const ContextLayout& layout, const std::string& entry_pred) {
    using namespace t;
    HornClause c;
    c.family = Family::Init;
    std::vector<Term> h = layout.vars();
    for (std::size_t f : {L::Attacker, L::Gas, L::Caller, L::CallValue, L::CallDataSize})
        c.constraints.push_back(word_bounds(h[f]));
    h[L::Safe] = bool_lit(true);
    h[L::Reentry] = int_lit(0);
    h[L::Path] = int_lit(0);
    h[L::StorageIn] = h[L::Storage];
    h[L::ReentryIn] = int_lit(0);
    h[L::Nested] = bool_lit(false);
    h[L::Called] = bool_lit(false);
    h[L::Reentered] = bool_lit(false);
    h[L::Pc] = int_lit(0);
    h[L::StatusField] = status_lit(Status::Execute);
    for (std::size_t k = 0; k < layout.read_flags(); ++k) h[layout.read_flag(k)] = bool_lit(false);
    c.head = PredApp{entry_pred, h};
    return c;
}

std::vector<HornClause> status_transition_clauses(const TransitionConfig& cfg) {
    using namespace t;
    const L& layout = cfg.layout;
    const bool reentry = cfg.max_reentry > 0 && !cfg.calls.empty();
    const Term max = int_lit(static_cast<long>(cfg.max_reentry));
    std::vector<HornClause> out;

    for (const auto& site : cfg.stops) {
        const std::vector<Term> c = layout.vars();
        const std::vector<Term> s = stack_vars(site);
        const PredApp body{site.pred, concat(c, s)};
        const Term stopped = eq(c[L::StatusField], status_lit(Status::Stop));

        HornClause a{Family::InvStatus, StatusRule::StopUnsafe, {body}, {stopped, not_(c[L::Nested]), not_(c[L::Safe])},
                     PredApp{kErrPred,
                             {c[L::Safe], c[L::Reentry], add(c[L::Path], int_lit(1)), c[L::Storage],
                              status_lit(Status::Error)}},
                     site.block, std::nullopt};
        out.push_back(std::move(a));

        if (cfg.max_reentry > 0) {
            HornClause b{Family::InvStatus, StatusRule::Restart, {body},
                         {stopped, not_(c[L::Nested]), lt(c[L::Reentry], max)}, std::nullopt, site.block,
                         std::nullopt};
            b.head = PredApp{cfg.entry_pred, fresh_frame(layout, c, false, c[L::Safe], b.constraints)};
            out.push_back(std::move(b));
        }

        if (reentry) {
            HornClause r{Family::InvStatus, StatusRule::Resume, {body}, {stopped, c[L::Nested]},
                         PredApp{kReentPred,
                                 {c[L::StorageIn], c[L::ReentryIn], c[L::Attacker], c[L::Storage], c[L::Reentry],
                                  c[L::Safe]}},
                         site.block, std::nullopt};
            out.push_back(std::move(r));
        }
    }

    for (const auto& site : cfg.calls) {
        const std::vector<Term> c = layout.vars();
        const std::vector<Term> s = stack_vars(site);
        const Term gas = var("call_gas", Sort::integer());
        const Term addr = var("call_addr", Sort::integer());
        const PredApp body{site.pred, concat(concat(c, s), {gas, addr})};
        const Term calling = eq(c[L::StatusField], status_lit(Status::Call));
        const std::vector<Term> attack = {calling, eq(addr, c[L::Attacker]), gt(gas, int_lit(2300)),
                                          lt(c[L::Reentry], max)};

        auto resumed = [&](std::vector<Term> h, Term result) {
            h[L::Called] = bool_lit(true);
            h[L::StatusField] = status_lit(Status::Execute);
            std::vector<Term> stack = s;
            if (!stack.empty()) stack[0] = result;
            return concat(concat(h, stack), {gas, addr});
        };

        if (reentry) {
            HornClause d{Family::InvStatus, StatusRule::Reenter, {body}, attack, std::nullopt, site.block,
                         std::nullopt};
            d.head = PredApp{cfg.entry_pred, fresh_frame(layout, c, true, bool_lit(true), d.constraints)};
            out.push_back(std::move(d));

            const Term st2 = var("st_child", Sort::int_array());
            const Term re2 = var("reentry_child", Sort::integer());
            const Term sf2 = var("safe_child", Sort::boolean());
            HornClause ret{Family::InvStatus, StatusRule::Return,
                           {body, PredApp{kReentPred,
                                          {c[L::Storage], add(c[L::Reentry], int_lit(1)), c[L::Attacker], st2, re2,
                                           sf2}}},
                           attack, std::nullopt, site.block, std::nullopt};
            std::vector<Term> h = c;
            h[L::Safe] = and_({c[L::Safe], sf2});
            h[L::Reentry] = re2;
            h[L::Path] = add(c[L::Path], int_lit(1));
            h[L::Storage] = st2;
            h[L::Reentered] = bool_lit(true);
            Term success = site.stack_sorts.empty() || site.stack_sorts[0] == Sort::integer() ? int_lit(1) : bv_lit(1);
            ret.head = PredApp{site.pred, resumed(h, success)};
            out.push_back(std::move(ret));
        }

        HornClause e{Family::InvStatus, StatusRule::Skip, {body}, {calling}, std::nullopt, site.block, std::nullopt};
        Term result;
        if (site.stack_sorts.empty() || site.stack_sorts[0] == Sort::integer()) {
            result = var("call_result", Sort::integer());
            e.constraints.push_back(word_bounds(result));
        } else {
            result = var("call_result", Sort::bv256());
        }
        std::vector<Term> h = c;
        h[L::Path] = add(c[L::Path], int_lit(1));
        e.head = PredApp{site.pred, resumed(h, result)};
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace ceihorn
