#include "ceihorn/chc.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ceihorn {

std::string_view to_string(Family f) {
    switch (f) {
        case Family::Init: return "Init";
        case Family::InvV: return "Inv_V";
        case Family::InvE: return "Inv_E";
        case Family::InvStatus: return "Inv_Status";
        case Family::InvError: return "Inv_Error";
        case Family::InvSafe: return "Inv_Safe";
    }
    return "?";
}

std::string_view to_string(StatusRule r) {
    switch (r) {
        case StatusRule::None: return "none";
        case StatusRule::StopUnsafe: return "stop-unsafe";
        case StatusRule::Restart: return "restart";
        case StatusRule::Resume: return "resume";
        case StatusRule::Reenter: return "reenter";
        case StatusRule::Return: return "return";
        case StatusRule::Skip: return "skip";
    }
    return "?";
}

std::vector<Term> clause_vars(const HornClause& c) {
    std::vector<Term> out;
    std::map<std::string, Sort> seen;
    for (const auto& app : c.body)
        for (const auto& a : app.args) collect_vars(a, out, seen);
    for (const auto& k : c.constraints) collect_vars(k, out, seen);
    if (c.head)
        for (const auto& a : c.head->args) collect_vars(a, out, seen);
    return out;
}

const Predicate& ChcSystem::predicate(const std::string& name) const {
    for (const auto& p : predicates)
        if (p.name == name) return p;
    throw std::out_of_range("no predicate " + name);
}

bool ChcSystem::has_predicate(const std::string& name) const {
    return std::any_of(predicates.begin(), predicates.end(), [&](const Predicate& p) { return p.name == name; });
}

std::size_t ChcSystem::count(Family f) const {
    return static_cast<std::size_t>(
        std::count_if(clauses.begin(), clauses.end(), [&](const HornClause& c) { return c.family == f; }));
}

namespace {

std::size_t count_slot_classes(const LayeredCfg& cfg, const SsaForm& ssa, const EncodeOptions& options,
                               std::map<u256, std::size_t>& slots) {
    std::set<u256> keys;
    for (const auto& [id, sb] : ssa.blocks) {
        if (!ssa.encodable(id)) continue;
        for (const auto& si : sb.instrs) {
            if (si.operands.empty()) continue;
            if (si.ins.opcode != Opcode::SLOAD && si.ins.opcode != Opcode::SSTORE) continue;
            if (auto c = ssa.var(si.operands[0]).constant) keys.insert(*c);
        }
    }
    (void)cfg;
    for (const auto& k : keys) {
        if (slots.size() >= options.max_tracked_slots) break;
        slots.emplace(k, slots.size());
    }
    return slots.size() + 1;
}

}  // namespace

Encoding::Encoding(const LayeredCfg& cfg, const SsaForm& ssa, const DomainAssignment& domains,
                   const EncodeOptions& options)
    : cfg_(cfg), ssa_(ssa), domains_(domains), options_(options) {
    layout_ = ContextLayout(count_slot_classes(cfg, ssa, options, slots_));
    for (const auto& [id, _] : cfg.blocks)
        if (ssa.encodable(id)) blocks_.push_back(id);
}

bool Encoding::encoded(BlockId b) const { return std::binary_search(blocks_.begin(), blocks_.end(), b); }

std::vector<Edge> Encoding::edges() const {
    std::vector<Edge> out;
    for (const auto& e : cfg_.edges)
        if (encoded(e.src) && encoded(e.dst) && !ssa_.blocks.at(e.src).underflow) out.push_back(e);
    return out;
}

std::string Encoding::entry_pred(BlockId b) const {
    return "l" + std::to_string(cfg_.layer_of.at(b)) + "_b" + std::to_string(b) + "_in";
}

std::string Encoding::exit_pred(BlockId b) const {
    return "l" + std::to_string(cfg_.layer_of.at(b)) + "_b" + std::to_string(b) + "_out";
}

Sort Encoding::sort_of(VarId v) const { return domains_[v] == Domain::BV256 ? Sort::bv256() : Sort::integer(); }

Term Encoding::var_term(VarId v) const { return t::var("v" + std::to_string(v), sort_of(v)); }

Status Encoding::exit_status(BlockId b) const {
    const auto& sb = ssa_.blocks.at(b);
    if (sb.underflow) return Status::Error;
    if (sb.call_index) return Status::Call;
    const auto& bb = cfg_.blocks.at(b);
    switch (bb.terminator) {
        case Terminator::Stop:
        case Terminator::Return: return Status::Stop;
        case Terminator::Revert:
        case Terminator::SelfDestruct: return Status::Revert;
        case Terminator::Invalid: return Status::Error;
        default: return Status::Execute;
    }
}

std::size_t Encoding::slot_class(const std::optional<u256>& key) const {
    if (key)
        if (auto it = slots_.find(*key); it != slots_.end()) return it->second;
    return layout_.read_flags() - 1;
}

namespace {

/// Exit extras after the stack: (name, meaning).
enum class Extra { JumpTarget, Condition, CallGas, CallAddr };

std::vector<Extra> extras_of(const Encoding& enc, BlockId b) {
    const auto& sb = enc.ssa().blocks.at(b);
    std::vector<Extra> out;
    if (sb.underflow) return out;
    if (sb.call_index) return {Extra::CallGas, Extra::CallAddr};
    if (sb.condition) out.push_back(Extra::Condition);
    if (sb.jump_target && !enc.ssa().var(*sb.jump_target).constant) out.push_back(Extra::JumpTarget);
    return out;
}

std::string extra_name(Extra e) {
    switch (e) {
        case Extra::JumpTarget: return "jump_target";
        case Extra::Condition: return "cond";
        case Extra::CallGas: return "call_gas";
        case Extra::CallAddr: return "call_addr";
    }
    return "?";
}

std::vector<VarId> exit_vars(const Encoding& enc, BlockId b) {
    const auto& sb = enc.ssa().blocks.at(b);
    if (sb.underflow) return {};
    return sb.exit_stack;
}

/// Value of an SSA variable in its own domain, with constants inlined.
Term value_term(const Encoding& enc, VarId v) {
    if (auto c = enc.ssa().var(v).constant)
        return enc.domains()[v] == Domain::BV256 ? t::bv_lit(bigint(*c)) : t::int_lit(bigint(*c));
    return enc.var_term(v);
}

/// One block's transfer relation, shared by Inv_V and Inv_Safe.
struct BlockRelation {
    PredApp body;
    std::vector<Term> constraints;
    std::vector<Term> head;
    std::vector<Term> violations;
};

BlockRelation relate_block(const Encoding& enc, BlockId b) {
    using namespace t;
    using L = ContextLayout;
    const auto& layout = enc.layout();
    const auto& sb = enc.ssa().blocks.at(b);
    const auto& bb = enc.cfg().blocks.at(b);

    BlockRelation r;
    std::vector<Term> c = layout.vars();
    std::vector<Term> args = c;
    for (VarId p : sb.params) args.push_back(enc.var_term(p));
    r.body = PredApp{enc.entry_pred(b), args};

    std::map<VarId, Term> shadow;  // Nat view of BV values defined here
    std::map<VarId, Term> converted;
    auto nat_use = [&](VarId v) -> Term {
        if (auto k = enc.ssa().var(v).constant) return int_lit(bigint(*k));
        if (enc.domains()[v] == Domain::Nat) return enc.var_term(v);
        if (auto it = shadow.find(v); it != shadow.end()) return it->second;
        if (auto it = converted.find(v); it != converted.end()) return it->second;
        Term top = var("n" + std::to_string(v), Sort::integer());
        r.constraints.push_back(word_bounds(top));
        converted.emplace(v, top);
        return top;
    };

    Term storage = c[L::Storage];
    std::vector<Term> rd(c.begin() + static_cast<long>(L::kFixed), c.end());
    const FrameTerms frame{storage, c[L::Caller], c[L::CallValue], c[L::CallDataSize]};

    for (const auto& si : sb.instrs) {
        const Opcode op = si.ins.opcode;
        if (si.results.empty() && si.operands.empty()) continue;
        std::vector<Term> ops;
        if (!is_bitwise(op))
            for (VarId v : si.operands) ops.push_back(nat_use(v));

        if (op == Opcode::SSTORE) {
            std::size_t cls = enc.slot_class(enc.ssa().var(si.operands[0]).constant);
            std::vector<Term> pairing;
            if (cls + 1 == layout.read_flags()) pairing = rd;
            else pairing = {rd[cls], rd.back()};
            r.violations.push_back(and_({c[L::Reentered], or_(pairing)}));
            storage = store(storage, ops[0], ops[1]);
            continue;
        }
        if (op == Opcode::SLOAD) {
            std::size_t cls = enc.slot_class(enc.ssa().var(si.operands[0]).constant);
            rd[cls] = or_({rd[cls], not_(c[L::Called])});
        }

        FrameTerms f = frame;
        f.storage = storage;
        std::optional<Term> value;
        if (!is_bitwise(op) && !is_external_call(op) && rule_for(op).kind == RuleKind::Precise)
            value = precise_result(si.ins, ops, f);
        for (VarId v : si.results) {
            if (enc.ssa().var(v).constant) continue;
            Term x = enc.var_term(v);
            if (enc.domains()[v] == Domain::Nat) {
                if (value) r.constraints.push_back(eq(x, *value));
                else r.constraints.push_back(word_bounds(x));
            } else if (value) {
                shadow.emplace(v, *value);
                r.constraints.push_back(eq(x, int2bv(*value)));
            }
        }
    }

    std::vector<Term> h = c;
    h[L::Storage] = storage;
    for (std::size_t k = 0; k < rd.size(); ++k) h[layout.read_flag(k)] = rd[k];
    h[L::Pc] = int_lit(bb.last_offset());
    h[L::StatusField] = int_lit(static_cast<int>(enc.exit_status(b)));
    for (VarId v : exit_vars(enc, b)) h.push_back(value_term(enc, v));
    for (Extra e : extras_of(enc, b)) {
        const auto& call = sb.call_index ? &sb.instrs[*sb.call_index] : nullptr;
        switch (e) {
            case Extra::JumpTarget: h.push_back(nat_use(*sb.jump_target)); break;
            case Extra::Condition: h.push_back(nat_use(*sb.condition)); break;
            case Extra::CallGas: h.push_back(nat_use(call->operands[0])); break;
            case Extra::CallAddr: h.push_back(nat_use(call->operands[1])); break;
        }
    }
    r.head = std::move(h);
    return r;
}

}  // namespace

Predicate Encoding::entry_predicate(BlockId b) const {
    Predicate p;
    p.name = entry_pred(b);
    p.block = b;
    p.layer = cfg_.layer_of.at(b);
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        p.arg_names.push_back(layout_.name(i));
        p.sorts.push_back(layout_.sort(i));
    }
    for (VarId v : ssa_.blocks.at(b).params) {
        p.arg_names.push_back("v" + std::to_string(v));
        p.sorts.push_back(sort_of(v));
    }
    return p;
}

Predicate Encoding::exit_predicate(BlockId b) const {
    Predicate p = entry_predicate(b);
    p.name = exit_pred(b);
    p.exit = true;
    p.arg_names.resize(layout_.size());
    p.sorts.resize(layout_.size());
    for (VarId v : exit_vars(*this, b)) {
        p.arg_names.push_back("v" + std::to_string(v));
        p.sorts.push_back(sort_of(v));
    }
    for (Extra e : extras_of(*this, b)) {
        p.arg_names.push_back(extra_name(e));
        p.sorts.push_back(Sort::integer());
    }
    return p;
}

HornClause encode_block(const Encoding& enc, BlockId block) {
    BlockRelation r = relate_block(enc, block);
    HornClause c;
    c.family = Family::InvV;
    c.block = block;
    c.body = {r.body};
    c.constraints = r.constraints;
    c.head = PredApp{enc.exit_pred(block), r.head};
    return c;
}

std::vector<HornClause> encode_blocks(const Encoding& enc) {
    std::vector<HornClause> out;
    for (BlockId b : enc.blocks()) out.push_back(encode_block(enc, b));
    return out;
}

std::vector<HornClause> encode_safety(const Encoding& enc) {
    std::vector<HornClause> out;
    for (BlockId b : enc.blocks()) {
        BlockRelation r = relate_block(enc, b);
        if (r.violations.empty()) continue;
        HornClause c;
        c.family = Family::InvSafe;
        c.block = b;
        c.body = {r.body};
        c.constraints = r.constraints;
        c.constraints.push_back(t::or_(r.violations));
        r.head[ContextLayout::Safe] = t::bool_lit(false);
        c.head = PredApp{enc.exit_pred(b), r.head};
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<HornClause> encode_edges(const Encoding& enc) {
    using namespace t;
    using L = ContextLayout;
    std::vector<HornClause> out;
    for (const Edge& e : enc.edges()) {
        const auto& src = enc.ssa().blocks.at(e.src);
        const auto& dst = enc.ssa().blocks.at(e.dst);
        std::vector<Term> c = enc.layout().vars();
        std::vector<Term> body = c;
        std::vector<VarId> xs = exit_vars(enc, e.src);
        std::vector<Term> stack;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            Term x = var("x" + std::to_string(i), enc.sort_of(xs[i]));
            stack.push_back(x);
            body.push_back(x);
        }
        std::map<Extra, Term> extra;
        for (Extra k : extras_of(enc, e.src)) {
            Term x = var(extra_name(k), Sort::integer());
            extra.emplace(k, x);
            body.push_back(x);
        }

        HornClause cl;
        cl.family = Family::InvE;
        cl.edge = e;
        cl.block = e.src;
        cl.body = {PredApp{enc.exit_pred(e.src), body}};
        cl.constraints.push_back(eq(c[L::StatusField], int_lit(static_cast<int>(Status::Execute))));
        const Term start = int_lit(enc.cfg().blocks.at(e.dst).start);
        if (e.kind == EdgeKind::BranchTaken) cl.constraints.push_back(distinct(extra.at(Extra::Condition), int_lit(0)));
        if (e.kind == EdgeKind::BranchFall) cl.constraints.push_back(eq(extra.at(Extra::Condition), int_lit(0)));
        if (e.kind != EdgeKind::BranchFall && e.kind != EdgeKind::Fallthrough && extra.contains(Extra::JumpTarget))
            cl.constraints.push_back(eq(extra.at(Extra::JumpTarget), start));

        std::vector<Term> h = c;
        h[L::Pc] = start;
        for (std::size_t i = 0; i < dst.params.size() && i < stack.size(); ++i) {
            VarId from = xs[i], to = dst.params[i];
            Domain df = enc.domains()[from], dt = enc.domains()[to];
            if (df == dt) {
                h.push_back(stack[i]);
            } else if (auto k = enc.ssa().var(from).constant) {
                h.push_back(dt == Domain::BV256 ? bv_lit(bigint(*k)) : int_lit(bigint(*k)));
            } else if (dt == Domain::BV256) {
                h.push_back(int2bv(stack[i]));
            } else {
                Term top = var("n" + std::to_string(i), Sort::integer());
                cl.constraints.push_back(word_bounds(top));
                h.push_back(top);
            }
        }
        cl.head = PredApp{enc.entry_pred(e.dst), h};
        (void)src;
        out.push_back(std::move(cl));
    }
    return out;
}

std::vector<HornClause> encode_status(const Encoding& enc) {
    TransitionConfig cfg;
    cfg.layout = enc.layout();
    cfg.max_reentry = enc.options().max_reentry;
    cfg.entry_pred = enc.entry_pred(enc.cfg().entry);
    for (BlockId b : enc.blocks()) {
        Status s = enc.exit_status(b);
        if (s != Status::Stop && s != Status::Call) continue;
        ExitSite site;
        site.pred = enc.exit_pred(b);
        site.block = b;
        for (VarId v : exit_vars(enc, b)) site.stack_sorts.push_back(enc.sort_of(v));
        site.stack = site.stack_sorts.size();
        (s == Status::Stop ? cfg.stops : cfg.calls).push_back(std::move(site));
    }
    return status_transition_clauses(cfg);
}

namespace {

void locate(const Encoding& enc, HornClause& c) {
    if (!c.block) return;
    const auto& bb = enc.cfg().blocks.at(*c.block);
    c.pc_begin = bb.start;
    c.pc_end = bb.last_offset();
    const auto& sb = enc.ssa().blocks.at(*c.block);
    c.reads_storage = std::any_of(sb.instrs.begin(), sb.instrs.end(),
                                  [](const SsaInstr& si) { return si.ins.opcode == Opcode::SLOAD; });
    c.writes_storage = std::any_of(sb.instrs.begin(), sb.instrs.end(),
                                   [](const SsaInstr& si) { return si.ins.opcode == Opcode::SSTORE; });
}

void check_app(const ChcSystem& sys, const PredApp& app) {
    const Predicate& p = sys.predicate(app.pred);
    if (p.sorts.size() != app.args.size())
        throw std::logic_error("arity mismatch for " + app.pred + ": " + std::to_string(app.args.size()) + " vs " +
                               std::to_string(p.sorts.size()));
    for (std::size_t i = 0; i < p.sorts.size(); ++i)
        if (!(p.sorts[i] == app.args[i]->sort))
            throw std::logic_error("sort mismatch for " + app.pred + " argument " + p.arg_names[i]);
}

}  // namespace

ChcSystem assemble(const Encoding& enc, std::vector<HornClause> inv_v, std::vector<HornClause> inv_e,
                   std::vector<HornClause> inv_status, std::vector<HornClause> inv_safe) {
    ChcSystem sys;
    if (enc.blocks().empty() || !enc.encoded(enc.cfg().entry))
        throw std::logic_error("entry block is not encodable");
    for (BlockId b : enc.blocks()) {
        sys.predicates.push_back(enc.entry_predicate(b));
        sys.predicates.push_back(enc.exit_predicate(b));
    }
    // Return clauses read reent even when no Stop exit can produce it.
    bool uses_reent = std::any_of(inv_status.begin(), inv_status.end(), [](const HornClause& c) {
        return c.rule == StatusRule::Resume || c.rule == StatusRule::Return;
    });
    if (uses_reent) sys.predicates.push_back(reent_predicate());
    sys.predicates.push_back(err_predicate());

    sys.clauses.push_back(init_clause(enc.layout(), enc.entry_pred(enc.cfg().entry)));
    for (auto* part : {&inv_v, &inv_safe, &inv_e, &inv_status})
        for (auto& c : *part) sys.clauses.push_back(std::move(c));

    using namespace t;
    const Predicate err = err_predicate();
    HornClause query;
    query.family = Family::InvError;
    std::vector<Term> args;
    for (std::size_t i = 0; i < err.sorts.size(); ++i) args.push_back(var(err.arg_names[i], err.sorts[i]));
    query.body = {PredApp{err.name, args}};
    query.constraints = {eq(args[4], int_lit(static_cast<int>(Status::Error)))};
    sys.clauses.push_back(std::move(query));

    for (auto& c : sys.clauses) {
        locate(enc, c);
        for (const auto& app : c.body) check_app(sys, app);
        if (c.head) check_app(sys, *c.head);
    }
    for (BlockId b : enc.blocks()) {
        if (enc.cfg().unresolved.contains(b))
            sys.warnings.push_back("unresolved jump at block " + std::to_string(b) + ": exit has no successors");
        if (enc.cfg().invalid_jump.contains(b))
            sys.warnings.push_back("invalid jump target at block " + std::to_string(b) + ": exit has no successors");
    }
    for (const auto& w : enc.ssa().warnings) sys.warnings.push_back(w);
    return sys;
}

ChcSystem encode(const Encoding& enc) {
    return assemble(enc, encode_blocks(enc), encode_edges(enc), encode_status(enc), encode_safety(enc));
}

std::string emit_smt2(const ChcSystem& sys) {
    std::ostringstream os;
    os << "(set-logic HORN)\n";
    for (const auto& p : sys.predicates) {
        os << "(declare-fun " << p.name << " (";
        for (std::size_t i = 0; i < p.sorts.size(); ++i) os << (i ? " " : "") << p.sorts[i].smt();
        os << ") Bool)\n";
    }
    for (const auto& c : sys.clauses) {
        std::vector<std::string> parts;
        for (const auto& app : c.body) {
            if (app.args.empty()) {
                parts.push_back(app.pred);
                continue;
            }
            std::string s = "(" + app.pred;
            for (const auto& a : app.args) s += " " + to_smt(a);
            parts.push_back(s + ")");
        }
        for (const auto& k : c.constraints) parts.push_back(to_smt(k));
        std::string body;
        if (parts.empty()) body = "true";
        else if (parts.size() == 1) body = parts[0];
        else {
            body = "(and";
            for (const auto& p : parts) body += " " + p;
            body += ")";
        }
        std::string head = "false";
        if (c.head) {
            head = "(" + c.head->pred;
            for (const auto& a : c.head->args) head += " " + to_smt(a);
            head += ")";
        }
        auto vars = clause_vars(c);
        std::string impl = "(=> " + body + " " + head + ")";
        if (vars.empty()) {
            os << "(assert " << impl << ")\n";
            continue;
        }
        os << "(assert (forall (";
        for (std::size_t i = 0; i < vars.size(); ++i)
            os << (i ? " " : "") << '(' << vars[i]->name << ' ' << vars[i]->sort.smt() << ')';
        os << ") " << impl << "))\n";
    }
    os << "(check-sat)\n";
    return os.str();
}

}  // namespace ceihorn
