#include "replay.hpp"

#include <sstream>

#include "ceihorn/process.hpp"
#include "programs.hpp"

namespace oracle {

using namespace ceihorn;
using L = ContextLayout;

namespace {

std::string sort_text(Sort s) {
    switch (s.kind) {
        case SortKind::Bool: return "Bool";
        case SortKind::Int: return "Int";
        case SortKind::BV256: return "(_ BitVec 256)";
        case SortKind::IntArray: return "(Array Int Int)";
    }
    return "?";
}

std::string num(const bigint& n) { return n < 0 ? "(- " + bigint(-n).str() + ")" : n.str(); }

std::string value_text(const Value& v, Sort s) {
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (const bigint* n = std::get_if<bigint>(&v))
        return s == Sort::bv256() ? "(_ bv" + n->str() + " 256)" : num(*n);
    const auto& a = std::get<ArrayValue>(v);
    std::string out = "((as const (Array Int Int)) " + num(a.fallback) + ")";
    for (const auto& [k, x] : a.entries) out = "(store " + out + " " + num(k) + " " + num(x) + ")";
    return out;
}

ArrayValue storage_value(const std::map<u256, u256>& initial, const std::map<u256, u256>& now) {
    ArrayValue a;
    a.fallback = 0;
    for (const auto& [k, v] : initial) a.entries[bigint(k)] = bigint(v);
    for (const auto& [k, v] : now) a.entries[bigint(k)] = bigint(v);
    return a;
}

}  // namespace

Replayer::Replayer(const Cfg& cfg, const Encoding& enc, const ChcSystem& sys, std::string solver)
    : cfg_(cfg), enc_(enc), sys_(sys), solver_(std::move(solver)) {
    for (std::size_t i = 0; i < sys.clauses.size(); ++i) {
        const HornClause& c = sys.clauses[i];
        if (c.family == Family::Init) init_clause_ = i;
        if (c.family == Family::InvV) block_clause_[c.head->pred] = i;
        if (c.family == Family::InvE) edge_clauses_[{c.edge->src, c.edge->dst}].push_back(i);
        if (c.rule == StatusRule::Skip) skip_clause_[c.body[0].pred] = i;
    }
}

bool Replayer::satisfiable(const HornClause& c, const Instance& inst) {
    std::ostringstream s;
    s << "(set-logic ALL)\n";
    for (const auto& v : clause_vars(c)) s << "(declare-fun " << v->name << " () " << sort_text(v->sort) << ")\n";
    auto pin = [&](const PredApp& app, const ArgValues& vals) {
        const Predicate& p = sys_.predicate(app.pred);
        for (std::size_t i = 0; i < app.args.size() && i < vals.size(); ++i)
            if (vals[i]) s << "(assert (= " << to_smt(app.args[i]) << " " << value_text(*vals[i], p.sorts[i]) << "))\n";
    };
    for (std::size_t k = 0; k < c.body.size() && k < inst.body.size(); ++k) pin(c.body[k], inst.body[k]);
    if (c.head) pin(*c.head, inst.head);
    for (const auto& k : c.constraints) s << "(assert " << to_smt(k) << ")\n";
    s << "(check-sat)\n";
    const std::string script = s.str();
    if (auto it = solved_.find(script); it != solved_.end()) return it->second;
    TempFile f("replay", script);
    ProcessResult r = run_process({solver_, f.path()}, std::chrono::seconds(30));
    bool sat = r.out.rfind("sat", 0) == 0;
    solved_[script] = sat;
    return sat;
}

Replayer::Outcome Replayer::check(std::size_t clause, const Instance& inst, Env* env) {
    const HornClause& c = sys_.clauses[clause];
    switch (check_instance(c, inst, env)) {
        case CheckResult::Holds: return Outcome::Holds;
        case CheckResult::Violated: return Outcome::Fails;
        case CheckResult::Undetermined: return satisfiable(c, inst) ? Outcome::Solved : Outcome::Fails;
    }
    return Outcome::Fails;
}

void Replayer::replay(const Bytes& code, const Run& run, ReplayStats& stats) {
    ++stats.runs;
    const std::set<std::size_t> lead = leaders(code);
    std::vector<std::size_t> starts;  // step index of each block entry
    for (std::size_t i = 0; i < run.steps.size(); ++i)
        if (lead.count(run.steps[i].pc)) starts.push_back(i);

    auto fail = [&](const std::string& what) {
        stats.failures.push_back(what + " (inputs: selector " +
                                 (run.msg.words.count(0) ? run.msg.words.at(0).str() : std::string("-")) +
                                 ", value " + run.msg.value.str() + ")");
    };

    std::vector<BlockId> original;
    for (std::size_t i : starts) {
        auto b = cfg_.block_at(run.steps[i].pc);
        if (!b || cfg_.blocks.at(*b).start != run.steps[i].pc) {
            fail("no block starts at " + std::to_string(run.steps[i].pc));
            return;
        }
        original.push_back(*b);
    }
    auto lifted = lift_trace(enc_.cfg(), original);
    if (!lifted) {
        fail("trace is not a walk of the layered CFG");
        return;
    }
    for (BlockId b : *lifted)
        if (!enc_.encoded(b)) {
            ++stats.skipped;
            return;
        }

    auto tally = [&](Outcome o, const std::string& what) {
        if (o == Outcome::Holds) ++stats.holds;
        else if (o == Outcome::Solved) ++stats.solved;
        else fail(what);
        return o != Outcome::Fails;
    };

    const ContextLayout& layout = enc_.layout();
    const Value initial = storage_value(run.initial_storage, {});
    bigint path = 0;
    bool called = false;
    std::vector<bool> rd(layout.read_flags(), false);

    auto context = [&](const Value& storage, std::size_t pc, Status status) {
        ArgValues v(layout.size());
        v[L::Safe] = true;
        v[L::Reentry] = bigint(0);
        v[L::Path] = path;
        v[L::Storage] = storage;
        v[L::StorageIn] = initial;
        v[L::ReentryIn] = bigint(0);
        v[L::Nested] = false;
        v[L::Attacker] = bigint(kAttacker);
        v[L::Gas] = bigint(kGasLeft);
        v[L::Caller] = bigint(run.msg.caller);
        v[L::CallValue] = bigint(run.msg.value);
        v[L::CallDataSize] = bigint(run.msg.size);
        v[L::Called] = called;
        v[L::Reentered] = false;
        v[L::Pc] = bigint(pc);
        v[L::StatusField] = bigint(static_cast<int>(status));
        for (std::size_t k = 0; k < rd.size(); ++k) v[layout.read_flag(k)] = bool(rd[k]);
        return v;
    };
    auto stack_prefix = [](ArgValues& v, const std::vector<u256>& stack, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i)
            v.push_back(i < stack.size() ? std::optional<Value>(bigint(stack[i])) : std::nullopt);
    };
    // Read flags follow the clauses; only their evaluation is taken over.
    auto take_flags = [&](const HornClause& c, const Env& env) {
        for (std::size_t k = 0; k < rd.size(); ++k) {
            auto v = eval(c.head->args[layout.read_flag(k)], env);
            if (v) rd[k] = std::get<bool>(*v);
        }
    };

    const BlockId entry = (*lifted)[0];
    {
        Instance init;
        init.head = context(initial, 0, Status::Execute);
        stack_prefix(init.head, {}, enc_.ssa().blocks.at(entry).params.size());
        if (!tally(check(init_clause_, init, nullptr), "init")) return;
    }
    ArgValues cur = context(initial, 0, Status::Execute);
    stack_prefix(cur, {}, enc_.ssa().blocks.at(entry).params.size());

    for (std::size_t k = 0; k < lifted->size(); ++k) {
        const BlockId b = (*lifted)[k];
        const BasicBlock& bb = enc_.cfg().blocks.at(b);
        const bool last = k + 1 == lifted->size();
        const std::size_t end = last ? run.steps.size() : starts[k + 1];
        const Snapshot& tail = run.steps[end - 1];
        if (tail.pc != bb.last_offset()) return;  // run stopped inside the block
        if (last && !(run.result.halt == Halt::Stop || run.result.halt == Halt::Return ||
                      run.result.halt == Halt::Revert))
            return;
        if (last && run.result.pc != bb.last_offset()) return;

        const std::vector<u256>& after = last ? run.result.stack : run.steps[end].stack;
        const auto& after_storage = last ? run.final_storage : run.steps[end].storage;
        const Value storage = storage_value(run.initial_storage, after_storage);
        const Predicate& out_pred = enc_.exit_predicate(b);
        const std::string where = "block " + std::to_string(b) + " @" + std::to_string(bb.start);

        Instance iv;
        iv.body = {cur};
        iv.head = context(storage, bb.last_offset(), enc_.exit_status(b));
        for (std::size_t k2 = 0; k2 < rd.size(); ++k2) iv.head[layout.read_flag(k2)] = std::nullopt;
        std::size_t stack_slots = out_pred.sorts.size() - layout.size();
        std::vector<std::optional<Value>> extras;
        for (std::size_t i = layout.size(); i < out_pred.arg_names.size(); ++i) {
            const std::string& n = out_pred.arg_names[i];
            if (n == "cond") extras.push_back(bigint(tail.stack.at(1)));
            else if (n == "jump_target") extras.push_back(bigint(tail.stack.at(0)));
            else if (n == "call_gas") extras.push_back(bigint(tail.stack.at(0)));
            else if (n == "call_addr") extras.push_back(bigint(tail.stack.at(1)));
            else continue;
            --stack_slots;
        }
        stack_prefix(iv.head, after, stack_slots);
        for (auto& x : extras) iv.head.push_back(x);

        const std::size_t vclause = block_clause_.at(out_pred.name);
        Env env;
        if (!tally(check(vclause, iv, &env), "Inv_V at " + where)) return;
        take_flags(sys_.clauses[vclause], env);
        ArgValues exit = iv.head;
        for (std::size_t k2 = 0; k2 < rd.size(); ++k2) exit[layout.read_flag(k2)] = bool(rd[k2]);

        if (enc_.exit_status(b) == Status::Call) {
            Instance sk;
            sk.body = {exit};
            ++path;
            called = true;
            sk.head = exit;
            sk.head[L::Path] = path;
            sk.head[L::Called] = true;
            sk.head[L::StatusField] = bigint(static_cast<int>(Status::Execute));
            auto it = skip_clause_.find(out_pred.name);
            if (it == skip_clause_.end()) {
                fail("no skip clause for " + where);
                return;
            }
            if (!tally(check(it->second, sk, nullptr), "Skip at " + where)) return;
            exit = sk.head;
        }
        if (last) return;

        const BlockId next = (*lifted)[k + 1];
        const BasicBlock& nb = enc_.cfg().blocks.at(next);
        Instance ie;
        ie.body = {exit};
        ie.head = context(storage, nb.start, Status::Execute);
        stack_prefix(ie.head, after, enc_.ssa().blocks.at(next).params.size());
        bool matched = false;
        for (std::size_t ci : edge_clauses_[{b, next}]) {
            Outcome o = check(ci, ie, nullptr);
            if (o == Outcome::Fails) continue;
            tally(o, "");
            matched = true;
            break;
        }
        if (!matched) {
            fail("Inv_E " + where + " -> block " + std::to_string(next));
            return;
        }
        cur = ie.head;
    }
}

}  // namespace oracle
