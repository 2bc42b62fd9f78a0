#include <gtest/gtest.h>

#include <set>

#include "ceihorn/assembler.hpp"
#include "ceihorn/chc.hpp"
#include "ceihorn/cfgopt.hpp"
#include "ceihorn/statemodel.hpp"
#include "ceihorn/typeinfer.hpp"
#include "fidelity.hpp"
#include "pipeline.hpp"
#include "programs.hpp"

using namespace ceihorn;
using L = ContextLayout;
using oracle::Pipeline;

namespace {

Opcode op_of(std::uint8_t byte) { return disassemble(Bytes{byte}).at(0).opcode; }

std::set<Opcode> named(std::initializer_list<const char*> names) {
    std::set<Opcode> out;
    for (const char* n : names) out.insert(*opcode_from_mnemonic(n));
    return out;
}

std::set<Opcode> range(std::uint8_t first, std::uint8_t last) {
    std::set<Opcode> out;
    for (int b = first; b <= last; ++b) out.insert(static_cast<Opcode>(b));
    return out;
}

// ---- status transitions over a hand-made configuration --------------------

constexpr long kAttacker = 0xA77AC4;

TransitionConfig config(std::size_t max_reentry) {
    TransitionConfig c;
    c.layout = ContextLayout(1);
    c.max_reentry = max_reentry;
    c.entry_pred = "entry";
    c.stops = {ExitSite{"stop_exit", 1, 0, {}}};
    c.calls = {ExitSite{"call_exit", 2, 1, {Sort::integer()}}};
    return c;
}

const HornClause& rule(const std::vector<HornClause>& clauses, StatusRule r) {
    for (const auto& c : clauses)
        if (c.rule == r) return c;
    throw std::out_of_range("rule not emitted");
}

ArgValues context(const ContextLayout& layout, bool safe, long reentry, bool nested, Status status) {
    ArgValues v(layout.size());
    ArrayValue st;
    st.fallback = 0;
    v[L::Safe] = safe;
    v[L::Reentry] = bigint(reentry);
    v[L::Path] = bigint(3);
    v[L::Storage] = st;
    v[L::StorageIn] = st;
    v[L::ReentryIn] = bigint(reentry);
    v[L::Nested] = nested;
    v[L::Attacker] = bigint(kAttacker);
    v[L::Gas] = bigint(50000);
    v[L::Caller] = bigint(kAttacker);
    v[L::CallValue] = bigint(0);
    v[L::CallDataSize] = bigint(4);
    v[L::Called] = false;
    v[L::Reentered] = false;
    v[L::Pc] = bigint(17);
    v[L::StatusField] = bigint(static_cast<int>(status));
    v[layout.read_flag(0)] = true;
    return v;
}

ArgValues call_exit(const ContextLayout& layout, long reentry, long gas, long addr) {
    ArgValues v = context(layout, true, reentry, false, Status::Call);
    v.push_back(bigint(0));  // stack top
    v.push_back(bigint(gas));
    v.push_back(bigint(addr));
    return v;
}

// Head values for the free message fields of a fresh frame.
ArgValues fresh_head(const ContextLayout& layout) {
    ArgValues h(layout.size());
    h[L::Gas] = bigint(100000);
    h[L::CallValue] = bigint(0);
    h[L::CallDataSize] = bigint(4);
    return h;
}

}  // namespace

TEST(RuleFor, KindIsTotalAndEffectMatchesTable) {
    for (int b = 0; b < 256; ++b) {
        const Opcode op = op_of(static_cast<std::uint8_t>(b));
        SemanticRule r = rule_for(op);
        EXPECT_EQ(r.opcode, op);
        EXPECT_EQ(r.effect, stack_effect(op)) << b;
        const bool has_status = r.kind == RuleKind::Terminator || r.kind == RuleKind::External;
        EXPECT_EQ(r.status.has_value(), has_status) << b;
    }
}

TEST(RuleFor, ClassificationOfNamedOpcodes) {
    std::set<Opcode> precise = named({"ADD", "SUB", "MUL", "DIV", "MOD", "ADDMOD", "MULMOD", "EXP", "LT", "GT", "EQ",
                                      "ISZERO", "POP", "SLOAD", "SSTORE", "CALLER", "CALLVALUE", "CALLDATASIZE"});
    precise.merge(range(0x5f, 0x9f));  // PUSH0..PUSH32, DUP1..16, SWAP1..16
    for (Opcode op : precise) EXPECT_EQ(rule_for(op).kind, RuleKind::Precise) << mnemonic(op);

    for (Opcode op : named({"AND", "OR", "XOR", "NOT", "BYTE", "SHL", "SHR", "SAR", "SHA3", "BALANCE", "CALLDATALOAD",
                            "MLOAD", "GAS", "ADDRESS", "ORIGIN", "TIMESTAMP", "NUMBER"}))
        EXPECT_EQ(rule_for(op).kind, RuleKind::Top) << mnemonic(op);

    for (Opcode op : named({"CALL", "CALLCODE", "DELEGATECALL", "STATICCALL"})) {
        EXPECT_EQ(rule_for(op).kind, RuleKind::External) << mnemonic(op);
        EXPECT_EQ(rule_for(op).status, Status::Call);
    }
}

TEST(RuleFor, TerminatorStatuses) {
    EXPECT_EQ(rule_for(Opcode::STOP).status, Status::Stop);
    EXPECT_EQ(rule_for(Opcode::RETURN).status, Status::Stop);
    EXPECT_EQ(rule_for(Opcode::REVERT).status, Status::Revert);
    for (Opcode op : {Opcode::STOP, Opcode::RETURN, Opcode::REVERT, Opcode::INVALID, Opcode::SELFDESTRUCT})
        EXPECT_EQ(rule_for(op).kind, RuleKind::Terminator) << mnemonic(op);
    // Neither reaches the safety check.
    EXPECT_NE(rule_for(Opcode::INVALID).status, Status::Stop);
    EXPECT_NE(rule_for(Opcode::SELFDESTRUCT).status, Status::Stop);
}

TEST(PreciseResult, AddWrapsModuloWordSize) {
    Instruction add;
    add.opcode = Opcode::ADD;
    const Term a = t::var("a", Sort::integer()), b = t::var("b", Sort::integer());
    auto term = precise_result(add, {a, b}, FrameTerms{});
    ASSERT_TRUE(term);
    Env env{{"a", word_max()}, {"b", bigint(1)}};
    EXPECT_EQ(std::get<bigint>(*eval(*term, env)), 0);
    env = {{"a", bigint(40)}, {"b", bigint(2)}};
    EXPECT_EQ(std::get<bigint>(*eval(*term, env)), 42);
}

TEST(PreciseResult, AndIsTop) {
    Instruction ins;
    ins.opcode = Opcode::AND;
    EXPECT_FALSE(precise_result(ins, {t::var("a", Sort::integer()), t::var("b", Sort::integer())}, FrameTerms{}));
}

TEST(PreciseResult, PushOneSeven) {
    const Instruction ins = disassemble(Bytes{0x60, 0x07}).at(0);
    EXPECT_EQ(ins.size, 2u);
    auto term = precise_result(ins, {}, FrameTerms{});
    ASSERT_TRUE(term);
    EXPECT_EQ(std::get<bigint>(*eval(*term, {})), 7);
}

TEST(PreciseResult, ExpWithLargeFreeExponentIsTop) {
    Instruction ins;
    ins.opcode = Opcode::EXP;
    EXPECT_FALSE(precise_result(ins, {t::var("a", Sort::integer()), t::var("k", Sort::integer())}, FrameTerms{}));
}

TEST(PreciseRules, AgreeWithReferenceInterpreter) {
    oracle::FidelityReport rep = oracle::precise_fidelity(150, 11, CEIHORN_Z3);
    EXPECT_GT(rep.opcodes, 80u);
    EXPECT_EQ(rep.instances, rep.opcodes * 150);
    for (std::size_t i = 0; i < rep.violations.size() && i < 10; ++i) ADD_FAILURE() << rep.violations[i];
}

TEST(StatusTransitions, UnsafeStopWithoutParentReachesError) {
    const auto clauses = status_transition_clauses(config(2));
    const HornClause& c = rule(clauses, StatusRule::StopUnsafe);
    const ContextLayout layout(1);
    EXPECT_EQ(c.head->pred, kErrPred);
    EXPECT_EQ(check_instance(c, {{context(layout, false, 1, false, Status::Stop)}, {}}), CheckResult::Holds);
    EXPECT_EQ(check_instance(c, {{context(layout, true, 1, false, Status::Stop)}, {}}), CheckResult::Violated);
    EXPECT_EQ(check_instance(c, {{context(layout, false, 1, true, Status::Stop)}, {}}), CheckResult::Violated);
}

TEST(StatusTransitions, RestartStopsAtTheBound) {
    const auto clauses = status_transition_clauses(config(2));
    const HornClause& c = rule(clauses, StatusRule::Restart);
    const ContextLayout layout(1);
    Env env;
    ASSERT_EQ(check_instance(c, {{context(layout, true, 1, false, Status::Stop)}, fresh_head(layout)}, &env),
              CheckResult::Holds);
    EXPECT_EQ(std::get<bigint>(*eval(c.head->args[L::Reentry], env)), 2);
    EXPECT_EQ(std::get<bigint>(*eval(c.head->args[L::Pc], env)), 0);
    EXPECT_EQ(std::get<bigint>(*eval(c.head->args[L::Caller], env)), kAttacker);
    EXPECT_EQ(check_instance(c, {{context(layout, true, 2, false, Status::Stop)}, fresh_head(layout)}),
              CheckResult::Violated);
}

TEST(StatusTransitions, LowGasCallOnlySkips) {
    const auto clauses = status_transition_clauses(config(2));
    const ContextLayout layout(1);
    const HornClause& reenter = rule(clauses, StatusRule::Reenter);
    const HornClause& skip = rule(clauses, StatusRule::Skip);

    EXPECT_EQ(check_instance(reenter, {{call_exit(layout, 0, 2300, kAttacker)}, fresh_head(layout)}),
              CheckResult::Violated);
    ArgValues skipped(layout.size());
    skipped.push_back(bigint(1));
    EXPECT_EQ(check_instance(skip, {{call_exit(layout, 0, 2300, kAttacker)}, skipped}), CheckResult::Holds);

    Env env;
    EXPECT_EQ(check_instance(reenter, {{call_exit(layout, 0, 2301, kAttacker)}, fresh_head(layout)}, &env),
              CheckResult::Holds);
    EXPECT_EQ(std::get<bool>(*eval(reenter.head->args[L::Nested], env)), true);
    EXPECT_EQ(std::get<bigint>(*eval(reenter.head->args[L::Reentry], env)), 1);
    EXPECT_EQ(check_instance(reenter, {{call_exit(layout, 0, 2301, kAttacker + 1)}, fresh_head(layout)}),
              CheckResult::Violated);
    // One callback frame per chain within the bound.
    EXPECT_EQ(check_instance(reenter, {{call_exit(layout, 2, 2301, kAttacker)}, fresh_head(layout)}),
              CheckResult::Violated);
}

TEST(StatusTransitions, ResumedCallsContinueInExecute) {
    const auto clauses = status_transition_clauses(config(2));
    for (StatusRule r : {StatusRule::Return, StatusRule::Skip}) {
        const HornClause& c = rule(clauses, r);
        ASSERT_TRUE(c.head);
        EXPECT_EQ(to_smt(c.head->args[L::StatusField]), "0") << to_string(r);
        EXPECT_EQ(to_smt(c.head->args[L::Called]), "true") << to_string(r);
        EXPECT_EQ(c.head->pred, "call_exit");
    }
}

TEST(StatusTransitions, BodiesAreStopOrCall) {
    for (std::size_t bound : {0u, 1u, 2u, 3u}) {
        for (const auto& c : status_transition_clauses(config(bound))) {
            std::size_t guards = 0;
            for (const auto& k : c.constraints) {
                const std::string s = to_smt(k);
                if (s == "(= status 1)" || s == "(= status 3)") ++guards;
                EXPECT_NE(s, "(= status 2)");
            }
            EXPECT_EQ(guards, 1u) << to_string(c.rule);
        }
    }
}

TEST(StatusTransitions, NoReentryWithZeroBound) {
    for (const auto& c : status_transition_clauses(config(0)))
        EXPECT_TRUE(c.rule == StatusRule::StopUnsafe || c.rule == StatusRule::Skip) << to_string(c.rule);
}

TEST(StatusTransitions, StopAndReturnAreClauseIdentical) {
    Pipeline stop(std::string("PUSH 0 PUSH 0 POP POP STOP"));
    Pipeline ret(std::string("PUSH 0 PUSH 0 RETURN"));
    auto status_text = [](const ChcSystem& sys) {
        std::vector<std::string> out;
        for (const auto& c : sys.clauses) {
            if (c.family != Family::InvStatus) continue;
            std::string s = std::string(to_string(c.rule)) + ":";
            for (const auto& k : c.constraints) s += to_smt(k) + ";";
            if (c.head)
                for (const auto& a : c.head->args) s += to_smt(a) + ",";
            out.push_back(s);
        }
        return out;
    };
    EXPECT_EQ(stop.enc->exit_status(stop.layered.entry), Status::Stop);
    EXPECT_EQ(ret.enc->exit_status(ret.layered.entry), Status::Stop);
    EXPECT_FALSE(status_text(stop.sys).empty());
    EXPECT_EQ(status_text(stop.sys), status_text(ret.sys));
}

TEST(StatusTransitions, RevertEndsTheChain) {
    std::vector<Bytes> codes;
    for (const auto& f : oracle::corpus_files()) codes.push_back(f.code);
    for (std::uint32_t s = 900; s < 960; ++s) codes.push_back(oracle::random_program(s, {40, 40, true}).code);
    std::size_t reverts = 0;
    for (const Bytes& code : codes) {
        Pipeline p(code);
        for (const auto& c : p.sys.clauses) {
            for (const auto& app : c.body) {
                const Predicate& pred = p.sys.predicate(app.pred);
                if (!pred.exit || !pred.block) continue;
                const Status st = p.enc->exit_status(*pred.block);
                if (st == Status::Revert || st == Status::Error) {
                    ++reverts;
                    ADD_FAILURE() << "clause consumes a terminated frame at block " << *pred.block;
                }
            }
        }
    }
    EXPECT_EQ(reverts, 0u);
}
