#include "fidelity.hpp"

#include <memory>
#include <sstream>
#include <random>

#include "ceihorn/assembler.hpp"
#include "ceihorn/cfgopt.hpp"
#include "ceihorn/statemodel.hpp"
#include "ceihorn/typeinfer.hpp"
#include "replay.hpp"

namespace oracle {

using namespace ceihorn;

namespace {

class Words {
  public:
    explicit Words(std::uint32_t seed) : rng_(seed) {}

    u256 next() {
        switch (pick(8)) {
            case 0: return 0;
            case 1: return 1;
            case 2: return u256(word_max());
            case 3: return u256(word_max()) - pick(3);
            case 4: return u256(1) << 255;
            case 5: return pick(1000);
            default: {
                u256 w = 0;
                for (int i = 0; i < 4; ++i) w = (w << 64) | rng_();
                return w;
            }
        }
    }
    u256 small() { return pick(20); }
    std::uint64_t pick(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }

  private:
    std::mt19937_64 rng_;
};

std::string hex(const u256& v) {
    std::ostringstream s;
    s << std::hex << v;
    return "0x" + s.str();
}

std::string list(const std::vector<u256>& xs) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : " ") + hex(x);
    return "[" + out + "]";
}

// Rules whose result is a term over the operands and frame values.
void value_rules(std::size_t n, Words& w, FidelityReport& rep) {
    const Opcode arith[] = {Opcode::ADD, Opcode::MUL,    Opcode::SUB, Opcode::DIV, Opcode::MOD, Opcode::ADDMOD,
                            Opcode::MULMOD, Opcode::LT,  Opcode::GT,  Opcode::EQ,  Opcode::ISZERO};
    const Term caller = t::var("caller", Sort::integer());
    const Term value = t::var("callvalue", Sort::integer());
    const Term size = t::var("cdsize", Sort::integer());
    const FrameTerms frame{t::var("st", Sort::int_array()), caller, value, size};

    auto check = [&](Opcode op, const Instruction& ins, const std::vector<Term>& ops, Env env, const Message& msg,
                     const std::vector<u256>& operands, const u256& expected) {
        env["caller"] = bigint(msg.caller);
        env["callvalue"] = bigint(msg.value);
        env["cdsize"] = bigint(msg.size);
        auto term = precise_result(ins, ops, frame);
        std::optional<Value> got = term ? eval(*term, env) : std::nullopt;
        ++rep.instances;
        if (!got || std::get<bigint>(*got) != bigint(expected))
            rep.violations.push_back(std::string(mnemonic(op)) + " on " + list(operands) + ": expected " +
                                     hex(expected) + ", got " +
                                     (got ? std::get<bigint>(*got).str() : std::string("nothing")));
    };
    auto message = [&]() {
        Message m;
        m.caller = w.next() & ((u256(1) << 160) - 1);
        m.value = w.next();
        m.size = w.next();
        return m;
    };

    for (Opcode op : arith) {
        ++rep.opcodes;
        const int arity = stack_effect(op).pops;
        for (std::size_t i = 0; i < n; ++i) {
            // A quarter of the instances go through constant folding.
            const bool literal = w.pick(4) == 0;
            std::vector<u256> operands;
            std::vector<Term> ops;
            Env env;
            for (int k = 0; k < arity; ++k) {
                operands.push_back(w.pick(3) == 0 ? w.small() : w.next());
                const std::string name = "x" + std::to_string(k);
                ops.push_back(literal ? t::int_lit(bigint(operands.back())) : t::var(name, Sort::integer()));
                env[name] = bigint(operands.back());
            }
            Message msg = message();
            Instruction ins;
            ins.opcode = op;
            check(op, ins, ops, env, msg, operands, apply(static_cast<std::uint8_t>(op), operands, msg).at(0));
        }
    }

    ++rep.opcodes;
    for (std::size_t i = 0; i < n; ++i) {
        // Base free, exponent a small literal; sometimes both literal.
        const bool both = w.pick(4) == 0;
        const u256 base = w.next();
        const u256 k = both ? w.next() : u256(w.pick(17));
        Instruction ins;
        ins.opcode = Opcode::EXP;
        Env env{{"x0", bigint(base)}};
        std::vector<Term> ops{both ? t::int_lit(bigint(base)) : t::var("x0", Sort::integer()), t::int_lit(bigint(k))};
        Message msg;
        check(Opcode::EXP, ins, ops, env, msg, {base, k}, apply(0x0a, {base, k}).at(0));
    }

    for (Opcode op : {Opcode::CALLER, Opcode::CALLVALUE, Opcode::CALLDATASIZE, Opcode::PC}) {
        ++rep.opcodes;
        for (std::size_t i = 0; i < n; ++i) {
            Message msg = message();
            Instruction ins;
            ins.opcode = op;
            ins.offset = w.pick(25000);
            check(op, ins, {}, {}, msg, {}, apply(static_cast<std::uint8_t>(op), {}, msg, ins.offset).at(0));
        }
    }

    for (int width = 0; width <= 32; ++width) {
        ++rep.opcodes;
        const auto op = static_cast<Opcode>(0x5f + width);
        for (std::size_t i = 0; i < n; ++i) {
            Bytes code{static_cast<std::uint8_t>(0x5f + width)};
            const u256 v = w.next();
            for (int b = width - 1; b >= 0; --b) code.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
            code.push_back(0x00);
            const Instruction ins = disassemble(code).at(0);
            Storage st;
            FrameResult r = run_frame(code, Message{}, st);
            check(op, ins, {}, {}, Message{}, {}, r.stack.at(0));
        }
    }
}

// Rules checked through the clauses of a one- or two-block program.
struct Harness {
    Bytes code;
    Cfg cfg;
    LayeredCfg layered;
    SsaForm ssa;
    DomainAssignment domains;
    std::unique_ptr<Encoding> enc;
    ChcSystem sys;
    std::unique_ptr<Replayer> replayer;

    Harness(const std::string& source, const std::string& solver) : code(assemble(source)) {
        cfg = build_cfg(code);
        layered = single_layer(cfg);
        ssa = build_ssa(layered);
        domains = infer_types(ssa, layered);
        enc = std::make_unique<Encoding>(layered, ssa, domains);
        sys = encode(*enc);
        replayer = std::make_unique<Replayer>(cfg, *enc, sys, solver);
    }
};

std::string loads(int count) {
    std::string s;
    for (int i = 0; i < count; ++i) s += "PUSH " + std::to_string(32 * i) + " CALLDATALOAD\n";
    return s;
}

void clause_rules(std::size_t n, Words& w, const std::string& solver, FidelityReport& rep) {
    std::vector<std::pair<std::string, std::string>> cases;
    for (int k = 1; k <= 16; ++k) cases.emplace_back("DUP" + std::to_string(k), loads(16) + "DUP" + std::to_string(k) + " STOP");
    for (int k = 1; k <= 16; ++k)
        cases.emplace_back("SWAP" + std::to_string(k), loads(17) + "SWAP" + std::to_string(k) + " STOP");
    // Operands stay on the stack so that no value is left existential.
    cases.emplace_back("POP", loads(3) + "DUP2 POP STOP");
    cases.emplace_back("SLOAD", loads(2) + "DUP1 SLOAD STOP");
    cases.emplace_back("SSTORE", loads(3) + "DUP2 DUP2 SSTORE DUP1 SLOAD DUP3 SLOAD STOP");
    cases.emplace_back("JUMP", loads(1) + "PUSH t JUMP PUSH 1 STOP t: PUSH 2 STOP");
    cases.emplace_back("JUMPI", loads(2) + "PUSH t JUMPI PUSH 1 STOP t: PUSH 2 STOP");
    cases.emplace_back("JUMPDEST", loads(2) + "t: SWAP1 STOP");

    for (const auto& [name, source] : cases) {
        ++rep.opcodes;
        Harness h(source, solver);
        for (std::size_t i = 0; i < n; ++i) {
            Message msg;
            msg.caller = kAttacker;
            msg.value = w.next();
            msg.size = 32 * 17;
            for (int k = 0; k < 17; ++k) msg.words[32 * k] = w.pick(3) == 0 ? w.small() : w.next();
            std::map<u256, u256> storage;
            // Keys come from calldata; some are preloaded.
            for (int k = 0; k < 3; ++k)
                if (w.pick(2) == 0) storage[msg.words[32 * k]] = w.next();
            if (name == "JUMPI" && w.pick(3) == 0) msg.words[0] = 0;

            ReplayStats stats;
            const Run run = run_once(h.code, msg, storage);
            h.replayer->replay(h.code, run, stats);
            ++rep.instances;
            if (stats.skipped || stats.instances() == 0)
                rep.violations.push_back(name + ": run was not replayed");
            for (const auto& f : stats.failures) rep.violations.push_back(name + ": " + f);
        }
    }
}

}  // namespace

FidelityReport precise_fidelity(std::size_t per_opcode, std::uint32_t seed, const std::string& solver) {
    FidelityReport rep;
    Words w(seed);
    value_rules(per_opcode, w, rep);
    clause_rules(per_opcode, w, solver, rep);
    return rep;
}

}  // namespace oracle
