#include "ceihorn/bytecode.hpp"

#include <array>
#include <cctype>
#include <map>
#include <sstream>

namespace ceihorn {
namespace {

struct OpInfo {
    std::string_view name;
    int pops = 0;
    int pushes = 0;
    bool defined = false;
};

std::array<OpInfo, 256> build_table() {
    std::array<OpInfo, 256> t{};
    auto def = [&](int b, std::string_view n, int pops, int pushes) {
        t[b] = OpInfo{n, pops, pushes, true};
    };
    def(0x00, "STOP", 0, 0);
    def(0x01, "ADD", 2, 1);
    def(0x02, "MUL", 2, 1);
    def(0x03, "SUB", 2, 1);
    def(0x04, "DIV", 2, 1);
    def(0x05, "SDIV", 2, 1);
    def(0x06, "MOD", 2, 1);
    def(0x07, "SMOD", 2, 1);
    def(0x08, "ADDMOD", 3, 1);
    def(0x09, "MULMOD", 3, 1);
    def(0x0a, "EXP", 2, 1);
    def(0x0b, "SIGNEXTEND", 2, 1);
    def(0x10, "LT", 2, 1);
    def(0x11, "GT", 2, 1);
    def(0x12, "SLT", 2, 1);
    def(0x13, "SGT", 2, 1);
    def(0x14, "EQ", 2, 1);
    def(0x15, "ISZERO", 1, 1);
    def(0x16, "AND", 2, 1);
    def(0x17, "OR", 2, 1);
    def(0x18, "XOR", 2, 1);
    def(0x19, "NOT", 1, 1);
    def(0x1a, "BYTE", 2, 1);
    def(0x1b, "SHL", 2, 1);
    def(0x1c, "SHR", 2, 1);
    def(0x1d, "SAR", 2, 1);
    def(0x20, "SHA3", 2, 1);
    def(0x30, "ADDRESS", 0, 1);
    def(0x31, "BALANCE", 1, 1);
    def(0x32, "ORIGIN", 0, 1);
    def(0x33, "CALLER", 0, 1);
    def(0x34, "CALLVALUE", 0, 1);
    def(0x35, "CALLDATALOAD", 1, 1);
    def(0x36, "CALLDATASIZE", 0, 1);
    def(0x37, "CALLDATACOPY", 3, 0);
    def(0x38, "CODESIZE", 0, 1);
    def(0x39, "CODECOPY", 3, 0);
    def(0x3a, "GASPRICE", 0, 1);
    def(0x3b, "EXTCODESIZE", 1, 1);
    def(0x3c, "EXTCODECOPY", 4, 0);
    def(0x3d, "RETURNDATASIZE", 0, 1);
    def(0x3e, "RETURNDATACOPY", 3, 0);
    def(0x3f, "EXTCODEHASH", 1, 1);
    def(0x40, "BLOCKHASH", 1, 1);
    def(0x41, "COINBASE", 0, 1);
    def(0x42, "TIMESTAMP", 0, 1);
    def(0x43, "NUMBER", 0, 1);
    def(0x44, "PREVRANDAO", 0, 1);
    def(0x45, "GASLIMIT", 0, 1);
    def(0x46, "CHAINID", 0, 1);
    def(0x47, "SELFBALANCE", 0, 1);
    def(0x48, "BASEFEE", 0, 1);
    def(0x50, "POP", 1, 0);
    def(0x51, "MLOAD", 1, 1);
    def(0x52, "MSTORE", 2, 0);
    def(0x53, "MSTORE8", 2, 0);
    def(0x54, "SLOAD", 1, 1);
    def(0x55, "SSTORE", 2, 0);
    def(0x56, "JUMP", 1, 0);
    def(0x57, "JUMPI", 2, 0);
    def(0x58, "PC", 0, 1);
    def(0x59, "MSIZE", 0, 1);
    def(0x5a, "GAS", 0, 1);
    def(0x5b, "JUMPDEST", 0, 0);
    def(0x5f, "PUSH0", 0, 1);
    static const std::array<std::string, 32> push_names = [] {
        std::array<std::string, 32> n;
        for (int i = 0; i < 32; ++i) n[i] = "PUSH" + std::to_string(i + 1);
        return n;
    }();
    static const std::array<std::string, 16> dup_names = [] {
        std::array<std::string, 16> n;
        for (int i = 0; i < 16; ++i) n[i] = "DUP" + std::to_string(i + 1);
        return n;
    }();
    static const std::array<std::string, 16> swap_names = [] {
        std::array<std::string, 16> n;
        for (int i = 0; i < 16; ++i) n[i] = "SWAP" + std::to_string(i + 1);
        return n;
    }();
    static const std::array<std::string, 5> log_names = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};
    for (int i = 0; i < 32; ++i) def(0x60 + i, push_names[i], 0, 1);
    for (int i = 0; i < 16; ++i) def(0x80 + i, dup_names[i], i + 1, i + 2);
    for (int i = 0; i < 16; ++i) def(0x90 + i, swap_names[i], i + 2, i + 2);
    for (int i = 0; i < 5; ++i) def(0xa0 + i, log_names[i], i + 2, 0);
    def(0xf0, "CREATE", 3, 1);
    def(0xf1, "CALL", 7, 1);
    def(0xf2, "CALLCODE", 7, 1);
    def(0xf3, "RETURN", 2, 0);
    def(0xf4, "DELEGATECALL", 6, 1);
    def(0xf5, "CREATE2", 4, 1);
    def(0xfa, "STATICCALL", 6, 1);
    def(0xfd, "REVERT", 2, 0);
    def(0xfe, "INVALID", 0, 0);
    def(0xff, "SELFDESTRUCT", 1, 0);
    return t;
}

const std::array<OpInfo, 256>& table() {
    static const std::array<OpInfo, 256> t = build_table();
    return t;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

bool is_defined(std::uint8_t byte) { return table()[byte].defined; }

std::string_view mnemonic(Opcode op) {
    const auto& info = table()[static_cast<std::uint8_t>(op)];
    return info.defined ? info.name : std::string_view{"INVALID"};
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
    static const std::map<std::string, Opcode, std::less<>> by_name = [] {
        std::map<std::string, Opcode, std::less<>> m;
        for (int b = 0; b < 256; ++b)
            if (table()[b].defined) m.emplace(std::string(table()[b].name), static_cast<Opcode>(b));
        m.emplace("KECCAK256", Opcode::SHA3);
        m.emplace("DIFFICULTY", Opcode::PREVRANDAO);
        return m;
    }();
    std::string upper(name);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    auto it = by_name.find(upper);
    if (it == by_name.end()) return std::nullopt;
    return it->second;
}

StackEffect stack_effect(Opcode op) {
    const auto& info = table()[static_cast<std::uint8_t>(op)];
    if (!info.defined || op == Opcode::INVALID) return {0, 0};
    return {info.pops, info.pushes};
}

bool is_terminator(Opcode op) {
    switch (op) {
        case Opcode::JUMP:
        case Opcode::JUMPI:
        case Opcode::STOP:
        case Opcode::RETURN:
        case Opcode::REVERT:
        case Opcode::SELFDESTRUCT:
        case Opcode::INVALID:
            return true;
        default:
            return !is_defined(static_cast<std::uint8_t>(op));
    }
}

bool is_halting(Opcode op) {
    return is_terminator(op) && op != Opcode::JUMP && op != Opcode::JUMPI;
}

bool is_external_call(Opcode op) {
    return op == Opcode::CALL || op == Opcode::CALLCODE || op == Opcode::DELEGATECALL ||
           op == Opcode::STATICCALL;
}

bool is_bitwise(Opcode op) {
    switch (op) {
        case Opcode::AND:
        case Opcode::OR:
        case Opcode::XOR:
        case Opcode::NOT:
        case Opcode::BYTE:
        case Opcode::SHL:
        case Opcode::SHR:
        case Opcode::SAR:
            return true;
        default:
            return false;
    }
}

std::string Instruction::to_string() const {
    std::ostringstream os;
    os << std::hex << "0x" << offset << ' ';
    if (!is_defined(byte))
        os << "INVALID(0x" << static_cast<int>(byte) << ')';
    else
        os << mnemonic(opcode);
    if (operand) os << " 0x" << *operand;
    if (truncated) os << " (truncated)";
    return os.str();
}

Bytes parse_hex(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (text.size() - pos >= 2 && text[pos] == '0' && (text[pos + 1] == 'x' || text[pos + 1] == 'X'))
        pos += 2;
    Bytes out;
    int pending = -1;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        int v = hex_value(c);
        if (v < 0) {
            throw MalformedHex("non-hex character '" + std::string(1, c) + "' at position " +
                               std::to_string(pos));
        }
        if (pending < 0) {
            pending = v;
        } else {
            out.push_back(static_cast<std::uint8_t>(pending * 16 + v));
            pending = -1;
        }
    }
    if (pending >= 0) throw MalformedHex("odd number of hex digits");
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

std::vector<Instruction> disassemble(std::span<const std::uint8_t> code) {
    std::vector<Instruction> out;
    std::size_t pc = 0;
    while (pc < code.size()) {
        Instruction ins;
        ins.offset = pc;
        ins.byte = code[pc];
        ins.opcode = is_defined(ins.byte) ? static_cast<Opcode>(ins.byte) : Opcode::INVALID;
        int width = push_width(ins.opcode);
        if (width > 0) {
            u256 value = 0;
            std::size_t available = code.size() - pc - 1;
            for (int i = 0; i < width; ++i) {
                value <<= 8;
                if (static_cast<std::size_t>(i) < available) value |= code[pc + 1 + i];
            }
            ins.operand = value;
            ins.truncated = available < static_cast<std::size_t>(width);
            ins.size = 1 + std::min<std::size_t>(width, available);
        } else if (ins.opcode == Opcode::PUSH0) {
            ins.operand = u256{0};
        }
        out.push_back(ins);
        pc += ins.size;
    }
    return out;
}

Bytes reassemble(std::span<const Instruction> instructions) {
    Bytes out;
    for (const auto& ins : instructions) {
        out.push_back(ins.byte);
        int width = push_width(ins.opcode);
        if (width == 0) continue;
        std::size_t present = ins.size - 1;
        u256 v = *ins.operand;
        for (int i = 0; i < width; ++i) {
            auto shift = 8 * (width - 1 - i);
            auto b = static_cast<std::uint8_t>((v >> shift) & 0xff);
            if (static_cast<std::size_t>(i) < present) out.push_back(b);
        }
    }
    return out;
}

namespace {

// Constant-only interpreter state used to locate the runtime segment.
struct CtorState {
    std::size_t pc = 0;
    std::vector<std::optional<u256>> stack;  // back() is top
    // memory offset -> (code offset, length) for CODECOPY with constant bounds
    std::map<u256, std::pair<u256, u256>> copies;
    int steps = 0;
};

}  // namespace

Bytes extract_runtime(std::span<const std::uint8_t> creation_code) {
    auto instrs = disassemble(creation_code);
    std::map<std::size_t, std::size_t> index_of;
    for (std::size_t i = 0; i < instrs.size(); ++i) index_of[instrs[i].offset] = i;

    std::vector<CtorState> work{CtorState{}};
    int total_steps = 0;
    while (!work.empty()) {
        CtorState st = std::move(work.back());
        work.pop_back();
        while (true) {
            if (++total_steps > 200000 || ++st.steps > 20000) break;
            auto it = index_of.find(st.pc);
            if (it == index_of.end()) break;
            const Instruction& ins = instrs[it->second];
            auto pop = [&]() -> std::optional<u256> {
                if (st.stack.empty()) return std::nullopt;
                auto v = st.stack.back();
                st.stack.pop_back();
                return v;
            };
            Opcode op = ins.opcode;
            if (ins.operand) {
                st.stack.push_back(ins.operand);
            } else if (is_dup(op)) {
                auto n = static_cast<std::size_t>(dup_index(op));
                if (st.stack.size() < n) break;
                st.stack.push_back(st.stack[st.stack.size() - n]);
            } else if (is_swap(op)) {
                auto n = static_cast<std::size_t>(swap_index(op));
                if (st.stack.size() < n + 1) break;
                std::swap(st.stack.back(), st.stack[st.stack.size() - 1 - n]);
            } else if (op == Opcode::CODECOPY) {
                auto dst = pop(), src = pop(), len = pop();
                if (dst && src && len) st.copies[*dst] = {*src, *len};
            } else if (op == Opcode::RETURN) {
                auto off = pop(), len = pop();
                if (off && len) {
                    auto c = st.copies.find(*off);
                    if (c != st.copies.end() && c->second.second == *len) {
                        auto start = static_cast<std::size_t>(c->second.first);
                        auto n = static_cast<std::size_t>(c->second.second);
                        if (start + n <= creation_code.size())
                            return Bytes(creation_code.begin() + start, creation_code.begin() + start + n);
                    }
                }
                break;
            } else if (op == Opcode::JUMP) {
                auto t = pop();
                if (!t) break;
                st.pc = static_cast<std::size_t>(*t);
                auto j = index_of.find(st.pc);
                if (j == index_of.end() || instrs[j->second].opcode != Opcode::JUMPDEST) break;
                continue;
            } else if (op == Opcode::JUMPI) {
                auto t = pop();
                auto c = pop();
                if (!t) break;
                bool may_take = !c || *c != 0;
                bool may_fall = !c || *c == 0;
                if (may_fall) {
                    CtorState fall = st;
                    fall.pc = ins.next_offset();
                    if (may_take) work.push_back(std::move(fall));
                    else {
                        st = std::move(fall);
                        continue;
                    }
                }
                st.pc = static_cast<std::size_t>(*t);
                auto j = index_of.find(st.pc);
                if (j == index_of.end() || instrs[j->second].opcode != Opcode::JUMPDEST) break;
                continue;
            } else if (is_halting(op)) {
                break;
            } else {
                auto eff = stack_effect(op);
                std::vector<std::optional<u256>> args;
                for (int i = 0; i < eff.pops; ++i) args.push_back(pop());
                std::optional<u256> result;
                auto both = args.size() == 2 && args[0] && args[1];
                if (op == Opcode::ADD && both) result = *args[0] + *args[1];
                else if (op == Opcode::SUB && both) result = *args[0] - *args[1];
                else if (op == Opcode::MUL && both) result = *args[0] * *args[1];
                for (int i = 0; i < eff.pushes; ++i) st.stack.push_back(result);
            }
            st.pc = ins.next_offset();
        }
    }
    throw NoRuntimeSegment("constructor does not return a constant CODECOPY region");
}

}  // namespace ceihorn
