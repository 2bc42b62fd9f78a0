#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ceihorn {

/// EVM machine word. Arithmetic wraps modulo 2^256.
using u256 = boost::multiprecision::uint256_t;
/// Unbounded integer used wherever intermediate results may leave the word range.
using bigint = boost::multiprecision::cpp_int;

using Bytes = std::vector<std::uint8_t>;

/// Opcode values of the fixed (Shanghai-era) instruction table.
enum class Opcode : std::uint8_t {
    STOP = 0x00, ADD = 0x01, MUL = 0x02, SUB = 0x03, DIV = 0x04, SDIV = 0x05,
    MOD = 0x06, SMOD = 0x07, ADDMOD = 0x08, MULMOD = 0x09, EXP = 0x0a,
    SIGNEXTEND = 0x0b,
    LT = 0x10, GT = 0x11, SLT = 0x12, SGT = 0x13, EQ = 0x14, ISZERO = 0x15,
    AND = 0x16, OR = 0x17, XOR = 0x18, NOT = 0x19, BYTE = 0x1a, SHL = 0x1b,
    SHR = 0x1c, SAR = 0x1d,
    SHA3 = 0x20,
    ADDRESS = 0x30, BALANCE = 0x31, ORIGIN = 0x32, CALLER = 0x33,
    CALLVALUE = 0x34, CALLDATALOAD = 0x35, CALLDATASIZE = 0x36,
    CALLDATACOPY = 0x37, CODESIZE = 0x38, CODECOPY = 0x39, GASPRICE = 0x3a,
    EXTCODESIZE = 0x3b, EXTCODECOPY = 0x3c, RETURNDATASIZE = 0x3d,
    RETURNDATACOPY = 0x3e, EXTCODEHASH = 0x3f,
    BLOCKHASH = 0x40, COINBASE = 0x41, TIMESTAMP = 0x42, NUMBER = 0x43,
    PREVRANDAO = 0x44, GASLIMIT = 0x45, CHAINID = 0x46, SELFBALANCE = 0x47,
    BASEFEE = 0x48,
    POP = 0x50, MLOAD = 0x51, MSTORE = 0x52, MSTORE8 = 0x53, SLOAD = 0x54,
    SSTORE = 0x55, JUMP = 0x56, JUMPI = 0x57, PC = 0x58, MSIZE = 0x59,
    GAS = 0x5a, JUMPDEST = 0x5b, PUSH0 = 0x5f,
    PUSH1 = 0x60, PUSH32 = 0x7f,
    DUP1 = 0x80, DUP16 = 0x8f,
    SWAP1 = 0x90, SWAP16 = 0x9f,
    LOG0 = 0xa0, LOG4 = 0xa4,
    CREATE = 0xf0, CALL = 0xf1, CALLCODE = 0xf2, RETURN = 0xf3,
    DELEGATECALL = 0xf4, CREATE2 = 0xf5, STATICCALL = 0xfa, REVERT = 0xfd,
    INVALID = 0xfe, SELFDESTRUCT = 0xff,
};

struct StackEffect {
    int pops = 0;
    int pushes = 0;
    friend bool operator==(const StackEffect&, const StackEffect&) = default;
};

class MalformedHex : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// True when `byte` names an opcode of the instruction table.
bool is_defined(std::uint8_t byte);
std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view name);

/// Canonical stack effect. INVALID and undefined bytes report (0, 0).
StackEffect stack_effect(Opcode op);

inline bool is_push(Opcode op) {
    auto b = static_cast<std::uint8_t>(op);
    return b >= 0x60 && b <= 0x7f;
}
inline int push_width(Opcode op) {
    return is_push(op) ? static_cast<std::uint8_t>(op) - 0x5f : 0;
}
inline bool is_dup(Opcode op) {
    auto b = static_cast<std::uint8_t>(op);
    return b >= 0x80 && b <= 0x8f;
}
inline bool is_swap(Opcode op) {
    auto b = static_cast<std::uint8_t>(op);
    return b >= 0x90 && b <= 0x9f;
}
inline int dup_index(Opcode op) { return static_cast<std::uint8_t>(op) - 0x7f; }
inline int swap_index(Opcode op) { return static_cast<std::uint8_t>(op) - 0x8f; }

/// Opcodes that end a basic block.
bool is_terminator(Opcode op);
/// Frame-ending opcodes (no successor inside the contract).
bool is_halting(Opcode op);
/// CALL, CALLCODE, DELEGATECALL, STATICCALL.
bool is_external_call(Opcode op);
/// AND, OR, XOR, NOT, BYTE, SHL, SHR, SAR.
bool is_bitwise(Opcode op);

struct Instruction {
    std::size_t offset = 0;
    Opcode opcode = Opcode::STOP;
    /// Original byte; differs from `opcode` only for undefined bytes (decoded as INVALID).
    std::uint8_t byte = 0;
    std::optional<u256> operand;
    std::size_t size = 1;
    /// PUSH operand cut short by the end of code and zero-padded on the right.
    bool truncated = false;

    std::size_t next_offset() const { return offset + size; }
    std::string to_string() const;
};

/// Decodes hex text. Accepts an optional 0x prefix and whitespace between digits.
Bytes parse_hex(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Linear sweep decode. Total: every byte is covered exactly once.
std::vector<Instruction> disassemble(std::span<const std::uint8_t> code);

/// Re-encodes a disassembly; truncated PUSH operands are emitted at their original length.
Bytes reassemble(std::span<const Instruction> instructions);

class NoRuntimeSegment : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Statically runs a constructor until it RETURNs a CODECOPY'd region with
/// constant bounds and yields that region as runtime code.
Bytes extract_runtime(std::span<const std::uint8_t> creation_code);

}  // namespace ceihorn
