#pragma once

#include <stdexcept>
#include <string_view>

#include "ceihorn/bytecode.hpp"

namespace ceihorn {

class AssemblyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Minimal EVM assembler used for the bundled corpus and for tests.
///
/// Syntax, whitespace separated, `;` starts a comment:
///   MNEMONIC            any opcode of the table
///   PUSHk <value>       decimal or 0x-hex immediate, or a label name
///   PUSH <value>        smallest width that fits (labels take 2 bytes)
///   name:               emits JUMPDEST and binds `name` to its offset
Bytes assemble(std::string_view source);

}  // namespace ceihorn
