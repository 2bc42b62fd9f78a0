// Assembles mnemonic source into hex runtime bytecode (used to build the corpus).

#include <fstream>
#include <iostream>
#include <sstream>

#include "ceihorn/assembler.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: ceiasm <source.evm>\n";
        return 2;
    }
    std::ifstream f(argv[1]);
    if (!f) {
        std::cerr << "cannot read " << argv[1] << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        std::cout << ceihorn::to_hex(ceihorn::assemble(ss.str())) << "\n";
    } catch (const std::exception& e) {
        std::cerr << argv[1] << ": " << e.what() << "\n";
        return 1;
    }
}
