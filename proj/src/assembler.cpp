#include "ceihorn/assembler.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ceihorn {
namespace {

struct Item {
    Opcode op;
    int width = 0;  // immediate bytes
    std::optional<u256> value;
    std::string label_ref;
    int line = 0;
};

std::optional<u256> parse_number(const std::string& tok) {
    try {
        if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
            u256 v = 0;
            for (std::size_t i = 2; i < tok.size(); ++i) {
                char c = tok[i];
                int d = (c >= '0' && c <= '9') ? c - '0'
                        : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                        : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                                 : -1;
                if (d < 0) return std::nullopt;
                v = (v << 4) | d;
            }
            return v;
        }
        if (!tok.empty() && std::isdigit(static_cast<unsigned char>(tok[0]))) {
            for (char c : tok)
                if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            return u256(tok);
        }
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

int min_width(const u256& v) {
    int w = 1;
    u256 x = v >> 8;
    while (x != 0) {
        ++w;
        x >>= 8;
    }
    return w;
}

}  // namespace

Bytes assemble(std::string_view source) {
    std::vector<Item> items;
    std::map<std::string, std::size_t> labels;
    std::vector<std::pair<std::string, std::size_t>> label_items;  // label -> item index

    std::istringstream in{std::string(source)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            if (tok.back() == ':') {
                std::string name = tok.substr(0, tok.size() - 1);
                if (name.empty()) throw AssemblyError("empty label at line " + std::to_string(lineno));
                label_items.emplace_back(name, items.size());
                items.push_back(Item{Opcode::JUMPDEST, 0, {}, {}, lineno});
                continue;
            }
            std::string upper = tok;
            for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            if (upper == "PUSH" || (upper.rfind("PUSH", 0) == 0 && upper != "PUSH0")) {
                std::string arg;
                if (!(ls >> arg)) throw AssemblyError("missing PUSH operand at line " + std::to_string(lineno));
                Item it{Opcode::PUSH1, 0, {}, {}, lineno};
                auto num = parse_number(arg);
                if (num) it.value = num;
                else it.label_ref = arg;
                if (upper == "PUSH") {
                    it.width = num ? min_width(*num) : 2;
                } else {
                    auto op = opcode_from_mnemonic(upper);
                    if (!op || !is_push(*op)) throw AssemblyError("unknown mnemonic " + tok);
                    it.width = push_width(*op);
                    if (num && min_width(*num) > it.width)
                        throw AssemblyError("immediate too wide at line " + std::to_string(lineno));
                }
                it.op = static_cast<Opcode>(0x5f + it.width);
                items.push_back(std::move(it));
                continue;
            }
            auto op = opcode_from_mnemonic(upper);
            if (!op) throw AssemblyError("unknown mnemonic '" + tok + "' at line " + std::to_string(lineno));
            items.push_back(Item{*op, 0, {}, {}, lineno});
        }
    }

    std::vector<std::size_t> offsets(items.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        offsets[i] = off;
        off += 1 + items[i].width;
    }
    for (auto& [name, idx] : label_items) {
        if (!labels.emplace(name, offsets[idx]).second) throw AssemblyError("duplicate label " + name);
    }

    Bytes out;
    for (auto& it : items) {
        out.push_back(static_cast<std::uint8_t>(it.op));
        if (it.width == 0) continue;
        u256 v;
        if (it.value) {
            v = *it.value;
        } else {
            auto l = labels.find(it.label_ref);
            if (l == labels.end())
                throw AssemblyError("undefined label '" + it.label_ref + "' at line " + std::to_string(it.line));
            v = l->second;
            if (min_width(v) > it.width) throw AssemblyError("label offset too wide: " + it.label_ref);
        }
        for (int i = it.width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }
    return out;
}

}  // namespace ceihorn
