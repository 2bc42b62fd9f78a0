#include "ceihorn/sexpr.hpp"

#include <cctype>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace ceihorn {

Sexpr make_atom(std::string text) {
    auto n = std::make_shared<SexprNode>();
    n->text = std::move(text);
    return n;
}

Sexpr make_list(std::vector<Sexpr> items) {
    auto n = std::make_shared<SexprNode>();
    n->atom = false;
    n->items = std::move(items);
    return n;
}

std::vector<Sexpr> parse_sexprs(std::string_view s) {
    std::vector<std::vector<Sexpr>> stack(1);
    std::size_t i = 0;
    while (i < s.size()) {
        char ch = s[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
        } else if (ch == ';') {
            while (i < s.size() && s[i] != '\n') ++i;
        } else if (ch == '(') {
            stack.emplace_back();
            ++i;
        } else if (ch == ')') {
            if (stack.size() == 1) throw SexprError("unbalanced ')' at offset " + std::to_string(i));
            auto items = std::move(stack.back());
            stack.pop_back();
            stack.back().push_back(make_list(std::move(items)));
            ++i;
        } else if (ch == '|' || ch == '"') {
            std::size_t j = s.find(ch, i + 1);
            if (j == std::string_view::npos) throw SexprError("unterminated quoted atom");
            stack.back().push_back(make_atom(std::string(s.substr(i, j - i + 1))));
            i = j + 1;
        } else {
            std::size_t j = i;
            while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')' &&
                   s[j] != ';')
                ++j;
            stack.back().push_back(make_atom(std::string(s.substr(i, j - i))));
            i = j;
        }
    }
    if (stack.size() != 1) throw SexprError("unbalanced '(' at end of input");
    return std::move(stack[0]);
}

namespace {

/// Binding names in solver output are unique in practice; shadowed names are
/// restored when their let ends.
struct Expander {
    std::unordered_map<std::string, Sexpr> scope;

    Sexpr run(const Sexpr& e) {
        if (e->atom) {
            auto it = scope.find(e->text);
            return it == scope.end() ? e : it->second;
        }
        if (e->starts_with("let") && e->items.size() == 3 && !e->items[1]->atom) {
            std::vector<std::pair<std::string, std::optional<Sexpr>>> saved;
            std::vector<std::pair<std::string, Sexpr>> bound;
            for (const auto& b : e->items[1]->items) {
                if (b->atom || b->items.size() != 2 || !b->items[0]->atom) throw SexprError("malformed let binding");
                bound.emplace_back(b->items[0]->text, run(b->items[1]));
            }
            for (auto& [name, value] : bound) {
                auto it = scope.find(name);
                saved.emplace_back(name, it == scope.end() ? std::nullopt : std::optional<Sexpr>(it->second));
                scope[name] = std::move(value);
            }
            Sexpr out = run(e->items[2]);
            for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
                if (it->second) scope[it->first] = *it->second;
                else scope.erase(it->first);
            }
            return out;
        }
        std::vector<Sexpr> items;
        bool changed = false;
        for (const auto& x : e->items) {
            items.push_back(run(x));
            changed = changed || items.back() != x;
        }
        return changed ? make_list(std::move(items)) : e;
    }
};

void print(std::ostream& os, const Sexpr& e) {
    if (e->atom) {
        os << e->text;
        return;
    }
    os << '(';
    for (std::size_t i = 0; i < e->items.size(); ++i) {
        if (i) os << ' ';
        print(os, e->items[i]);
    }
    os << ')';
}

}  // namespace

Sexpr expand_lets(const Sexpr& e) {
    Expander x;
    return x.run(e);
}

std::string to_string(const Sexpr& e) {
    std::ostringstream os;
    print(os, e);
    return os.str();
}

}  // namespace ceihorn
