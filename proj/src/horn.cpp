#include "ceihorn/horn.hpp"

namespace ceihorn {

namespace {

bool is_var(const Term& x) { return x->kind == TermNode::Kind::Var; }

/// False on a conflicting binding.
bool bind(Env& env, const Term& x, const Value& v) {
    auto [it, fresh] = env.emplace(x->name, v);
    return fresh || it->second == v;
}

}  // namespace

CheckResult check_instance(const HornClause& c, const Instance& inst, Env* env_out) {
    Env env;
    std::vector<std::pair<Term, Value>> compound;
    auto bind_args = [&](const PredApp& app, const ArgValues& values) {
        for (std::size_t i = 0; i < app.args.size() && i < values.size(); ++i) {
            if (!values[i]) continue;
            if (is_var(app.args[i])) {
                if (!bind(env, app.args[i], *values[i])) return false;
            } else {
                compound.emplace_back(app.args[i], *values[i]);
            }
        }
        return true;
    };
    for (std::size_t k = 0; k < c.body.size() && k < inst.body.size(); ++k)
        if (!bind_args(c.body[k], inst.body[k])) return CheckResult::Violated;
    if (c.head && !bind_args(*c.head, inst.head)) return CheckResult::Violated;

    for (bool progress = true; progress;) {
        progress = false;
        for (const auto& k : c.constraints) {
            if (k->kind != TermNode::Kind::App || k->name != "=" || k->args.size() != 2) continue;
            for (int side = 0; side < 2; ++side) {
                const Term& x = k->args[side];
                if (!is_var(x) || env.contains(x->name)) continue;
                if (auto v = eval(k->args[1 - side], env)) {
                    env.emplace(x->name, *v);
                    progress = true;
                }
            }
        }
    }

    bool undetermined = false;
    for (const auto& k : c.constraints) {
        auto v = eval(k, env);
        if (!v) undetermined = true;
        else if (!std::get<bool>(*v)) return CheckResult::Violated;
    }
    for (const auto& [term, expected] : compound) {
        auto v = eval(term, env);
        if (!v) undetermined = true;
        else if (!(*v == expected)) return CheckResult::Violated;
    }
    if (env_out) *env_out = env;
    return undetermined ? CheckResult::Undetermined : CheckResult::Holds;
}

Term rename(const Term& term, const std::string& suffix) {
    if (term->kind == TermNode::Kind::Var) return t::var(term->name + suffix, term->sort);
    if (term->args.empty()) return term;
    std::vector<Term> args;
    for (const auto& a : term->args) args.push_back(rename(a, suffix));
    auto node = std::make_shared<TermNode>(*term);
    node->args = std::move(args);
    return node;
}

}  // namespace ceihorn
