#include "ceihorn/solver.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <variant>
#include <sstream>
#include <unordered_map>

#include "ceihorn/process.hpp"
#include "ceihorn/sexpr.hpp"
#include "ceihorn/statemodel.hpp"

namespace ceihorn {

std::string_view to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Safe: return "Safe";
        case VerdictKind::Vulnerable: return "Vulnerable";
        case VerdictKind::Timeout: return "Timeout";
        case VerdictKind::Unknown: return "Unknown";
    }
    return "?";
}

std::string default_solver() {
    if (const char* env = std::getenv("CEIHORN_SOLVER"); env && *env) return env;
    return "z3";
}

std::string proof_preamble() {
    return "(set-option :produce-proofs true)\n"
           "(set-option :fp.xform.slice false)\n"
           "(set-option :fp.xform.inline_linear false)\n"
           "(set-option :fp.xform.tail_simplifier_pve false)\n";
}

namespace {

std::string first_line(const std::string& out) {
    std::istringstream is(out);
    std::string line;
    while (std::getline(is, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        return line.substr(b, e - b + 1);
    }
    return "";
}

ProcessResult run_solver(const std::string& script, const SolverConfig& config, std::chrono::milliseconds timeout) {
    TempFile file("ceihorn", script);
    std::vector<std::string> argv{config.executable.empty() ? default_solver() : config.executable, "-smt2"};
    argv.insert(argv.end(), config.extra_args.begin(), config.extra_args.end());
    argv.push_back(file.path());
    ProcessResult r = run_process(argv, timeout);
    if (r.exec_failed) throw SolverUnavailable("cannot execute solver '" + argv[0] + "'");
    return r;
}

std::string with_proof(const std::string& script) {
    std::string out;
    std::istringstream is(script);
    std::string line;
    bool inserted = false;
    while (std::getline(is, line)) {
        out += line + "\n";
        if (!inserted && line.rfind("(set-logic", 0) == 0) {
            out += proof_preamble();
            inserted = true;
        }
    }
    if (!inserted) out = proof_preamble() + out;
    return out + "(get-proof)\n";
}

std::optional<Value> ground_value(const Sexpr& e) {
    if (e->atom) {
        const std::string& s = e->text;
        if (s == "true") return Value{true};
        if (s == "false") return Value{false};
        if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return Value{bigint(s)};
        if (s.size() > 2 && s[0] == '#' && (s[1] == 'x' || s[1] == 'b')) {
            bigint v = 0;
            int base = s[1] == 'x' ? 16 : 2;
            for (std::size_t i = 2; i < s.size(); ++i) {
                char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
                v = v * base + (c >= 'a' ? c - 'a' + 10 : c - '0');
            }
            return Value{v};
        }
        return std::nullopt;
    }
    const auto& it = e->items;
    if (e->starts_with("-") && it.size() == 2) {
        auto v = ground_value(it[1]);
        if (!v || !std::holds_alternative<bigint>(*v)) return std::nullopt;
        return Value{bigint(-std::get<bigint>(*v))};
    }
    if (e->starts_with("_") && it.size() == 3 && it[1]->atom && it[1]->text.rfind("bv", 0) == 0)
        return Value{bigint(it[1]->text.substr(2))};
    if (it.size() == 2 && !it[0]->atom && it[0]->starts_with("as") && it[0]->items.size() >= 2 &&
        it[0]->items[1]->is("const")) {
        auto v = ground_value(it[1]);
        if (!v || !std::holds_alternative<bigint>(*v)) return std::nullopt;
        return Value{ArrayValue{std::get<bigint>(*v), {}}};
    }
    if (e->starts_with("store") && it.size() == 4) {
        auto a = ground_value(it[1]);
        auto k = ground_value(it[2]);
        auto v = ground_value(it[3]);
        if (!a || !k || !v || !std::holds_alternative<ArrayValue>(*a)) return std::nullopt;
        ArrayValue arr = std::get<ArrayValue>(*a);
        arr.entries[std::get<bigint>(*k)] = std::get<bigint>(*v);
        return Value{arr};
    }
    return std::nullopt;
}

bool is_hyper_res(const Sexpr& e) {
    return !e->atom && !e->items.empty() && !e->items[0]->atom && e->items[0]->starts_with("_") &&
           e->items[0]->items.size() >= 2 && e->items[0]->items[1]->is("hyper-res");
}

Sexpr find_proof(const std::vector<Sexpr>& top) {
    for (const auto& e : top) {
        if (e->starts_with("proof")) return e;
        if (!e->atom)
            for (const auto& x : e->items)
                if (x->starts_with("proof")) return x;
    }
    return nullptr;
}

std::string value_smt(const Value& v, Sort sort) {
    auto num = [](const bigint& n) { return n < 0 ? "(- " + bigint(-n).str() + ")" : n.str(); };
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (const bigint* n = std::get_if<bigint>(&v))
        return sort == Sort::bv256() ? "(_ bv" + n->str() + " 256)" : num(*n);
    const auto& arr = std::get<ArrayValue>(v);
    std::string out = "((as const (Array Int Int)) " + num(arr.fallback) + ")";
    for (const auto& [k, x] : arr.entries) out = "(store " + out + " " + num(k) + " " + num(x) + ")";
    return out;
}

/// A way of deriving one proof conclusion from its premises with clauses of
/// the system: leaves are premises, inner nodes derive predicates the solver
/// eliminated.
struct Tree {
    std::size_t clause = 0;
    /// Per body application: premise index, or a subtree.
    std::vector<std::variant<std::size_t, std::shared_ptr<const Tree>>> kids;
    std::uint64_t used = 0;
    std::size_t nodes = 1;
};
using TreePtr = std::shared_ptr<const Tree>;

constexpr std::size_t kMaxCandidates = 4096;
constexpr std::size_t kBatch = 64;

class DerivationBuilder {
  public:
    DerivationBuilder(const ChcSystem& sys, const ScriptRunner& run, std::set<std::string> kept)
        : sys_(sys), run_(run), kept_(std::move(kept)) {
        for (std::size_t i = 0; i < sys.clauses.size(); ++i) {
            const auto& c = sys.clauses[i];
            by_head_[c.head ? c.head->pred : std::string()].push_back(i);
        }
    }

    std::size_t visit(const Sexpr& node) {
        if (auto it = memo_.find(node.get()); it != memo_.end()) return it->second;
        if (!is_hyper_res(node)) throw std::runtime_error("unsupported proof rule: " + to_string(node).substr(0, 80));
        const auto& items = node->items;
        if (items.size() < 3) throw std::runtime_error("malformed hyper-res step");
        const Sexpr& conclusion = items.back();

        std::vector<Sexpr> premises(items.begin() + 2, items.end() - 1);
        // Block-level premises before reentrant summaries, so caller steps precede callee steps.
        std::stable_sort(premises.begin(), premises.end(), [&](const Sexpr& a, const Sexpr& b) {
            return pred_of(a) != kReentPred && pred_of(b) == kReentPred;
        });
        std::vector<std::size_t> premise_steps;
        for (const auto& p : premises) premise_steps.push_back(visit(p));

        std::string head = conclusion->atom ? conclusion->text : conclusion->items[0]->text;
        bool query = head.rfind("query", 0) == 0;
        if (query) head.clear();
        ArgValues values;
        if (!conclusion->atom && !query)
            for (std::size_t i = 1; i < conclusion->items.size(); ++i) values.push_back(ground_value(conclusion->items[i]));

        std::vector<std::size_t> ordered;
        std::size_t idx;
        if (auto ci = match(head, premise_steps, values, ordered)) {
            idx = add_step(*ci, ordered, values);
        } else if (run_) {
            idx = bridge(head, premise_steps, values);
        } else {
            throw std::runtime_error("no clause matches the proof step concluding " + (query ? "the query" : head));
        }
        memo_.emplace(node.get(), idx);
        return idx;
    }

    Derivation take() { return std::move(d_); }

  private:
    std::string pred_of(const Sexpr& proof_node) const {
        if (!is_hyper_res(proof_node)) return "";
        const Sexpr& c = proof_node->items.back();
        return c->atom ? c->text : c->items[0]->atom ? c->items[0]->text : "";
    }

    std::size_t add_step(std::size_t clause, std::vector<std::size_t> premises, ArgValues conclusion) {
        // The proof is a tree; a fact derived twice the same way is one step.
        for (std::size_t i = 0; i < d_.steps.size(); ++i) {
            const DerivationStep& s = d_.steps[i];
            if (s.clause == clause && s.premises == premises && s.conclusion == conclusion) return i;
        }
        DerivationStep step;
        step.clause = clause;
        step.premises = std::move(premises);
        step.conclusion = std::move(conclusion);
        const HornClause& c = sys_.clauses[clause];
        if (c.rule == StatusRule::Restart || c.rule == StatusRule::Reenter) {
            step.transaction = ++transactions_;
        } else {
            for (std::size_t k = 0; k < c.body.size(); ++k)
                if (c.body[k].pred != kReentPred) {
                    step.transaction = d_.steps[step.premises[k]].transaction;
                    break;
                }
        }
        d_.steps.push_back(std::move(step));
        return d_.steps.size() - 1;
    }

    /// A single clause whose body matches the premises and whose instance holds.
    std::optional<std::size_t> match(const std::string& head, const std::vector<std::size_t>& premise_steps,
                                     const ArgValues& values, std::vector<std::size_t>& ordered) {
        auto it = by_head_.find(head);
        if (it == by_head_.end()) return std::nullopt;
        std::optional<std::size_t> fallback;
        for (std::size_t ci : it->second) {
            const HornClause& c = sys_.clauses[ci];
            if (c.body.size() != premise_steps.size()) continue;
            std::vector<std::size_t> order;
            std::vector<bool> used(premise_steps.size(), false);
            bool ok = true;
            for (const auto& app : c.body) {
                bool found = false;
                for (std::size_t k = 0; k < premise_steps.size() && !found; ++k) {
                    if (used[k] || pred_name(premise_steps[k]) != app.pred) continue;
                    used[k] = found = true;
                    order.push_back(premise_steps[k]);
                }
                ok = ok && found;
            }
            if (!ok) continue;
            Instance inst;
            for (std::size_t s : order) inst.body.push_back(d_.steps[s].conclusion);
            if (c.head) inst.head = values;
            CheckResult r = check_instance(c, inst);
            if (r == CheckResult::Holds) {
                ordered = order;
                return ci;
            }
            // Without a solver to split merged steps, an undecided instance is the best guess.
            if (r == CheckResult::Undetermined && !fallback && !run_) {
                fallback = ci;
                ordered = order;
            }
        }
        return fallback;
    }

    std::vector<TreePtr> derive(const std::string& goal, const std::vector<std::size_t>& premise_steps,
                                std::set<std::string>& on_path) {
        std::vector<TreePtr> out;
        auto it = by_head_.find(goal);
        if (it == by_head_.end()) return out;
        on_path.insert(goal);
        for (std::size_t ci : it->second) {
            const HornClause& c = sys_.clauses[ci];
            std::vector<Tree> partial{Tree{ci, {}, 0, 1}};
            for (const auto& app : c.body) {
                std::vector<std::pair<std::variant<std::size_t, TreePtr>, std::uint64_t>> options;
                for (std::size_t k = 0; k < premise_steps.size(); ++k)
                    if (pred_name(premise_steps[k]) == app.pred) options.push_back({k, std::uint64_t{1} << k});
                if (!kept_.count(app.pred) && !on_path.count(app.pred))
                    for (auto& sub : derive(app.pred, premise_steps, on_path)) options.push_back({sub, sub->used});
                std::vector<Tree> next;
                for (const auto& p : partial)
                    for (const auto& [kid, mask] : options) {
                        if (p.used & mask || next.size() >= kMaxCandidates) continue;
                        Tree t = p;
                        t.kids.push_back(kid);
                        t.used |= mask;
                        if (auto* sub = std::get_if<TreePtr>(&kid)) t.nodes += (*sub)->nodes;
                        next.push_back(std::move(t));
                    }
                partial = std::move(next);
            }
            for (auto& t : partial)
                if (out.size() < kMaxCandidates) out.push_back(std::make_shared<const Tree>(std::move(t)));
        }
        on_path.erase(goal);
        return out;
    }

    /// Declarations and constraints of one candidate, variables suffixed by `tag`.
    /// `heads` receives, per node in post-order, the renamed head arguments.
    std::vector<std::string> candidate_smt(const Tree& root, const std::vector<std::size_t>& premise_steps,
                                           const ArgValues& values, const std::string& tag,
                                           std::vector<std::string>& decls,
                                           std::vector<std::pair<const Tree*, std::vector<std::string>>>& heads) {
        std::vector<std::string> facts;
        std::size_t counter = 0;
        // Returns the renamed head arguments of `t`.
        std::function<std::vector<std::string>(const Tree&)> walk = [&](const Tree& t) {
            const HornClause& c = sys_.clauses[t.clause];
            const std::string suffix = tag + "_" + std::to_string(counter++);
            for (const auto& v : clause_vars(c)) decls.push_back("(declare-const " + v->name + suffix + " " + v->sort.smt() + ")");
            for (const auto& k : c.constraints) facts.push_back(to_smt(rename(k, suffix)));
            for (std::size_t b = 0; b < c.body.size(); ++b) {
                const auto& app = c.body[b];
                const Predicate& pred = sys_.predicate(app.pred);
                if (auto* sub = std::get_if<TreePtr>(&t.kids[b])) {
                    auto args = walk(**sub);
                    for (std::size_t m = 0; m < app.args.size(); ++m)
                        facts.push_back("(= " + to_smt(rename(app.args[m], suffix)) + " " + args[m] + ")");
                } else {
                    const ArgValues& ground = d_.steps[premise_steps[std::get<std::size_t>(t.kids[b])]].conclusion;
                    for (std::size_t m = 0; m < app.args.size() && m < ground.size(); ++m)
                        if (ground[m])
                            facts.push_back("(= " + to_smt(rename(app.args[m], suffix)) + " " +
                                            value_smt(*ground[m], pred.sorts[m]) + ")");
                }
            }
            std::vector<std::string> args;
            if (c.head)
                for (const auto& a : c.head->args) args.push_back(to_smt(rename(a, suffix)));
            heads.push_back({&t, args});
            return args;
        };
        auto args = walk(root);
        const HornClause& rc = sys_.clauses[root.clause];
        if (rc.head) {
            const Predicate& pred = sys_.predicate(rc.head->pred);
            for (std::size_t m = 0; m < args.size() && m < values.size(); ++m)
                if (values[m]) facts.push_back("(= " + args[m] + " " + value_smt(*values[m], pred.sorts[m]) + ")");
        }
        return facts;
    }

    static std::string conj(const std::vector<std::string>& facts) {
        std::string out = "(and true";
        for (const auto& f : facts) out += " " + f;
        return out + ")";
    }

    std::size_t bridge(const std::string& head, const std::vector<std::size_t>& premise_steps, const ArgValues& values) {
        if (premise_steps.size() > 64) throw std::runtime_error("proof step with too many premises");
        std::set<std::string> on_path;
        const std::uint64_t all = premise_steps.empty() ? 0 : (~std::uint64_t{0} >> (64 - premise_steps.size()));
        std::vector<TreePtr> candidates;
        for (auto& t : derive(head, premise_steps, on_path))
            if (t->used == all) candidates.push_back(t);
        // Smaller derivations first: they are the likelier reading and cheaper to check.
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const TreePtr& a, const TreePtr& b) { return a->nodes < b->nodes; });
        const std::string what = head.empty() ? std::string("the query") : head;
        if (candidates.empty()) throw std::runtime_error("no clause chain derives the proof step concluding " + what);

        std::optional<std::size_t> chosen;
        for (std::size_t from = 0; from < candidates.size() && !chosen; from += kBatch) {
            std::size_t to = std::min(candidates.size(), from + kBatch);
            if (to - from == 1) {
                chosen = from;
                break;
            }
            std::vector<std::string> decls, asserts, sels;
            for (std::size_t i = from; i < to; ++i) {
                std::vector<std::pair<const Tree*, std::vector<std::string>>> heads;
                std::string sel = "sel__" + std::to_string(i);
                decls.push_back("(declare-const " + sel + " Bool)");
                auto facts = candidate_smt(*candidates[i], premise_steps, values, "__t" + std::to_string(i), decls, heads);
                asserts.push_back("(assert (=> " + sel + " " + conj(facts) + "))");
                sels.push_back(sel);
            }
            std::string script = "(set-logic ALL)\n";
            for (const auto& d : decls) script += d + "\n";
            for (const auto& a : asserts) script += a + "\n";
            script += "(assert (or";
            for (const auto& s : sels) script += " " + s;
            script += "))\n(check-sat)\n(get-value (";
            for (const auto& s : sels) script += " " + s;
            script += "))\n";
            auto out = parse_sexprs(run_(script));
            if (out.size() < 2 || !out[0]->is("sat")) continue;
            for (const auto& pair : out[1]->items)
                if (!pair->atom && pair->items.size() == 2 && pair->items[1]->is("true")) {
                    chosen = std::stoul(pair->items[0]->text.substr(5));
                    break;
                }
        }
        if (!chosen) throw std::runtime_error("no clause chain is consistent with the proof step concluding " + what);

        // Recover intermediate conclusions from a model of the chosen chain.
        const Tree& root = *candidates[*chosen];
        std::vector<std::string> decls;
        std::vector<std::pair<const Tree*, std::vector<std::string>>> heads;
        auto facts = candidate_smt(root, premise_steps, values, "__c", decls, heads);
        std::string script = "(set-logic ALL)\n";
        for (const auto& d : decls) script += d + "\n";
        script += "(assert " + conj(facts) + ")\n(check-sat)\n";
        std::vector<std::string> terms;
        for (const auto& [t, args] : heads) terms.insert(terms.end(), args.begin(), args.end());
        if (!terms.empty()) {
            script += "(get-value (";
            for (const auto& x : terms) script += " " + x;
            script += "))\n";
        }
        auto out = parse_sexprs(run_(script));
        if (out.empty() || !out[0]->is("sat"))
            throw std::runtime_error("clause chain for the proof step concluding " + what + " is inconsistent");
        std::map<const Tree*, ArgValues> conclusions;
        std::size_t pos = 0;
        for (const auto& [t, args] : heads) {
            ArgValues vals;
            for (std::size_t m = 0; m < args.size(); ++m, ++pos) {
                std::optional<Value> v;
                if (out.size() > 1 && pos < out[1]->items.size() && out[1]->items[pos]->items.size() == 2)
                    v = ground_value(out[1]->items[pos]->items[1]);
                vals.push_back(v);
            }
            conclusions[t] = std::move(vals);
        }
        conclusions[&root] = values;

        std::function<std::size_t(const Tree&)> emit = [&](const Tree& t) {
            const HornClause& c = sys_.clauses[t.clause];
            std::vector<std::size_t> premises(c.body.size());
            // Same order as proof premises: block-level facts before reentrant summaries.
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t b = 0; b < c.body.size(); ++b) {
                    if ((c.body[b].pred == kReentPred) != (pass == 1)) continue;
                    if (auto* sub = std::get_if<TreePtr>(&t.kids[b])) premises[b] = emit(**sub);
                    else premises[b] = premise_steps[std::get<std::size_t>(t.kids[b])];
                }
            return add_step(t.clause, premises, conclusions[&t]);
        };
        return emit(root);
    }

    std::string pred_name(std::size_t step) const {
        const auto& c = sys_.clauses[d_.steps[step].clause];
        return c.head ? c.head->pred : std::string();
    }

    const ChcSystem& sys_;
    const ScriptRunner& run_;
    std::set<std::string> kept_;
    std::map<std::string, std::vector<std::size_t>> by_head_;
    std::unordered_map<const SexprNode*, std::size_t> memo_;
    std::size_t transactions_ = 0;
    Derivation d_;
};

/// Predicates concluded somewhere in the proof; the rest were eliminated by the solver.
void collect_kept(const Sexpr& e, std::set<std::string>& out, std::set<const SexprNode*>& seen) {
    if (e->atom || !seen.insert(e.get()).second) return;
    if (is_hyper_res(e)) {
        const Sexpr& c = e->items.back();
        std::string name = c->atom ? c->text : c->items[0]->atom ? c->items[0]->text : "";
        if (name.rfind("query", 0) != 0) out.insert(name);
    }
    for (const auto& x : e->items) collect_kept(x, out, seen);
}

}  // namespace

Derivation parse_derivation(const std::string& proof_text, const ChcSystem& system, const ScriptRunner& run) {
    Sexpr proof = find_proof(parse_sexprs(proof_text));
    if (!proof || proof->items.size() < 2) throw std::runtime_error("no proof object in solver output");
    Sexpr root = expand_lets(proof->items[1]);
    // The refutation ends in (mp <derivation of the query> (asserted (=> query false)) false).
    Sexpr top;
    std::vector<Sexpr> work{root};
    while (!work.empty() && !top) {
        Sexpr e = work.back();
        work.pop_back();
        if (is_hyper_res(e)) {
            top = e;
            break;
        }
        if (!e->atom)
            for (auto it = e->items.rbegin(); it != e->items.rend(); ++it) work.push_back(*it);
    }
    if (!top) throw std::runtime_error("proof has no hyper-resolution steps");
    std::set<std::string> kept;
    std::set<const SexprNode*> seen;
    collect_kept(top, kept, seen);
    DerivationBuilder b(system, run, kept);
    b.visit(top);
    Derivation d = b.take();
    if (d.steps.empty() || system.clauses[d.steps.back().clause].head)
        throw std::runtime_error("proof does not end in the error query");
    return d;
}

VulnPath extract_path(const Derivation& d, const ChcSystem& sys) {
    VulnPath path;
    const std::size_t status_at = ContextLayout::StatusField;
    auto status_of = [&](const DerivationStep& s) -> std::optional<int> {
        if (s.conclusion.size() <= status_at || !s.conclusion[status_at]) return std::nullopt;
        if (!std::holds_alternative<bigint>(*s.conclusion[status_at])) return std::nullopt;
        return std::get<bigint>(*s.conclusion[status_at]).convert_to<int>();
    };
    std::optional<std::size_t> reentry;
    for (const auto& s : d.steps) {
        const HornClause& c = sys.clauses[s.clause];
        if (!c.block) continue;
        auto add = [&](std::string event) {
            path.steps.push_back(PathStep{s.transaction, *c.block, c.pc_begin, c.pc_end, std::move(event)});
        };
        if (c.family == Family::InvV || c.family == Family::InvSafe) {
            if (c.reads_storage) add("sload");
            if (c.writes_storage) add("sstore");
            auto st = status_of(s);
            if (st == static_cast<int>(Status::Call)) add("call-out");
            if (st == static_cast<int>(Status::Stop)) add("stop");
        } else if (c.rule == StatusRule::Restart || c.rule == StatusRule::Reenter) {
            add("reenter");
        } else if (c.rule == StatusRule::StopUnsafe) {
            add("error");
            if (s.conclusion.size() > 1 && s.conclusion[1] && std::holds_alternative<bigint>(*s.conclusion[1]))
                reentry = std::get<bigint>(*s.conclusion[1]).convert_to<std::size_t>();
        }
    }
    if (!reentry) {
        std::size_t n = 0;
        for (const auto& st : path.steps)
            if (st.event == "reenter") ++n;
        reentry = n;
    }
    path.reentry_count = *reentry;
    return path;
}

std::string replay_script(const Derivation& d, const ChcSystem& sys) {
    std::ostringstream os;
    os << "(set-logic ALL)\n";
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const auto& s = d.steps[i];
        const HornClause& c = sys.clauses[s.clause];
        const std::string suffix = "__" + std::to_string(i);
        for (const auto& v : clause_vars(c))
            os << "(declare-const " << v->name << suffix << ' ' << v->sort.smt() << ")\n";
        for (const auto& k : c.constraints) os << "(assert " << to_smt(rename(k, suffix)) << ")\n";
        for (std::size_t k = 0; k < c.body.size() && k < s.premises.size(); ++k) {
            std::size_t j = s.premises[k];
            const HornClause& pc = sys.clauses[d.steps[j].clause];
            const std::string psuffix = "__" + std::to_string(j);
            for (std::size_t m = 0; m < c.body[k].args.size(); ++m)
                os << "(assert (= " << to_smt(rename(c.body[k].args[m], suffix)) << ' '
                   << to_smt(rename(pc.head->args[m], psuffix)) << "))\n";
        }
    }
    os << "(check-sat)\n";
    return os.str();
}

std::optional<bool> replay(const Derivation& d, const ChcSystem& sys, const SolverConfig& config) {
    ProcessResult r = run_solver(replay_script(d, sys), config, config.timeout);
    std::string answer = first_line(r.out);
    if (answer == "sat") return true;
    if (answer == "unsat") return false;
    return std::nullopt;
}

Verdict check(const std::string& script, const ChcSystem& system, const SolverConfig& config) {
    Verdict v;
    ProcessResult r = run_solver(script, config, config.timeout);
    std::string answer = first_line(r.out);
    v.raw = answer;
    if (r.timed_out) {
        v.kind = VerdictKind::Timeout;
        return v;
    }
    if (answer == "sat") {
        v.kind = VerdictKind::Safe;
        return v;
    }
    if (answer != "unsat") {
        v.kind = VerdictKind::Unknown;
        v.raw = r.out + r.err;
        return v;
    }
    v.kind = VerdictKind::Vulnerable;
    if (!config.want_proof) return v;

    auto left = config.timeout - r.elapsed;
    if (left <= std::chrono::milliseconds(0)) {
        v.warnings.push_back("no time left to produce a refutation; path omitted");
        return v;
    }
    ProcessResult p = run_solver(with_proof(script), config, std::chrono::duration_cast<std::chrono::milliseconds>(left));
    if (p.timed_out || first_line(p.out) != "unsat") {
        v.warnings.push_back(p.timed_out ? "refutation run timed out; path omitted"
                                         : "refutation run did not confirm unsat; path omitted");
        return v;
    }
    v.raw = p.out;
    try {
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::milliseconds>(left);
        ScriptRunner run = [&](const std::string& smt) {
            auto rest = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (rest <= std::chrono::milliseconds(0)) throw std::runtime_error("out of time splitting proof steps");
            return run_solver(smt, config, rest).out;
        };
        v.derivation = parse_derivation(p.out, system, run);
        v.path = extract_path(*v.derivation, system);
    } catch (const std::exception& e) {
        v.warnings.push_back(std::string("refutation unparsable: ") + e.what());
        v.derivation.reset();
        return v;
    }
    if (config.replay) {
        v.path->replayed = replay(*v.derivation, system, config);
        if (v.path->replayed != true) v.warnings.push_back("path replay was not confirmed by the solver");
    }
    return v;
}

}  // namespace ceihorn
