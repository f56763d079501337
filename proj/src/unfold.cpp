#include "coex/unfold.hpp"

#include <algorithm>
#include <map>

#include "coex/printer.hpp"
#include "coex/stratify.hpp"

namespace coex::datalog {

namespace {

using Substitution = std::map<std::string, Term>;

Term apply_subst(const Term& t, const Substitution& subst) {
    if (const auto* var = std::get_if<Variable>(&t)) {
        auto it = subst.find(var->name);
        if (it != subst.end()) return it->second;
    }
    return t;
}

Literal apply_subst(const Literal& lit, const Substitution& subst) {
    if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
        RelLiteral out = *rel;
        for (auto& arg : out.atom.args) arg = apply_subst(arg, subst);
        return out;
    }
    Comparison out = std::get<Comparison>(lit);
    out.lhs = apply_subst(out.lhs, subst);
    out.rhs = apply_subst(out.rhs, subst);
    return out;
}

Literal complement(const Literal& lit) {
    if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
        RelLiteral out = *rel;
        out.negated = !out.negated;
        return out;
    }
    Comparison out = std::get<Comparison>(lit);
    out.negated = !out.negated;
    return out;
}

// Binds the defining rule's head variables to the occurrence's arguments and
// renames body locals apart from `used`.
Substitution instantiate(const Rule& def, const Atom& occurrence,
                         std::set<std::string>& used) {
    Substitution subst;
    for (std::size_t i = 0; i < def.head.args.size(); ++i) {
        const auto* var = std::get_if<Variable>(&def.head.args[i]);
        if (var == nullptr) {
            throw UnfoldError("definition head '" + printer::to_string(def.head) +
                              "' must use distinct variables");
        }
        if (!subst.emplace(var->name, occurrence.args[i]).second) {
            throw UnfoldError("definition head '" + printer::to_string(def.head) +
                              "' repeats variable " + var->name);
        }
    }
    std::vector<std::string> locals;
    for (const auto& lit : def.body) collect_vars(lit, locals);
    for (const auto& v : locals) {
        if (subst.count(v)) continue;
        std::string fresh = v;
        int n = 0;
        while (used.count(fresh)) fresh = v + "_" + std::to_string(++n);
        used.insert(fresh);
        subst.emplace(v, Variable{fresh});
    }
    return subst;
}

bool has_locals(const Rule& def) {
    std::set<std::string> head_vars;
    for (const auto& arg : def.head.args) {
        if (const auto* var = std::get_if<Variable>(&arg)) head_vars.insert(var->name);
    }
    std::vector<std::string> body_vars;
    for (const auto& lit : def.body) collect_vars(lit, body_vars);
    return std::any_of(body_vars.begin(), body_vars.end(),
                       [&](const std::string& v) { return !head_vars.count(v); });
}

}  // namespace

Program unfold(const Program& program, const Program& definitions) {
    std::set<PredicateRef> defined;
    std::map<PredicateRef, std::vector<const Rule*>> def_rules;
    for (const auto& rule : definitions.rules) {
        defined.insert(rule.head.pred);
        def_rules[rule.head.pred].push_back(&rule);
    }
    if (defined.empty()) return program;

    stratify(definitions);  // rejects recursive definitions
    for (const auto& pred : defined) {
        if (program.has_rules_for(pred)) {
            throw UnfoldError("predicate '" + pred.surface() +
                              "' is defined in both programs");
        }
    }

    Program out;
    for (const auto& rule : program.rules) {
        std::set<std::string> used;
        for (const auto& v : rule_vars(rule)) used.insert(v);

        std::vector<std::vector<Literal>> bodies{{}};
        for (const auto& lit : rule.body) {
            const auto* rel = std::get_if<RelLiteral>(&lit);
            if (rel == nullptr || !defined.count(rel->atom.pred)) {
                for (auto& b : bodies) b.push_back(lit);
                continue;
            }
            const auto& defs = def_rules.at(rel->atom.pred);
            std::vector<std::vector<Literal>> expanded;
            if (!rel->negated) {
                // One branch per defining rule.
                for (const Rule* def : defs) {
                    Substitution subst = instantiate(*def, rel->atom, used);
                    for (const auto& prefix : bodies) {
                        auto next = prefix;
                        for (const auto& l : def->body) next.push_back(apply_subst(l, subst));
                        expanded.push_back(std::move(next));
                    }
                }
            } else {
                // !(D1 | ... | Dk) in DNF: pick one complemented literal from
                // each defining body.
                std::vector<std::vector<Literal>> picks{{}};
                for (const Rule* def : defs) {
                    if (has_locals(*def)) {
                        throw UnfoldError(
                            "cannot unfold negated occurrence of '" + rel->atom.pred.surface() +
                            "': definition '" + printer::to_string(*def) +
                            "' introduces variables outside its head");
                    }
                    Substitution subst = instantiate(*def, rel->atom, used);
                    std::vector<std::vector<Literal>> next;
                    for (const auto& chosen : picks) {
                        for (const auto& l : def->body) {
                            auto ext = chosen;
                            ext.push_back(complement(apply_subst(l, subst)));
                            next.push_back(std::move(ext));
                        }
                    }
                    picks = std::move(next);
                }
                for (const auto& prefix : bodies) {
                    for (const auto& chosen : picks) {
                        auto next = prefix;
                        next.insert(next.end(), chosen.begin(), chosen.end());
                        expanded.push_back(std::move(next));
                    }
                }
            }
            bodies = std::move(expanded);
        }

        for (auto& body : bodies) {
            Rule produced{rule.head, std::move(body)};
            if (std::find(out.rules.begin(), out.rules.end(), produced) == out.rules.end()) {
                try {
                    check_safety(produced);
                } catch (const ValidationError& e) {
                    throw UnfoldError(std::string("unfolding produced an unsafe rule: ") +
                                      e.what());
                }
                out.rules.push_back(std::move(produced));
            }
        }
    }

    // Keep the original declarations except for replaced predicates; import
    // declarations for predicates the definitions introduced.
    for (const auto& [pred, decl] : program.decls) {
        if (!defined.count(pred)) out.decls.emplace(pred, decl);
    }
    std::set<PredicateRef> referenced;
    for (const auto& rule : out.rules) {
        referenced.insert(rule.head.pred);
        for (const auto& lit : rule.body) {
            if (const auto* rel = std::get_if<RelLiteral>(&lit)) referenced.insert(rel->atom.pred);
        }
    }
    for (const auto& [pred, decl] : definitions.decls) {
        if (referenced.count(pred) && !out.decls.count(pred)) out.decls.emplace(pred, decl);
    }
    infer_declarations(out);
    return out;
}

}  // namespace coex::datalog
