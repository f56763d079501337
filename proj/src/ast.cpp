#include "coex/ast.hpp"

#include <algorithm>

#include "coex/printer.hpp"

namespace coex::datalog {

std::string PredicateRef::surface() const {
    switch (flavor) {
        case Flavor::Base: return name;
        case Flavor::Insert: return "+" + name;
        case Flavor::Delete: return "-" + name;
        case Flavor::Current: return name + "_cur";
        case Flavor::Aux: return name + "_ud";
        case Flavor::AuxInsert: return "+" + name + "_ud";
        case Flavor::AuxDelete: return "-" + name + "_ud";
        case Flavor::PlusMinus: return "pm_" + name;
    }
    return name;
}

const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Gt: return ">";
        case CmpOp::Le: return "<=";
        case CmpOp::Ge: return ">=";
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "<>";
    }
    return "?";
}

const char* to_string(Role role) {
    switch (role) {
        case Role::Source: return "source";
        case Role::View: return "view";
        case Role::Derived: return "derived";
    }
    return "?";
}

void Program::declare(const PredicateRef& pred, std::size_t arity, Role role) {
    auto [it, inserted] = decls.emplace(pred, Declaration{arity, role});
    if (!inserted && it->second.arity != arity) {
        throw ValidationError("arity clash for predicate '" + pred.surface() + "': declared /" +
                              std::to_string(it->second.arity) + ", redeclared /" +
                              std::to_string(arity));
    }
}

std::size_t Program::arity_of(const PredicateRef& pred) const {
    auto it = decls.find(pred);
    if (it == decls.end()) {
        throw ValidationError("undeclared predicate '" + pred.surface() + "'");
    }
    return it->second.arity;
}

bool Program::has_rules_for(const PredicateRef& pred) const {
    return std::any_of(rules.begin(), rules.end(),
                       [&](const Rule& r) { return r.head.pred == pred; });
}

std::vector<PredicateRef> Program::preds_with_role(Role role) const {
    std::vector<PredicateRef> out;
    for (const auto& [pred, decl] : decls) {
        if (decl.role == role) out.push_back(pred);
    }
    return out;
}

namespace {

void check_atom_arity(Program& program, const Atom& atom, Role default_role) {
    if (!program.declared(atom.pred)) {
        program.declare(atom.pred, atom.args.size(), default_role);
        return;
    }
    std::size_t declared = program.arity_of(atom.pred);
    if (declared != atom.args.size()) {
        throw ValidationError("arity clash for predicate '" + atom.pred.surface() + "': declared /" +
                              std::to_string(declared) + ", used with " +
                              std::to_string(atom.args.size()) + " argument(s)");
    }
}

}  // namespace

void Program::add_rule(Rule rule) {
    if (rule.body.empty()) {
        throw ValidationError("rule for '" + rule.head.pred.surface() + "' has an empty body");
    }
    check_atom_arity(*this, rule.head, Role::Derived);
    for (const auto& lit : rule.body) {
        if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
            check_atom_arity(*this, rel->atom, Role::Source);
        }
    }
    check_safety(rule);
    rules.push_back(std::move(rule));
}

void check_safety(const Rule& rule) {
    std::set<std::string> bound;
    for (const auto& lit : rule.body) {
        const auto* rel = std::get_if<RelLiteral>(&lit);
        if (rel == nullptr || rel->negated) continue;
        for (const auto& arg : rel->atom.args) {
            if (const auto* var = std::get_if<Variable>(&arg)) bound.insert(var->name);
        }
    }
    auto require_bound = [&](const std::vector<std::string>& vars, const char* where) {
        for (const auto& v : vars) {
            if (!bound.count(v)) {
                throw ValidationError("unsafe rule '" + printer::to_string(rule) + "': variable " +
                                      v + " in " + where +
                                      " does not occur in a positive body literal");
            }
        }
    };
    std::vector<std::string> vars;
    for (const auto& arg : rule.head.args) collect_vars(arg, vars);
    require_bound(vars, "head");
    for (const auto& lit : rule.body) {
        vars.clear();
        if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
            if (!rel->negated) continue;
            collect_vars(lit, vars);
            require_bound(vars, "negated literal");
        } else {
            collect_vars(lit, vars);
            require_bound(vars, "comparison");
        }
    }
}

void infer_declarations(Program& program) {
    for (const auto& rule : program.rules) {
        check_atom_arity(program, rule.head, Role::Derived);
        for (const auto& lit : rule.body) {
            if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
                check_atom_arity(program, rel->atom, Role::Source);
            }
        }
    }
}

void Relation::insert(Tuple t) {
    if (t.size() != arity) {
        throw ValidationError("tuple arity " + std::to_string(t.size()) +
                              " does not match relation arity " + std::to_string(arity));
    }
    tuples.insert(std::move(t));
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
    if (const auto* var = std::get_if<Variable>(&t)) {
        if (std::find(out.begin(), out.end(), var->name) == out.end()) out.push_back(var->name);
    }
}

void collect_vars(const Literal& lit, std::vector<std::string>& out) {
    if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
        for (const auto& arg : rel->atom.args) collect_vars(arg, out);
    } else {
        const auto& cmp = std::get<Comparison>(lit);
        collect_vars(cmp.lhs, out);
        collect_vars(cmp.rhs, out);
    }
}

std::vector<std::string> rule_vars(const Rule& rule) {
    std::vector<std::string> out;
    for (const auto& arg : rule.head.args) collect_vars(arg, out);
    for (const auto& lit : rule.body) collect_vars(lit, out);
    return out;
}

}  // namespace coex::datalog
