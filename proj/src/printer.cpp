#include "coex/printer.hpp"

#include <sstream>

namespace coex::datalog::printer {

std::string to_string(const Value& value) {
    if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
    return std::get<std::string>(value);
}

std::string to_string(const Term& term) {
    if (const auto* var = std::get_if<Variable>(&term)) return var->name;
    const auto& value = std::get<Constant>(term).value;
    if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
    return "'" + std::get<std::string>(value) + "'";
}

std::string to_string(const Atom& atom) {
    std::string out = atom.pred.surface() + "(";
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(atom.args[i]);
    }
    out += ")";
    return out;
}

std::string to_string(const Literal& lit) {
    if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
        return (rel->negated ? "not " : "") + to_string(rel->atom);
    }
    const auto& cmp = std::get<Comparison>(lit);
    std::string out = cmp.negated ? "not " : "";
    out += to_string(cmp.lhs);
    out += " ";
    out += datalog::to_string(cmp.op);
    out += " ";
    out += to_string(cmp.rhs);
    return out;
}

std::string to_string(const Rule& rule) {
    std::string out = to_string(rule.head) + " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(rule.body[i]);
    }
    out += ".";
    return out;
}

std::string to_string(const Program& program) {
    std::ostringstream out;
    for (const auto& [pred, decl] : program.decls) {
        out << datalog::to_string(decl.role) << " " << pred.surface() << "/" << decl.arity
            << ".\n";
    }
    for (const auto& rule : program.rules) {
        out << to_string(rule) << "\n";
    }
    return out.str();
}

std::string to_string(const Tuple& tuple) {
    std::string out = "(";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(tuple[i]);
    }
    out += ")";
    return out;
}

std::string to_string(const Relation& rel) {
    std::string out = "{";
    bool first = true;
    for (const auto& t : rel.tuples) {
        if (!first) out += ", ";
        first = false;
        out += to_string(t);
    }
    out += "}";
    return out;
}

std::string to_string(const Instance& instance) {
    std::string out;
    for (const auto& [pred, rel] : instance) {
        out += pred.surface() + " = " + to_string(rel) + "\n";
    }
    return out;
}

}  // namespace coex::datalog::printer
