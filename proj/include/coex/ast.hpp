#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "coex/error.hpp"

namespace coex::datalog {

// Predicate flavors and their surface forms:
//   r -> Base, +r -> Insert, -r -> Delete, r_cur -> Current,
//   r_ud -> Aux, +r_ud -> AuxInsert, -r_ud -> AuxDelete, pm_r -> PlusMinus.
// The mapping between surface form and (name, flavor) is a bijection; a base
// name may not itself carry one of the reserved prefixes/suffixes.
enum class Flavor {
    Base,
    Insert,
    Delete,
    Current,
    Aux,
    AuxInsert,
    AuxDelete,
    PlusMinus,
};

struct PredicateRef {
    std::string name;
    Flavor flavor = Flavor::Base;

    // Surface spelling, e.g. {"v1", AuxInsert} -> "+v1_ud".
    std::string surface() const;

    friend auto operator<=>(const PredicateRef& a, const PredicateRef& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        return a.flavor <=> b.flavor;
    }
    friend bool operator==(const PredicateRef&, const PredicateRef&) = default;
};

using Value = std::variant<std::int64_t, std::string>;

struct Variable {
    std::string name;
    friend bool operator==(const Variable&, const Variable&) = default;
};

struct Constant {
    Value value;
    friend bool operator==(const Constant&, const Constant&) = default;
};

using Term = std::variant<Variable, Constant>;

inline bool is_variable(const Term& t) { return std::holds_alternative<Variable>(t); }
inline bool is_constant(const Term& t) { return std::holds_alternative<Constant>(t); }

struct Atom {
    PredicateRef pred;
    std::vector<Term> args;
    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class CmpOp { Lt, Gt, Le, Ge, Eq, Ne };

const char* to_string(CmpOp op);

struct Comparison {
    Term lhs;
    CmpOp op = CmpOp::Lt;
    Term rhs;
    bool negated = false;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct RelLiteral {
    Atom atom;
    bool negated = false;
    friend bool operator==(const RelLiteral&, const RelLiteral&) = default;
};

using Literal = std::variant<RelLiteral, Comparison>;

inline bool is_negated(const Literal& lit) {
    if (const auto* rel = std::get_if<RelLiteral>(&lit)) return rel->negated;
    return std::get<Comparison>(lit).negated;
}

struct Rule {
    Atom head;
    std::vector<Literal> body;
    friend bool operator==(const Rule&, const Rule&) = default;
};

enum class Role { Source, View, Derived };

const char* to_string(Role role);

struct Declaration {
    std::size_t arity = 0;
    Role role = Role::Derived;
    friend bool operator==(const Declaration&, const Declaration&) = default;
};

struct ValidationError : Error {
    using Error::Error;
};

struct Program {
    std::map<PredicateRef, Declaration> decls;
    std::vector<Rule> rules;

    // Records the declaration, checking arity consistency against any
    // previous declaration of the same predicate.
    void declare(const PredicateRef& pred, std::size_t arity, Role role);
    bool declared(const PredicateRef& pred) const { return decls.count(pred) != 0; }
    std::size_t arity_of(const PredicateRef& pred) const;

    // Appends the rule after checking arities (inferring missing declarations
    // as role Derived for the head) and rule safety.
    void add_rule(Rule rule);

    bool has_rules_for(const PredicateRef& pred) const;
    std::vector<PredicateRef> preds_with_role(Role role) const;

    friend bool operator==(const Program&, const Program&) = default;
};

// Checks that every variable occurring in the head, in a negated literal, or
// in a comparison is bound by a positive relational body literal. Throws
// ValidationError naming the rule and variable.
void check_safety(const Rule& rule);

// Arity bookkeeping used by parser and program builders: infers declarations
// for undeclared predicates (heads become Derived, body-only predicates
// Source) and throws ValidationError on arity clashes.
void infer_declarations(Program& program);

using Tuple = std::vector<Value>;

struct Relation {
    std::size_t arity = 0;
    std::set<Tuple> tuples;

    void insert(Tuple t);
    bool contains(const Tuple& t) const { return tuples.count(t) != 0; }
    bool empty() const { return tuples.empty(); }
    std::size_t size() const { return tuples.size(); }

    friend bool operator==(const Relation&, const Relation&) = default;
};

using Instance = std::map<PredicateRef, Relation>;

// Collects variable names in order of first occurrence.
void collect_vars(const Term& t, std::vector<std::string>& out);
void collect_vars(const Literal& lit, std::vector<std::string>& out);
std::vector<std::string> rule_vars(const Rule& rule);

}  // namespace coex::datalog
