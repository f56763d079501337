#pragma once

#include "coex/ast.hpp"

namespace coex::datalog {

struct UnfoldError : Error {
    using Error::Error;
};

// Replaces every body occurrence of a predicate defined in `definitions` by
// its defining bodies, one output rule per combination, renaming definition
// locals apart from the host rule.
//
// A negated occurrence of a predicate defined by bodies B1..Bk expands by
// De Morgan into the disjunctive normal form of !B1 & ... & !Bk: one output
// rule per choice of one complemented literal from each body. That requires
// every defining body to use only head variables; shapes with definition
// locals under negation are rejected.
//
// Structural duplicates among the produced rules are removed. Declarations of
// the replaced predicates are dropped; declarations for newly referenced
// predicates are taken from `definitions`.
Program unfold(const Program& program, const Program& definitions);

}  // namespace coex::datalog
