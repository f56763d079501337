#pragma once

#include <vector>

#include "coex/ast.hpp"

namespace coex::datalog {

struct StratifyError : Error {
    using Error::Error;
};

// Orders predicates into strata such that every rule's body predicates sit in
// strictly earlier strata than its head (so negation is always over fully
// computed relations). The dialect forbids recursion outright; any cycle in
// the dependency graph is an error listing the offending predicates.
std::vector<std::vector<PredicateRef>> stratify(const Program& program);

}  // namespace coex::datalog
