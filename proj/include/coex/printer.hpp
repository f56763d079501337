#pragma once

#include <string>

#include "coex/ast.hpp"

namespace coex::datalog::printer {

// Canonical pretty-printing: declarations first (map order), one rule per
// line, single spaces, rules terminated by '.'.
std::string to_string(const Program& program);
std::string to_string(const Rule& rule);
std::string to_string(const Literal& lit);
std::string to_string(const Atom& atom);
std::string to_string(const Term& term);
std::string to_string(const Value& value);

// Data rendering used by dumps, diffs and reports: (c1, c2, ...) with string
// constants shown bare.
std::string to_string(const Tuple& tuple);
std::string to_string(const Relation& rel);
std::string to_string(const Instance& instance);

}  // namespace coex::datalog::printer
