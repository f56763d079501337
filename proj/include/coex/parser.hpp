#pragma once

#include <string>
#include <string_view>

#include "coex/ast.hpp"

namespace coex::datalog {

struct ParseError : Error {
    ParseError(int line, int column, const std::string& message)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
                message),
          line(line),
          column(column) {}
    int line;
    int column;
};

// Parses the rule file format: '%' line comments, declarations
// ("source s/1.", "view v1/1.", "derived p/2."), rules terminated by '.',
// 'not' for negation, comparison operators < > <= >= = <>. Undeclared head
// predicates are inferred as derived, body-only ones as source. Enforces
// arity consistency and rule safety.
Program parse_program(std::string_view text);

// Surface-to-(name, flavor) classification for a predicate token as it
// appears after any +/- prefix has been consumed, e.g. "v1_ud" -> (v1, Aux).
// Throws ValidationError for unusable shapes ("pm_", "_ud", "x_cur_ud", ...).
PredicateRef classify_predicate(const std::string& token, bool plus_prefix, bool minus_prefix);

}  // namespace coex::datalog
