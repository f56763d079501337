#pragma once

#include <string>
#include <vector>

#include "coex/derive.hpp"

namespace coex::sqlgen {

struct SqlGenError : Error {
    using Error::Error;
};

struct Statement {
    std::string view;  // view the statement belongs to
    std::string sql;
    std::size_t arity = 0;
    std::vector<std::string> tables;  // base tables the statement reads/writes
};

struct SqlArtifact {
    std::vector<Statement> view_statements;
    std::vector<Statement> trigger_statements;
    std::string dialect = "generic";
};

// CREATE VIEW per view of get': one SELECT per rule, unioned; columns are
// named c1..cn; comparisons become WHERE conjuncts and negated relational
// literals NOT EXISTS subqueries.
std::vector<Statement> emit_view(const datalog::Program& get_prime);

// INSTEAD OF INSERT / INSTEAD OF DELETE triggers per view: an IF/ELSE on the
// propagation guard routes rows to the source or the auxiliary table, with
// NOT EXISTS idempotence guards mirroring the not s(...) / not v_ud(...)
// literals.
std::vector<Statement> emit_triggers(const datalog::Program& putdelta,
                                     const datalog::Program& undef);

SqlArtifact emit_sql(const derive::DerivedBx& derived);

// File contents keyed by file name: <view>.view.sql and <view>.triggers.sql,
// LF line endings, two-space indent, byte-stable across runs.
std::vector<std::pair<std::string, std::string>> render_files(const SqlArtifact& artifact);

}  // namespace coex::sqlgen
