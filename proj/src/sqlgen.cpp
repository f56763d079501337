#include "coex/sqlgen.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "coex/printer.hpp"

namespace coex::sqlgen {

using datalog::Atom;
using datalog::Comparison;
using datalog::Flavor;
using datalog::Literal;
using datalog::PredicateRef;
using datalog::Program;
using datalog::RelLiteral;
using datalog::Role;
using datalog::Rule;
using datalog::Term;
using datalog::Variable;

namespace {

std::string column(std::size_t index) { return "c" + std::to_string(index + 1); }

std::string sql_value(const datalog::Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return "'" + std::get<std::string>(v) + "'";
}

// Column positions of each variable of an atom, first occurrence first.
std::map<std::string, std::vector<std::size_t>> var_columns(const Atom& atom) {
    std::map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (const auto* var = std::get_if<Variable>(&atom.args[i])) out[var->name].push_back(i);
    }
    return out;
}

std::string render_term(const Term& t, const std::map<std::string, std::vector<std::size_t>>& cols,
                        const std::string& prefix, const Rule& rule) {
    if (const auto* var = std::get_if<Variable>(&t)) {
        auto it = cols.find(var->name);
        if (it == cols.end()) {
            throw SqlGenError("unsupported construct: variable " + var->name + " in '" +
                              datalog::printer::to_string(rule) + "' has no column");
        }
        return prefix + column(it->second.front());
    }
    return sql_value(std::get<datalog::Constant>(t).value);
}

std::string render_comparison(const Comparison& cmp,
                              const std::map<std::string, std::vector<std::size_t>>& cols,
                              const std::string& prefix, const Rule& rule) {
    std::string body = render_term(cmp.lhs, cols, prefix, rule) + " " +
                       datalog::to_string(cmp.op) + " " +
                       render_term(cmp.rhs, cols, prefix, rule);
    return cmp.negated ? "NOT (" + body + ")" : body;
}

std::string select_for_rule(const Rule& rule) {
    const RelLiteral* from = nullptr;
    for (const auto& lit : rule.body) {
        const auto* rel = std::get_if<RelLiteral>(&lit);
        if (rel != nullptr && !rel->negated) {
            if (from != nullptr) {
                throw SqlGenError("unsupported construct: more than one positive relational "
                                  "literal in '" +
                                  datalog::printer::to_string(rule) + "'");
            }
            from = rel;
        }
    }
    if (from == nullptr) {
        throw SqlGenError("unsupported construct: no positive relational literal in '" +
                          datalog::printer::to_string(rule) + "'");
    }
    std::string table = from->atom.pred.surface();
    auto cols = var_columns(from->atom);

    std::vector<std::string> where;
    // Constants and repeated variables in the scanned atom.
    for (std::size_t i = 0; i < from->atom.args.size(); ++i) {
        if (const auto* c = std::get_if<datalog::Constant>(&from->atom.args[i])) {
            where.push_back(column(i) + " = " + sql_value(c->value));
        }
    }
    for (const auto& [var, positions] : cols) {
        for (std::size_t i = 1; i < positions.size(); ++i) {
            where.push_back(column(positions[0]) + " = " + column(positions[i]));
        }
    }
    for (const auto& lit : rule.body) {
        if (const auto* cmp = std::get_if<Comparison>(&lit)) {
            where.push_back(render_comparison(*cmp, cols, "", rule));
        } else {
            const auto& rel = std::get<RelLiteral>(lit);
            if (!rel.negated) continue;
            std::string sub = rel.atom.pred.surface();
            std::string cond;
            for (std::size_t i = 0; i < rel.atom.args.size(); ++i) {
                if (!cond.empty()) cond += " AND ";
                cond += sub + "." + column(i) + " = ";
                if (const auto* var = std::get_if<Variable>(&rel.atom.args[i])) {
                    auto it = cols.find(var->name);
                    if (it == cols.end()) {
                        throw SqlGenError("unsupported construct: unbound variable " + var->name +
                                          " under negation in '" +
                                          datalog::printer::to_string(rule) + "'");
                    }
                    cond += table + "." + column(it->second.front());
                } else {
                    cond += sql_value(std::get<datalog::Constant>(rel.atom.args[i]).value);
                }
            }
            where.push_back("NOT EXISTS (SELECT 1 FROM " + sub +
                            (cond.empty() ? "" : " WHERE " + cond) + ")");
        }
    }

    std::string select = "SELECT ";
    for (std::size_t i = 0; i < rule.head.args.size(); ++i) {
        if (i > 0) select += ", ";
        const auto* var = std::get_if<Variable>(&rule.head.args[i]);
        if (var == nullptr) {
            throw SqlGenError("unsupported construct: non-variable head argument in '" +
                              datalog::printer::to_string(rule) + "'");
        }
        auto it = cols.find(var->name);
        if (it == cols.end()) {
            throw SqlGenError("unsupported construct: head variable " + var->name +
                              " not bound by the scanned relation in '" +
                              datalog::printer::to_string(rule) + "'");
        }
        select += column(it->second.front());
    }
    select += " FROM " + table;
    for (std::size_t i = 0; i < where.size(); ++i) {
        select += i == 0 ? " WHERE " : " AND ";
        select += where[i];
    }
    return select;
}

}  // namespace

std::vector<Statement> emit_view(const Program& get_prime) {
    std::vector<Statement> out;
    for (const auto& [pred, decl] : get_prime.decls) {
        if (decl.role != Role::View || pred.flavor != Flavor::Base) continue;
        std::vector<std::string> selects;
        std::vector<std::string> tables;
        for (const auto& rule : get_prime.rules) {
            if (rule.head.pred != pred) continue;
            selects.push_back(select_for_rule(rule));
            for (const auto& lit : rule.body) {
                const auto* rel = std::get_if<RelLiteral>(&lit);
                if (rel == nullptr || rel->negated) continue;
                std::string table = rel->atom.pred.surface();
                if (std::find(tables.begin(), tables.end(), table) == tables.end()) {
                    tables.push_back(table);
                }
            }
        }
        if (selects.empty()) continue;
        std::ostringstream sql;
        sql << "CREATE VIEW " << pred.surface() << " AS\n";
        for (std::size_t i = 0; i < selects.size(); ++i) {
            if (i > 0) sql << "\n  UNION\n";
            sql << "  " << selects[i];
        }
        sql << ";";
        out.push_back({pred.surface(), sql.str(), decl.arity, std::move(tables)});
    }
    return out;
}

namespace {

// Row-matching condition: c1 = NEW.c1 AND c2 = NEW.c2 ...
std::string match_row(std::size_t arity, const std::string& row) {
    std::string out;
    for (std::size_t i = 0; i < arity; ++i) {
        if (i > 0) out += " AND ";
        out += column(i) + " = " + row + "." + column(i);
    }
    return out;
}

std::string row_values(std::size_t arity, const std::string& row) {
    std::string out;
    for (std::size_t i = 0; i < arity; ++i) {
        if (i > 0) out += ", ";
        out += row + "." + column(i);
    }
    return out;
}

// Guard over the trigger row: variables resolve to NEW.cj / OLD.cj through
// the view pattern.
std::string guard_condition(const std::vector<Comparison>& guard, const Atom& pattern,
                            const std::string& row) {
    auto cols = var_columns(pattern);
    std::string out;
    for (std::size_t i = 0; i < guard.size(); ++i) {
        if (i > 0) out += " AND ";
        out += render_comparison(guard[i], cols, row + ".", Rule{pattern, {}});
    }
    return out;
}

std::vector<std::string> insert_branch(const std::string& table, std::size_t arity,
                                       bool idempotent) {
    std::vector<std::string> body;
    if (idempotent) {
        body.push_back("IF NOT EXISTS (SELECT 1 FROM " + table + " WHERE " +
                       match_row(arity, "NEW") + ") THEN");
        body.push_back("  INSERT INTO " + table + " VALUES (" + row_values(arity, "NEW") + ");");
        body.push_back("END IF;");
    } else {
        body.push_back("INSERT INTO " + table + " VALUES (" + row_values(arity, "NEW") + ");");
    }
    return body;
}

std::vector<std::string> delete_branch(const std::string& table, std::size_t arity) {
    return {"DELETE FROM " + table + " WHERE " + match_row(arity, "OLD") + ";"};
}

std::string trigger_statement(const std::string& view, const std::string& event,
                              const std::string& guard, const std::vector<std::string>& then_body,
                              const std::vector<std::string>& else_body) {
    std::ostringstream sql;
    sql << "CREATE TRIGGER " << view << "_" << (event == "INSERT" ? "insert" : "delete")
        << " INSTEAD OF " << event << " ON " << view << "\nFOR EACH ROW\nBEGIN\n";
    auto emit = [&](const std::vector<std::string>& body, const std::string& indent) {
        for (const auto& line : body) sql << indent << line << "\n";
    };
    if (guard.empty()) {
        emit(then_body, "  ");
    } else {
        sql << "  IF " << guard << " THEN\n";
        emit(then_body, "    ");
        if (!else_body.empty()) {
            sql << "  ELSE\n";
            emit(else_body, "    ");
        }
        sql << "  END IF;\n";
    }
    sql << "END;";
    return sql.str();
}

// Does undef define the given aux-delta head with an idempotence literal?
struct AuxRuleInfo {
    bool present = false;
    bool idempotent = false;
};

AuxRuleInfo aux_rule_info(const Program& undef, const PredicateRef& view, Flavor delta_flavor) {
    AuxRuleInfo info;
    PredicateRef head{view.name, delta_flavor};
    PredicateRef aux{view.name, Flavor::Aux};
    for (const auto& rule : undef.rules) {
        if (rule.head.pred != head) continue;
        info.present = true;
        for (const auto& lit : rule.body) {
            const auto* rel = std::get_if<RelLiteral>(&lit);
            if (rel != nullptr && rel->negated && rel->atom.pred == aux) info.idempotent = true;
        }
    }
    return info;
}

}  // namespace

std::vector<Statement> emit_triggers(const Program& putdelta, const Program& undef) {
    derive::BxSpec spec;
    try {
        spec = derive::make_bx_spec(putdelta);
    } catch (const derive::FragmentError& e) {
        throw SqlGenError(e.what());
    }

    std::vector<Statement> out;
    for (const auto& shape : spec.shapes) {
        std::size_t arity = shape.pattern.args.size();
        std::string view = shape.view.surface();
        std::string source = shape.source.surface();
        std::string aux = PredicateRef{shape.view.name, Flavor::Aux}.surface();
        std::string guard = guard_condition(shape.guard, shape.pattern, "NEW");

        bool source_idempotent = false;
        for (const auto& rule : spec.putdelta.rules) {
            if (rule.head.pred != PredicateRef{shape.source.name, Flavor::Insert}) continue;
            for (const auto& lit : rule.body) {
                const auto* rel = std::get_if<RelLiteral>(&lit);
                if (rel != nullptr && rel->negated && rel->atom.pred == shape.source) {
                    source_idempotent = true;
                }
            }
        }

        AuxRuleInfo aux_insert = aux_rule_info(undef, shape.view, Flavor::AuxInsert);
        AuxRuleInfo aux_delete = aux_rule_info(undef, shape.view, Flavor::AuxDelete);

        std::vector<std::string> then_insert = insert_branch(source, arity, source_idempotent);
        std::vector<std::string> else_insert =
            aux_insert.present ? insert_branch(aux, arity, aux_insert.idempotent)
                               : std::vector<std::string>{};
        std::vector<std::string> tables{source};
        if (aux_insert.present || aux_delete.present) tables.push_back(aux);
        out.push_back({view,
                       trigger_statement(view, "INSERT", shape.guard.empty() ? "" : guard,
                                         then_insert, else_insert),
                       arity, tables});

        if (shape.has_delete_rule || aux_delete.present) {
            std::string old_guard = guard_condition(shape.guard, shape.pattern, "OLD");
            std::vector<std::string> then_delete =
                shape.has_delete_rule ? delete_branch(source, arity)
                                      : std::vector<std::string>{};
            std::vector<std::string> else_delete =
                aux_delete.present ? delete_branch(aux, arity) : std::vector<std::string>{};
            out.push_back({view,
                           trigger_statement(view, "DELETE", shape.guard.empty() ? "" : old_guard,
                                             then_delete, else_delete),
                           arity, tables});
        }
    }
    return out;
}

SqlArtifact emit_sql(const derive::DerivedBx& derived) {
    SqlArtifact artifact;
    artifact.view_statements = emit_view(derived.get_prime);
    artifact.trigger_statements = emit_triggers(derived.spec.putdelta, derived.undef);
    return artifact;
}

std::vector<std::pair<std::string, std::string>> render_files(const SqlArtifact& artifact) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& view_stmt : artifact.view_statements) {
        std::ostringstream content;
        content << "-- Base table templates (create manually; adjust types as needed):\n";
        for (const auto& table : view_stmt.tables) {
            content << "--   CREATE TABLE " << table << " (";
            for (std::size_t i = 0; i < view_stmt.arity; ++i) {
                if (i > 0) content << ", ";
                content << column(i) << " INTEGER";
            }
            content << ");\n";
        }
        content << "\n" << view_stmt.sql << "\n";
        out.emplace_back(view_stmt.view + ".view.sql", content.str());

        std::ostringstream triggers;
        bool first = true;
        for (const auto& trig : artifact.trigger_statements) {
            if (trig.view != view_stmt.view) continue;
            if (!first) triggers << "\n";
            first = false;
            triggers << trig.sql << "\n";
        }
        std::string trig_text = triggers.str();
        if (!trig_text.empty()) {
            out.emplace_back(view_stmt.view + ".triggers.sql", trig_text);
        }
    }
    return out;
}

}  // namespace coex::sqlgen
