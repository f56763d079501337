#include <doctest.h>

#include <regex>
#include <set>

#include "coex/derive.hpp"
#include "coex/parser.hpp"
#include "coex/sqlgen.hpp"
#include "support/test_util.hpp"

using namespace coex;
using namespace coex::datalog;
using coex::testutil::load_program;

namespace {

derive::DerivedBx derive_for(const char* name) {
    return derive::derive_all(derive::make_bx_spec(load_program(name)),
                              verify::Universe::int_range(0, 8, 1));
}

std::map<std::string, std::string> files_for(const char* name) {
    auto rendered = sqlgen::render_files(sqlgen::emit_sql(derive_for(name)));
    return {rendered.begin(), rendered.end()};
}

}  // namespace

TEST_CASE("the selection view matches its committed snapshot") {
    auto files = files_for("specs/v1_sel4.dl");
    CHECK(files.at("v1.view.sql") == testutil::read_file(testutil::data_path("sql/v1.view.sql")));
    CHECK(files.at("v1.triggers.sql") ==
          testutil::read_file(testutil::data_path("sql/v1.triggers.sql")));
}

TEST_CASE("the identity view matches its committed snapshot") {
    auto files = files_for("specs/identity.dl");
    CHECK(files.at("v.view.sql") == testutil::read_file(testutil::data_path("sql/v.view.sql")));
    CHECK(files.at("v.triggers.sql") ==
          testutil::read_file(testutil::data_path("sql/v.triggers.sql")));
}

TEST_CASE("emit_view unions one SELECT per rule with the guard in WHERE") {
    derive::DerivedBx bx = derive_for("specs/v1_sel4.dl");
    auto statements = sqlgen::emit_view(bx.get_prime);
    REQUIRE(statements.size() == 1);
    const std::string& sql = statements[0].sql;
    CHECK(sql.find("CREATE VIEW v1 AS") == 0);
    CHECK(sql.find("SELECT c1 FROM s WHERE 4 < c1") != std::string::npos);
    CHECK(sql.find("UNION") != std::string::npos);
    CHECK(sql.find("SELECT c1 FROM v1_ud WHERE NOT (4 < c1)") != std::string::npos);
    CHECK(sql.back() == ';');
}

TEST_CASE("the identity view emits a single unguarded SELECT") {
    derive::DerivedBx bx = derive_for("specs/identity.dl");
    auto statements = sqlgen::emit_view(bx.get_prime);
    REQUIRE(statements.size() == 1);
    CHECK(statements[0].sql == "CREATE VIEW v AS\n  SELECT c1 FROM s;");
}

TEST_CASE("a two-view derivation emits independent statements in declaration order") {
    derive::DerivedBx bx = derive_for("specs/two_view.dl");
    auto statements = sqlgen::emit_view(bx.get_prime);
    REQUIRE(statements.size() == 2);
    CHECK(statements[0].view == "v1");
    CHECK(statements[1].view == "v2");
    CHECK(statements[1].sql.find("7 < c1") != std::string::npos);
    auto triggers = sqlgen::emit_triggers(bx.spec.putdelta, bx.undef);
    CHECK(triggers.size() == 4);  // insert + delete per view
}

TEST_CASE("insert triggers route on the guard with idempotence checks") {
    derive::DerivedBx bx = derive_for("specs/v1_sel4.dl");
    auto triggers = sqlgen::emit_triggers(bx.spec.putdelta, bx.undef);
    REQUIRE(triggers.size() == 2);
    const std::string& ins = triggers[0].sql;
    CHECK(ins.find("CREATE TRIGGER v1_insert INSTEAD OF INSERT ON v1") == 0);
    CHECK(ins.find("IF 4 < NEW.c1 THEN") != std::string::npos);
    CHECK(ins.find("IF NOT EXISTS (SELECT 1 FROM s WHERE c1 = NEW.c1) THEN") !=
          std::string::npos);
    CHECK(ins.find("INSERT INTO s VALUES (NEW.c1);") != std::string::npos);
    CHECK(ins.find("ELSE") != std::string::npos);
    CHECK(ins.find("INSERT INTO v1_ud VALUES (NEW.c1);") != std::string::npos);

    const std::string& del = triggers[1].sql;
    CHECK(del.find("CREATE TRIGGER v1_delete INSTEAD OF DELETE ON v1") == 0);
    CHECK(del.find("IF 4 < OLD.c1 THEN") != std::string::npos);
    CHECK(del.find("DELETE FROM s WHERE c1 = OLD.c1;") != std::string::npos);
    CHECK(del.find("DELETE FROM v1_ud WHERE c1 = OLD.c1;") != std::string::npos);
}

TEST_CASE("identity triggers have no branch and write only the source") {
    derive::DerivedBx bx = derive_for("specs/identity.dl");
    auto triggers = sqlgen::emit_triggers(bx.spec.putdelta, bx.undef);
    REQUIRE(triggers.size() == 2);
    for (const auto& trig : triggers) {
        CHECK(trig.sql.find("ELSE") == std::string::npos);
        CHECK(trig.sql.find("v_ud") == std::string::npos);
    }
}

TEST_CASE("multi-column rows are matched column by column") {
    derive::DerivedBx bx = derive_for("specs/v1_sel4_pk.dl");
    auto triggers = sqlgen::emit_triggers(bx.spec.putdelta, bx.undef);
    CHECK(triggers[0].sql.find("IF 4 < NEW.c2 THEN") != std::string::npos);
    CHECK(triggers[0].sql.find("c1 = NEW.c1 AND c2 = NEW.c2") != std::string::npos);
    CHECK(triggers[0].sql.find("VALUES (NEW.c1, NEW.c2)") != std::string::npos);
}

TEST_CASE("emission is deterministic") {
    auto a = files_for("specs/two_view.dl");
    auto b = files_for("specs/two_view.dl");
    CHECK(a == b);
}

TEST_CASE("every emitted table identifier is declared in the derivation") {
    derive::DerivedBx bx = derive_for("specs/v1_sel4.dl");
    std::set<std::string> declared;
    for (const auto& [pred, decl] : bx.get_prime.decls) declared.insert(pred.surface());
    for (const auto& [pred, decl] : bx.spec.putdelta.decls) declared.insert(pred.surface());
    for (const auto& [pred, decl] : bx.aux_decls) declared.insert(pred.surface());

    auto artifact = sqlgen::emit_sql(bx);
    std::regex table_ref("\\b(FROM|INTO|ON|VIEW|TRIGGER)\\b\\s+([A-Za-z0-9_]+)");
    auto check_statement = [&](const std::string& sql) {
        for (std::sregex_iterator it(sql.begin(), sql.end(), table_ref), end; it != end; ++it) {
            std::string kind = (*it)[1];
            std::string ident = (*it)[2];
            if (kind == "TRIGGER") continue;  // trigger names are synthesized
            CAPTURE(ident);
            CHECK(declared.count(ident) == 1);
        }
    };
    for (const auto& stmt : artifact.view_statements) check_statement(stmt.sql);
    for (const auto& stmt : artifact.trigger_statements) check_statement(stmt.sql);
}

TEST_CASE("unsupported constructs are rejected") {
    Program joined = parse_program(
        "source s/1.\nsource t/1.\nview v/1.\nv(X) :- s(X), t(X).");
    CHECK_THROWS_AS(sqlgen::emit_view(joined), sqlgen::SqlGenError);
    Program putdelta = parse_program("source s/1.\nview v/1.\n+s(X) :- v(X), w(X).");
    CHECK_THROWS_AS(sqlgen::emit_triggers(putdelta, Program{}), sqlgen::SqlGenError);
}
