#include <doctest.h>

#include <random>

#include "coex/eval.hpp"
#include "coex/parser.hpp"
#include "coex/printer.hpp"
#include "coex/stratify.hpp"
#include "coex/unfold.hpp"
#include "support/naive_eval.hpp"
#include "support/test_util.hpp"

using namespace coex;
using namespace coex::datalog;
using coex::testutil::rel1;

TEST_CASE("parse a selection rule") {
    Program p = parse_program("v1(X) :- s(X), 4 < X.");
    REQUIRE(p.rules.size() == 1);
    const Rule& r = p.rules[0];
    CHECK(r.head.pred == PredicateRef{"v1", Flavor::Base});
    CHECK(r.head.args.size() == 1);
    REQUIRE(r.body.size() == 2);
    const auto& lit = std::get<RelLiteral>(r.body[0]);
    CHECK(lit.atom.pred == PredicateRef{"s", Flavor::Base});
    CHECK_FALSE(lit.negated);
    const auto& cmp = std::get<Comparison>(r.body[1]);
    CHECK(cmp.op == CmpOp::Lt);
    CHECK(std::get<Constant>(cmp.lhs).value == Value{std::int64_t{4}});
}

TEST_CASE("parse declarations without rules") {
    Program p = parse_program("source s/1.\nview v1/1.\n");
    CHECK(p.rules.empty());
    CHECK(p.decls.size() == 2);
    CHECK(p.decls.at({"s", Flavor::Base}).role == Role::Source);
    CHECK(p.decls.at({"v1", Flavor::Base}).role == Role::View);
}

TEST_CASE("parse a delta-insert head") {
    Program p = parse_program("+s(X) :- v1(X), not s(X), 4 < X.");
    REQUIRE(p.rules.size() == 1);
    CHECK(p.rules[0].head.pred == PredicateRef{"s", Flavor::Insert});
    const auto& neg = std::get<RelLiteral>(p.rules[0].body[1]);
    CHECK(neg.negated);
}

TEST_CASE("unsafe rule is rejected naming the variable") {
    CHECK_THROWS_WITH_AS(parse_program("p(X) :- not q(X)."),
                         doctest::Contains("variable X"), ParseError);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_program("source s/1.\nv1(X :- s(X).");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column > 1);
    }
}

TEST_CASE("arity clashes name the predicate") {
    CHECK_THROWS_WITH_AS(parse_program("source s/1.\nv1(X, Y) :- s(X, Y)."),
                         doctest::Contains("'s'"), ParseError);
}

TEST_CASE("facts are rejected") {
    CHECK_THROWS_AS(parse_program("p(1)."), ParseError);
}

TEST_CASE("every predicate flavor round-trips through the surface form") {
    const char* text =
        "pm_s(X) :- +s(X).\n"
        "pm_s(X) :- -s(X).\n"
        "+v_ud(X) :- +v(X), not pm_s(X).\n"
        "-v_ud(X) :- -v(X), not pm_s(X).\n"
        "w(X) :- v_cur(X), not v_ud(X).\n";
    Program p = parse_program(text);
    Program q = parse_program(printer::to_string(p));
    CHECK(p == q);
    CHECK(PredicateRef{"v", Flavor::AuxInsert}.surface() == "+v_ud");
    CHECK(PredicateRef{"s", Flavor::PlusMinus}.surface() == "pm_s");
    CHECK(PredicateRef{"v", Flavor::Current}.surface() == "v_cur");
}

TEST_CASE("reserved name shapes are rejected") {
    CHECK_THROWS_AS(parse_program("source pm_/1."), ParseError);
    // A base name may not itself look like another flavor.
    CHECK_THROWS_AS(classify_predicate("x_cur_ud", false, false), ValidationError);
    CHECK_THROWS_AS(classify_predicate("s_cur", true, false), ValidationError);
}

TEST_CASE("negative integers parse in term position") {
    Program p = parse_program("v(X) :- s(X), -3 < X, X <> -7.");
    const auto& c1 = std::get<Comparison>(p.rules[0].body[1]);
    CHECK(std::get<Constant>(c1.lhs).value == Value{std::int64_t{-3}});
    const auto& c2 = std::get<Comparison>(p.rules[0].body[2]);
    CHECK(c2.op == CmpOp::Ne);
}

TEST_CASE("quoted string constants round-trip") {
    Program p = parse_program("v(X) :- s('p4', X).");
    const auto& lit = std::get<RelLiteral>(p.rules[0].body[0]);
    CHECK(std::get<Constant>(lit.atom.args[0]).value == Value{std::string("p4")});
    CHECK(parse_program(printer::to_string(p)) == p);
}

TEST_CASE("pretty-printing round-trips the golden programs") {
    for (const char* name :
         {"golden/get.dl", "golden/putdelta_prime.dl", "golden/undef.dl",
          "golden/get_prime.dl", "specs/v1_sel4.dl", "specs/identity.dl", "specs/two_view.dl"}) {
        CAPTURE(name);
        Program p = testutil::load_program(name);
        Program q = parse_program(printer::to_string(p));
        CHECK(p == q);
    }
}

namespace {

// Small random program generator for the round-trip property: rules are
// safe by construction (positive literal first binds every variable).
Program random_program(std::mt19937& rng) {
    Program p;
    auto coin = [&](int pct) { return static_cast<int>(rng() % 100) < pct; };
    std::vector<PredicateRef> preds = {
        {"a", Flavor::Base},     {"b", Flavor::Base},    {"b", Flavor::Insert},
        {"c", Flavor::Delete},   {"d", Flavor::Current}, {"e", Flavor::Aux},
        {"e", Flavor::AuxInsert}, {"f", Flavor::PlusMinus}};
    std::size_t arity = 1 + rng() % 3;
    for (const auto& pred : preds) {
        p.declare(pred, arity, rng() % 2 == 0 ? Role::Source : Role::View);
    }
    std::vector<Term> vars;
    for (std::size_t i = 0; i < arity; ++i) vars.push_back(Variable{"X" + std::to_string(i)});
    std::size_t nrules = 1 + rng() % 3;
    for (std::size_t r = 0; r < nrules; ++r) {
        PredicateRef head{"h" + std::to_string(rng() % 2), Flavor::Base};
        std::vector<Literal> body;
        body.push_back(RelLiteral{{preds[rng() % preds.size()], vars}, false});
        if (coin(60)) body.push_back(RelLiteral{{preds[rng() % preds.size()], vars}, true});
        if (coin(60)) {
            body.push_back(Comparison{vars[0], static_cast<CmpOp>(rng() % 6),
                                      Constant{std::int64_t(rng() % 10)}, coin(30)});
        }
        p.add_rule({{head, vars}, body});
    }
    return p;
}

}  // namespace

TEST_CASE("pretty-printing round-trips generated programs") {
    std::mt19937 rng(20240811);
    for (int i = 0; i < 80; ++i) {
        Program p = random_program(rng);
        Program q = parse_program(printer::to_string(p));
        CHECK(p == q);
    }
}

TEST_CASE("stratify orders the get' program as [{s, v1_ud}, {v1}]") {
    Program p = testutil::load_program("golden/get_prime.dl");
    auto strata = stratify(p);
    REQUIRE(strata.size() == 2);
    CHECK(strata[0] == std::vector<PredicateRef>{{"s", Flavor::Base}, {"v1", Flavor::Aux}});
    CHECK(strata[1] == std::vector<PredicateRef>{{"v1", Flavor::Base}});
}

TEST_CASE("stratify of the empty program is empty") {
    CHECK(stratify(Program{}).empty());
}

TEST_CASE("stratify rejects recursion") {
    CHECK_THROWS_WITH_AS(stratify(parse_program("p(X) :- p(X).")), doctest::Contains("p -> p"),
                         StratifyError);
    CHECK_THROWS_AS(stratify(parse_program("p(X) :- q(X), not r(X).\nr(X) :- p(X).")),
                    StratifyError);
}

TEST_CASE("evaluate computes the worked selection example") {
    Program get = testutil::load_program("golden/get.dl");
    Instance input{{{"s", Flavor::Base}, rel1({3, 5, 9})}};
    Instance out = evaluate(get, input);
    CHECK(out.at({"v1", Flavor::Base}) == rel1({5, 9}));
    // matches the naive enumeration oracle
    Instance oracle = testutil::naive_evaluate(get, input);
    CHECK(out.at({"v1", Flavor::Base}) == oracle.at({"v1", Flavor::Base}));
}

TEST_CASE("evaluate on an all-empty instance derives nothing") {
    Program get = testutil::load_program("golden/get.dl");
    Instance input{{{"s", Flavor::Base}, Relation{1, {}}}};
    Instance out = evaluate(get, input);
    CHECK(out.at({"v1", Flavor::Base}).empty());
}

TEST_CASE("get' unions the source selection with the auxiliary residue") {
    Program gp = testutil::load_program("golden/get_prime.dl");
    Instance input{{{"s", Flavor::Base}, rel1({5})}, {{"v1", Flavor::Aux}, rel1({3})}};
    Instance out = evaluate(gp, input);
    CHECK(out.at({"v1", Flavor::Base}) == rel1({5, 3}));
}

TEST_CASE("evaluate reports missing inputs and type errors") {
    Program gp = testutil::load_program("golden/get_prime.dl");
    Instance missing{{{"s", Flavor::Base}, rel1({5})}};
    CHECK_THROWS_WITH_AS(evaluate(gp, missing), doctest::Contains("v1_ud"), EvalError);

    Program get = testutil::load_program("golden/get.dl");
    Relation strings{1, {{std::string("p4")}}};
    Instance bad{{{"s", Flavor::Base}, strings}};
    CHECK_THROWS_AS(evaluate(get, bad), EvalError);

    Instance overdetermined{{{"s", Flavor::Base}, rel1({5})},
                            {{"v1", Flavor::Base}, rel1({5})}};
    CHECK_THROWS_WITH_AS(evaluate(get, overdetermined), doctest::Contains("derived"), EvalError);
}

TEST_CASE("evaluate is pure") {
    Program get = testutil::load_program("golden/get.dl");
    Instance input{{{"s", Flavor::Base}, rel1({3, 5})}};
    Instance copy = input;
    Instance a = evaluate(get, input);
    Instance b = evaluate(get, input);
    CHECK(a == b);
    CHECK(input == copy);
}

TEST_CASE("semi-naive evaluation matches the naive oracle on random instances") {
    std::vector<Program> family = {
        testutil::load_program("golden/get.dl"),
        testutil::load_program("golden/get_prime.dl"),
        testutil::load_program("golden/undef.dl"),
        testutil::load_program("golden/putdelta_prime.dl"),
        testutil::load_program("specs/v1_sel4.dl"),
    };
    std::mt19937 rng(7);
    auto random_rel = [&](std::size_t arity) {
        Relation r{arity, {}};
        std::size_t n = rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            Tuple t;
            for (std::size_t c = 0; c < arity; ++c) t.push_back(std::int64_t(rng() % 11));
            r.tuples.insert(t);
        }
        return r;
    };
    for (const auto& program : family) {
        Evaluator eval(program);
        for (int trial = 0; trial < 40; ++trial) {
            Instance input;
            for (const auto& pred : eval.edb_order()) {
                input[pred] = random_rel(program.arity_of(pred));
            }
            Instance fast = eval.evaluate(input);
            Instance oracle = testutil::naive_evaluate(program, input);
            for (const auto& pred : eval.idb_order()) {
                CAPTURE(pred.surface());
                CHECK(fast.at(pred) == oracle.at(pred));
            }
        }
    }
}

TEST_CASE("unfold reproduces the putdelta' shape") {
    Program putdelta = testutil::load_program("specs/v1_sel4.dl");
    Program defs = parse_program(
        "v1(X) :- v1_cur(X), not -v1(X).\n"
        "v1(X) :- +v1(X).\n");
    Program out = unfold(putdelta, defs);
    Program expected = parse_program(
        "+s(X) :- v1_cur(X), not -v1(X), not s(X), 4 < X.\n"
        "+s(X) :- +v1(X), not s(X), 4 < X.\n"
        "-s(X) :- not v1_cur(X), not +v1(X), s(X), 4 < X.\n"
        "-s(X) :- -v1(X), not +v1(X), s(X), 4 < X.\n");
    REQUIRE(out.rules.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CAPTURE(i);
        CHECK(testutil::rule_equiv(out.rules[i], expected.rules[i]));
    }
}

TEST_CASE("unfold with empty definitions is the identity") {
    Program p = testutil::load_program("specs/v1_sel4.dl");
    CHECK(unfold(p, Program{}) == p);
}

TEST_CASE("a twice-occurring defined predicate unfolds to the cross product") {
    Program p = parse_program("p(X, Y) :- d(X), e(X, Y), d(Y).");
    Program defs = parse_program("d(X) :- a(X).\nd(X) :- b(X).");
    Program out = unfold(p, defs);
    CHECK(out.rules.size() == 4);  // 2 definitions, squared

    // Semantic equivalence against evaluating p together with the
    // definitions, over all small instances.
    Program combined = parse_program(
        "p(X, Y) :- d(X), e(X, Y), d(Y).\nd(X) :- a(X).\nd(X) :- b(X).");
    std::vector<Relation> unary;
    for (int mask = 0; mask < 8; ++mask) {
        Relation r{1, {}};
        for (int v = 0; v < 3; ++v) {
            if (mask & (1 << v)) r.tuples.insert({std::int64_t(v)});
        }
        unary.push_back(r);
    }
    Relation e_all{2, {}};
    for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 3; ++y) e_all.tuples.insert({std::int64_t(x), std::int64_t(y)});
    }
    for (const auto& a : unary) {
        for (const auto& b : unary) {
            Instance input{{{"a", Flavor::Base}, a},
                           {{"b", Flavor::Base}, b},
                           {{"e", Flavor::Base}, e_all}};
            Instance lhs = evaluate(out, input);
            Instance rhs = evaluate(combined, input);
            CHECK(lhs.at({"p", Flavor::Base}) == rhs.at({"p", Flavor::Base}));
        }
    }
}

TEST_CASE("unfolding preserves putdelta semantics over the bounded universe") {
    Program putdelta = testutil::load_program("specs/v1_sel4.dl");
    Program defs = parse_program(
        "v1(X) :- v1_cur(X), not -v1(X).\n"
        "v1(X) :- +v1(X).\n");
    Program unfolded = unfold(putdelta, defs);
    Program combined = parse_program(
        "source s/1.\n"
        "+s(X) :- v1(X), not s(X), 4 < X.\n"
        "-s(X) :- not v1(X), s(X), 4 < X.\n"
        "v1(X) :- v1_cur(X), not -v1(X).\n"
        "v1(X) :- +v1(X).\n");
    Evaluator eu(unfolded);
    Evaluator ec(combined);
    std::vector<Relation> rels;
    for (int mask = 0; mask < 64; ++mask) {
        Relation r{1, {}};
        for (int v = 0; v < 6; ++v) {
            if (mask & (1 << v)) r.tuples.insert({std::int64_t(v)});
        }
        if (r.size() <= 2) rels.push_back(r);
    }
    for (const auto& s : rels) {
        for (const auto& cur : rels) {
            for (const auto& ins : rels) {
                for (const auto& del : rels) {
                    Instance input{{{"s", Flavor::Base}, s},
                                   {{"v1", Flavor::Current}, cur},
                                   {{"v1", Flavor::Insert}, ins},
                                   {{"v1", Flavor::Delete}, del}};
                    Instance a = eu.evaluate(input);
                    Instance b = ec.evaluate(input);
                    REQUIRE(a.at({"s", Flavor::Insert}) == b.at({"s", Flavor::Insert}));
                    REQUIRE(a.at({"s", Flavor::Delete}) == b.at({"s", Flavor::Delete}));
                }
            }
        }
    }
}

TEST_CASE("negated unfolding requires definition bodies without locals") {
    Program p = parse_program("p(X) :- s(X), not d(X).");
    Program defs = parse_program("d(X) :- r(X, Y).");
    CHECK_THROWS_AS(unfold(p, defs), UnfoldError);
}

TEST_CASE("unfolding renames definition locals apart") {
    Program p = parse_program("p(Y) :- s(Y), d(Y).");
    Program defs = parse_program("d(X) :- r(X, Y).");
    Program out = unfold(p, defs);
    REQUIRE(out.rules.size() == 1);
    const auto& body = out.rules[0].body;
    const auto& r_lit = std::get<RelLiteral>(body[1]);
    REQUIRE(r_lit.atom.pred.name == "r");
    const auto& second = std::get<Variable>(r_lit.atom.args[1]);
    CHECK(second.name != "Y");  // the definition's local must not capture
}
