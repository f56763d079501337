#include <doctest.h>

#include "coex/delta.hpp"
#include "coex/eval.hpp"
#include "coex/parser.hpp"
#include "coex/verify.hpp"
#include "support/test_util.hpp"

using namespace coex;
using namespace coex::datalog;
using coex::delta::Delta;
using coex::testutil::rel1;

namespace {

Relation empty1() { return Relation{1, {}}; }

}  // namespace

TEST_CASE("apply_delta inserts and deletes") {
    CHECK(delta::apply_delta(rel1({5, 9}), {rel1({3}), empty1()}) == rel1({5, 9, 3}));
    Relation r = rel1({1, 2});
    CHECK(delta::apply_delta(r, delta::empty_delta(1)) == r);
    CHECK(delta::apply_delta(rel1({5}), {rel1({7}), rel1({5})}) == rel1({7}));
}

TEST_CASE("apply_delta rejects arity mismatches") {
    Relation two{2, {}};
    CHECK_THROWS_AS(delta::apply_delta(two, delta::empty_delta(1)), delta::DeltaError);
}

TEST_CASE("diff computes the effective update") {
    CHECK(delta::diff(rel1({5}), rel1({5, 3})) == Delta{rel1({3}), empty1()});
    CHECK(delta::diff(rel1({5}), rel1({5})) == delta::empty_delta(1));
    CHECK(delta::diff(rel1({5, 9}), rel1({9, 2})) == Delta{rel1({2}), rel1({5})});
}

TEST_CASE("normalize_delta drops no-op parts") {
    CHECK(delta::normalize_delta(rel1({5}), {rel1({5}), empty1()}) == delta::empty_delta(1));
    CHECK(delta::normalize_delta(rel1({5}), {rel1({3}), rel1({9})}) ==
          Delta{rel1({3}), empty1()});
    CHECK_THROWS_AS(delta::normalize_delta(empty1(), Delta{rel1({1}), rel1({1})}),
                    delta::DeltaError);
}

TEST_CASE("make_delta enforces disjointness") {
    CHECK_THROWS_AS(delta::make_delta(rel1({1}), rel1({1})), delta::DeltaError);
    CHECK(delta::make_delta(rel1({1}), rel1({2})).inserted == rel1({1}));
}

TEST_CASE("undef_split keeps the unsynchronized residue") {
    CHECK(delta::undef_split({rel1({3}), empty1()}, empty1()) == Delta{rel1({3}), empty1()});
    CHECK(delta::undef_split({rel1({5}), empty1()}, rel1({5})) == delta::empty_delta(1));
    CHECK(delta::undef_split(delta::empty_delta(1), rel1({1, 2})) == delta::empty_delta(1));
}

namespace {

std::vector<Relation> all_relations_07_size3() {
    verify::Universe u = verify::Universe::int_range(0, 6, 3);
    return verify::enumerate_relations(u, 1);
}

}  // namespace

TEST_CASE("apply_delta(R, diff(R, R')) = R' exhaustively") {
    auto rels = all_relations_07_size3();
    for (const auto& r : rels) {
        for (const auto& r2 : rels) {
            CHECK(delta::apply_delta(r, delta::diff(r, r2)) == r2);
        }
    }
}

TEST_CASE("normalization preserves the applied result exhaustively") {
    verify::Universe u = verify::Universe::int_range(0, 6, 2);
    auto rels = verify::enumerate_relations(u, 1);
    for (const auto& base : rels) {
        for (const auto& ins : rels) {
            for (const auto& del : rels) {
                bool disjoint = true;
                for (const auto& t : ins.tuples) {
                    if (del.contains(t)) disjoint = false;
                }
                if (!disjoint) continue;
                Delta d{ins, del};
                Delta n = delta::normalize_delta(base, d);
                CHECK(delta::apply_delta(base, n) == delta::apply_delta(base, d));
                CHECK(delta::is_effective(base, n));
            }
        }
    }
}

TEST_CASE("undef_split output is disjoint from the source delta union") {
    verify::Universe u = verify::Universe::int_range(0, 6, 2);
    auto rels = verify::enumerate_relations(u, 1);
    for (const auto& ins : rels) {
        for (const auto& pm : rels) {
            Delta out = delta::undef_split({ins, empty1()}, pm);
            for (const auto& t : out.inserted.tuples) CHECK_FALSE(pm.contains(t));
            for (const auto& t : out.deleted.tuples) CHECK_FALSE(pm.contains(t));
        }
    }
}

TEST_CASE("apply_delta agrees with the view-update rules run through the evaluator") {
    Program rules12 = parse_program(
        "v(X) :- v_cur(X), not -v(X).\n"
        "v(X) :- +v(X).\n");
    Evaluator eval(rules12);
    verify::Universe u = verify::Universe::int_range(0, 4, 2);
    auto rels = verify::enumerate_relations(u, 1);
    for (const auto& cur : rels) {
        for (const auto& ins : rels) {
            for (const auto& del : rels) {
                bool disjoint = true;
                for (const auto& t : ins.tuples) {
                    if (del.contains(t)) disjoint = false;
                }
                if (!disjoint) continue;
                Instance input{{{"v", Flavor::Current}, cur},
                               {{"v", Flavor::Insert}, ins},
                               {{"v", Flavor::Delete}, del}};
                Instance out = eval.evaluate(input);
                CHECK(out.at({"v", Flavor::Base}) == delta::apply_delta(cur, Delta{ins, del}));
            }
        }
    }
}

TEST_CASE("undef_split agrees with the residue rules run through the evaluator") {
    Program rules36 = parse_program(
        "pm_s(X) :- +s(X).\n"
        "pm_s(X) :- -s(X).\n"
        "+v_ud(X) :- +v(X), not pm_s(X).\n"
        "-v_ud(X) :- -v(X), not pm_s(X).\n");
    Evaluator eval(rules36);
    verify::Universe u = verify::Universe::int_range(0, 4, 2);
    auto rels = verify::enumerate_relations(u, 1);
    for (const auto& vins : rels) {
        for (const auto& vdel : rels) {
            bool disjoint = true;
            for (const auto& t : vins.tuples) {
                if (vdel.contains(t)) disjoint = false;
            }
            if (!disjoint) continue;
            for (const auto& sins : rels) {
                for (const auto& sdel : rels) {
                    Instance input{{{"v", Flavor::Insert}, vins},
                                   {{"v", Flavor::Delete}, vdel},
                                   {{"s", Flavor::Insert}, sins},
                                   {{"s", Flavor::Delete}, sdel}};
                    Instance out = eval.evaluate(input);
                    Relation pm = sins;
                    for (const auto& t : sdel.tuples) pm.tuples.insert(t);
                    Delta split = delta::undef_split(Delta{vins, vdel}, pm);
                    CHECK(out.at({"v", Flavor::AuxInsert}) == split.inserted);
                    CHECK(out.at({"v", Flavor::AuxDelete}) == split.deleted);
                }
            }
        }
    }
}
