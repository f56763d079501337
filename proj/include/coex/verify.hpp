#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coex/ast.hpp"

namespace coex::verify {

// Finite search space for brute-force checking. Tuples draw the last column
// from ints; leading ("key") columns draw from strings when any are given,
// otherwise from ints. Relations are enumerated up to max_relation_size.
struct Universe {
    std::vector<std::int64_t> ints;
    std::vector<std::string> strings;
    std::size_t max_relation_size = 3;

    enum class Mode { Exhaustive, Sampled };
    Mode mode = Mode::Exhaustive;
    std::uint64_t samples = 1000;
    std::uint64_t seed = 0;

    static Universe int_range(std::int64_t lo, std::int64_t hi, std::size_t max_size);
};

enum class Law { GetPut, PutGet, Totality, RangeMembership };

const char* to_string(Law law);

struct Counterexample {
    datalog::Instance given;                    // source (or joint physical) state
    std::optional<datalog::Instance> target;    // requested view state, when applicable
    datalog::Instance observed;
    datalog::Instance expected;
};

struct VerificationReport {
    Law law = Law::GetPut;
    bool pass = true;
    std::uint64_t cases = 0;
    std::optional<Counterexample> counterexample;
    std::string note;

    std::string text() const;
    std::string json_text() const;
};

std::string reports_json(const std::vector<VerificationReport>& reports);

// GetPut: for every source instance s, feeding the unchanged view get(s)
// into putdelta must produce empty source deltas.
VerificationReport check_getput(const datalog::Program& get, const datalog::Program& putdelta,
                                const Universe& u);

// PutGet: for every source instance and every view state in range(get),
// applying putdelta's deltas and recomputing get must reproduce the view.
VerificationReport check_putget(const datalog::Program& get, const datalog::Program& putdelta,
                                const Universe& u);

// True iff some source instance over the universe maps to v under get.
// get must define a single view.
bool range_member(const datalog::Program& get, const datalog::Relation& v, const Universe& u);

// Totality: for every joint physical state (sources and auxiliaries) and
// every target view state, putdelta plus undef must accept the update and
// get_prime must reproduce the target exactly. Also asserts the GetPut
// analogue (unchanged views produce no deltas) per joint state.
VerificationReport check_totality(const datalog::Program& putdelta,
                                  const datalog::Program& undef,
                                  const datalog::Program& get_prime, const Universe& u);

// All relations over the universe for one arity, size-ascending then
// lexicographic; shared by the checkers and the test oracles.
std::vector<datalog::Relation> enumerate_relations(const Universe& u, std::size_t arity);

}  // namespace coex::verify
