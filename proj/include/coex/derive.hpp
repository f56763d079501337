#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coex/ast.hpp"
#include "coex/verify.hpp"

namespace coex::derive {

struct FragmentError : Error {
    using Error::Error;
};

struct DeriveError : Error {
    DeriveError(int step, const std::string& message,
                std::optional<verify::VerificationReport> report = std::nullopt)
        : Error("step " + std::to_string(step) + ": " + message),
          step(step),
          report(std::move(report)) {}
    int step;
    std::optional<verify::VerificationReport> report;
};

// One view's slice of a putdelta program: the selection fragment ties a view
// to a source through one insert rule and at most one delete rule whose
// bodies share the head's variable vector and carry integer comparisons.
struct ViewShape {
    datalog::PredicateRef view;
    datalog::PredicateRef source;
    datalog::Atom pattern;  // view atom over the insert rule's variables
    std::vector<datalog::Comparison> guard;         // insert-rule comparisons
    std::vector<datalog::Comparison> delete_guard;  // delete-rule comparisons
    bool has_delete_rule = false;

    friend bool operator==(const ViewShape&, const ViewShape&) = default;
};

struct BxSpec {
    datalog::Program putdelta;
    std::vector<ViewShape> shapes;

    std::vector<datalog::PredicateRef> sources() const;
    std::vector<datalog::PredicateRef> views() const;

    friend bool operator==(const BxSpec&, const BxSpec&) = default;
};

// Validates the fragment and extracts per-view shapes. Throws FragmentError.
BxSpec make_bx_spec(datalog::Program putdelta);
BxSpec load_bx_spec(const std::string& text);

struct DerivedBx {
    BxSpec spec;
    datalog::Program get;
    datalog::Program putdelta_prime;
    datalog::Program undef;
    datalog::Program get_prime;
    std::map<datalog::PredicateRef, datalog::Declaration> aux_decls;

    friend bool operator==(const DerivedBx&, const DerivedBx&) = default;
};

// Step 1: candidate get (one selection rule per view), verified well-behaved
// against putdelta over the bound.
datalog::Program derive_get(const BxSpec& spec, const verify::Universe& bound);
datalog::Program build_get_candidate(const BxSpec& spec);  // unverified

// Step 2: putdelta' over (v_cur, +v, -v) by unfolding the view-update
// decomposition (v = v_cur minus deletions plus insertions) into putdelta,
// plus the v_cur definition per view.
datalog::Program derive_putdelta_prime(const BxSpec& spec);

// Step 3: effective-delta undef rules guarded by the complement of the get
// guard. The delta-form intermediate is available separately for inspection.
datalog::Program derive_undef(const datalog::Program& putdelta_prime,
                              const datalog::Program& get);
datalog::Program derive_undef_method(const datalog::Program& putdelta_prime);

// Step 4: get' = get plus auxiliary rules, verified total over the bound.
datalog::Program derive_get_prime(const BxSpec& spec, const datalog::Program& undef,
                                  const verify::Universe& bound);
datalog::Program build_get_prime_candidate(const BxSpec& spec);  // unverified

// The whole pipeline; any step's failure aborts with that step's diagnostics.
DerivedBx derive_all(const BxSpec& spec, const verify::Universe& bound);
DerivedBx derive_all_unverified(const BxSpec& spec);

verify::VerificationReport check_totality(const DerivedBx& derived, const verify::Universe& u);

}  // namespace coex::derive
