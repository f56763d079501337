#pragma once

#include "coex/ast.hpp"

namespace coex::delta {

struct DeltaError : Error {
    using Error::Error;
};

// A view or source update as a pair of tuple sets. Inserted and deleted must
// be disjoint and of equal arity; make_delta and every operation check this.
struct Delta {
    datalog::Relation inserted;
    datalog::Relation deleted;

    bool empty() const { return inserted.empty() && deleted.empty(); }
    friend bool operator==(const Delta&, const Delta&) = default;
};

Delta make_delta(datalog::Relation inserted, datalog::Relation deleted);
Delta empty_delta(std::size_t arity);

// (current \ deleted) U inserted.
datalog::Relation apply_delta(const datalog::Relation& current, const Delta& delta);

// Inverse of apply_delta: apply_delta(old_rel, diff(old_rel, new_rel)) == new_rel.
Delta diff(const datalog::Relation& old_rel, const datalog::Relation& new_rel);

// Makes a delta effective against a base relation: drops insertions already
// present and deletions of absent tuples.
Delta normalize_delta(const datalog::Relation& base, const Delta& delta);

bool is_effective(const datalog::Relation& base, const Delta& delta);

// The view-update residue no source delta accounts for: tuples of the view
// delta absent from source_delta_union (+S U -S lifted to the view's arity)
// belong to the auxiliary relation.
Delta undef_split(const Delta& view_delta, const datalog::Relation& source_delta_union);

}  // namespace coex::delta
