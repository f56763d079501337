#include "coex/delta.hpp"

#include <algorithm>

#include "coex/printer.hpp"

namespace coex::delta {

using datalog::Relation;
using datalog::Tuple;

namespace {

void check_arity(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DeltaError(std::string("arity mismatch in ") + what + ": " + std::to_string(a) +
                         " vs " + std::to_string(b));
    }
}

void check_disjoint(const Relation& inserted, const Relation& deleted) {
    for (const auto& t : inserted.tuples) {
        if (deleted.contains(t)) {
            throw DeltaError("tuple " + datalog::printer::to_string(t) +
                             " appears in both inserted and deleted");
        }
    }
}

}  // namespace

Delta make_delta(Relation inserted, Relation deleted) {
    check_arity(inserted.arity, deleted.arity, "delta");
    check_disjoint(inserted, deleted);
    return {std::move(inserted), std::move(deleted)};
}

Delta empty_delta(std::size_t arity) { return {Relation{arity, {}}, Relation{arity, {}}}; }

Relation apply_delta(const Relation& current, const Delta& delta) {
    check_arity(current.arity, delta.inserted.arity, "apply_delta");
    check_arity(current.arity, delta.deleted.arity, "apply_delta");
    Relation out{current.arity, {}};
    for (const auto& t : current.tuples) {
        if (!delta.deleted.contains(t)) out.tuples.insert(t);
    }
    for (const auto& t : delta.inserted.tuples) out.tuples.insert(t);
    return out;
}

Delta diff(const Relation& old_rel, const Relation& new_rel) {
    check_arity(old_rel.arity, new_rel.arity, "diff");
    Delta out = empty_delta(old_rel.arity);
    for (const auto& t : new_rel.tuples) {
        if (!old_rel.contains(t)) out.inserted.tuples.insert(t);
    }
    for (const auto& t : old_rel.tuples) {
        if (!new_rel.contains(t)) out.deleted.tuples.insert(t);
    }
    return out;
}

Delta normalize_delta(const Relation& base, const Delta& delta) {
    check_arity(base.arity, delta.inserted.arity, "normalize_delta");
    check_arity(base.arity, delta.deleted.arity, "normalize_delta");
    check_disjoint(delta.inserted, delta.deleted);
    Delta out = empty_delta(base.arity);
    for (const auto& t : delta.inserted.tuples) {
        if (!base.contains(t)) out.inserted.tuples.insert(t);
    }
    for (const auto& t : delta.deleted.tuples) {
        if (base.contains(t)) out.deleted.tuples.insert(t);
    }
    return out;
}

bool is_effective(const Relation& base, const Delta& delta) {
    return std::none_of(delta.inserted.tuples.begin(), delta.inserted.tuples.end(),
                        [&](const Tuple& t) { return base.contains(t); }) &&
           std::all_of(delta.deleted.tuples.begin(), delta.deleted.tuples.end(),
                       [&](const Tuple& t) { return base.contains(t); });
}

Delta undef_split(const Delta& view_delta, const Relation& source_delta_union) {
    check_arity(view_delta.inserted.arity, source_delta_union.arity, "undef_split");
    Delta out = empty_delta(view_delta.inserted.arity);
    for (const auto& t : view_delta.inserted.tuples) {
        if (!source_delta_union.contains(t)) out.inserted.tuples.insert(t);
    }
    for (const auto& t : view_delta.deleted.tuples) {
        if (!source_delta_union.contains(t)) out.deleted.tuples.insert(t);
    }
    return out;
}

}  // namespace coex::delta
