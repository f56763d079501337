#pragma once

#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "coex/delta.hpp"
#include "coex/derive.hpp"
#include "coex/eval.hpp"

namespace coex::runtime {

struct RegistryError : Error {
    using Error::Error;
};

// Raised when the recomputed view after an update does not match the
// requested state; the store is left unchanged.
struct PropagationFault : Error {
    using Error::Error;
};

struct ViewChange {
    std::string qualified;  // "version.name"
    datalog::Relation before;
    datalog::Relation after;
};

struct PropagationRecord {
    delta::Delta view_delta;  // normalized request
    std::map<datalog::PredicateRef, delta::Delta> source_deltas;
    std::map<datalog::PredicateRef, delta::Delta> aux_deltas;
    std::vector<ViewChange> views;  // every registered view, every version
};

// One physical instance, several schema versions exposing views through
// their derived forward transformations. Queries are pure reads over the
// current snapshot; updates run one at a time and commit atomically.
class Registry {
public:
    using BxRef = std::shared_ptr<const derive::DerivedBx>;

    void register_version(const std::string& version);
    void register_version(const std::string& version,
                          const std::vector<std::pair<std::string, BxRef>>& views);
    // Binds one view of `bx` under version.name. view_pred may be omitted
    // when the bx defines exactly one view. Auxiliary relations are owned by
    // the bx that declared them: a different bx claiming the same auxiliary
    // is rejected, while further bindings of the same bx share it.
    void add_view(const std::string& version, const std::string& name, BxRef bx,
                  std::optional<datalog::PredicateRef> view_pred = std::nullopt);

    bool has_version(const std::string& version) const;
    datalog::Relation query_view(const std::string& version, const std::string& name) const;
    PropagationRecord update_view(const std::string& version, const std::string& name,
                                  const delta::Delta& request);

    datalog::Relation physical_relation(const datalog::PredicateRef& pred) const;
    std::string snapshot() const;

private:
    struct ViewBinding {
        std::string name;
        BxRef bx;
        datalog::PredicateRef view_pred;
        std::shared_ptr<datalog::Evaluator> forward;    // compiled get'
        std::shared_ptr<datalog::Evaluator> backward;   // compiled putdelta
        std::shared_ptr<datalog::Evaluator> undef_eval; // compiled undef
    };

    const ViewBinding& find_binding(const std::string& version, const std::string& name) const;
    datalog::Relation eval_view(const ViewBinding& binding, const datalog::Instance& physical) const;
    std::vector<ViewChange> all_views(const datalog::Instance& physical) const;

    datalog::Instance physical_;
    std::map<std::string, std::vector<ViewBinding>> versions_;
    std::map<datalog::PredicateRef, std::string> aux_owner_;
    mutable std::shared_mutex mutex_;
};

}  // namespace coex::runtime
