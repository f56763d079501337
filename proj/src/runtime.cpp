#include "coex/runtime.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "coex/printer.hpp"

namespace coex::runtime {

using datalog::Flavor;
using datalog::Instance;
using datalog::PredicateRef;
using datalog::Relation;
using datalog::Role;
using datalog::Tuple;

void Registry::register_version(const std::string& version) {
    std::unique_lock lock(mutex_);
    if (version == "physical") {
        throw RegistryError("version name 'physical' is reserved");
    }
    if (versions_.count(version)) {
        throw RegistryError("version '" + version + "' is already registered");
    }
    versions_[version];
}

void Registry::register_version(const std::string& version,
                                const std::vector<std::pair<std::string, BxRef>>& views) {
    register_version(version);
    for (const auto& [name, bx] : views) add_view(version, name, bx);
}

void Registry::add_view(const std::string& version, const std::string& name, BxRef bx,
                        std::optional<PredicateRef> view_pred) {
    std::unique_lock lock(mutex_);
    auto vit = versions_.find(version);
    if (vit == versions_.end()) {
        throw RegistryError("unknown version '" + version + "'");
    }
    for (const auto& binding : vit->second) {
        if (binding.name == name) {
            throw RegistryError("view '" + version + "." + name + "' is already registered");
        }
    }
    auto views = bx->spec.views();
    if (!view_pred) {
        if (views.size() != 1) {
            throw RegistryError("spec for '" + version + "." + name + "' defines " +
                                std::to_string(views.size()) +
                                " views; the view predicate must be named explicitly");
        }
        view_pred = views[0];
    } else if (std::find(views.begin(), views.end(), *view_pred) == views.end()) {
        throw RegistryError("'" + view_pred->surface() + "' is not a view of this spec");
    }

    // Source relations are shared across specs; auxiliaries are owned.
    for (const auto& src : bx->spec.sources()) {
        std::size_t arity = bx->spec.putdelta.arity_of(src);
        auto it = physical_.find(src);
        if (it == physical_.end()) {
            physical_[src] = Relation{arity, {}};
        } else if (it->second.arity != arity) {
            throw RegistryError("source '" + src.surface() + "' already exists with arity " +
                                std::to_string(it->second.arity));
        }
    }
    std::string qualified = version + "." + name;
    for (const auto& [aux, decl] : bx->aux_decls) {
        auto owner = aux_owner_.find(aux);
        if (owner != aux_owner_.end() && owner->second != qualified) {
            // The same derivation may be bound more than once; a different
            // one claiming the auxiliary is a clash.
            bool same_bx = false;
            for (const auto& [vid, bindings] : versions_) {
                for (const auto& b : bindings) {
                    if (vid + "." + b.name == owner->second && b.bx == bx) same_bx = true;
                }
            }
            if (!same_bx) {
                throw RegistryError("auxiliary relation '" + aux.surface() +
                                    "' is already owned by " + owner->second);
            }
        } else {
            aux_owner_[aux] = qualified;
        }
        if (!physical_.count(aux)) physical_[aux] = Relation{decl.arity, {}};
    }

    ViewBinding binding;
    binding.name = name;
    binding.bx = std::move(bx);
    binding.view_pred = *view_pred;
    binding.forward = std::make_shared<datalog::Evaluator>(binding.bx->get_prime);
    binding.backward = std::make_shared<datalog::Evaluator>(binding.bx->spec.putdelta);
    binding.undef_eval = std::make_shared<datalog::Evaluator>(binding.bx->undef);
    vit->second.push_back(std::move(binding));
}

bool Registry::has_version(const std::string& version) const {
    std::shared_lock lock(mutex_);
    return versions_.count(version) != 0;
}

const Registry::ViewBinding& Registry::find_binding(const std::string& version,
                                                    const std::string& name) const {
    auto vit = versions_.find(version);
    if (vit == versions_.end()) {
        throw RegistryError("unknown version '" + version + "'");
    }
    for (const auto& binding : vit->second) {
        if (binding.name == name) return binding;
    }
    throw RegistryError("unknown view '" + version + "." + name + "'");
}

datalog::Relation Registry::eval_view(const ViewBinding& binding,
                                      const Instance& physical) const {
    std::vector<const Relation*> edb;
    for (const auto& pred : binding.forward->edb_order()) {
        auto it = physical.find(pred);
        if (it == physical.end()) {
            throw RegistryError("physical relation '" + pred.surface() + "' is missing");
        }
        edb.push_back(&it->second);
    }
    auto idb = binding.forward->evaluate_ordered(edb);
    const auto& order = binding.forward->idb_order();
    auto it = std::find(order.begin(), order.end(), binding.view_pred);
    if (it == order.end()) {
        throw RegistryError("view predicate '" + binding.view_pred.surface() +
                            "' is not computed by its forward program");
    }
    return idb[it - order.begin()];
}

datalog::Relation Registry::query_view(const std::string& version,
                                       const std::string& name) const {
    std::shared_lock lock(mutex_);
    return eval_view(find_binding(version, name), physical_);
}

datalog::Relation Registry::physical_relation(const PredicateRef& pred) const {
    std::shared_lock lock(mutex_);
    auto it = physical_.find(pred);
    if (it == physical_.end()) {
        throw RegistryError("unknown physical relation '" + pred.surface() + "'");
    }
    return it->second;
}

std::vector<ViewChange> Registry::all_views(const Instance& physical) const {
    std::vector<ViewChange> out;
    for (const auto& [version, bindings] : versions_) {
        for (const auto& binding : bindings) {
            Relation state = eval_view(binding, physical);
            out.push_back({version + "." + binding.name, state, state});
        }
    }
    return out;
}

namespace {

// Effective delta for the record: inserts not already present, deletes that
// hit, insertion winning on overlap (the view-update decomposition removes
// deletions before adding insertions).
delta::Delta effective_delta(const Relation& base, const Relation& plus, const Relation& minus) {
    delta::Delta d = delta::empty_delta(base.arity);
    for (const auto& t : plus.tuples) {
        if (!base.contains(t)) d.inserted.tuples.insert(t);
    }
    for (const auto& t : minus.tuples) {
        if (base.contains(t) && !plus.contains(t)) d.deleted.tuples.insert(t);
    }
    return d;
}

}  // namespace

PropagationRecord Registry::update_view(const std::string& version, const std::string& name,
                                        const delta::Delta& request) {
    std::unique_lock lock(mutex_);
    const ViewBinding& binding = find_binding(version, name);
    const derive::DerivedBx& bx = *binding.bx;

    std::vector<ViewChange> before = all_views(physical_);

    Relation current = eval_view(binding, physical_);
    delta::Delta normalized = delta::normalize_delta(current, request);
    Relation target = delta::apply_delta(current, normalized);

    // Inputs for the backward programs: physical relations plus the target
    // state for the updated view; sibling views of the same derivation keep
    // their current state and contribute nothing.
    Instance backin = physical_;
    for (const auto& view : bx.spec.views()) {
        if (view == binding.view_pred) {
            backin[view] = target;
        } else {
            ViewBinding sibling = binding;
            sibling.view_pred = view;
            backin[view] = eval_view(sibling, physical_);
        }
    }

    PropagationRecord record;
    record.view_delta = normalized;

    Instance updated = physical_;
    auto run_backward = [&](const datalog::Evaluator& eval,
                            std::map<PredicateRef, delta::Delta>& deltas_out) {
        std::vector<const Relation*> edb;
        for (const auto& pred : eval.edb_order()) {
            auto it = backin.find(pred);
            if (it == backin.end()) {
                throw PropagationFault("backward program reads unknown relation '" +
                                       pred.surface() + "'");
            }
            edb.push_back(&it->second);
        }
        auto idb = eval.evaluate_ordered(edb);

        // Pair +p with -p per base relation.
        std::map<PredicateRef, std::pair<Relation, Relation>> sided;
        const auto& order = eval.idb_order();
        for (std::size_t i = 0; i < order.size(); ++i) {
            PredicateRef base{order[i].name, Flavor::Base};
            bool insert = false;
            switch (order[i].flavor) {
                case Flavor::Insert: insert = true; break;
                case Flavor::Delete: insert = false; break;
                case Flavor::AuxInsert:
                    base.flavor = Flavor::Aux;
                    insert = true;
                    break;
                case Flavor::AuxDelete:
                    base.flavor = Flavor::Aux;
                    insert = false;
                    break;
                default: continue;
            }
            auto [it, fresh] = sided.emplace(
                base, std::make_pair(Relation{idb[i].arity, {}}, Relation{idb[i].arity, {}}));
            (insert ? it->second.first : it->second.second) = idb[i];
        }
        for (const auto& [base, pm] : sided) {
            auto it = updated.find(base);
            if (it == updated.end()) {
                throw PropagationFault("backward program writes unknown relation '" +
                                       base.surface() + "'");
            }
            delta::Delta eff = effective_delta(it->second, pm.first, pm.second);
            if (!eff.empty()) deltas_out[base] = eff;
            it->second = delta::apply_delta(it->second, eff);
        }
    };

    run_backward(*binding.backward, record.source_deltas);
    run_backward(*binding.undef_eval, record.aux_deltas);

    // The updated view must read back exactly as requested; otherwise the
    // whole update rolls back.
    Relation recomputed = eval_view(binding, updated);
    if (recomputed != target) {
        throw PropagationFault(
            "propagation fault updating '" + version + "." + name + "': recomputed view " +
            datalog::printer::to_string(recomputed) + " does not match requested state " +
            datalog::printer::to_string(target) + "; store rolled back");
    }

    physical_ = std::move(updated);

    std::vector<ViewChange> after = all_views(physical_);
    record.views = std::move(before);
    for (std::size_t i = 0; i < record.views.size(); ++i) {
        record.views[i].after = after[i].before;
    }
    return record;
}

std::string Registry::snapshot() const {
    std::shared_lock lock(mutex_);
    std::ostringstream out;
    out << "[physical]\n";
    for (const auto& [pred, rel] : physical_) {
        out << pred.surface() << "/" << rel.arity << ":\n";
        for (const auto& t : rel.tuples) {
            out << "  " << datalog::printer::to_string(t) << "\n";
        }
    }
    for (const auto& [version, bindings] : versions_) {
        out << "[" << version << "]\n";
        for (const auto& binding : bindings) {
            Relation state = eval_view(binding, physical_);
            out << binding.name << "/" << state.arity << ":\n";
            for (const auto& t : state.tuples) {
                out << "  " << datalog::printer::to_string(t) << "\n";
            }
        }
    }
    return out.str();
}

}  // namespace coex::runtime
