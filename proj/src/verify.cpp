#include "coex/verify.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "coex/delta.hpp"
#include "coex/eval.hpp"
#include "coex/printer.hpp"

namespace coex::verify {

using datalog::Evaluator;
using datalog::Flavor;
using datalog::Instance;
using datalog::PredicateRef;
using datalog::Program;
using datalog::Relation;
using datalog::Role;
using datalog::Tuple;
using datalog::Value;

Universe Universe::int_range(std::int64_t lo, std::int64_t hi, std::size_t max_size) {
    Universe u;
    for (std::int64_t v = lo; v <= hi; ++v) u.ints.push_back(v);
    u.max_relation_size = max_size;
    return u;
}

const char* to_string(Law law) {
    switch (law) {
        case Law::GetPut: return "GetPut";
        case Law::PutGet: return "PutGet";
        case Law::Totality: return "Totality";
        case Law::RangeMembership: return "RangeMembership";
    }
    return "?";
}

std::vector<Relation> enumerate_relations(const Universe& u, std::size_t arity) {
    if (u.ints.empty()) throw Error("universe has no integer constants");
    if (u.max_relation_size < 1) throw Error("universe max relation size must be >= 1");

    // Tuple domain, lexicographic.
    std::vector<std::vector<Value>> columns(arity);
    for (std::size_t c = 0; c < arity; ++c) {
        bool key_column = c + 1 < arity && !u.strings.empty();
        if (key_column) {
            for (const auto& s : u.strings) columns[c].push_back(s);
        } else {
            for (auto i : u.ints) columns[c].push_back(i);
        }
    }
    std::vector<Tuple> tuples;
    if (arity == 0) {
        tuples.push_back({});
    } else {
        std::vector<std::size_t> odo(arity, 0);
        bool more = true;
        while (more) {
            Tuple t;
            for (std::size_t c = 0; c < arity; ++c) t.push_back(columns[c][odo[c]]);
            tuples.push_back(std::move(t));
            std::size_t c = arity;
            while (true) {
                if (c == 0) {
                    more = false;
                    break;
                }
                --c;
                if (++odo[c] < columns[c].size()) break;
                odo[c] = 0;
            }
        }
    }
    // All subsets of size 0..max, size-ascending, combinations lexicographic.
    std::vector<Relation> out;
    out.push_back(Relation{arity, {}});
    std::size_t max_k = std::min(u.max_relation_size, tuples.size());
    for (std::size_t k = 1; k <= max_k; ++k) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        bool more = true;
        while (more) {
            Relation r{arity, {}};
            for (auto i : idx) r.tuples.insert(tuples[i]);
            out.push_back(std::move(r));
            if (out.size() > 500000) {
                throw Error("universe too large: more than 500000 relations per slot; lower "
                            "--max-size or the constant range");
            }
            // next combination
            more = false;
            for (std::size_t i = k; i > 0;) {
                --i;
                if (idx[i] + (k - i) < tuples.size()) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
    return out;
}

namespace {

// Mixed-radix product over predicate slots.
struct InstanceSpace {
    std::vector<PredicateRef> preds;
    std::vector<std::vector<Relation>> rels;
    std::uint64_t total = 1;

    void add(const PredicateRef& pred, std::vector<Relation> options) {
        preds.push_back(pred);
        total *= options.size();
        rels.push_back(std::move(options));
    }

    void fill(std::uint64_t index, std::vector<const Relation*>& out) const {
        out.resize(preds.size());
        for (std::size_t i = preds.size(); i > 0;) {
            --i;
            out[i] = &rels[i][index % rels[i].size()];
            index /= rels[i].size();
        }
    }
};

InstanceSpace space_for(const std::vector<PredicateRef>& preds,
                        const std::vector<std::size_t>& arities, const Universe& u) {
    InstanceSpace space;
    std::map<std::size_t, std::vector<Relation>> by_arity;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto it = by_arity.find(arities[i]);
        if (it == by_arity.end()) {
            it = by_arity.emplace(arities[i], enumerate_relations(u, arities[i])).first;
        }
        space.add(preds[i], it->second);
    }
    return space;
}

Instance to_instance(const std::vector<PredicateRef>& preds,
                     const std::vector<const Relation*>& rels) {
    Instance out;
    for (std::size_t i = 0; i < preds.size(); ++i) out[preds[i]] = *rels[i];
    return out;
}

Instance to_instance(const std::vector<PredicateRef>& preds, const std::vector<Relation>& rels) {
    Instance out;
    for (std::size_t i = 0; i < preds.size(); ++i) out[preds[i]] = rels[i];
    return out;
}

std::string state_key(const std::vector<Relation>& rels) {
    std::string key;
    for (const auto& r : rels) {
        key += datalog::printer::to_string(r);
        key += ';';
    }
    return key;
}

// Base relation written by a delta-flavored predicate, if any.
std::optional<PredicateRef> delta_base(const PredicateRef& pred, bool* is_insert) {
    switch (pred.flavor) {
        case Flavor::Insert: *is_insert = true; return PredicateRef{pred.name, Flavor::Base};
        case Flavor::Delete: *is_insert = false; return PredicateRef{pred.name, Flavor::Base};
        case Flavor::AuxInsert: *is_insert = true; return PredicateRef{pred.name, Flavor::Aux};
        case Flavor::AuxDelete: *is_insert = false; return PredicateRef{pred.name, Flavor::Aux};
        default: return std::nullopt;
    }
}

// Copy-on-write relation list: slots keep pointing at the base state until a
// delta touches them.
struct CowState {
    std::vector<const Relation*> view;
    std::vector<Relation> owned;
    std::vector<int> owner;  // slot -> index into owned, -1 if untouched

    void reset(const std::vector<const Relation*>& base) {
        view = base;
        owned.clear();
        owned.reserve(base.size());
        owner.assign(base.size(), -1);
    }

    Relation& mutate(std::size_t slot) {
        if (owner[slot] < 0) {
            owned.push_back(*view[slot]);
            owner[slot] = static_cast<int>(owned.size() - 1);
            view[slot] = &owned.back();
        }
        return owned[static_cast<std::size_t>(owner[slot])];
    }
};

// Applies the +p/-p relations computed by a backward program to the matching
// slots. Deletions run first so insertions win on overlap, matching the
// view-update decomposition. The slot lookup per output predicate is
// precomputed.
struct DeltaTargets {
    // (idb index, state slot, is_insert)
    std::vector<std::tuple<std::size_t, std::size_t, bool>> deletes, inserts;

    static DeltaTargets wire(const Evaluator& backward,
                             const std::vector<PredicateRef>& state_preds) {
        DeltaTargets t;
        const auto& order = backward.idb_order();
        for (std::size_t i = 0; i < order.size(); ++i) {
            bool is_insert = false;
            auto base = delta_base(order[i], &is_insert);
            if (!base) continue;
            auto it = std::find(state_preds.begin(), state_preds.end(), *base);
            if (it == state_preds.end()) continue;
            std::size_t slot = static_cast<std::size_t>(it - state_preds.begin());
            (is_insert ? t.inserts : t.deletes).emplace_back(i, slot, is_insert);
        }
        return t;
    }

    void apply(const std::vector<Relation>& outputs, CowState& state) const {
        for (const auto& [i, slot, ins] : deletes) {
            if (outputs[i].empty()) continue;
            Relation& rel = state.mutate(slot);
            for (const auto& t : outputs[i].tuples) rel.tuples.erase(t);
        }
        for (const auto& [i, slot, ins] : inserts) {
            if (outputs[i].empty()) continue;
            Relation& rel = state.mutate(slot);
            for (const auto& t : outputs[i].tuples) rel.tuples.insert(t);
        }
    }
};

// Maps each required input of `eval` to a slot in one of two relation lists.
struct InputWiring {
    // pair: (which list: 0 or 1, index within it)
    std::vector<std::pair<int, std::size_t>> where;

    static InputWiring wire(const Evaluator& eval, const std::vector<PredicateRef>& first,
                            const std::vector<PredicateRef>& second) {
        InputWiring w;
        for (const auto& pred : eval.edb_order()) {
            auto f = std::find(first.begin(), first.end(), pred);
            if (f != first.end()) {
                w.where.emplace_back(0, f - first.begin());
                continue;
            }
            auto s = std::find(second.begin(), second.end(), pred);
            if (s != second.end()) {
                w.where.emplace_back(1, s - second.begin());
                continue;
            }
            throw Error("inconsistent schemas: no input available for '" + pred.surface() + "'");
        }
        return w;
    }

    void fill(const std::vector<Relation>& first, const std::vector<Relation>& second,
              std::vector<const Relation*>& out) const {
        out.resize(where.size());
        for (std::size_t i = 0; i < where.size(); ++i) {
            out[i] = where[i].first == 0 ? &first[where[i].second] : &second[where[i].second];
        }
    }

    void fill(const std::vector<const Relation*>& first, const std::vector<Relation>& second,
              std::vector<const Relation*>& out) const {
        out.resize(where.size());
        for (std::size_t i = 0; i < where.size(); ++i) {
            out[i] = where[i].first == 0 ? first[where[i].second] : &second[where[i].second];
        }
    }
};

std::vector<std::size_t> edb_arities(const Evaluator& eval) {
    std::vector<std::size_t> out;
    for (const auto& pred : eval.edb_order()) out.push_back(eval.program().arity_of(pred));
    return out;
}

std::vector<std::size_t> idb_arities(const Evaluator& eval) {
    std::vector<std::size_t> out;
    for (const auto& pred : eval.idb_order()) {
        out.push_back(eval.program().declared(pred) ? eval.program().arity_of(pred) : 0);
    }
    return out;
}

std::vector<Relation> deref(const std::vector<const Relation*>& rels) {
    std::vector<Relation> out;
    out.reserve(rels.size());
    for (const auto* r : rels) out.push_back(*r);
    return out;
}

// Greedy counterexample shrinking: drop tuples while the failure persists.
void minimize(std::vector<Relation>& state,
              const std::function<bool(const std::vector<Relation>&)>& fails) {
    bool shrunk = true;
    while (shrunk) {
        shrunk = false;
        for (auto& rel : state) {
            auto tuples = std::vector<Tuple>(rel.tuples.begin(), rel.tuples.end());
            for (const auto& t : tuples) {
                rel.tuples.erase(t);
                if (fails(state)) {
                    shrunk = true;
                } else {
                    rel.tuples.insert(t);
                }
            }
        }
    }
}

// Case index stream: full enumeration or seeded draws from it.
class CaseStream {
public:
    CaseStream(const Universe& u, std::uint64_t total) : total_(total) {
        if (u.mode == Universe::Mode::Sampled) {
            sampled_ = true;
            count_ = total == 0 ? 0 : u.samples;
            rng_.seed(u.seed);
        } else {
            count_ = total;
        }
    }

    bool next(std::uint64_t& index) {
        if (done_ == count_ || total_ == 0) return false;
        ++done_;
        index = sampled_ ? rng_() % total_ : done_ - 1;
        return true;
    }

private:
    std::uint64_t total_;
    std::uint64_t count_ = 0;
    std::uint64_t done_ = 0;
    bool sampled_ = false;
    std::mt19937_64 rng_;
};

}  // namespace

VerificationReport check_getput(const Program& get, const Program& putdelta, const Universe& u) {
    Evaluator eget(get);
    Evaluator eput(putdelta);
    const auto& sources = eget.edb_order();
    const auto& views = eget.idb_order();
    InputWiring put_wiring = InputWiring::wire(eput, sources, views);

    InstanceSpace space = space_for(sources, edb_arities(eget), u);
    VerificationReport report{Law::GetPut, true, 0, std::nullopt, ""};

    std::vector<const Relation*> src_ptrs, put_in;
    auto case_fails_ptrs = [&](const std::vector<const Relation*>& ptrs,
                               std::vector<Relation>* views_out,
                               std::vector<Relation>* deltas_out) {
        std::vector<Relation> view_state = eget.evaluate_ordered(ptrs);
        put_wiring.fill(ptrs, view_state, put_in);
        std::vector<Relation> deltas = eput.evaluate_ordered(put_in);
        bool bad = false;
        for (std::size_t i = 0; i < eput.idb_order().size(); ++i) {
            bool is_insert = false;
            if (delta_base(eput.idb_order()[i], &is_insert) && !deltas[i].empty()) bad = true;
        }
        if (views_out) *views_out = std::move(view_state);
        if (deltas_out) *deltas_out = std::move(deltas);
        return bad;
    };
    auto case_fails = [&](const std::vector<Relation>& srcs, std::vector<Relation>* views_out,
                          std::vector<Relation>* deltas_out) {
        std::vector<const Relation*> ptrs;
        for (const auto& r : srcs) ptrs.push_back(&r);
        return case_fails_ptrs(ptrs, views_out, deltas_out);
    };

    CaseStream stream(u, space.total);
    std::uint64_t index = 0;
    while (stream.next(index)) {
        space.fill(index, src_ptrs);
        ++report.cases;
        if (!case_fails_ptrs(src_ptrs, nullptr, nullptr)) continue;

        std::vector<Relation> srcs = deref(src_ptrs);
        minimize(srcs, [&](const std::vector<Relation>& s) {
            return case_fails(s, nullptr, nullptr);
        });
        std::vector<Relation> view_state, deltas;
        case_fails(srcs, &view_state, &deltas);
        Counterexample cex;
        cex.given = to_instance(sources, srcs);
        cex.target = to_instance(views, view_state);
        Instance observed, expected;
        for (std::size_t i = 0; i < eput.idb_order().size(); ++i) {
            bool is_insert = false;
            if (!delta_base(eput.idb_order()[i], &is_insert)) continue;
            observed[eput.idb_order()[i]] = deltas[i];
            expected[eput.idb_order()[i]] = Relation{deltas[i].arity, {}};
        }
        cex.observed = std::move(observed);
        cex.expected = std::move(expected);
        report.pass = false;
        report.counterexample = std::move(cex);
        break;
    }
    return report;
}

VerificationReport check_putget(const Program& get, const Program& putdelta, const Universe& u) {
    Evaluator eget(get);
    Evaluator eput(putdelta);
    const auto& sources = eget.edb_order();
    const auto& views = eget.idb_order();
    InputWiring put_wiring = InputWiring::wire(eput, sources, views);

    InstanceSpace src_space = space_for(sources, edb_arities(eget), u);
    InstanceSpace view_space = space_for(views, idb_arities(eget), u);

    // range(get) over the bound, keyed on the canonical view-state rendering.
    std::unordered_set<std::string> range;
    {
        std::vector<const Relation*> ptrs;
        for (std::uint64_t i = 0; i < src_space.total; ++i) {
            src_space.fill(i, ptrs);
            range.insert(state_key(eget.evaluate_ordered(ptrs)));
        }
    }

    VerificationReport report{Law::PutGet, true, 0, std::nullopt, ""};
    std::vector<const Relation*> src_ptrs, view_ptrs, put_in;
    DeltaTargets put_targets = DeltaTargets::wire(eput, sources);
    CowState cow;

    auto recompute_ptrs = [&](const std::vector<const Relation*>& srcs,
                              const std::vector<Relation>& target) -> std::vector<Relation> {
        put_wiring.fill(srcs, target, put_in);
        std::vector<Relation> deltas = eput.evaluate_ordered(put_in);
        cow.reset(srcs);
        put_targets.apply(deltas, cow);
        return eget.evaluate_ordered(cow.view);
    };
    auto recompute = [&](const std::vector<Relation>& srcs, const std::vector<Relation>& target) {
        std::vector<const Relation*> ptrs;
        for (const auto& r : srcs) ptrs.push_back(&r);
        return recompute_ptrs(ptrs, target);
    };

    // Precompute range membership per enumerated view state.
    std::vector<char> in_range(view_space.total, 0);
    for (std::uint64_t vi = 0; vi < view_space.total; ++vi) {
        view_space.fill(vi, view_ptrs);
        in_range[vi] = range.count(state_key(deref(view_ptrs))) ? 1 : 0;
    }

    CaseStream stream(u, src_space.total * view_space.total);
    std::uint64_t index = 0;
    while (stream.next(index)) {
        std::uint64_t si = index / view_space.total;
        std::uint64_t vi = index % view_space.total;
        if (!in_range[vi]) continue;
        src_space.fill(si, src_ptrs);
        view_space.fill(vi, view_ptrs);
        std::vector<Relation> target = deref(view_ptrs);
        ++report.cases;
        std::vector<Relation> recomputed = recompute_ptrs(src_ptrs, target);
        if (recomputed == target) continue;

        std::vector<Relation> srcs = deref(src_ptrs);
        auto fails = [&](const std::vector<Relation>& s) { return recompute(s, target) != target; };
        minimize(srcs, fails);
        Counterexample cex;
        cex.given = to_instance(sources, srcs);
        cex.target = to_instance(views, target);
        cex.observed = to_instance(views, recompute(srcs, target));
        cex.expected = to_instance(views, target);
        report.pass = false;
        report.counterexample = std::move(cex);
        break;
    }
    return report;
}

bool range_member(const Program& get, const Relation& v, const Universe& u) {
    Evaluator eget(get);
    if (eget.idb_order().size() != 1) {
        throw Error("range_member expects a single-view forward program");
    }
    InstanceSpace space = space_for(eget.edb_order(), edb_arities(eget), u);
    std::vector<const Relation*> ptrs;
    for (std::uint64_t i = 0; i < space.total; ++i) {
        space.fill(i, ptrs);
        std::vector<Relation> views = eget.evaluate_ordered(ptrs);
        if (views[0] == v) return true;
    }
    return false;
}

VerificationReport check_totality(const Program& putdelta, const Program& undef,
                                  const Program& get_prime, const Universe& u) {
    Evaluator egp(get_prime);
    Evaluator eput(putdelta);
    Evaluator eundef(undef);

    // Joint physical state: everything get' or undef reads that is not a view.
    std::vector<PredicateRef> joint = egp.edb_order();
    std::vector<std::size_t> joint_arities = edb_arities(egp);
    const auto& views = egp.idb_order();
    for (const auto& pred : eundef.edb_order()) {
        if (std::find(joint.begin(), joint.end(), pred) == joint.end() &&
            std::find(views.begin(), views.end(), pred) == views.end()) {
            joint.push_back(pred);
            joint_arities.push_back(eundef.program().arity_of(pred));
        }
    }

    InputWiring put_wiring = InputWiring::wire(eput, joint, views);
    InputWiring undef_wiring = InputWiring::wire(eundef, joint, views);
    InputWiring gp_wiring = InputWiring::wire(egp, joint, {});

    InstanceSpace joint_space = space_for(joint, joint_arities, u);

    // Target states are enumerated per updated view; sibling views keep
    // their current value, as in a runtime update. Cross-view effects of the
    // shared source are permitted (the recomputed siblings float).
    std::vector<std::vector<Relation>> view_targets;
    {
        auto arities = idb_arities(egp);
        std::map<std::size_t, std::vector<Relation>> by_arity;
        for (std::size_t i = 0; i < views.size(); ++i) {
            auto it = by_arity.find(arities[i]);
            if (it == by_arity.end()) {
                it = by_arity.emplace(arities[i], enumerate_relations(u, arities[i])).first;
            }
            view_targets.push_back(it->second);
        }
    }
    std::uint64_t targets_total = 0;
    for (const auto& t : view_targets) targets_total += t.size();

    std::vector<const Relation*> joint_ptrs, in;
    DeltaTargets put_targets = DeltaTargets::wire(eput, joint);
    DeltaTargets undef_targets = DeltaTargets::wire(eundef, joint);
    CowState cow;
    const std::vector<Relation> no_views;

    auto views_of_ptrs = [&](const std::vector<const Relation*>& phys) {
        gp_wiring.fill(phys, no_views, in);
        return egp.evaluate_ordered(in);
    };
    // Runs the total backward transformation; the result aliases `cow`.
    auto propagate_ptrs = [&](const std::vector<const Relation*>& phys,
                              const std::vector<Relation>& target)
        -> const std::vector<const Relation*>& {
        put_wiring.fill(phys, target, in);
        std::vector<Relation> src_deltas = eput.evaluate_ordered(in);
        undef_wiring.fill(phys, target, in);
        std::vector<Relation> aux_deltas = eundef.evaluate_ordered(in);
        cow.reset(phys);
        put_targets.apply(src_deltas, cow);
        undef_targets.apply(aux_deltas, cow);
        return cow.view;
    };
    auto to_ptrs = [](const std::vector<Relation>& rels) {
        std::vector<const Relation*> out;
        for (const auto& r : rels) out.push_back(&r);
        return out;
    };
    auto all_empty = [&](const Evaluator& e, const std::vector<Relation>& deltas) {
        for (std::size_t i = 0; i < e.idb_order().size(); ++i) {
            bool ins = false;
            if (delta_base(e.idb_order()[i], &ins) && !deltas[i].empty()) return false;
        }
        return true;
    };

    VerificationReport report{Law::Totality, true, 0, std::nullopt, ""};

    // Each joint state contributes one GetPut-analogue case plus one case per
    // view per enumerated target state of that view.
    std::uint64_t per_joint = 1 + targets_total;
    CaseStream stream(u, joint_space.total * per_joint);
    std::uint64_t index = 0;
    std::uint64_t cached_ji = std::numeric_limits<std::uint64_t>::max();
    std::vector<Relation> current_views;
    while (stream.next(index)) {
        std::uint64_t ji = index / per_joint;
        std::uint64_t ti = index % per_joint;
        if (ji != cached_ji) {
            joint_space.fill(ji, joint_ptrs);
            current_views = views_of_ptrs(joint_ptrs);
            cached_ji = ji;
        }
        ++report.cases;

        if (ti == 0) {
            // Unchanged views must produce no deltas at all.
            put_wiring.fill(joint_ptrs, current_views, in);
            std::vector<Relation> src_deltas = eput.evaluate_ordered(in);
            undef_wiring.fill(joint_ptrs, current_views, in);
            std::vector<Relation> aux_deltas = eundef.evaluate_ordered(in);
            if (all_empty(eput, src_deltas) && all_empty(eundef, aux_deltas)) continue;

            std::vector<Relation> phys = deref(joint_ptrs);
            auto fails = [&](const std::vector<Relation>& p) {
                auto ptrs = to_ptrs(p);
                auto t = views_of_ptrs(ptrs);
                put_wiring.fill(ptrs, t, in);
                auto sd = eput.evaluate_ordered(in);
                undef_wiring.fill(ptrs, t, in);
                auto ad = eundef.evaluate_ordered(in);
                return !(all_empty(eput, sd) && all_empty(eundef, ad));
            };
            minimize(phys, fails);
            auto ptrs = to_ptrs(phys);
            std::vector<Relation> target = views_of_ptrs(ptrs);
            Counterexample cex;
            cex.given = to_instance(joint, phys);
            cex.target = to_instance(views, target);
            put_wiring.fill(ptrs, target, in);
            std::vector<Relation> sd = eput.evaluate_ordered(in);
            undef_wiring.fill(ptrs, target, in);
            std::vector<Relation> ad = eundef.evaluate_ordered(in);
            for (std::size_t i = 0; i < eput.idb_order().size(); ++i) {
                bool ins = false;
                if (!delta_base(eput.idb_order()[i], &ins)) continue;
                cex.observed[eput.idb_order()[i]] = sd[i];
                cex.expected[eput.idb_order()[i]] = Relation{sd[i].arity, {}};
            }
            for (std::size_t i = 0; i < eundef.idb_order().size(); ++i) {
                bool ins = false;
                if (!delta_base(eundef.idb_order()[i], &ins)) continue;
                cex.observed[eundef.idb_order()[i]] = ad[i];
                cex.expected[eundef.idb_order()[i]] = Relation{ad[i].arity, {}};
            }
            report.pass = false;
            report.note = "unchanged view produced nonempty deltas";
            report.counterexample = std::move(cex);
            break;
        }

        // Which view is updated, and to which enumerated state.
        std::uint64_t rest = ti - 1;
        std::size_t view_index = 0;
        while (rest >= view_targets[view_index].size()) {
            rest -= view_targets[view_index].size();
            ++view_index;
        }
        std::vector<Relation> target = current_views;
        target[view_index] = view_targets[view_index][rest];

        std::vector<Relation> updated_views =
            views_of_ptrs(propagate_ptrs(joint_ptrs, target));
        if (updated_views[view_index] == target[view_index]) continue;

        std::vector<Relation> phys = deref(joint_ptrs);
        auto fails_for = [&](const std::vector<Relation>& p, const Relation& goal) {
            auto ptrs = to_ptrs(p);
            std::vector<Relation> t = views_of_ptrs(ptrs);
            t[view_index] = goal;
            return views_of_ptrs(propagate_ptrs(ptrs, t))[view_index] != goal;
        };
        minimize(phys, [&](const std::vector<Relation>& p) {
            return fails_for(p, target[view_index]);
        });
        // Also shrink the updated view's target while the failure persists.
        {
            std::vector<Relation> goal_only{target[view_index]};
            minimize(goal_only,
                     [&](const std::vector<Relation>& g) { return fails_for(phys, g[0]); });
            target = views_of_ptrs(to_ptrs(phys));
            target[view_index] = goal_only[0];
        }
        Counterexample cex;
        cex.given = to_instance(joint, phys);
        cex.target = to_instance(views, target);
        auto ptrs = to_ptrs(phys);
        cex.observed = to_instance(views, views_of_ptrs(propagate_ptrs(ptrs, target)));
        cex.expected = to_instance(views, target);
        report.pass = false;
        report.counterexample = std::move(cex);
        break;
    }
    return report;
}

namespace {

nlohmann::json to_json(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    return std::get<std::string>(v);
}

nlohmann::json to_json(const Relation& rel) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : rel.tuples) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& v : t) row.push_back(to_json(v));
        out.push_back(std::move(row));
    }
    return out;
}

nlohmann::json to_json(const Instance& instance) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [pred, rel] : instance) out[pred.surface()] = to_json(rel);
    return out;
}

nlohmann::json report_json(const VerificationReport& r) {
    nlohmann::json out;
    out["law"] = to_string(r.law);
    out["outcome"] = r.pass ? "pass" : "fail";
    out["cases"] = r.cases;
    if (!r.note.empty()) out["note"] = r.note;
    if (r.counterexample) {
        nlohmann::json cex;
        cex["given"] = to_json(r.counterexample->given);
        if (r.counterexample->target) cex["target"] = to_json(*r.counterexample->target);
        cex["observed"] = to_json(r.counterexample->observed);
        cex["expected"] = to_json(r.counterexample->expected);
        out["counterexample"] = std::move(cex);
    }
    return out;
}

}  // namespace

namespace {

std::string inline_instance(const Instance& instance) {
    std::string out;
    for (const auto& [pred, rel] : instance) {
        if (!out.empty()) out += ", ";
        out += pred.surface() + " = " + datalog::printer::to_string(rel);
    }
    return out.empty() ? "{}" : out;
}

}  // namespace

std::string VerificationReport::text() const {
    std::ostringstream out;
    out << to_string(law) << ": " << (pass ? "pass" : "FAIL") << " (" << cases << " case"
        << (cases == 1 ? "" : "s") << ")";
    if (!note.empty()) out << " -- " << note;
    if (counterexample) {
        out << "\n  given:    " << inline_instance(counterexample->given);
        if (counterexample->target) {
            out << "\n  target:   " << inline_instance(*counterexample->target);
        }
        out << "\n  observed: " << inline_instance(counterexample->observed);
        out << "\n  expected: " << inline_instance(counterexample->expected);
    }
    return out.str();
}

std::string VerificationReport::json_text() const { return report_json(*this).dump(2); }

std::string reports_json(const std::vector<VerificationReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) out.push_back(report_json(r));
    return out.dump(2);
}

}  // namespace coex::verify
