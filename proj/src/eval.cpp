#include "coex/eval.hpp"

#include <algorithm>
#include <cassert>

#include "coex/printer.hpp"
#include "coex/stratify.hpp"

namespace coex::datalog {

struct Evaluator::EvalState {
    const std::vector<const Relation*>* edb = nullptr;
    std::vector<Relation>* idb = nullptr;
    std::vector<Value> bindings;
    std::vector<char> bound;
    std::vector<int> trail;  // bound variable slots, for backtracking
    Tuple scratch;
    Tuple probe;
    Relation* out = nullptr;
    Relation* delta_out = nullptr;
    int restrict_scan = -1;                    // scan index forced onto a delta
    const Relation* restrict_rel = nullptr;
};

Evaluator::Evaluator(Program program) : program_(std::move(program)) {
    auto strata = stratify(program_);
    std::map<PredicateRef, std::size_t> level;
    for (std::size_t s = 0; s < strata.size(); ++s) {
        for (const auto& p : strata[s]) level[p] = s;
    }
    num_strata_ = strata.size();

    // IDB: rule heads plus declared derived predicates without rules.
    std::set<PredicateRef> idb_set;
    for (const auto& rule : program_.rules) idb_set.insert(rule.head.pred);
    for (const auto& [pred, decl] : program_.decls) {
        if (decl.role == Role::Derived) idb_set.insert(pred);
    }
    // EDB: declared sources and body-referenced predicates that have no rules.
    std::set<PredicateRef> edb_set;
    for (const auto& [pred, decl] : program_.decls) {
        if (decl.role == Role::Source && !idb_set.count(pred)) edb_set.insert(pred);
    }
    for (const auto& rule : program_.rules) {
        for (const auto& lit : rule.body) {
            if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
                if (!idb_set.count(rel->atom.pred)) edb_set.insert(rel->atom.pred);
            }
        }
    }
    edb_.assign(edb_set.begin(), edb_set.end());
    idb_.assign(idb_set.begin(), idb_set.end());
    for (std::size_t i = 0; i < edb_.size(); ++i) edb_index_[edb_[i]] = i;
    for (std::size_t i = 0; i < idb_.size(); ++i) idb_index_[idb_[i]] = i;

    auto arity_of = [&](const PredicateRef& pred) -> std::size_t {
        if (program_.declared(pred)) return program_.arity_of(pred);
        // Fall back to first occurrence in rules.
        for (const auto& rule : program_.rules) {
            if (rule.head.pred == pred) return rule.head.args.size();
            for (const auto& lit : rule.body) {
                if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
                    if (rel->atom.pred == pred) return rel->atom.args.size();
                }
            }
        }
        throw EvalError("unknown arity for predicate '" + pred.surface() + "'");
    };
    for (const auto& p : edb_) edb_arity_.push_back(arity_of(p));
    for (const auto& p : idb_) idb_arity_.push_back(arity_of(p));

    for (const auto& rule : program_.rules) {
        compile_rule(rule, level.at(rule.head.pred), level);
    }
    std::stable_sort(rules_.begin(), rules_.end(),
                     [](const CompiledRule& a, const CompiledRule& b) {
                         return a.stratum < b.stratum;
                     });
}

void Evaluator::compile_rule(const Rule& rule, std::size_t stratum,
                             const std::map<PredicateRef, std::size_t>& level) {
    CompiledRule cr;
    cr.stratum = stratum;
    cr.head_slot = idb_index_.at(rule.head.pred);

    std::map<std::string, int> var_slot;
    auto arg_ref = [&](const Term& t) {
        if (const auto* var = std::get_if<Variable>(&t)) {
            auto [it, _] = var_slot.emplace(var->name, static_cast<int>(var_slot.size()));
            return ArgRef{it->second, {}};
        }
        return ArgRef{-1, std::get<Constant>(t).value};
    };

    // Schedule: positive scans in body order, each followed by the pending
    // negations/comparisons whose variables are now all bound.
    struct Pending {
        Op op;
        std::vector<int> vars;
    };
    std::vector<Pending> pending;
    std::vector<char> var_bound;  // grows as scans bind
    auto bound_after = [&](const std::vector<int>& vars) {
        return std::all_of(vars.begin(), vars.end(), [&](int v) {
            return v < static_cast<int>(var_bound.size()) && var_bound[v];
        });
    };
    auto flush_pending = [&] {
        for (auto it = pending.begin(); it != pending.end();) {
            if (bound_after(it->vars)) {
                cr.schedule.push_back(it->op);
                it = pending.erase(it);
            } else {
                ++it;
            }
        }
    };

    for (const auto& lit : rule.body) {
        if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
            bool idb = idb_index_.count(rel->atom.pred) != 0;
            std::size_t slot =
                idb ? idb_index_.at(rel->atom.pred) : edb_index_.at(rel->atom.pred);
            std::vector<ArgRef> args;
            std::vector<int> vars;
            for (const auto& a : rel->atom.args) {
                ArgRef r = arg_ref(a);
                if (r.var >= 0) vars.push_back(r.var);
                args.push_back(std::move(r));
            }
            if (!rel->negated) {
                if (idb && level.count(rel->atom.pred) && level.at(rel->atom.pred) == stratum) {
                    cr.delta_scans.push_back(cr.scans.size());
                }
                cr.scans.push_back({idb, slot, std::move(args)});
                cr.schedule.push_back({OpKind::Scan, cr.scans.size() - 1});
                for (int v : vars) {
                    if (v >= static_cast<int>(var_bound.size())) var_bound.resize(v + 1, 0);
                    var_bound[v] = 1;
                }
                flush_pending();
            } else {
                cr.negs.push_back({idb, slot, std::move(args)});
                pending.push_back({{OpKind::Neg, cr.negs.size() - 1}, std::move(vars)});
            }
        } else {
            const auto& cmp = std::get<Comparison>(lit);
            ArgRef lhs = arg_ref(cmp.lhs);
            ArgRef rhs = arg_ref(cmp.rhs);
            std::vector<int> vars;
            if (lhs.var >= 0) vars.push_back(lhs.var);
            if (rhs.var >= 0) vars.push_back(rhs.var);
            cr.cmps.push_back({std::move(lhs), std::move(rhs), cmp.op, cmp.negated});
            pending.push_back({{OpKind::Cmp, cr.cmps.size() - 1}, std::move(vars)});
        }
        flush_pending();
    }
    flush_pending();
    if (!pending.empty()) {
        throw EvalError("unsafe rule reached evaluation: " + printer::to_string(rule));
    }
    for (const auto& a : rule.head.args) cr.head_args.push_back(arg_ref(a));
    cr.num_vars = var_slot.size();
    rules_.push_back(std::move(cr));
}

namespace {

bool compare_values(const Value& lhs, CmpOp op, const Value& rhs) {
    const auto* li = std::get_if<std::int64_t>(&lhs);
    const auto* ri = std::get_if<std::int64_t>(&rhs);
    if (li == nullptr || ri == nullptr) {
        throw EvalError("comparison applied to non-integer value '" +
                        printer::to_string(li == nullptr ? lhs : rhs) + "'");
    }
    switch (op) {
        case CmpOp::Lt: return *li < *ri;
        case CmpOp::Gt: return *li > *ri;
        case CmpOp::Le: return *li <= *ri;
        case CmpOp::Ge: return *li >= *ri;
        case CmpOp::Eq: return *li == *ri;
        case CmpOp::Ne: return *li != *ri;
    }
    return false;
}

}  // namespace

void Evaluator::run_ops(const CompiledRule& rule, std::size_t op_index, EvalState& state) const {
    if (op_index == rule.schedule.size()) {
        state.scratch.clear();
        for (const auto& a : rule.head_args) {
            state.scratch.push_back(a.var >= 0 ? state.bindings[a.var] : a.value);
        }
        if (!state.out->tuples.count(state.scratch)) {
            state.out->tuples.insert(state.scratch);
            if (state.delta_out != nullptr) state.delta_out->tuples.insert(state.scratch);
        }
        return;
    }
    const Op& op = rule.schedule[op_index];
    auto resolve = [&](const ArgRef& a) -> const Value& {
        return a.var >= 0 ? state.bindings[a.var] : a.value;
    };
    switch (op.kind) {
        case OpKind::Scan: {
            const auto& scan = rule.scans[op.index];
            const Relation& rel =
                state.restrict_scan == static_cast<int>(op.index)
                    ? *state.restrict_rel
                    : (scan.idb ? (*state.idb)[scan.slot] : *(*state.edb)[scan.slot]);
            const std::size_t mark = state.trail.size();
            for (const auto& tuple : rel.tuples) {
                bool ok = true;
                for (std::size_t i = 0; i < scan.args.size() && ok; ++i) {
                    const ArgRef& a = scan.args[i];
                    if (a.var < 0) {
                        ok = tuple[i] == a.value;
                    } else if (state.bound[a.var]) {
                        ok = tuple[i] == state.bindings[a.var];
                    } else {
                        state.bindings[a.var] = tuple[i];
                        state.bound[a.var] = 1;
                        state.trail.push_back(a.var);
                    }
                }
                if (ok) run_ops(rule, op_index + 1, state);
                while (state.trail.size() > mark) {
                    state.bound[state.trail.back()] = 0;
                    state.trail.pop_back();
                }
            }
            return;
        }
        case OpKind::Neg: {
            const auto& neg = rule.negs[op.index];
            const Relation& rel = neg.idb ? (*state.idb)[neg.slot] : *(*state.edb)[neg.slot];
            state.probe.clear();
            for (const auto& a : neg.args) state.probe.push_back(resolve(a));
            if (!rel.tuples.count(state.probe)) run_ops(rule, op_index + 1, state);
            return;
        }
        case OpKind::Cmp: {
            const auto& cmp = rule.cmps[op.index];
            bool value = compare_values(resolve(cmp.lhs), cmp.op, resolve(cmp.rhs));
            if (value != cmp.negated) run_ops(rule, op_index + 1, state);
            return;
        }
    }
}

void Evaluator::run_rule(const CompiledRule& rule, EvalState& state) const {
    if (state.bindings.size() < rule.num_vars) state.bindings.resize(rule.num_vars);
    state.bound.assign(rule.num_vars, 0);
    state.trail.clear();
    state.out = &(*state.idb)[rule.head_slot];
    run_ops(rule, 0, state);
}

std::vector<Relation> Evaluator::evaluate_ordered(
    const std::vector<const Relation*>& edb) const {
    if (edb.size() != edb_.size()) {
        throw EvalError("expected " + std::to_string(edb_.size()) + " input relations, got " +
                        std::to_string(edb.size()));
    }
    for (std::size_t i = 0; i < edb.size(); ++i) {
        if (edb[i] == nullptr) {
            throw EvalError("missing input relation for '" + edb_[i].surface() + "'");
        }
        if (edb[i]->arity != edb_arity_[i]) {
            throw EvalError("input relation '" + edb_[i].surface() + "' has arity " +
                            std::to_string(edb[i]->arity) + ", expected " +
                            std::to_string(edb_arity_[i]));
        }
    }
    std::vector<Relation> idb(idb_.size());
    for (std::size_t i = 0; i < idb.size(); ++i) idb[i].arity = idb_arity_[i];

    static thread_local EvalState state;
    state.edb = &edb;
    state.idb = &idb;
    state.restrict_scan = -1;
    state.restrict_rel = nullptr;
    state.delta_out = nullptr;

    // Rules are sorted by stratum. Within a stratum, a first full round seeds
    // the relations and their deltas; later rounds re-run only the rules that
    // read a same-stratum predicate, with that scan restricted to the delta.
    // Level stratification leaves no same-stratum reads, so the delta rounds
    // terminate immediately, but the machinery is the general one.
    std::size_t begin = 0;
    while (begin < rules_.size()) {
        std::size_t end = begin;
        while (end < rules_.size() && rules_[end].stratum == rules_[begin].stratum) ++end;

        // Delta bookkeeping only matters when some rule re-reads its own
        // stratum; otherwise one pass is the fixpoint.
        bool stratum_has_delta_scans = false;
        for (std::size_t r = begin; r < end; ++r) {
            if (!rules_[r].delta_scans.empty()) stratum_has_delta_scans = true;
        }
        if (!stratum_has_delta_scans) {
            for (std::size_t r = begin; r < end; ++r) run_rule(rules_[r], state);
            begin = end;
            continue;
        }

        std::vector<Relation> delta(idb_.size());
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i].arity = idb_arity_[i];
        for (std::size_t r = begin; r < end; ++r) {
            state.delta_out = &delta[rules_[r].head_slot];
            run_rule(rules_[r], state);
        }
        state.delta_out = nullptr;

        bool any_delta = std::any_of(delta.begin(), delta.end(),
                                     [](const Relation& d) { return !d.empty(); });
        while (any_delta) {
            std::vector<Relation> next(idb_.size());
            for (std::size_t i = 0; i < next.size(); ++i) next[i].arity = idb_arity_[i];
            for (std::size_t r = begin; r < end; ++r) {
                const CompiledRule& rule = rules_[r];
                for (std::size_t pos : rule.delta_scans) {
                    const auto& scan = rule.scans[pos];
                    if (delta[scan.slot].empty()) continue;
                    state.restrict_scan = static_cast<int>(pos);
                    state.restrict_rel = &delta[scan.slot];
                    state.delta_out = &next[rule.head_slot];
                    run_rule(rule, state);
                }
            }
            state.restrict_scan = -1;
            state.restrict_rel = nullptr;
            state.delta_out = nullptr;
            delta = std::move(next);
            any_delta = std::any_of(delta.begin(), delta.end(),
                                    [](const Relation& d) { return !d.empty(); });
        }
        begin = end;
    }
    return idb;
}

Instance Evaluator::evaluate(const Instance& input) const {
    std::vector<const Relation*> edb(edb_.size(), nullptr);
    for (std::size_t i = 0; i < edb_.size(); ++i) {
        auto it = input.find(edb_[i]);
        if (it == input.end()) {
            throw EvalError("missing input relation for '" + edb_[i].surface() + "'");
        }
        edb[i] = &it->second;
    }
    for (const auto& p : idb_) {
        if (input.count(p)) {
            throw EvalError("input provides a relation for derived predicate '" + p.surface() +
                            "'");
        }
    }
    std::vector<Relation> idb = evaluate_ordered(edb);
    Instance out = input;
    for (std::size_t i = 0; i < idb_.size(); ++i) out[idb_[i]] = std::move(idb[i]);
    return out;
}

Instance evaluate(const Program& program, const Instance& input) {
    return Evaluator(program).evaluate(input);
}

}  // namespace coex::datalog
