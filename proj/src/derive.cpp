#include "coex/derive.hpp"

#include <algorithm>

#include "coex/parser.hpp"
#include "coex/printer.hpp"
#include "coex/unfold.hpp"

namespace coex::derive {

using datalog::Atom;
using datalog::Comparison;
using datalog::Declaration;
using datalog::Flavor;
using datalog::Literal;
using datalog::PredicateRef;
using datalog::Program;
using datalog::RelLiteral;
using datalog::Role;
using datalog::Rule;
using datalog::Term;
using datalog::Variable;

namespace {

[[noreturn]] void fragment_fail(const Rule& rule, const std::string& why) {
    throw FragmentError("fragment violation in '" + datalog::printer::to_string(rule) +
                        "': " + why);
}

bool same_args(const std::vector<Term>& a, const std::vector<Term>& b) { return a == b; }

Comparison complement(Comparison c) {
    c.negated = !c.negated;
    return c;
}

}  // namespace

std::vector<PredicateRef> BxSpec::sources() const {
    return putdelta.preds_with_role(Role::Source);
}

std::vector<PredicateRef> BxSpec::views() const { return putdelta.preds_with_role(Role::View); }

BxSpec make_bx_spec(Program putdelta) {
    BxSpec spec{std::move(putdelta), {}};
    auto sources = spec.sources();
    auto views = spec.views();
    auto is_source = [&](const PredicateRef& p) {
        return std::find(sources.begin(), sources.end(), p) != sources.end();
    };
    auto is_view = [&](const PredicateRef& p) {
        return std::find(views.begin(), views.end(), p) != views.end();
    };

    struct RuleInfo {
        const Rule* rule;
        PredicateRef view;
        std::vector<Comparison> comparisons;
    };
    std::vector<RuleInfo> inserts, deletes;

    for (const auto& rule : spec.putdelta.rules) {
        const auto& head = rule.head.pred;
        if (head.flavor != Flavor::Insert && head.flavor != Flavor::Delete) {
            fragment_fail(rule, "head must be a +source or -source delta");
        }
        PredicateRef base{head.name, Flavor::Base};
        if (!is_source(base)) {
            fragment_fail(rule, "head delta is not over a declared source");
        }
        for (const auto& arg : rule.head.args) {
            if (!datalog::is_variable(arg)) fragment_fail(rule, "head must use variables only");
        }
        auto head_vars = datalog::rule_vars(Rule{rule.head, {}});
        if (head_vars.size() != rule.head.args.size()) {
            fragment_fail(rule, "head variables must be distinct");
        }

        std::optional<PredicateRef> view_lit;
        int source_lits = 0, view_lits = 0;
        std::vector<Comparison> comparisons;
        for (const auto& lit : rule.body) {
            if (const auto* rel = std::get_if<RelLiteral>(&lit)) {
                if (is_view(rel->atom.pred)) {
                    ++view_lits;
                    view_lit = rel->atom.pred;
                } else if (rel->atom.pred == base) {
                    ++source_lits;
                } else {
                    fragment_fail(rule, "relational literal '" + rel->atom.pred.surface() +
                                            "' is neither the head's source nor a declared view");
                }
                if (!same_args(rel->atom.args, rule.head.args)) {
                    fragment_fail(rule, "literal '" + datalog::printer::to_string(rel->atom) +
                                            "' must repeat the head's variable vector");
                }
            } else {
                const auto& cmp = std::get<Comparison>(lit);
                for (const Term* t : {&cmp.lhs, &cmp.rhs}) {
                    if (const auto* c = std::get_if<datalog::Constant>(t)) {
                        if (!std::holds_alternative<std::int64_t>(c->value)) {
                            fragment_fail(rule, "comparisons are integer-only");
                        }
                    }
                }
                comparisons.push_back(cmp);
            }
        }
        if (view_lits > 1) fragment_fail(rule, "more than one view literal");
        if (source_lits > 1) fragment_fail(rule, "more than one source literal");
        if (!view_lit) fragment_fail(rule, "no view literal");

        RuleInfo info{&rule, *view_lit, std::move(comparisons)};
        if (head.flavor == Flavor::Insert) {
            inserts.push_back(std::move(info));
        } else {
            deletes.push_back(std::move(info));
        }
    }

    for (const auto& view : views) {
        std::vector<const RuleInfo*> ins, del;
        for (const auto& i : inserts) {
            if (i.view == view) ins.push_back(&i);
        }
        for (const auto& d : deletes) {
            if (d.view == view) del.push_back(&d);
        }
        if (spec.putdelta.rules.empty()) continue;
        if (ins.empty()) {
            throw FragmentError("view '" + view.surface() + "' has no insertion rule");
        }
        if (ins.size() > 1) {
            throw FragmentError("view '" + view.surface() + "' has multiple insertion rules");
        }
        if (del.size() > 1) {
            throw FragmentError("view '" + view.surface() + "' has multiple deletion rules");
        }
        ViewShape shape;
        shape.view = view;
        shape.source = PredicateRef{ins[0]->rule->head.pred.name, Flavor::Base};
        shape.pattern = Atom{view, ins[0]->rule->head.args};
        shape.guard = ins[0]->comparisons;
        if (!del.empty()) {
            shape.has_delete_rule = true;
            shape.delete_guard = del[0]->comparisons;
        }
        spec.shapes.push_back(std::move(shape));
    }
    return spec;
}

BxSpec load_bx_spec(const std::string& text) {
    return make_bx_spec(datalog::parse_program(text));
}

Program build_get_candidate(const BxSpec& spec) {
    Program get;
    for (const auto& [pred, decl] : spec.putdelta.decls) {
        if (decl.role == Role::Source || decl.role == Role::View) get.decls.emplace(pred, decl);
    }
    for (const auto& shape : spec.shapes) {
        std::vector<Literal> body;
        body.push_back(RelLiteral{Atom{shape.source, shape.pattern.args}, false});
        for (const auto& cmp : shape.guard) body.push_back(cmp);
        get.add_rule(Rule{shape.pattern, std::move(body)});
    }
    return get;
}

Program derive_get(const BxSpec& spec, const verify::Universe& bound) {
    Program get = build_get_candidate(spec);
    auto getput = verify::check_getput(get, spec.putdelta, bound);
    if (!getput.pass) {
        throw DeriveError(1, "candidate get is not well-behaved (GetPut failed)\n" + getput.text(),
                          getput);
    }
    auto putget = verify::check_putget(get, spec.putdelta, bound);
    if (!putget.pass) {
        throw DeriveError(1, "candidate get is not well-behaved (PutGet failed)\n" + putget.text(),
                          putget);
    }
    return get;
}

Program derive_putdelta_prime(const BxSpec& spec) {
    // Per view, define the updated state from (v_cur, +v, -v): keep current
    // tuples not deleted, add insertions.
    Program defs;
    for (const auto& shape : spec.shapes) {
        std::size_t arity = shape.pattern.args.size();
        defs.declare({shape.view.name, Flavor::Current}, arity, Role::Derived);
        defs.declare({shape.view.name, Flavor::Insert}, arity, Role::View);
        defs.declare({shape.view.name, Flavor::Delete}, arity, Role::View);
        Atom cur{{shape.view.name, Flavor::Current}, shape.pattern.args};
        Atom plus{{shape.view.name, Flavor::Insert}, shape.pattern.args};
        Atom minus{{shape.view.name, Flavor::Delete}, shape.pattern.args};
        defs.add_rule(Rule{shape.pattern, {RelLiteral{cur, false}, RelLiteral{minus, true}}});
        defs.add_rule(Rule{shape.pattern, {RelLiteral{plus, false}}});
    }
    Program out;
    try {
        out = datalog::unfold(spec.putdelta, defs);
    } catch (const datalog::UnfoldError& e) {
        throw DeriveError(2, e.what());
    }
    for (const auto& shape : spec.shapes) {
        std::vector<Literal> body;
        body.push_back(RelLiteral{Atom{shape.source, shape.pattern.args}, false});
        for (const auto& cmp : shape.guard) body.push_back(cmp);
        out.add_rule(Rule{Atom{{shape.view.name, Flavor::Current}, shape.pattern.args},
                          std::move(body)});
    }
    return out;
}

namespace {

// Guard and pattern per view as recorded in a derived get program.
struct GetShape {
    PredicateRef view;
    Atom pattern;
    std::vector<Comparison> guard;
};

std::vector<GetShape> get_shapes(const Program& get) {
    std::vector<GetShape> out;
    for (const auto& [pred, decl] : get.decls) {
        if (decl.role != Role::View) continue;
        for (const auto& rule : get.rules) {
            if (rule.head.pred != pred) continue;
            // The selection rule is the one reading a base-flavor relation.
            bool selection = std::any_of(rule.body.begin(), rule.body.end(), [](const Literal& l) {
                const auto* rel = std::get_if<RelLiteral>(&l);
                return rel != nullptr && !rel->negated && rel->atom.pred.flavor == Flavor::Base;
            });
            if (!selection) continue;
            GetShape shape{pred, rule.head, {}};
            for (const auto& lit : rule.body) {
                if (const auto* cmp = std::get_if<Comparison>(&lit)) shape.guard.push_back(*cmp);
            }
            out.push_back(std::move(shape));
            break;
        }
    }
    return out;
}

}  // namespace

Program derive_undef(const Program& putdelta_prime, const Program& get) {
    Program undef;
    for (const auto& shape : get_shapes(get)) {
        std::size_t arity = shape.pattern.args.size();
        undef.declare(shape.view, arity, Role::View);
        undef.declare({shape.view.name, Flavor::Aux}, arity, Role::Source);
        undef.declare({shape.view.name, Flavor::AuxInsert}, arity, Role::Derived);
        undef.declare({shape.view.name, Flavor::AuxDelete}, arity, Role::Derived);
        if (shape.guard.empty()) continue;  // nothing is unsynchronized

        // The guard must be observable in putdelta' next to the view deltas;
        // otherwise there is nothing to complement.
        bool guarded_delta_rule = false;
        for (const auto& rule : putdelta_prime.rules) {
            bool mentions_delta = std::any_of(
                rule.body.begin(), rule.body.end(), [&](const Literal& l) {
                    const auto* rel = std::get_if<RelLiteral>(&l);
                    return rel != nullptr && rel->atom.pred.name == shape.view.name &&
                           (rel->atom.pred.flavor == Flavor::Insert ||
                            rel->atom.pred.flavor == Flavor::Delete);
                });
            bool has_cmp = std::any_of(rule.body.begin(), rule.body.end(), [](const Literal& l) {
                return std::holds_alternative<Comparison>(l);
            });
            if (mentions_delta && has_cmp) {
                guarded_delta_rule = true;
                break;
            }
        }
        if (!guarded_delta_rule) {
            throw DeriveError(3, "guard extraction failure: no comparison co-occurs with +" +
                                     shape.view.surface() + "/-" + shape.view.surface() +
                                     " in putdelta'");
        }

        Atom aux{{shape.view.name, Flavor::Aux}, shape.pattern.args};
        Atom aux_plus{{shape.view.name, Flavor::AuxInsert}, shape.pattern.args};
        Atom aux_minus{{shape.view.name, Flavor::AuxDelete}, shape.pattern.args};
        for (const auto& cmp : shape.guard) {
            undef.add_rule(Rule{aux_plus,
                                {RelLiteral{aux, true}, RelLiteral{shape.pattern, false},
                                 complement(cmp)}});
        }
        for (const auto& cmp : shape.guard) {
            undef.add_rule(Rule{aux_minus,
                                {RelLiteral{aux, false}, RelLiteral{shape.pattern, true},
                                 complement(cmp)}});
        }
    }
    return undef;
}

Program derive_undef_method(const Program& putdelta_prime) {
    Program out;
    for (const auto& rule : putdelta_prime.rules) {
        std::vector<Comparison> comparisons;
        for (const auto& lit : rule.body) {
            if (const auto* cmp = std::get_if<Comparison>(&lit)) comparisons.push_back(*cmp);
        }
        if (comparisons.empty()) continue;
        for (const auto& lit : rule.body) {
            const auto* rel = std::get_if<RelLiteral>(&lit);
            if (rel == nullptr || rel->negated) continue;
            Flavor f = rel->atom.pred.flavor;
            if (f != Flavor::Insert && f != Flavor::Delete) continue;
            auto it = putdelta_prime.decls.find(rel->atom.pred);
            if (it == putdelta_prime.decls.end() || it->second.role != Role::View) continue;
            Flavor aux_flavor = f == Flavor::Insert ? Flavor::AuxInsert : Flavor::AuxDelete;
            Atom head{{rel->atom.pred.name, aux_flavor}, rel->atom.args};
            for (const auto& cmp : comparisons) {
                Rule produced{head, {RelLiteral{rel->atom, false}, complement(cmp)}};
                if (std::find(out.rules.begin(), out.rules.end(), produced) == out.rules.end()) {
                    out.add_rule(std::move(produced));
                }
            }
        }
    }
    return out;
}

Program build_get_prime_candidate(const BxSpec& spec) {
    Program out = build_get_candidate(spec);
    for (const auto& shape : spec.shapes) {
        if (shape.guard.empty()) continue;
        out.declare({shape.view.name, Flavor::Aux}, shape.pattern.args.size(), Role::Source);
        Atom aux{{shape.view.name, Flavor::Aux}, shape.pattern.args};
        for (const auto& cmp : shape.guard) {
            out.add_rule(Rule{shape.pattern, {RelLiteral{aux, false}, complement(cmp)}});
        }
    }
    return out;
}

Program derive_get_prime(const BxSpec& spec, const Program& undef,
                         const verify::Universe& bound) {
    Program candidate = build_get_prime_candidate(spec);
    auto report = verify::check_totality(spec.putdelta, undef, candidate, bound);
    if (!report.pass) {
        throw DeriveError(4, "total backward transformation failed verification\n" + report.text(),
                          report);
    }
    return candidate;
}

DerivedBx derive_all(const BxSpec& spec, const verify::Universe& bound) {
    DerivedBx out;
    out.spec = spec;
    out.get = derive_get(spec, bound);
    out.putdelta_prime = derive_putdelta_prime(spec);
    out.undef = derive_undef(out.putdelta_prime, out.get);
    out.get_prime = derive_get_prime(spec, out.undef, bound);
    for (const auto& shape : spec.shapes) {
        out.aux_decls[{shape.view.name, Flavor::Aux}] =
            Declaration{shape.pattern.args.size(), Role::Source};
    }
    return out;
}

DerivedBx derive_all_unverified(const BxSpec& spec) {
    DerivedBx out;
    out.spec = spec;
    out.get = build_get_candidate(spec);
    out.putdelta_prime = derive_putdelta_prime(spec);
    out.undef = derive_undef(out.putdelta_prime, out.get);
    out.get_prime = build_get_prime_candidate(spec);
    for (const auto& shape : spec.shapes) {
        out.aux_decls[{shape.view.name, Flavor::Aux}] =
            Declaration{shape.pattern.args.size(), Role::Source};
    }
    return out;
}

verify::VerificationReport check_totality(const DerivedBx& derived, const verify::Universe& u) {
    return verify::check_totality(derived.spec.putdelta, derived.undef, derived.get_prime, u);
}

}  // namespace coex::derive
