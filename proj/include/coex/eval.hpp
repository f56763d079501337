#pragma once

#include <cstddef>
#include <vector>

#include "coex/ast.hpp"

namespace coex::datalog {

struct EvalError : Error {
    using Error::Error;
};

// Bottom-up, stratum-by-stratum semi-naive evaluation of a non-recursive
// program. Construction compiles the program once (stratification, literal
// scheduling, variable slots); evaluation is a pure function of the input.
class Evaluator {
public:
    explicit Evaluator(Program program);

    const Program& program() const { return program_; }

    // Required input relations, in deterministic order. Covers every
    // declared source predicate and every body-only predicate.
    const std::vector<PredicateRef>& edb_order() const { return edb_; }
    // Computed relations: rule heads plus declared derived predicates
    // without rules (which evaluate to empty).
    const std::vector<PredicateRef>& idb_order() const { return idb_; }

    // Slot-level entry point for hot loops: edb[i] corresponds to
    // edb_order()[i]; the result follows idb_order(). Arities are checked.
    std::vector<Relation> evaluate_ordered(const std::vector<const Relation*>& edb) const;

    // Map-level entry point: returns the input extended with one relation per
    // derived predicate. Extra relations in the input pass through; an input
    // binding for a rule-defined predicate is an error.
    Instance evaluate(const Instance& input) const;

private:
    struct ArgRef {
        int var = -1;  // >= 0: variable slot; -1: constant
        Value value;
    };
    struct ScanOp {
        bool idb = false;
        std::size_t slot = 0;
        std::vector<ArgRef> args;
    };
    struct NegOp {
        bool idb = false;
        std::size_t slot = 0;
        std::vector<ArgRef> args;
    };
    struct CmpOpc {
        ArgRef lhs, rhs;
        CmpOp op;
        bool negated;
    };
    enum class OpKind { Scan, Neg, Cmp };
    struct Op {
        OpKind kind;
        std::size_t index;  // into scans_/negs_/cmps_ of the rule
    };
    struct CompiledRule {
        std::size_t head_slot = 0;
        std::vector<ArgRef> head_args;
        std::size_t num_vars = 0;
        std::vector<Op> schedule;
        std::vector<ScanOp> scans;
        std::vector<NegOp> negs;
        std::vector<CmpOpc> cmps;
        std::size_t stratum = 0;
        std::vector<std::size_t> delta_scans;  // scans over same-stratum predicates
    };

    struct EvalState;

    void compile_rule(const Rule& rule, std::size_t stratum,
                      const std::map<PredicateRef, std::size_t>& level);
    void run_rule(const CompiledRule& rule, EvalState& state) const;
    void run_ops(const CompiledRule& rule, std::size_t op_index, EvalState& state) const;

    Program program_;
    std::vector<PredicateRef> edb_;
    std::vector<PredicateRef> idb_;
    std::map<PredicateRef, std::size_t> edb_index_;
    std::map<PredicateRef, std::size_t> idb_index_;
    std::vector<std::size_t> idb_arity_;
    std::vector<std::size_t> edb_arity_;
    std::vector<CompiledRule> rules_;
    std::size_t num_strata_ = 0;
};

// One-shot convenience wrapper.
Instance evaluate(const Program& program, const Instance& input);

}  // namespace coex::datalog
