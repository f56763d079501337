#include "coex/stratify.hpp"

#include <algorithm>
#include <map>

namespace coex::datalog {

namespace {

using DepGraph = std::map<PredicateRef, std::set<PredicateRef>>;

// Returns a cycle as p1 -> p2 -> ... -> p1 for the error message.
std::string find_cycle(const DepGraph& deps) {
    std::map<PredicateRef, int> state;  // 0 unvisited, 1 in progress, 2 done
    std::vector<PredicateRef> stack;
    std::string cycle;

    auto dfs = [&](auto&& self, const PredicateRef& p) -> bool {
        state[p] = 1;
        stack.push_back(p);
        auto it = deps.find(p);
        if (it != deps.end()) {
            for (const auto& q : it->second) {
                int s = state.count(q) ? state[q] : 0;
                if (s == 1) {
                    auto start = std::find(stack.begin(), stack.end(), q);
                    for (auto at = start; at != stack.end(); ++at) {
                        cycle += at->surface() + " -> ";
                    }
                    cycle += q.surface();
                    return true;
                }
                if (s == 0 && self(self, q)) return true;
            }
        }
        state[p] = 2;
        stack.pop_back();
        return false;
    };
    for (const auto& [p, _] : deps) {
        if ((state.count(p) ? state[p] : 0) == 0 && dfs(dfs, p)) break;
    }
    return cycle;
}

}  // namespace

std::vector<std::vector<PredicateRef>> stratify(const Program& program) {
    // head depends on every body predicate, positive or negated.
    DepGraph deps;
    for (const auto& [pred, decl] : program.decls) deps[pred];
    for (const auto& rule : program.rules) {
        auto& d = deps[rule.head.pred];
        for (const auto& lit : rule.body) {
            if (const auto* rel = std::get_if<RelLiteral>(&lit)) d.insert(rel->atom.pred);
        }
        for (const auto& lit : rule.body) {
            if (const auto* rel = std::get_if<RelLiteral>(&lit)) deps[rel->atom.pred];
        }
    }

    // Longest-path level assignment; a cycle shows up as a level exceeding
    // the predicate count.
    std::map<PredicateRef, std::size_t> level;
    bool changed = true;
    std::size_t guard = deps.size() + 1;
    while (changed) {
        changed = false;
        for (const auto& [p, ds] : deps) {
            std::size_t lv = 0;
            for (const auto& q : ds) {
                auto it = level.find(q);
                std::size_t qlv = it == level.end() ? 0 : it->second;
                lv = std::max(lv, qlv + 1);
            }
            auto it = level.find(p);
            if (it == level.end() || it->second < lv) {
                level[p] = lv;
                changed = true;
                if (lv > guard) {
                    throw StratifyError("recursion is not supported; predicate cycle: " +
                                        find_cycle(deps));
                }
            }
        }
    }

    std::size_t max_level = 0;
    for (const auto& [p, lv] : level) max_level = std::max(max_level, lv);
    std::vector<std::vector<PredicateRef>> strata(deps.empty() ? 0 : max_level + 1);
    for (const auto& [p, lv] : level) strata[lv].push_back(p);
    return strata;
}

}  // namespace coex::datalog
