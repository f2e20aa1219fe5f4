#ifndef CRNSYNTH_ORACLE_HPP
#define CRNSYNTH_ORACLE_HPP

// Brute-force ground truth for synthesis: explicit enumeration of the CRN
// space and breadth-first search over the stutter transition graph.
//
// Everything here works directly on Crn values and crn.hpp semantics; none of
// it touches the symbolic encoding.

#include <cstdint>
#include <functional>
#include <set>
#include <unordered_set>
#include <vector>

#include "crnsynth/crn.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/predicate.hpp"
#include "crnsynth/problem.hpp"

namespace crnsynth {
namespace oracle {

inline constexpr std::size_t kMaxSpecies = 3;
inline constexpr std::size_t kMaxReactions = 3;
inline constexpr Count kMaxTotal = 64;

/// All distinct bimolecular reactions over N species, multiset semantics,
/// sorted lexicographically by (reactants, products).
struct ReactionSpace {
    std::size_t numSpecies = 0;
    std::vector<Reaction> allReactions;

    std::size_t count() const noexcept { return allReactions.size(); }

    /// Ordered-pair count N²(N²-1) used for the binomial "possible CRNs" figure.
    std::uint64_t orderedCount() const noexcept {
        const std::uint64_t n2 = numSpecies * numSpecies;
        return n2 * (n2 - 1);
    }

    explicit ReactionSpace(std::size_t n) : numSpecies(n) {
        std::vector<Stoichiometry> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                Stoichiometry v(n, 0);
                v[i] += 1;
                v[j] += 1;
                pairs.push_back(std::move(v));
            }
        }
        for (const auto& r : pairs) {
            for (const auto& p : pairs) {
                if (r != p) allReactions.push_back({r, p, 1.0});
            }
        }
        std::sort(allReactions.begin(), allReactions.end(), [](const Reaction& a, const Reaction& b) {
            return std::tie(a.reactants, a.products) < std::tie(b.reactants, b.products);
        });
    }
};

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

/// Calls `visit` for every M-subset of the reaction space (unit rates, no
/// designated inputs or outputs). Returning false from `visit` stops early.
inline void forEachCrn(std::size_t numSpecies, std::size_t numReactions, const std::function<bool(const Crn&)>& visit) {
    if (numSpecies < 1 || numSpecies > kMaxSpecies || numReactions < 1 || numReactions > kMaxReactions) {
        throw CapacityError("oracle enumeration supports 1 <= N <= 3 and 1 <= M <= 3");
    }
    ReactionSpace space(numSpecies);
    const auto names = canonicalSpeciesNames(numSpecies);
    std::vector<std::size_t> pick(numReactions);
    std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) -> bool {
        if (depth == numReactions) {
            std::vector<Reaction> rxs;
            for (auto i : pick) rxs.push_back(space.allReactions[i]);
            return visit(Crn(names, std::move(rxs)));
        }
        for (std::size_t i = from; i < space.count(); ++i) {
            pick[depth] = i;
            if (!rec(depth + 1, i + 1)) return false;
        }
        return true;
    };
    rec(0, 0);
}

inline std::vector<Crn> allCrns(std::size_t numSpecies, std::size_t numReactions) {
    std::vector<Crn> out;
    forEachCrn(numSpecies, numReactions, [&](const Crn& c) {
        out.push_back(c);
        return true;
    });
    return out;
}

/// True iff some state satisfying phi_0 (total <= totalBound) has a path of at
/// most K steps ending in a terminal state satisfying phi_F. With `stutter`
/// each step is one stutter move; otherwise a single firing. Terminal states
/// loop on themselves in both modes, so shorter paths count.
inline bool bruteForceCheck(const Crn& crn, const PathPredicate& phi, std::size_t maxSteps, Count totalBound,
                            bool stutter = true, StutterBound bound = StutterBound::Exact) {
    if (totalBound < 0 || totalBound > kMaxTotal) {
        throw CapacityError("oracle total bound must lie in [0, " + std::to_string(kMaxTotal) + "]");
    }
    const auto names = crn.speciesNames();
    if (auto declared = totalCountBound(phi.initial, names); declared && *declared > totalBound) {
        throw CapacityError("initial predicate admits totals up to " + std::to_string(*declared) +
                            ", above the oracle bound " + std::to_string(totalBound));
    }
    BoundPredicate finalPred(phi.final, names);
    auto accepting = [&](const SysState& x) { return isTerminal(crn, x) && finalPred(x); };

    std::vector<SysState> frontier = satisfyingStates(phi.initial, names, totalBound);
    std::unordered_set<SysState, SysStateHash> seen(frontier.begin(), frontier.end());
    for (std::size_t depth = 0;; ++depth) {
        for (const auto& x : frontier) {
            if (accepting(x)) return true;
        }
        if (depth == maxSteps || frontier.empty()) return false;
        std::vector<SysState> next;
        for (const auto& x : frontier) {
            if (stutter) {
                for (auto& mv : stutterSuccessors(crn, x, bound)) {
                    if (seen.insert(mv.state).second) next.push_back(std::move(mv.state));
                }
            } else {
                for (auto& y : successors(crn, x)) {
                    if (seen.insert(y).second) next.push_back(std::move(y));
                }
            }
        }
        frontier = std::move(next);
    }
}

/// Same check with the total bound taken from phi_0.
inline bool bruteForceCheck(const Crn& crn, const PathPredicate& phi, std::size_t maxSteps, bool stutter = true,
                            StutterBound bound = StutterBound::Exact) {
    auto total = totalCountBound(phi.initial, crn.speciesNames());
    if (!total) throw SpecificationError("initial predicate does not bound the total molecule count");
    return bruteForceCheck(crn, phi, maxSteps, *total, stutter, bound);
}

/// Input/output structural constraints of a problem, checked on a concrete CRN.
inline bool meetsIoConstraints(const Crn& crn, const SynthesisProblem& problem) {
    for (const auto& name : problem.inputs) {
        const std::size_t s = crn.indexOf(name);
        bool consumed = false;
        for (const auto& rx : crn.reactions()) consumed = consumed || rx.reactants[s] > 0;
        if (!consumed) return false;
    }
    for (const auto& name : problem.outputs) {
        const std::size_t s = crn.indexOf(name);
        bool produced = false;
        for (const auto& rx : crn.reactions()) produced = produced || rx.products[s] > 0;
        if (!produced) return false;
    }
    return true;
}

inline bool satisfiesAll(const Crn& crn, const SynthesisProblem& problem) {
    for (const auto& phi : problem.predicates) {
        if (!bruteForceCheck(crn, phi, problem.maxSteps, problem.stutter, problem.stutterBound)) return false;
    }
    return true;
}

/// Every CRN of the problem's class satisfying all predicates, in
/// reaction-space order, with the problem's inputs and outputs attached.
inline std::vector<Crn> exhaustiveSynthesis(const SynthesisProblem& problem) {
    problem.validate();
    std::vector<Crn> out;
    forEachCrn(problem.numSpecies, problem.numReactions, [&](const Crn& crn) {
        if (meetsIoConstraints(crn, problem) && satisfiesAll(crn, problem)) {
            out.emplace_back(crn.speciesNames(), crn.reactions(), problem.inputs, problem.outputs);
        }
        return true;
    });
    return out;
}

/// Fewest stutter steps after which every predicate is satisfied by `crn`,
/// or empty if none up to `maxK`.
inline std::optional<std::size_t> minimalSteps(const Crn& crn, const std::vector<PathPredicate>& predicates,
                                               std::size_t maxK, bool stutter = true,
                                               StutterBound bound = StutterBound::Exact) {
    for (std::size_t k = 1; k <= maxK; ++k) {
        bool all = true;
        for (const auto& phi : predicates) {
            if (!bruteForceCheck(crn, phi, k, stutter, bound)) {
                all = false;
                break;
            }
        }
        if (all) return k;
    }
    return std::nullopt;
}

} // namespace oracle
} // namespace crnsynth

#endif
