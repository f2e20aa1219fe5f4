#ifndef CRNSYNTH_CTMC_STATE_SPACE_HPP
#define CRNSYNTH_CTMC_STATE_SPACE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crnsynth/crn.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/predicate.hpp"

namespace crnsynth::ctmc {

inline constexpr std::size_t kDefaultStateCap = 2'000'000;

/// One edge of the reachability graph: firing `reaction` moves to `target`
/// with unit-rate propensity `factor`.
struct Transition {
    std::size_t target;
    std::size_t reaction;
    double factor;
};

/// Reachable states of a CRN from an initial set. Ordinals are BFS order,
/// initial states first.
struct StateSpace {
    std::size_t numSpecies = 0;
    std::vector<SysState> states;
    std::unordered_map<SysState, std::size_t, SysStateHash> index;
    std::vector<std::size_t> initialStates;
    std::vector<std::size_t> terminalStates;
    std::vector<bool> terminal;
    // CSR over states: transitions of state i are [offsets[i], offsets[i+1])
    std::vector<std::size_t> offsets;
    std::vector<Transition> transitions;

    std::size_t size() const noexcept { return states.size(); }

    std::optional<std::size_t> find(const SysState& x) const {
        auto it = index.find(x);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

/// Mass-action combinatorial factor of reaction r at x (propensity with k = 1).
inline double unitPropensity(const Reaction& rx, const SysState& x) {
    double a = 1.0;
    for (std::size_t s = 0; s < x.size(); ++s) {
        const auto xs = static_cast<double>(x[s]);
        if (rx.reactants[s] == 2) {
            a *= xs * (xs - 1.0) / 2.0;
        } else if (rx.reactants[s] == 1) {
            a *= xs;
        }
    }
    return a;
}

/// BFS closure of `initial` under single firings.
inline StateSpace buildStateSpace(const Crn& crn, const std::vector<SysState>& initial,
                                  std::size_t cap = kDefaultStateCap) {
    if (initial.empty()) throw SpecificationError("initial state set is empty");
    StateSpace sp;
    sp.numSpecies = crn.numSpecies();
    auto intern = [&](const SysState& x) -> std::size_t {
        auto [it, fresh] = sp.index.emplace(x, sp.states.size());
        if (fresh) {
            if (sp.states.size() >= cap) {
                throw CapacityError("reachable state space exceeds the cap of " + std::to_string(cap) + " states");
            }
            sp.states.push_back(x);
        }
        return it->second;
    };
    for (const auto& x : initial) {
        detail::checkDims(crn, x);
        const std::size_t before = sp.states.size();
        const std::size_t id = intern(x);
        if (id == before) sp.initialStates.push_back(id);
    }
    sp.offsets.push_back(0);
    for (std::size_t i = 0; i < sp.states.size(); ++i) {
        const SysState x = sp.states[i];
        bool anyEnabled = false;
        for (std::size_t r = 0; r < crn.numReactions(); ++r) {
            if (!enabled(crn, r, x)) continue;
            anyEnabled = true;
            const std::size_t target = intern(fire(crn, r, x));
            sp.transitions.push_back({target, r, unitPropensity(crn.reaction(r), x)});
        }
        sp.terminal.push_back(!anyEnabled);
        if (!anyEnabled) sp.terminalStates.push_back(i);
        sp.offsets.push_back(sp.transitions.size());
    }
    return sp;
}

/// X_0 = {x : phi0(x), total(x) <= totalBound}, then its closure.
inline StateSpace buildStateSpace(const Crn& crn, const StatePredicate& phi0, Count totalBound,
                                  std::size_t cap = kDefaultStateCap) {
    auto initial = satisfyingStates(phi0, crn.speciesNames(), totalBound);
    if (initial.empty()) {
        throw SpecificationError("no state with total <= " + std::to_string(totalBound) + " satisfies '" +
                                 toString(phi0) + "'");
    }
    return buildStateSpace(crn, initial, cap);
}

} // namespace crnsynth::ctmc

#endif
