#ifndef CRNSYNTH_PROBLEM_HPP
#define CRNSYNTH_PROBLEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "crnsynth/crn.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/predicate.hpp"

namespace crnsynth {

/// Species names used throughout: A, B, X, Y for up to four species, then S4, S5, ...
inline std::vector<std::string> canonicalSpeciesNames(std::size_t n) {
    static const char* base[] = {"A", "B", "X", "Y"};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(i < 4 ? base[i] : "S" + std::to_string(i));
    return names;
}

/// What to synthesize: N species, M reactions, K-step paths for each predicate.
struct SynthesisProblem {
    std::size_t numSpecies = 2;
    std::size_t numReactions = 2;
    std::size_t maxSteps = 5;
    std::vector<PathPredicate> predicates;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool stutter = true;
    StutterBound stutterBound = StutterBound::Exact;

    std::vector<std::string> speciesNames() const { return canonicalSpeciesNames(numSpecies); }

    void validate() const {
        if (numSpecies < 1) throw PreconditionError("problem needs at least one species");
        if (numReactions < 1) throw PreconditionError("problem needs at least one reaction");
        if (maxSteps < 1) throw PreconditionError("problem needs at least one step");
        const auto names = speciesNames();
        auto known = [&](const std::string& s) {
            for (const auto& n : names) {
                if (n == s) return true;
            }
            return false;
        };
        for (const auto& s : inputs) {
            if (!known(s)) throw PreconditionError("input species '" + s + "' is not declared");
        }
        for (const auto& s : outputs) {
            if (!known(s)) throw PreconditionError("output species '" + s + "' is not declared");
        }
        for (const auto& p : predicates) {
            std::vector<std::string> used;
            collectSpecies(p.initial.node(), used);
            collectSpecies(p.final.node(), used);
            for (const auto& s : used) {
                if (!known(s)) throw PreconditionError("predicate references undeclared species '" + s + "'");
            }
        }
    }

    /// Total molecule count bound of predicate i, required for finite encodings.
    Count totalBound(std::size_t i) const {
        auto b = totalCountBound(predicates.at(i).initial, speciesNames());
        if (!b) {
            throw SpecificationError("initial predicate '" + toString(predicates.at(i).initial) +
                                     "' does not bound the total molecule count");
        }
        return *b;
    }
};

} // namespace crnsynth

#endif
