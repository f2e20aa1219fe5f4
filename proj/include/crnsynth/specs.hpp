#ifndef CRNSYNTH_SPECS_HPP
#define CRNSYNTH_SPECS_HPP

// Path-predicate generators for the approximate majority and division
// benchmarks, and the spec-file format {"name", "N", "grid": [[a, b], ...]}.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "crnsynth/crn_json.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/predicate.hpp"
#include "crnsynth/problem.hpp"

namespace crnsynth {

/// Input combinations (a, b) = initial copies of A and B.
class InputGrid {
public:
    InputGrid() = default;
    explicit InputGrid(std::vector<std::pair<Count, Count>> pairs) : pairs_(std::move(pairs)) {
        if (pairs_.empty()) throw SpecificationError("input grid is empty");
        std::set<std::pair<Count, Count>> seen;
        for (const auto& p : pairs_) {
            if (p.first < 0 || p.second < 0) throw SpecificationError("input grid entries must be nonnegative");
            if (!seen.insert(p).second) {
                throw SpecificationError("duplicate input pair (" + std::to_string(p.first) + ", " +
                                         std::to_string(p.second) + ")");
            }
        }
    }

    /// All pairs in [lo, hi]², a-major.
    static std::vector<std::pair<Count, Count>> square(Count lo, Count hi) {
        std::vector<std::pair<Count, Count>> out;
        for (Count a = lo; a <= hi; ++a) {
            for (Count b = lo; b <= hi; ++b) out.emplace_back(a, b);
        }
        return out;
    }

    const std::vector<std::pair<Count, Count>>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

private:
    std::vector<std::pair<Count, Count>> pairs_;
};

namespace detail {

inline StatePredicate initialCounts(Count a, Count b, std::size_t numSpecies) {
    const auto names = canonicalSpeciesNames(numSpecies);
    StatePredicate p = countIs("A", a) && countIs("B", b);
    for (std::size_t s = 2; s < numSpecies; ++s) p = p && countIs(names[s], 0);
    return p;
}

} // namespace detail

/// Approximate majority: all molecules end as the initial majority species;
/// on a tie either outcome is accepted. The final predicate says nothing
/// about X.
inline std::vector<PathPredicate> amPredicates(const InputGrid& grid, std::size_t numSpecies) {
    if (numSpecies != 2 && numSpecies != 3) throw SpecificationError("approximate majority is defined for N = 2 or 3");
    std::vector<PathPredicate> out;
    for (auto [a, b] : grid.pairs()) {
        const StatePredicate aWins = countIs("A", a + b) && countIs("B", 0);
        const StatePredicate bWins = countIs("A", 0) && countIs("B", a + b);
        StatePredicate fin = a > b ? aWins : (a < b ? bWins : (aWins || bWins));
        out.push_back({detail::initialCounts(a, b, numSpecies), fin});
    }
    return out;
}

/// Division: X ends at floor(a / b).
inline std::vector<PathPredicate> divPredicates(const InputGrid& grid, std::size_t numSpecies) {
    if (numSpecies != 3 && numSpecies != 4) throw SpecificationError("division is defined for N = 3 or 4");
    std::vector<PathPredicate> out;
    for (auto [a, b] : grid.pairs()) {
        if (b < 1) throw SpecificationError("division input with b = 0");
        out.push_back({detail::initialCounts(a, b, numSpecies), countIs("X", a / b)});
    }
    return out;
}

/// The grids used for the two benchmarks: "am" is [1..5]² ∪ [6..10]², "div" is [1..10]².
inline InputGrid benchmarkGrid(const std::string& name) {
    if (name == "am") {
        auto pairs = InputGrid::square(1, 5);
        auto upper = InputGrid::square(6, 10);
        pairs.insert(pairs.end(), upper.begin(), upper.end());
        return InputGrid(std::move(pairs));
    }
    if (name == "div") return InputGrid(InputGrid::square(1, 10));
    throw SpecificationError("unknown benchmark grid '" + name + "' (expected am or div)");
}

/// A benchmark instance: which function, how many species, which inputs.
struct BenchmarkSpec {
    std::string name; ///< "am" or "div"
    std::size_t numSpecies = 2;
    InputGrid grid;

    std::vector<PathPredicate> predicates() const {
        if (name == "am") return amPredicates(grid, numSpecies);
        if (name == "div") return divPredicates(grid, numSpecies);
        throw SpecificationError("unknown benchmark '" + name + "'");
    }

    /// Inputs A, B are consumed; outputs are A, B for majority and X for division.
    std::vector<std::string> inputSpecies() const { return {"A", "B"}; }
    std::vector<std::string> outputSpecies() const {
        if (name == "am") return {"A", "B"};
        return {"X"};
    }

    SynthesisProblem problem(std::size_t numReactions, std::size_t maxSteps, bool stutter = true) const {
        SynthesisProblem p;
        p.numSpecies = numSpecies;
        p.numReactions = numReactions;
        p.maxSteps = maxSteps;
        p.predicates = predicates();
        p.inputs = inputSpecies();
        p.outputs = outputSpecies();
        p.stutter = stutter;
        return p;
    }
};

inline BenchmarkSpec benchmarkFromJson(const nlohmann::json& j) {
    try {
        BenchmarkSpec spec;
        spec.name = j.at("name").get<std::string>();
        spec.numSpecies = j.at("N").get<std::size_t>();
        std::vector<std::pair<Count, Count>> pairs;
        for (const auto& p : j.at("grid")) {
            if (!p.is_array() || p.size() != 2) throw SpecificationError("grid entries must be [a, b] pairs");
            pairs.emplace_back(p[0].get<Count>(), p[1].get<Count>());
        }
        spec.grid = InputGrid(std::move(pairs));
        spec.predicates(); // validates name and N
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw SpecificationError(std::string("malformed spec JSON: ") + e.what());
    }
}

inline nlohmann::json benchmarkToJson(const BenchmarkSpec& spec) {
    nlohmann::json grid = nlohmann::json::array();
    for (auto [a, b] : spec.grid.pairs()) grid.push_back({a, b});
    return {{"name", spec.name}, {"N", spec.numSpecies}, {"grid", grid}};
}

/// "am" / "div" select the built-in grid; anything else is read as a spec file.
inline BenchmarkSpec resolveBenchmark(const std::string& nameOrPath, std::size_t numSpecies) {
    if (nameOrPath == "am" || nameOrPath == "div") return {nameOrPath, numSpecies, benchmarkGrid(nameOrPath)};
    return benchmarkFromJson(readJsonFile(nameOrPath));
}

} // namespace crnsynth

#endif
