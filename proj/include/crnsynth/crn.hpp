#ifndef CRNSYNTH_CRN_HPP
#define CRNSYNTH_CRN_HPP

// Bimolecular chemical reaction networks and their discrete semantics.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crnsynth/error.hpp"

namespace crnsynth {

using Count = std::int64_t;
using Stoichiometry = std::vector<int>;

struct SpeciesId {
    std::size_t index = 0;
    std::string name;

    friend bool operator==(const SpeciesId&, const SpeciesId&) = default;
};

/// One bimolecular reaction. `rate` is ignored by all structural comparisons.
struct Reaction {
    Stoichiometry reactants;
    Stoichiometry products;
    double rate = 1.0;

    bool sameStructure(const Reaction& other) const {
        return reactants == other.reactants && products == other.products;
    }
};

/// Molecule copy numbers, one entry per species.
class SysState {
public:
    SysState() = default;
    explicit SysState(std::vector<Count> counts) : counts_(std::move(counts)) {
        for (Count c : counts_) {
            if (c < 0) throw StructuralError("negative molecule count in state");
        }
    }
    SysState(std::initializer_list<Count> counts) : SysState(std::vector<Count>(counts)) {}

    std::size_t size() const noexcept { return counts_.size(); }
    Count operator[](std::size_t s) const { return counts_[s]; }
    const std::vector<Count>& counts() const noexcept { return counts_; }
    Count total() const { return std::accumulate(counts_.begin(), counts_.end(), Count{0}); }

    friend bool operator==(const SysState&, const SysState&) = default;
    friend auto operator<=>(const SysState&, const SysState&) = default;

private:
    std::vector<Count> counts_;
};

struct SysStateHash {
    std::size_t operator()(const SysState& x) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        for (Count c : x.counts()) {
            h ^= std::hash<Count>{}(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

namespace detail {

inline int sum(const Stoichiometry& v) { return std::accumulate(v.begin(), v.end(), 0); }

} // namespace detail

/// A CRN C = (species, reactions) with designated input and output species.
///
/// Construction validates the bimolecular class: every reactant and product
/// vector sums to two, each reaction changes the state, reactions are pairwise
/// structurally distinct, inputs are consumed by some reaction and outputs are
/// produced by some reaction.
class Crn {
public:
    Crn(std::vector<std::string> species, std::vector<Reaction> reactions,
        std::vector<std::string> inputs = {}, std::vector<std::string> outputs = {})
        : reactions_(std::move(reactions)) {
        for (std::size_t i = 0; i < species.size(); ++i) {
            if (species[i].empty()) throw StructuralError("empty species name");
            for (std::size_t j = 0; j < i; ++j) {
                if (species[i] == species_[j].name) throw StructuralError("duplicate species name '" + species[i] + "'");
            }
            species_.push_back({i, std::move(species[i])});
        }
        if (species_.empty()) throw StructuralError("a CRN needs at least one species");
        if (reactions_.empty()) throw StructuralError("a CRN needs at least one reaction");
        const std::size_t n = species_.size();
        for (std::size_t r = 0; r < reactions_.size(); ++r) {
            const Reaction& rx = reactions_[r];
            const std::string where = "reaction " + std::to_string(r);
            if (rx.reactants.size() != n || rx.products.size() != n) {
                throw StructuralError(where + ": stoichiometry length does not match species count");
            }
            for (std::size_t s = 0; s < n; ++s) {
                if (rx.reactants[s] < 0 || rx.products[s] < 0) throw StructuralError(where + ": negative stoichiometry");
            }
            if (detail::sum(rx.reactants) != 2 || detail::sum(rx.products) != 2) {
                throw StructuralError(where + ": not bimolecular (reactant and product counts must both be 2)");
            }
            if (rx.reactants == rx.products) throw StructuralError(where + ": reaction does not change the state");
            if (!(rx.rate >= 0.0)) throw StructuralError(where + ": negative or NaN rate");
            for (std::size_t q = 0; q < r; ++q) {
                if (reactions_[q].sameStructure(rx)) {
                    throw StructuralError(where + ": duplicates reaction " + std::to_string(q));
                }
            }
        }
        for (auto& name : inputs) {
            std::size_t s = indexOf(name);
            bool consumed = std::any_of(reactions_.begin(), reactions_.end(),
                                        [s](const Reaction& rx) { return rx.reactants[s] > 0; });
            if (!consumed) throw StructuralError("input species '" + name + "' is not a reactant of any reaction");
            inputs_.push_back(s);
        }
        for (auto& name : outputs) {
            std::size_t s = indexOf(name);
            bool produced = std::any_of(reactions_.begin(), reactions_.end(),
                                        [s](const Reaction& rx) { return rx.products[s] > 0; });
            if (!produced) throw StructuralError("output species '" + name + "' is not a product of any reaction");
            outputs_.push_back(s);
        }
    }

    std::size_t numSpecies() const noexcept { return species_.size(); }
    std::size_t numReactions() const noexcept { return reactions_.size(); }
    const std::vector<SpeciesId>& species() const noexcept { return species_; }
    const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
    const Reaction& reaction(std::size_t r) const {
        if (r >= reactions_.size()) throw PreconditionError("reaction index out of range");
        return reactions_[r];
    }
    const std::vector<std::size_t>& inputs() const noexcept { return inputs_; }
    const std::vector<std::size_t>& outputs() const noexcept { return outputs_; }

    std::vector<std::string> speciesNames() const {
        std::vector<std::string> names;
        names.reserve(species_.size());
        for (const auto& s : species_) names.push_back(s.name);
        return names;
    }

    std::size_t indexOf(const std::string& name) const {
        for (const auto& s : species_) {
            if (s.name == name) return s.index;
        }
        throw StructuralError("unknown species '" + name + "'");
    }

    std::vector<double> rates() const {
        std::vector<double> k;
        k.reserve(reactions_.size());
        for (const auto& rx : reactions_) k.push_back(rx.rate);
        return k;
    }

    /// Copy with a new rate vector; structure is unchanged.
    Crn withRates(const std::vector<double>& rates) const {
        if (rates.size() != reactions_.size()) throw StructuralError("rate vector length does not match reaction count");
        Crn copy = *this;
        for (std::size_t r = 0; r < rates.size(); ++r) {
            if (!(rates[r] >= 0.0)) throw StructuralError("negative or NaN rate");
            copy.reactions_[r].rate = rates[r];
        }
        return copy;
    }

    /// Sorted (reactants, products) pairs: equal keys mean equal reaction sets.
    std::vector<std::pair<Stoichiometry, Stoichiometry>> structureKey() const {
        std::vector<std::pair<Stoichiometry, Stoichiometry>> key;
        key.reserve(reactions_.size());
        for (const auto& rx : reactions_) key.emplace_back(rx.reactants, rx.products);
        std::sort(key.begin(), key.end());
        return key;
    }

    bool sameReactionSet(const Crn& other) const {
        return species_ == other.species_ && structureKey() == other.structureKey();
    }

private:
    std::vector<SpeciesId> species_;
    std::vector<Reaction> reactions_;
    std::vector<std::size_t> inputs_;
    std::vector<std::size_t> outputs_;
};

namespace detail {

inline void checkDims(const Crn& crn, const SysState& x) {
    if (x.size() != crn.numSpecies()) {
        throw StructuralError("state has " + std::to_string(x.size()) + " entries but the CRN has " +
                              std::to_string(crn.numSpecies()) + " species");
    }
}

} // namespace detail

inline bool enabled(const Crn& crn, std::size_t r, const SysState& x) {
    detail::checkDims(crn, x);
    const Reaction& rx = crn.reaction(r);
    for (std::size_t s = 0; s < x.size(); ++s) {
        if (x[s] < rx.reactants[s]) return false;
    }
    return true;
}

/// Mass-action propensity at unit volume: k·x(x-1)/2 for 2S, k·x·x' for S+S'.
inline double propensity(const Crn& crn, std::size_t r, const SysState& x) {
    detail::checkDims(crn, x);
    const Reaction& rx = crn.reaction(r);
    double a = rx.rate;
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

inline SysState fire(const Crn& crn, std::size_t r, const SysState& x) {
    if (!enabled(crn, r, x)) throw PreconditionError("reaction " + std::to_string(r) + " is not enabled");
    const Reaction& rx = crn.reaction(r);
    std::vector<Count> next(x.counts());
    for (std::size_t s = 0; s < next.size(); ++s) next[s] += rx.products[s] - rx.reactants[s];
    return SysState(std::move(next));
}

inline bool isTerminal(const Crn& crn, const SysState& x) {
    for (std::size_t r = 0; r < crn.numReactions(); ++r) {
        if (enabled(crn, r, x)) return false;
    }
    return true;
}

/// Image of x under the nondeterministic single-firing relation, deduplicated
/// and sorted.
inline std::vector<SysState> successors(const Crn& crn, const SysState& x) {
    std::set<SysState> out;
    for (std::size_t r = 0; r < crn.numReactions(); ++r) {
        if (enabled(crn, r, x)) out.insert(fire(crn, r, x));
    }
    return {out.begin(), out.end()};
}

struct StutterMove {
    SysState state;
    std::optional<std::size_t> reaction; ///< empty for the terminal self-loop
    Count multiplicity = 0;

    friend bool operator==(const StutterMove&, const StutterMove&) = default;
};

/// How many times one stutter step may fire a reaction.
///
/// Exact: each of the n firings must be enabled in turn, i.e.
///   x_s >= r_s  and  x_s + (n-1)·(p_s - r_s) >= r_s  for every species.
/// Literal: only the first firing must be enabled and no count may go
/// negative, i.e. x_s >= r_s and x_s >= n·(r_s - p_s). This admits one extra
/// firing of reactions such as 2X -> X + B that leaves a state the CRN cannot
/// actually reach.
enum class StutterBound { Exact, Literal };

/// Whether `x` admits n consecutive firings of reaction r under `bound`.
inline bool stutterAdmissible(const Reaction& rx, const SysState& x, Count n, StutterBound bound) {
    for (std::size_t s = 0; s < x.size(); ++s) {
        const Count delta = rx.products[s] - rx.reactants[s];
        if (x[s] < rx.reactants[s]) return false;
        if (bound == StutterBound::Exact) {
            if (x[s] + (n - 1) * delta < rx.reactants[s]) return false;
        } else if (x[s] < -n * delta) {
            return false;
        }
    }
    return true;
}

/// Moves of the stutter relation: an enabled reaction applied n >= 1 times in
/// one step, plus the self-loop at terminal states. Every bimolecular reaction
/// strictly consumes some species, so n never exceeds the total molecule
/// count of x.
inline std::vector<StutterMove> stutterSuccessors(const Crn& crn, const SysState& x,
                                                  StutterBound bound = StutterBound::Exact) {
    detail::checkDims(crn, x);
    std::vector<StutterMove> moves;
    if (isTerminal(crn, x)) {
        moves.push_back({x, std::nullopt, 0});
        return moves;
    }
    const Count limit = x.total();
    for (std::size_t r = 0; r < crn.numReactions(); ++r) {
        const Reaction& rx = crn.reaction(r);
        for (Count n = 1; n <= limit; ++n) {
            if (!stutterAdmissible(rx, x, n, bound)) break; // admissibility is monotone in n
            std::vector<Count> next(x.counts());
            for (std::size_t s = 0; s < next.size(); ++s) next[s] += n * (rx.products[s] - rx.reactants[s]);
            moves.push_back({SysState(std::move(next)), r, n});
        }
    }
    return moves;
}

/// All states over `numSpecies` species whose total is exactly `total`, in
/// lexicographic order.
inline std::vector<SysState> statesWithTotal(std::size_t numSpecies, Count total) {
    std::vector<SysState> out;
    if (numSpecies == 0) return out;
    std::vector<Count> cur(numSpecies, 0);
    std::function<void(std::size_t, Count)> rec = [&](std::size_t s, Count left) {
        if (s + 1 == numSpecies) {
            cur[s] = left;
            out.emplace_back(cur);
            return;
        }
        for (Count c = 0; c <= left; ++c) {
            cur[s] = c;
            rec(s + 1, left - c);
        }
    };
    rec(0, total);
    return out;
}

} // namespace crnsynth

#endif
