#ifndef CRNSYNTH_CTMC_PROBABILITY_HPP
#define CRNSYNTH_CTMC_PROBABILITY_HPP

// P_Phi: mass on phi_F states at time t, starting uniformly over the phi_0
// states. Finals need not be terminal unless `terminalOnly` is set.

#include <map>
#include <vector>

#include "crnsynth/ctmc/generator.hpp"
#include "crnsynth/ctmc/state_space.hpp"
#include "crnsynth/ctmc/transient.hpp"
#include "crnsynth/parallel.hpp"
#include "crnsynth/predicate.hpp"

namespace crnsynth::ctmc {

struct ScoreOptions {
    double tFinal = 100.0;
    double tol = kDefaultTolerance;
    bool terminalOnly = false;
    double volume = 1.0;
    CmeMethod method = CmeMethod::Auto;
    std::size_t jobs = 1;
    std::size_t stateCap = kDefaultStateCap;
};

/// Precomputed state spaces for scoring one CRN on many predicates under
/// many rate vectors. Predicates whose initial states share the same totals
/// share one state space and, when dense, one transition matrix.
class ScoringContext {
public:
    ScoringContext(const Crn& crn, std::vector<PathPredicate> predicates, ScoreOptions options = {})
        : crn_(crn), predicates_(std::move(predicates)), options_(options) {
        if (predicates_.empty()) throw PreconditionError("at least one predicate is required");
        const auto names = crn_.speciesNames();
        std::map<std::vector<Count>, std::size_t> byTotals;
        std::vector<std::vector<SysState>> initial(predicates_.size());
        for (std::size_t i = 0; i < predicates_.size(); ++i) {
            auto bound = totalCountBound(predicates_[i].initial, names);
            if (!bound) {
                throw SpecificationError("initial predicate '" + toString(predicates_[i].initial) +
                                         "' does not bound the total molecule count");
            }
            initial[i] = satisfyingStates(predicates_[i].initial, names, *bound);
            if (initial[i].empty()) {
                throw SpecificationError("no state satisfies '" + toString(predicates_[i].initial) + "'");
            }
            std::vector<Count> totals;
            for (const auto& x : initial[i]) totals.push_back(x.total());
            std::sort(totals.begin(), totals.end());
            totals.erase(std::unique(totals.begin(), totals.end()), totals.end());
            auto [it, fresh] = byTotals.emplace(totals, groups_.size());
            if (fresh) groups_.emplace_back();
            groups_[it->second].members.push_back(i);
        }
        for (auto& g : groups_) {
            std::vector<SysState> seeds;
            for (auto i : g.members) seeds.insert(seeds.end(), initial[i].begin(), initial[i].end());
            g.space = buildStateSpace(crn_, seeds, options_.stateCap);
            for (auto i : g.members) {
                std::vector<std::size_t> start;
                for (const auto& x : initial[i]) start.push_back(*g.space.find(x));
                std::sort(start.begin(), start.end());
                start.erase(std::unique(start.begin(), start.end()), start.end());
                g.initial.push_back(std::move(start));
                BoundPredicate fin(predicates_[i].final, names);
                std::vector<std::size_t> accept;
                for (std::size_t s = 0; s < g.space.size(); ++s) {
                    if ((!options_.terminalOnly || g.space.terminal[s]) && fin(g.space.states[s])) accept.push_back(s);
                }
                g.accepting.push_back(std::move(accept));
            }
        }
    }

    std::size_t numPredicates() const noexcept { return predicates_.size(); }
    std::size_t numGroups() const noexcept { return groups_.size(); }
    std::size_t totalStates() const {
        std::size_t n = 0;
        for (const auto& g : groups_) n += g.space.size();
        return n;
    }
    const Crn& crn() const noexcept { return crn_; }
    const std::vector<PathPredicate>& predicates() const noexcept { return predicates_; }
    const ScoreOptions& options() const noexcept { return options_; }

    /// P_Phi for every predicate, in predicate order.
    std::vector<double> probabilities(const std::vector<double>& rates) const {
        if (rates.size() != crn_.numReactions()) throw PreconditionError("expected one rate per reaction");
        std::vector<double> out(predicates_.size(), 0.0);
        parallelFor(groups_.size(), options_.jobs, [&](std::size_t gi) {
            const Group& g = groups_[gi];
            const Generator gen = buildGenerator(g.space, rates, options_.volume);
            const double lambdaT = gen.maxExitRate() * options_.tFinal;
            const bool dense =
                lambdaT > 0.0 && detail::choose(gen, lambdaT, g.members.size(), options_.method) == CmeMethod::DenseSquaring;
            Eigen::MatrixXd E;
            if (dense) E = transitionMatrix(gen, options_.tFinal);
            for (std::size_t k = 0; k < g.members.size(); ++k) {
                const Distribution pi0 = uniformOver(g.space.size(), g.initial[k]);
                Distribution pit;
                if (dense) {
                    pit.p = (pi0.p.transpose() * E).transpose();
                    detail::finalize(pit.p, "dense CME solution");
                } else {
                    const CmeMethod m = options_.method == CmeMethod::Auto ? CmeMethod::Uniformization : options_.method;
                    pit = integrateCme(gen, pi0, options_.tFinal, options_.tol, m);
                }
                double mass = 0.0;
                for (auto s : g.accepting[k]) mass += pit[s];
                out[g.members[k]] = std::min(1.0, std::max(0.0, mass));
            }
        });
        return out;
    }

    /// Mean of `probabilities`, summed in predicate order.
    double average(const std::vector<double>& rates) const {
        const auto ps = probabilities(rates);
        double sum = 0.0;
        for (double p : ps) sum += p;
        return sum / static_cast<double>(ps.size());
    }

private:
    struct Group {
        StateSpace space;
        std::vector<std::size_t> members;
        std::vector<std::vector<std::size_t>> initial;   ///< per member, ordinals of X_0
        std::vector<std::vector<std::size_t>> accepting; ///< per member, ordinals of X_F
    };

    Crn crn_;
    std::vector<PathPredicate> predicates_;
    ScoreOptions options_;
    std::vector<Group> groups_;
};

/// P_Phi(t) with X_0 = {x : phi_0(x), total(x) <= totalBound}.
inline double probabilityOf(const Crn& crn, const std::vector<double>& rates, const PathPredicate& phi, double t,
                            Count totalBound, double tol = kDefaultTolerance, bool terminalOnly = false) {
    const auto names = crn.speciesNames();
    auto start = satisfyingStates(phi.initial, names, totalBound);
    StateSpace space = buildStateSpace(crn, start);
    const Generator gen = buildGenerator(crn, space, rates);
    const Distribution pit = integrateCme(gen, uniformOver(space.size(), space.initialStates), t, tol);
    BoundPredicate fin(phi.final, names);
    double mass = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s) {
        if ((!terminalOnly || space.terminal[s]) && fin(space.states[s])) mass += pit[s];
    }
    return std::min(1.0, std::max(0.0, mass));
}

inline double averageProbability(const Crn& crn, const std::vector<double>& rates,
                                 const std::vector<PathPredicate>& predicates, const ScoreOptions& options = {}) {
    return ScoringContext(crn, predicates, options).average(rates);
}

} // namespace crnsynth::ctmc

#endif
