#ifndef CRNSYNTH_CTMC_GENERATOR_HPP
#define CRNSYNTH_CTMC_GENERATOR_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "crnsynth/ctmc/state_space.hpp"
#include "crnsynth/error.hpp"

namespace crnsynth::ctmc {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Infinitesimal generator in compressed row storage. Off-diagonal entries
/// sum the propensities of every reaction between the same pair of states;
/// terminal rows are empty.
struct Generator {
    SparseRowMatrix Q;

    std::size_t size() const noexcept { return static_cast<std::size_t>(Q.rows()); }
    double exitRate(std::size_t i) const { return -Q.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)); }
    double maxExitRate() const {
        double m = 0.0;
        for (Eigen::Index i = 0; i < Q.rows(); ++i) m = std::max(m, -Q.coeff(i, i));
        return m;
    }
};

/// Generator of `space` under per-reaction `rates`, with every propensity
/// divided by `volume`.
inline Generator buildGenerator(const StateSpace& space, const std::vector<double>& rates, double volume = 1.0) {
    if (!(volume > 0.0) || !std::isfinite(volume)) throw PreconditionError("volume must be positive");
    for (double k : rates) {
        if (!(k > 0.0) || !std::isfinite(k)) throw PreconditionError("rates must be positive and finite");
    }
    const auto n = static_cast<Eigen::Index>(space.size());
    Generator g;
    g.Q.resize(n, n);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(space.transitions.size() + space.size());
    std::map<std::size_t, double> row;
    for (std::size_t i = 0; i < space.size(); ++i) {
        row.clear();
        double exit = 0.0;
        for (std::size_t e = space.offsets[i]; e < space.offsets[i + 1]; ++e) {
            const Transition& t = space.transitions[e];
            if (t.reaction >= rates.size()) throw PreconditionError("rate vector shorter than the reaction list");
            const double q = rates[t.reaction] * t.factor / volume;
            if (q == 0.0) continue;
            row[t.target] += q;
            exit += q;
        }
        for (const auto& [j, q] : row) {
            if (j != i) entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), q);
        }
        // a self-transition leaves the state unchanged: it is not an exit
        const double self = row.count(i) ? row[i] : 0.0;
        if (exit - self != 0.0) {
            entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), -(exit - self));
        }
    }
    g.Q.setFromTriplets(entries.begin(), entries.end());
    g.Q.makeCompressed();
    return g;
}

inline Generator buildGenerator(const Crn& crn, const StateSpace& space, const std::vector<double>& rates,
                                double volume = 1.0) {
    if (rates.size() != crn.numReactions()) throw PreconditionError("expected one rate per reaction");
    return buildGenerator(space, rates, volume);
}

/// Uses the CRN's own rates.
inline Generator buildGenerator(const Crn& crn, const StateSpace& space, double volume = 1.0) {
    return buildGenerator(crn, space, crn.rates(), volume);
}

} // namespace crnsynth::ctmc

#endif
