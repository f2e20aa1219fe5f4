#ifndef CRNSYNTH_CTMC_HITTING_TIME_HPP
#define CRNSYNTH_CTMC_HITTING_TIME_HPP

// Expected time to absorption: W tau = 1 on the non-terminal states, where
// W = -Q restricted to them; tau = 0 on terminal states.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "crnsynth/ctmc/generator.hpp"
#include "crnsynth/ctmc/state_space.hpp"
#include "crnsynth/error.hpp"

namespace crnsynth::ctmc {

struct HittingTimes {
    std::vector<double> tau;

    double operator[](std::size_t i) const { return tau.at(i); }
};

namespace detail {

inline std::string describeState(const SysState& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
    return s + ")";
}

/// Throws if some state cannot reach a terminal state.
inline void requireAbsorbing(const Generator& g, const StateSpace& space) {
    const std::size_t n = space.size();
    std::vector<std::vector<std::size_t>> reverse(n);
    for (Eigen::Index i = 0; i < g.Q.outerSize(); ++i) {
        for (SparseRowMatrix::InnerIterator it(g.Q, i); it; ++it) {
            if (it.col() != i && it.value() > 0.0) reverse[static_cast<std::size_t>(it.col())].push_back(static_cast<std::size_t>(i));
        }
    }
    std::vector<bool> reaches(n, false);
    std::vector<std::size_t> stack;
    for (auto t : space.terminalStates) {
        reaches[t] = true;
        stack.push_back(t);
    }
    while (!stack.empty()) {
        const auto j = stack.back();
        stack.pop_back();
        for (auto i : reverse[j]) {
            if (!reaches[i]) {
                reaches[i] = true;
                stack.push_back(i);
            }
        }
    }
    std::vector<std::size_t> trapped;
    for (std::size_t i = 0; i < n; ++i) {
        if (!reaches[i]) trapped.push_back(i);
    }
    if (trapped.empty()) return;
    std::string list;
    for (std::size_t k = 0; k < trapped.size() && k < 8; ++k) list += (k ? " " : "") + describeState(space.states[trapped[k]]);
    if (trapped.size() > 8) list += " ...";
    throw StructuralError("chain is not absorbing: " + std::to_string(trapped.size()) +
                          " states never reach a terminal state, e.g. " + list);
}

} // namespace detail

/// Expected hitting times of the terminal set. With `scaleByTotal` each
/// entry is multiplied by its state's (conserved) total molecule count, the
/// time rescaling for volume equal to that count.
inline HittingTimes expectedHittingTime(const Generator& g, const StateSpace& space, bool scaleByTotal = false) {
    if (g.size() != space.size()) throw PreconditionError("generator and state space differ in size");
    detail::requireAbsorbing(g, space);
    const std::size_t n = space.size();
    std::vector<Eigen::Index> local(n, -1);
    std::vector<std::size_t> transient;
    for (std::size_t i = 0; i < n; ++i) {
        if (!space.terminal[i]) {
            local[i] = static_cast<Eigen::Index>(transient.size());
            transient.push_back(i);
        }
    }
    HittingTimes out;
    out.tau.assign(n, 0.0);
    if (!transient.empty()) {
        const auto m = static_cast<Eigen::Index>(transient.size());
        std::vector<Eigen::Triplet<double>> entries;
        for (std::size_t i : transient) {
            for (SparseRowMatrix::InnerIterator it(g.Q, static_cast<Eigen::Index>(i)); it; ++it) {
                const Eigen::Index lj = local[static_cast<std::size_t>(it.col())];
                if (lj >= 0) entries.emplace_back(local[i], lj, -it.value());
            }
        }
        Eigen::SparseMatrix<double> W(m, m);
        W.setFromTriplets(entries.begin(), entries.end());
        W.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(W);
        if (lu.info() != Eigen::Success) throw NumericalError("hitting-time system is singular");
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
        Eigen::VectorXd tau = lu.solve(ones);
        // iterative refinement
        for (int iter = 0; iter < 5; ++iter) {
            const Eigen::VectorXd residual = ones - W * tau;
            if (residual.lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, tau.lpNorm<Eigen::Infinity>())) break;
            tau += lu.solve(residual);
        }
        if (!tau.allFinite()) throw NumericalError("hitting-time solution is not finite");
        for (std::size_t k = 0; k < transient.size(); ++k) out.tau[transient[k]] = tau[static_cast<Eigen::Index>(k)];
    }
    if (scaleByTotal) {
        for (std::size_t i = 0; i < n; ++i) out.tau[i] *= static_cast<double>(space.states[i].total());
    }
    return out;
}

} // namespace crnsynth::ctmc

#endif
