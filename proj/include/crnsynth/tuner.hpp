#ifndef CRNSYNTH_TUNER_HPP
#define CRNSYNTH_TUNER_HPP

// Metropolis-Hastings search over reaction rates maximizing the average
// P_Phi across predicates. Likelihood L = exp(beta * objective), so the
// acceptance ratio is exp(beta * delta). Proposals are Gaussian in log-rate
// space, alternating one random coordinate with all coordinates, and are
// reflected into the log-bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crnsynth/crn.hpp"
#include "crnsynth/ctmc/probability.hpp"
#include "crnsynth/error.hpp"

namespace crnsynth::tuner {

using nlohmann::json;

struct ParameterSpace {
    std::vector<double> lo, hi;

    ParameterSpace() = default;
    ParameterSpace(std::size_t dimension, double lower = 0.01, double upper = 100.0)
        : lo(dimension, lower), hi(dimension, upper) {
        validate();
    }

    std::size_t dimension() const noexcept { return lo.size(); }

    void validate() const {
        if (lo.size() != hi.size()) throw PreconditionError("bounds differ in dimension");
        for (std::size_t d = 0; d < lo.size(); ++d) {
            if (!(lo[d] > 0.0 && lo[d] < hi[d]) || !std::isfinite(hi[d])) {
                throw PreconditionError("rate bounds must satisfy 0 < lo < hi");
            }
        }
    }

    bool contains(const std::vector<double>& rates) const {
        if (rates.size() != lo.size()) return false;
        for (std::size_t d = 0; d < lo.size(); ++d) {
            if (!(rates[d] >= lo[d] && rates[d] <= hi[d])) return false;
        }
        return true;
    }
};

struct TuneConfig {
    std::size_t burnIn = 20;
    std::size_t samples = 20;
    double proposalStdDev = 0.5;
    std::uint64_t rngSeed = 1;
    double tFinal = 100.0;
    double tolerance = ctmc::kDefaultTolerance;
    double beta = 50.0;
    std::optional<ParameterSpace> bounds; ///< default [0.01, 100] per reaction
    bool terminalOnly = false;
    std::size_t jobs = 1;

    void validate() const {
        if (!(proposalStdDev > 0.0)) throw PreconditionError("proposal standard deviation must be positive");
        if (!(tFinal >= 0.0)) throw PreconditionError("final time must be nonnegative");
        if (!(tolerance > 0.0)) throw PreconditionError("tolerance must be positive");
        if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
        if (bounds) bounds->validate();
    }

    ctmc::ScoreOptions scoreOptions() const {
        ctmc::ScoreOptions o;
        o.tFinal = tFinal;
        o.tol = tolerance;
        o.terminalOnly = terminalOnly;
        o.jobs = jobs;
        return o;
    }
};

struct TraceEntry {
    std::size_t iteration = 0;
    std::vector<double> rates;
    double objective = 0.0;
    bool accepted = false;
    double bestSoFar = 0.0;
};

struct TuneResult {
    std::vector<double> initialRates;
    double initialObjective = 0.0;
    std::vector<double> bestRates;
    double bestObjective = 0.0;
    std::vector<TraceEntry> trace; ///< entry 0 is the initial point
    double acceptanceRate = 0.0;
};

/// Objective of a rate vector on a prepared scoring context.
inline double objective(const ctmc::ScoringContext& ctx, const std::vector<double>& rates) {
    return ctx.average(rates);
}

inline double objective(const Crn& crn, const std::vector<double>& rates, const std::vector<PathPredicate>& predicates,
                        double tFinal = 100.0) {
    ctmc::ScoreOptions o;
    o.tFinal = tFinal;
    return ctmc::ScoringContext(crn, predicates, o).average(rates);
}

/// Chain state: current point and its objective.
struct ChainState {
    std::vector<double> rates;
    double objective = 0.0;
};

/// Reflects v into [a, b] (log space).
inline double reflect(double v, double a, double b) {
    const double w = b - a;
    double u = std::fmod(v - a, 2.0 * w);
    if (u < 0) u += 2.0 * w;
    return u <= w ? a + u : b - (u - w);
}

/// Proposal for iteration `iteration`: even iterations move one coordinate,
/// odd iterations move all of them.
inline std::vector<double> propose(const std::vector<double>& rates, const ParameterSpace& space, double sd,
                                   std::size_t iteration, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sd);
    std::vector<double> next = rates;
    auto move = [&](std::size_t d) {
        const double logged = std::log(rates[d]) + noise(rng);
        next[d] = std::clamp(std::exp(reflect(logged, std::log(space.lo[d]), std::log(space.hi[d]))), space.lo[d],
                             space.hi[d]);
    };
    if (iteration % 2 == 0) {
        std::uniform_int_distribution<std::size_t> pick(0, rates.size() - 1);
        move(pick(rng));
    } else {
        for (std::size_t d = 0; d < rates.size(); ++d) move(d);
    }
    return next;
}

/// Metropolis acceptance: always when the objective does not drop,
/// otherwise with probability exp(beta * delta).
inline bool accept(double current, double proposed, double beta, std::mt19937_64& rng) {
    if (proposed >= current) return true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < std::exp(beta * (proposed - current));
}

/// One MH step. Returns the next chain state and whether the proposal was accepted.
inline std::pair<ChainState, bool> mhStep(const ChainState& current, const ctmc::ScoringContext& ctx,
                                          const ParameterSpace& space, const TuneConfig& config, std::size_t iteration,
                                          std::mt19937_64& rng, double* proposedObjective = nullptr,
                                          std::vector<double>* proposedRates = nullptr) {
    ChainState proposal{propose(current.rates, space, config.proposalStdDev, iteration, rng), 0.0};
    proposal.objective = objective(ctx, proposal.rates);
    if (proposedObjective) *proposedObjective = proposal.objective;
    if (proposedRates) *proposedRates = proposal.rates;
    if (accept(current.objective, proposal.objective, config.beta, rng)) return {std::move(proposal), true};
    return {current, false};
}

/// burnIn + samples MH steps from `start`, tracking the best point seen.
inline TuneResult runFrom(const ctmc::ScoringContext& ctx, const TuneConfig& config, const std::vector<double>& start) {
    config.validate();
    const std::size_t M = ctx.crn().numReactions();
    const ParameterSpace space = config.bounds ? *config.bounds : ParameterSpace(M);
    if (!space.contains(start)) throw PreconditionError("starting rates lie outside the bounds");
    std::mt19937_64 rng(config.rngSeed);
    ChainState cur{start, objective(ctx, start)};
    TuneResult res;
    res.initialRates = start;
    res.initialObjective = cur.objective;
    res.bestRates = start;
    res.bestObjective = cur.objective;
    res.trace.push_back({0, start, cur.objective, true, cur.objective});
    std::size_t accepted = 0;
    const std::size_t total = config.burnIn + config.samples;
    for (std::size_t it = 1; it <= total; ++it) {
        double po = 0.0;
        std::vector<double> pr;
        auto [next, ok] = mhStep(cur, ctx, space, config, it - 1, rng, &po, &pr);
        if (ok) ++accepted;
        cur = std::move(next);
        if (po > res.bestObjective) {
            res.bestObjective = po;
            res.bestRates = pr;
        }
        res.trace.push_back({it, pr, po, ok, res.bestObjective});
    }
    res.acceptanceRate = total ? static_cast<double>(accepted) / static_cast<double>(total) : 0.0;
    return res;
}

/// The chain from all-1.0 rates (clamped into the bounds).
inline TuneResult run(const ctmc::ScoringContext& ctx, const TuneConfig& config) {
    config.validate();
    const std::size_t M = ctx.crn().numReactions();
    const ParameterSpace space = config.bounds ? *config.bounds : ParameterSpace(M);
    if (space.dimension() != M) throw PreconditionError("rate bounds do not match the number of reactions");
    std::vector<double> start(M, 1.0);
    for (std::size_t d = 0; d < M; ++d) start[d] = std::clamp(start[d], space.lo[d], space.hi[d]);
    return runFrom(ctx, config, start);
}

inline TuneResult run(const Crn& crn, const std::vector<PathPredicate>& predicates, const TuneConfig& config) {
    config.validate();
    return run(ctmc::ScoringContext(crn, predicates, config.scoreOptions()), config);
}

// ---------------------------------------------------------------------------
// Ranking

struct RankRow {
    std::size_t crnId = 0;
    double preOptObjective = 0.0;
    double shortObjective = 0.0;
    std::optional<double> longObjective;
    std::vector<double> bestRates;
    TuneResult shortResult;
    std::optional<TuneResult> longResult;

    double finalObjective() const { return longObjective ? *longObjective : shortObjective; }
};

struct RankConfig {
    TuneConfig shortRun;
    std::optional<TuneConfig> longRun; ///< continued from the short run's best rates
    std::size_t topCount = 0;          ///< how many candidates get the long run
    double gate = 0.5;                 ///< long run only above this short objective
};

/// Short optimisation of every candidate, then a long one for the best
/// `topCount` whose short objective exceeds the gate. Sorted by the final
/// objective, descending, ties by crnId.
inline std::vector<RankRow> rankCandidates(const std::vector<Crn>& crns, const std::vector<PathPredicate>& predicates,
                                           const RankConfig& config) {
    if (crns.empty()) throw PreconditionError("at least one candidate is required");
    std::vector<RankRow> rows;
    std::vector<std::unique_ptr<ctmc::ScoringContext>> contexts;
    for (std::size_t id = 0; id < crns.size(); ++id) {
        contexts.push_back(std::make_unique<ctmc::ScoringContext>(crns[id], predicates, config.shortRun.scoreOptions()));
        const TuneResult r = run(*contexts.back(), config.shortRun);
        rows.push_back({id, r.initialObjective, r.bestObjective, std::nullopt, r.bestRates, r, std::nullopt});
    }
    auto byFinal = [](const RankRow& a, const RankRow& b) {
        if (a.finalObjective() != b.finalObjective()) return a.finalObjective() > b.finalObjective();
        return a.crnId < b.crnId;
    };
    std::sort(rows.begin(), rows.end(), byFinal);
    if (config.longRun) {
        for (std::size_t k = 0; k < rows.size() && k < config.topCount; ++k) {
            if (!(rows[k].shortObjective > config.gate)) continue;
            const TuneResult r = runFrom(*contexts[rows[k].crnId], *config.longRun, rows[k].bestRates);
            rows[k].longObjective = r.bestObjective;
            rows[k].bestRates = r.bestRates;
            rows[k].longResult = r;
        }
        std::sort(rows.begin(), rows.end(), byFinal);
    }
    return rows;
}

inline json resultToJson(const TuneResult& r) {
    return json{{"initial_rates", r.initialRates},   {"initial_objective", r.initialObjective},
                {"best_rates", r.bestRates},         {"best_objective", r.bestObjective},
                {"acceptance_rate", r.acceptanceRate}, {"iterations", r.trace.size() - 1}};
}

} // namespace crnsynth::tuner

#endif
