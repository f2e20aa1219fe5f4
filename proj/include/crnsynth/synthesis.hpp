#ifndef CRNSYNTH_SYNTHESIS_HPP
#define CRNSYNTH_SYNTHESIS_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crnsynth/backend.hpp"
#include "crnsynth/crn.hpp"
#include "crnsynth/crn_json.hpp"
#include "crnsynth/encoding.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/problem.hpp"

namespace crnsynth {

enum class SynthesisStatus { Exhausted, SolutionLimitReached, Timeout };

inline const char* toString(SynthesisStatus s) {
    switch (s) {
    case SynthesisStatus::Exhausted: return "exhausted";
    case SynthesisStatus::SolutionLimitReached: return "solution-limit-reached";
    case SynthesisStatus::Timeout: return "timeout";
    }
    return "?";
}

struct SynthesisOutcome {
    SynthesisProblem problem;
    std::string backend;
    std::vector<Crn> solutions;
    SynthesisStatus status = SynthesisStatus::Exhausted;
    std::vector<double> solveSeconds; ///< time to find each solution
    std::size_t excluded = 0;          ///< uniqueness constraints asserted
    double wallSeconds = 0.0;
};

using SolutionCallback = std::function<void(const Crn&, std::size_t index, double seconds)>;

/// Solve, extract, exclude, repeat. Stops when the constraints become
/// unsatisfiable, `maxSolutions` are found, or the backend deadline passes.
inline SynthesisOutcome enumerate(const SynthesisProblem& problem, const SolverBackend& backend,
                                  std::size_t maxSolutions = std::numeric_limits<std::size_t>::max(),
                                  const SolutionCallback& onSolution = {}) {
    if (maxSolutions < 1) throw PreconditionError("maxSolutions must be at least 1");
    if (backend.timeoutSeconds <= 0) throw PreconditionError("timeout must be positive");
    const auto start = Clock::now();
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(backend.timeoutSeconds));
    SymbolicEncoding enc = encode(problem);
    SynthesisOutcome out;
    out.problem = problem;
    out.backend = backend.name();

    auto dump = [&](std::size_t iteration) {
        if (!backend.dumpDir) return;
        std::filesystem::create_directories(*backend.dumpDir);
        char file[32];
        std::snprintf(file, sizeof file, "iter_%04zu.smt2", iteration);
        std::ofstream os(std::filesystem::path(*backend.dumpDir) / file);
        os << emitSmtLib(enc);
        if (!os) throw Error("cannot write SMT dump to " + *backend.dumpDir);
    };

    auto session = openSession(enc, backend);
    auto last = start;
    try {
        for (std::size_t iteration = 0;; ++iteration) {
            dump(iteration);
            if (session->check(deadline) == CheckResult::Unsat) {
                out.status = SynthesisStatus::Exhausted;
                break;
            }
            Crn crn = crnFromStoichiometry(problem, session->stoichiometry(deadline));
            for (const auto& prev : out.solutions) {
                if (prev.sameReactionSet(crn)) {
                    throw BackendError("solver repeated an excluded CRN", session->transcript());
                }
            }
            const auto now = Clock::now();
            out.solveSeconds.push_back(std::chrono::duration<double>(now - last).count());
            last = now;
            out.solutions.push_back(crn);
            if (onSolution) onSolution(crn, out.solutions.size() - 1, out.solveSeconds.back());
            if (out.solutions.size() >= maxSolutions) {
                out.status = SynthesisStatus::SolutionLimitReached;
                break;
            }
            auto fresh = encodeUniqueness(problem, {crn}, out.solutions.size() - 1);
            enc.uniqueness.insert(enc.uniqueness.end(), fresh.begin(), fresh.end());
            session->assertConstraints(fresh);
            ++out.excluded;
        }
    } catch (const TimeoutError&) {
        out.status = SynthesisStatus::Timeout;
    }
    out.wallSeconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

/// Runs `enumerate` for K = problem.maxSteps .. maxK.
inline std::vector<SynthesisOutcome> incrementK(const SynthesisProblem& problem, const SolverBackend& backend,
                                                std::size_t maxK,
                                                std::size_t maxSolutions = std::numeric_limits<std::size_t>::max()) {
    if (maxK < problem.maxSteps) throw PreconditionError("maxK must be at least the problem's K");
    std::vector<SynthesisOutcome> outcomes;
    for (std::size_t k = problem.maxSteps; k <= maxK; ++k) {
        SynthesisProblem p = problem;
        p.maxSteps = k;
        outcomes.push_back(enumerate(p, backend, maxSolutions));
    }
    return outcomes;
}

/// Without timings the document is a deterministic function of the run.
inline json outcomeToJson(const SynthesisOutcome& o, bool includeTimings = true) {
    json sols = json::array();
    for (std::size_t i = 0; i < o.solutions.size(); ++i) {
        json c = crnToJson(o.solutions[i]);
        c["index"] = i;
        if (includeTimings) c["solve_seconds"] = o.solveSeconds.at(i);
        sols.push_back(std::move(c));
    }
    json j{{"N", o.problem.numSpecies},
           {"M", o.problem.numReactions},
           {"K", o.problem.maxSteps},
           {"stutter", o.problem.stutter},
           {"stutter_bound", o.problem.stutterBound == StutterBound::Exact ? "exact" : "literal"},
           {"backend", o.backend},
           {"status", toString(o.status)},
           {"excluded", o.excluded},
           {"solutions", std::move(sols)}};
    if (includeTimings) j["wall_seconds"] = o.wallSeconds;
    return j;
}

} // namespace crnsynth

#endif
