#ifndef CRNSYNTH_BACKEND_HPP
#define CRNSYNTH_BACKEND_HPP

// Solver backends for the synthesis encoding.
//
// External: an SMT-LIB 2 solver process (z3 by default), kept alive across
// iterations so uniqueness constraints are asserted incrementally.
//
// Builtin: explicit-state search that needs no solver. It walks canonical
// reaction tuples, evaluates the structural and uniqueness constraints on
// each, searches witness paths with the step constraints as the transition
// test, and re-checks the assembled model against every assertion before
// answering sat.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crnsynth/constraint.hpp"
#include "crnsynth/crn.hpp"
#include "crnsynth/encoding.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/smt_process.hpp"

namespace crnsynth {

using smt::Clock;

struct SolverBackend {
    enum class Kind { External, Builtin };

    Kind kind = Kind::External;
    std::string executable = "z3";
    std::vector<std::string> arguments = {"-in", "-smt2"};
    double timeoutSeconds = 7200.0;
    std::optional<std::string> dumpDir; ///< one .smt2 script per iteration when set
    /// Sent for every satisfiability query. Solver-specific forms such as
    /// kZ3PreprocessCheck are allowed as long as the answer is sat/unsat.
    std::string checkCommand = "(check-sat)";

    static SolverBackend external(std::string executable = "z3") {
        SolverBackend b;
        b.executable = std::move(executable);
        return b;
    }
    static SolverBackend builtin() {
        SolverBackend b;
        b.kind = Kind::Builtin;
        return b;
    }
    std::string name() const { return kind == Kind::Builtin ? "builtin" : executable; }
};

/// z3 only: eliminating the multiplicity ite chains before search cuts
/// solve times several-fold on these encodings.
inline constexpr const char* kZ3PreprocessCheck =
    "(check-sat-using (then simplify propagate-values ctx-simplify solve-eqs elim-term-ite smt))";

enum class CheckResult { Sat, Unsat };

class SolverSession {
public:
    virtual ~SolverSession() = default;
    /// Throws TimeoutError once `deadline` passes.
    virtual CheckResult check(Clock::time_point deadline) = 0;
    /// Stoichiometry values of the last sat model, indexed like the layout.
    virtual std::vector<std::int64_t> stoichiometry(Clock::time_point deadline) = 0;
    virtual void assertConstraints(const std::vector<smt::Constraint>& cs) = 0;
    virtual std::string transcript() const { return {}; }
};

// ---------------------------------------------------------------------------

class ExternalSession : public SolverSession {
public:
    ExternalSession(const SymbolicEncoding& enc, const SolverBackend& cfg)
        : names_(enc.varNames), numStoich_(enc.layout.numStoichiometryVars()), getValue_(getValueCommand(enc)),
          checkCommand_(cfg.checkCommand + "\n"), process_(cfg.executable, cfg.arguments) {
        process_.send(emitPrelude(enc));
    }

    CheckResult check(Clock::time_point deadline) override {
        process_.send(checkCommand_);
        const std::string answer = process_.readResponse(deadline);
        if (answer == "sat") return CheckResult::Sat;
        if (answer == "unsat") return CheckResult::Unsat;
        if (answer == "unknown") throw BackendError("solver answered unknown", process_.transcript());
        throw BackendError("unexpected solver response: " + answer, process_.transcript());
    }

    std::vector<std::int64_t> stoichiometry(Clock::time_point deadline) override {
        process_.send(getValue_);
        const auto model = smt::parseModel(process_.readResponse(deadline));
        std::vector<std::int64_t> values;
        for (std::size_t v = 0; v < numStoich_; ++v) {
            auto it = model.find(names_[v]);
            if (it == model.end()) throw BackendError("model lacks " + names_[v], process_.transcript());
            values.push_back(it->second);
        }
        return values;
    }

    void assertConstraints(const std::vector<smt::Constraint>& cs) override {
        std::string text;
        for (const auto& c : cs) text += smtAssert(c, names_);
        process_.send(text);
    }

    std::string transcript() const override { return process_.transcript(); }

private:
    std::vector<std::string> names_;
    std::size_t numStoich_;
    std::string getValue_;
    std::string checkCommand_;
    smt::SmtProcess process_;
};

// ---------------------------------------------------------------------------

namespace builtin {

inline constexpr std::size_t kMaxSpecies = 3;
inline constexpr std::size_t kMaxReactions = 3;
inline constexpr std::size_t kMaxSteps = 20;
inline constexpr Count kMaxTotal = 24;

} // namespace builtin

class BuiltinSession : public SolverSession {
public:
    explicit BuiltinSession(const SymbolicEncoding& enc) : enc_(enc), L_(enc.layout) {
        if (L_.numSpecies > builtin::kMaxSpecies || L_.numReactions > builtin::kMaxReactions ||
            L_.maxSteps > builtin::kMaxSteps) {
            throw CapacityError("builtin backend supports N <= 3, M <= 3, K <= 20");
        }
        for (Count t : enc_.totals) {
            if (t > builtin::kMaxTotal) throw CapacityError("builtin backend supports initial totals <= 24");
        }
        const std::size_t N = L_.numSpecies;
        std::vector<Stoichiometry> sides;
        for (std::size_t a = 0; a < N; ++a) {
            for (std::size_t b = a; b < N; ++b) {
                Stoichiometry v(N, 0);
                ++v[a];
                ++v[b];
                sides.push_back(std::move(v));
            }
        }
        std::sort(sides.begin(), sides.end());
        for (const auto& r : sides) {
            for (const auto& p : sides) rows_.push_back({r, p});
        }
        values_.assign(L_.numVars(), 0);
        for (std::size_t i = 0; i < enc_.trajectories.size(); ++i) {
            order_.push_back(i);
            initial_.push_back(initialStates(i));
        }
    }

    CheckResult check(Clock::time_point deadline) override {
        while (advance()) {
            if (Clock::now() >= deadline) throw TimeoutError("builtin search did not finish before the deadline");
            if (candidateMatches()) return CheckResult::Sat;
        }
        return CheckResult::Unsat;
    }

    std::vector<std::int64_t> stoichiometry(Clock::time_point) override {
        return {values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(L_.numStoichiometryVars())};
    }

    void assertConstraints(const std::vector<smt::Constraint>& cs) override {
        enc_.uniqueness.insert(enc_.uniqueness.end(), cs.begin(), cs.end());
    }

private:
    struct Row {
        Stoichiometry reactants, products;
    };
    struct Visit {
        SysState state;
        std::size_t parent;
        Count multiplicity;
    };

    // Trajectory block layout: domain, initial, K steps, final, terminal.
    const smt::Constraint& initialOf(std::size_t i) const { return enc_.trajectories[i][1]; }
    const smt::Constraint& stepOf(std::size_t i, std::size_t j) const { return enc_.trajectories[i][2 + j]; }
    const smt::Constraint& finalOf(std::size_t i) const { return enc_.trajectories[i][2 + L_.maxSteps]; }
    const smt::Constraint& terminalOf(std::size_t i) const { return enc_.trajectories[i][3 + L_.maxSteps]; }

    void place(std::size_t i, std::size_t j, const SysState& x) {
        for (std::size_t s = 0; s < L_.numSpecies; ++s) values_[L_.x(i, j, s)] = x[s];
    }

    std::vector<SysState> initialStates(std::size_t i) {
        std::vector<SysState> out;
        for (Count t = 0; t <= enc_.totals[i]; ++t) {
            for (auto& x : statesWithTotal(L_.numSpecies, t)) {
                place(i, 0, x);
                if (smt::evalBool(initialOf(i).formula, values_)) out.push_back(std::move(x));
            }
        }
        return out;
    }

    /// Next strictly increasing row tuple; false when exhausted.
    bool advance() {
        const std::size_t M = L_.numReactions, R = rows_.size();
        if (!started_) {
            started_ = true;
            if (M > R) return false;
            cursor_.resize(M);
            for (std::size_t m = 0; m < M; ++m) cursor_[m] = m;
        } else {
            std::size_t m = M;
            while (m > 0 && cursor_[m - 1] == R - M + m - 1) --m;
            if (m == 0) return false;
            ++cursor_[m - 1];
            for (std::size_t k = m; k < M; ++k) cursor_[k] = cursor_[k - 1] + 1;
        }
        for (std::size_t m = 0; m < M; ++m) {
            const Row& row = rows_[cursor_[m]];
            for (std::size_t s = 0; s < L_.numSpecies; ++s) {
                values_[L_.r(m, s)] = row.reactants[s];
                values_[L_.p(m, s)] = row.products[s];
            }
        }
        return true;
    }

    bool holds(const std::vector<smt::Constraint>& cs) const {
        for (const auto& c : cs) {
            if (!smt::evalBool(c.formula, values_)) return false;
        }
        return true;
    }

    bool candidateMatches() {
        if (!holds(enc_.structure) || !holds(enc_.uniqueness)) return false;
        for (std::size_t k = 0; k < order_.size(); ++k) {
            if (!findWitness(order_[k])) {
                // the predicate that failed is tried first next time
                std::rotate(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(k),
                            order_.begin() + static_cast<std::ptrdiff_t>(k) + 1);
                return false;
            }
        }
        for (const auto& c : enc_.allConstraints()) {
            if (!smt::evalBool(c.formula, values_)) {
                throw BackendError("builtin witness violates constraint: " + c.label);
            }
        }
        return true;
    }

    /// Breadth-first search for a path of predicate i; fills its x and n
    /// variables on success. A state is expanded at its first depth only:
    /// accepting states are terminal and loop, so earlier is never worse.
    bool findWitness(std::size_t i) {
        const std::size_t N = L_.numSpecies, M = L_.numReactions, K = L_.maxSteps;
        const Count nMax = L_.stutter ? std::max<Count>(enc_.totals[i], 1) : 1;
        std::vector<Stoichiometry> delta(M, Stoichiometry(N));
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t s = 0; s < N; ++s) {
                delta[m][s] = static_cast<int>(values_[L_.p(m, s)] - values_[L_.r(m, s)]);
            }
        }
        std::vector<Visit> visits;
        std::unordered_map<SysState, std::size_t, SysStateHash> seen;
        std::vector<std::size_t> frontier;
        for (const auto& x : initial_[i]) {
            seen.emplace(x, visits.size());
            frontier.push_back(visits.size());
            visits.push_back({x, visits.size(), 0});
        }
        for (std::size_t depth = 0; !frontier.empty(); ++depth) {
            for (std::size_t id : frontier) {
                place(i, K, visits[id].state);
                if (smt::evalBool(finalOf(i).formula, values_) && smt::evalBool(terminalOf(i).formula, values_)) {
                    fillPath(i, visits, id, depth);
                    return true;
                }
            }
            if (depth == K) return false;
            std::vector<std::size_t> next;
            const auto& rel = stepOf(i, depth).formula;
            for (std::size_t id : frontier) {
                const SysState x = visits[id].state;
                place(i, depth, x);
                for (std::size_t m = 0; m < M; ++m) {
                    for (Count n = 1; n <= nMax; ++n) {
                        std::vector<Count> y(x.counts());
                        bool negative = false;
                        for (std::size_t s = 0; s < N; ++s) {
                            y[s] += n * delta[m][s];
                            negative = negative || y[s] < 0;
                        }
                        if (negative) break;
                        SysState ys(std::move(y));
                        if (seen.count(ys)) continue;
                        place(i, depth + 1, ys);
                        if (L_.stutter) values_[L_.n(i, depth)] = n;
                        if (!smt::evalBool(rel, values_)) continue;
                        seen.emplace(ys, visits.size());
                        next.push_back(visits.size());
                        visits.push_back({std::move(ys), id, n});
                    }
                }
            }
            frontier = std::move(next);
        }
        return false;
    }

    void fillPath(std::size_t i, const std::vector<Visit>& visits, std::size_t id, std::size_t depth) {
        std::vector<std::size_t> chain;
        for (std::size_t cur = id;; cur = visits[cur].parent) {
            chain.push_back(cur);
            if (visits[cur].parent == cur) break;
        }
        std::reverse(chain.begin(), chain.end());
        for (std::size_t j = 0; j <= L_.maxSteps; ++j) {
            const Visit& v = visits[chain[std::min(j, depth)]];
            place(i, j, v.state);
            if (L_.stutter && j < L_.maxSteps) {
                values_[L_.n(i, j)] = j < depth ? visits[chain[j + 1]].multiplicity : 1;
            }
        }
    }

    SymbolicEncoding enc_;
    EncodingLayout L_;
    std::vector<Row> rows_;
    std::vector<std::size_t> cursor_;
    bool started_ = false;
    std::vector<std::int64_t> values_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<SysState>> initial_;
};

inline std::unique_ptr<SolverSession> openSession(const SymbolicEncoding& enc, const SolverBackend& cfg) {
    if (cfg.kind == SolverBackend::Kind::Builtin) return std::make_unique<BuiltinSession>(enc);
    return std::make_unique<ExternalSession>(enc, cfg);
}

} // namespace crnsynth

#endif
