#ifndef CRNSYNTH_ENCODING_HPP
#define CRNSYNTH_ENCODING_HPP

// Symbolic encoding of "some bimolecular CRN with N species and M reactions
// has, for every path predicate, a K-step path from phi_0 to a terminal
// phi_F state".
//
// Variables:
//   r_m_S, p_m_S  reactant / product stoichiometry of reaction m, species S
//   x_i_j_S       count of S at step j of the path for predicate i
//   n_i_j         firings in stutter step j of path i (stutter mode only)
//
// The product n·(p - r) is linearized with an ite over the five possible
// values of p - r in {-2..2}, so stoichiometry constraints stay in linear
// integer arithmetic.

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "crnsynth/constraint.hpp"
#include "crnsynth/crn.hpp"
#include "crnsynth/error.hpp"
#include "crnsynth/predicate.hpp"
#include "crnsynth/problem.hpp"

namespace crnsynth {

/// Deterministic variable numbering for one problem shape.
struct EncodingLayout {
    std::size_t numSpecies = 0, numReactions = 0, maxSteps = 0, numPredicates = 0;
    bool stutter = true;
    std::vector<std::string> species;

    explicit EncodingLayout(const SynthesisProblem& p)
        : numSpecies(p.numSpecies), numReactions(p.numReactions), maxSteps(p.maxSteps),
          numPredicates(p.predicates.size()), stutter(p.stutter), species(p.speciesNames()) {}

    std::size_t r(std::size_t m, std::size_t s) const { return m * numSpecies + s; }
    std::size_t p(std::size_t m, std::size_t s) const { return (numReactions + m) * numSpecies + s; }
    std::size_t x(std::size_t i, std::size_t j, std::size_t s) const {
        return 2 * numReactions * numSpecies + (i * (maxSteps + 1) + j) * numSpecies + s;
    }
    std::size_t n(std::size_t i, std::size_t j) const {
        if (!stutter) throw PreconditionError("no multiplicity variables without stutter");
        return 2 * numReactions * numSpecies + numPredicates * (maxSteps + 1) * numSpecies + i * maxSteps + j;
    }
    std::size_t numStoichiometryVars() const { return 2 * numReactions * numSpecies; }
    std::size_t numVars() const {
        return numStoichiometryVars() + numPredicates * (maxSteps + 1) * numSpecies +
               (stutter ? numPredicates * maxSteps : 0);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out(numVars());
        for (std::size_t m = 0; m < numReactions; ++m) {
            for (std::size_t s = 0; s < numSpecies; ++s) {
                out[r(m, s)] = "r_" + std::to_string(m) + "_" + species[s];
                out[p(m, s)] = "p_" + std::to_string(m) + "_" + species[s];
            }
        }
        for (std::size_t i = 0; i < numPredicates; ++i) {
            for (std::size_t j = 0; j <= maxSteps; ++j) {
                for (std::size_t s = 0; s < numSpecies; ++s) {
                    out[x(i, j, s)] = "x_" + std::to_string(i) + "_" + std::to_string(j) + "_" + species[s];
                }
                if (stutter && j < maxSteps) out[n(i, j)] = "n_" + std::to_string(i) + "_" + std::to_string(j);
            }
        }
        return out;
    }
};

/// The complete constraint set for one problem, plus accumulated uniqueness
/// constraints.
struct SymbolicEncoding {
    SynthesisProblem problem;
    EncodingLayout layout;
    std::vector<std::string> varNames;
    std::vector<smt::Constraint> structure;
    std::vector<std::vector<smt::Constraint>> trajectories; ///< one block per predicate
    std::vector<smt::Constraint> uniqueness;
    std::vector<Count> totals; ///< conserved total bound per predicate

    std::vector<smt::Constraint> allConstraints() const {
        std::vector<smt::Constraint> all = structure;
        for (const auto& t : trajectories) all.insert(all.end(), t.begin(), t.end());
        all.insert(all.end(), uniqueness.begin(), uniqueness.end());
        return all;
    }

    bool nonlinear() const {
        for (const auto& c : allConstraints()) {
            if (smt::isNonlinear(c.formula)) return true;
        }
        return false;
    }
};

namespace detail {

/// n·d for d in {-2..2}, as an ite chain over the symbolic difference d.
inline smt::Term timesSmallDelta(const smt::Term& n, const smt::Term& delta) {
    using namespace smt;
    return ite(eq(delta, lit(-2)), mul(lit(-2), n),
               ite(eq(delta, lit(-1)), mul(lit(-1), n),
                   ite(eq(delta, lit(0)), lit(0), ite(eq(delta, lit(1)), n, mul(lit(2), n)))));
}

/// Translates a state predicate over species names into a formula over the
/// path variables of state (i, j).
inline smt::Term translate(const detail::NodePtr& node, const EncodingLayout& L, std::size_t i, std::size_t j) {
    using namespace smt;
    auto rec = [&](const crnsynth::detail::NodePtr& n) { return translate(n, L, i, j); };
    switch (node->op) {
    case PredOp::True: return boolean(true);
    case PredOp::False: return boolean(false);
    case PredOp::Not: return lnot(rec(node->lhs));
    case PredOp::And: return land({rec(node->lhs), rec(node->rhs)});
    case PredOp::Or: return lor({rec(node->lhs), rec(node->rhs)});
    case PredOp::Implies: return implies(rec(node->lhs), rec(node->rhs));
    case PredOp::Iff: return iff(rec(node->lhs), rec(node->rhs));
    case PredOp::Lt: return lt(rec(node->lhs), rec(node->rhs));
    case PredOp::Le: return le(rec(node->lhs), rec(node->rhs));
    case PredOp::Eq: return eq(rec(node->lhs), rec(node->rhs));
    case PredOp::Gt: return gt(rec(node->lhs), rec(node->rhs));
    case PredOp::Ge: return ge(rec(node->lhs), rec(node->rhs));
    case PredOp::Const: return lit(node->value);
    case PredOp::Add: return add(rec(node->lhs), rec(node->rhs));
    case PredOp::Sub: return sub(rec(node->lhs), rec(node->rhs));
    case PredOp::Mul: return mul(rec(node->lhs), rec(node->rhs));
    case PredOp::Species: {
        for (std::size_t s = 0; s < L.species.size(); ++s) {
            if (L.species[s] == node->name) return var(L.x(i, j, s));
        }
        throw StructuralError("predicate references undeclared species '" + node->name + "'");
    }
    }
    throw StructuralError("unknown predicate node");
}

/// No reaction is enabled in state (i, j): every reaction lacks some reactant.
inline smt::Term terminal(const EncodingLayout& L, std::size_t i, std::size_t j) {
    using namespace smt;
    std::vector<Term> perReaction;
    for (std::size_t m = 0; m < L.numReactions; ++m) {
        std::vector<Term> lacking;
        for (std::size_t s = 0; s < L.numSpecies; ++s) lacking.push_back(lt(var(L.x(i, j, s)), var(L.r(m, s))));
        perReaction.push_back(lor(std::move(lacking)));
    }
    return land(std::move(perReaction));
}

inline smt::Term stateEqual(const EncodingLayout& L, std::size_t i, std::size_t j, std::size_t k) {
    using namespace smt;
    std::vector<Term> eqs;
    for (std::size_t s = 0; s < L.numSpecies; ++s) eqs.push_back(eq(var(L.x(i, k, s)), var(L.x(i, j, s))));
    return land(std::move(eqs));
}

/// One step x_j -> x_{j+1} of path i.
inline smt::Term step(const EncodingLayout& L, std::size_t i, std::size_t j, Count total, StutterBound bound) {
    using namespace smt;
    std::vector<Term> branches;
    branches.push_back(land({terminal(L, i, j), stateEqual(L, i, j, j + 1)}));
    for (std::size_t m = 0; m < L.numReactions; ++m) {
        std::vector<Term> conj;
        for (std::size_t s = 0; s < L.numSpecies; ++s) {
            const Term xs = var(L.x(i, j, s));
            const Term next = var(L.x(i, j + 1, s));
            const Term reactant = var(L.r(m, s));
            const Term delta = sub(var(L.p(m, s)), reactant);
            conj.push_back(ge(xs, reactant));
            if (L.stutter) {
                const Term nd = timesSmallDelta(var(L.n(i, j)), delta);
                if (bound == StutterBound::Exact) {
                    // x_s + (n - 1)·delta >= r_s: every one of the n firings is enabled
                    conj.push_back(ge(sub(add(xs, nd), delta), reactant));
                } else {
                    // x_s >= n·(r_s - p_s)
                    conj.push_back(ge(add(xs, nd), lit(0)));
                }
                conj.push_back(eq(next, add(xs, nd)));
            } else {
                conj.push_back(eq(next, add(xs, delta)));
            }
        }
        branches.push_back(land(std::move(conj)));
    }
    Term relation = lor(std::move(branches));
    if (!L.stutter) return relation;
    const Term n = var(L.n(i, j));
    // n >= 1 always; the cap stays >= 1 so an all-zero start can self-loop
    return land({le(lit(1), n), le(n, lit(std::max<Count>(total, 1))), relation});
}

} // namespace detail

/// Bimolecularity, nonnegativity, input consumption, output production,
/// pairwise-distinct reactions, and per-reaction net change.
inline std::vector<smt::Constraint> encodeStructure(const SynthesisProblem& problem) {
    using namespace smt;
    problem.validate();
    const EncodingLayout L(problem);
    const std::size_t N = L.numSpecies, M = L.numReactions;
    std::vector<Constraint> out;
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<Term> nonneg;
        for (std::size_t s = 0; s < N; ++s) {
            nonneg.push_back(ge(var(L.r(m, s)), lit(0)));
            nonneg.push_back(ge(var(L.p(m, s)), lit(0)));
        }
        out.push_back({"nonnegative stoichiometry of reaction " + std::to_string(m), land(std::move(nonneg))});
    }
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<Term> rs, ps;
        for (std::size_t s = 0; s < N; ++s) {
            rs.push_back(var(L.r(m, s)));
            ps.push_back(var(L.p(m, s)));
        }
        out.push_back({"row sum: reactants of reaction " + std::to_string(m), eq(add(std::move(rs)), lit(2))});
        out.push_back({"row sum: products of reaction " + std::to_string(m), eq(add(std::move(ps)), lit(2))});
    }
    for (const auto& name : problem.inputs) {
        const auto s = static_cast<std::size_t>(std::find(L.species.begin(), L.species.end(), name) - L.species.begin());
        std::vector<Term> any;
        for (std::size_t m = 0; m < M; ++m) any.push_back(gt(var(L.r(m, s)), lit(0)));
        out.push_back({"input " + name + " is consumed", lor(std::move(any))});
    }
    for (const auto& name : problem.outputs) {
        const auto s = static_cast<std::size_t>(std::find(L.species.begin(), L.species.end(), name) - L.species.begin());
        std::vector<Term> any;
        for (std::size_t m = 0; m < M; ++m) any.push_back(gt(var(L.p(m, s)), lit(0)));
        out.push_back({"output " + name + " is produced", lor(std::move(any))});
    }
    for (std::size_t a = 0; a < M; ++a) {
        for (std::size_t b = a + 1; b < M; ++b) {
            std::vector<Term> differ;
            for (std::size_t s = 0; s < N; ++s) {
                differ.push_back(ne(var(L.p(a, s)), var(L.p(b, s))));
                differ.push_back(ne(var(L.r(a, s)), var(L.r(b, s))));
            }
            out.push_back({"reactions " + std::to_string(a) + " and " + std::to_string(b) + " differ",
                           lor(std::move(differ))});
        }
    }
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<Term> change;
        for (std::size_t s = 0; s < N; ++s) change.push_back(ne(var(L.p(m, s)), var(L.r(m, s))));
        out.push_back({"reaction " + std::to_string(m) + " changes the state", lor(std::move(change))});
    }
    return out;
}

/// Path constraints for predicate i: phi_0 at step 0, the unrolled step
/// relation, and phi_F plus terminality at step K.
inline std::vector<smt::Constraint> encodeTrajectory(const SynthesisProblem& problem, std::size_t i) {
    using namespace smt;
    problem.validate();
    if (i >= problem.predicates.size()) throw PreconditionError("predicate index out of range");
    const EncodingLayout L(problem);
    const Count total = problem.totalBound(i);
    const std::string tag = "path " + std::to_string(i);
    std::vector<Constraint> out;
    std::vector<Term> domain;
    for (std::size_t j = 0; j <= L.maxSteps; ++j) {
        for (std::size_t s = 0; s < L.numSpecies; ++s) {
            domain.push_back(le(lit(0), var(L.x(i, j, s))));
            domain.push_back(le(var(L.x(i, j, s)), lit(total)));
        }
    }
    out.push_back({tag + ": counts within [0, " + std::to_string(total) + "]", land(std::move(domain))});
    out.push_back({tag + ": initial " + toString(problem.predicates[i].initial),
                   crnsynth::detail::translate(problem.predicates[i].initial.node(), L, i, 0)});
    for (std::size_t j = 0; j < L.maxSteps; ++j) {
        out.push_back({tag + ": step " + std::to_string(j),
                       crnsynth::detail::step(L, i, j, total, problem.stutterBound)});
    }
    out.push_back({tag + ": final " + toString(problem.predicates[i].final),
                   crnsynth::detail::translate(problem.predicates[i].final.node(), L, i, L.maxSteps)});
    out.push_back({tag + ": terminal", crnsynth::detail::terminal(L, i, L.maxSteps)});
    return out;
}

/// DifferentFrom(C') for each previous CRN: the symbolic reaction set is not
/// contained in C' (with M distinct reactions on both sides this excludes C'
/// and all its permutations).
/// Labels are numbered from `firstIndex` so incremental batches stay unique.
inline std::vector<smt::Constraint> encodeUniqueness(const SynthesisProblem& problem, const std::vector<Crn>& previous,
                                                     std::size_t firstIndex = 0) {
    using namespace smt;
    const EncodingLayout L(problem);
    std::vector<Constraint> out;
    for (std::size_t c = 0; c < previous.size(); ++c) {
        const Crn& prev = previous[c];
        if (prev.numSpecies() != L.numSpecies || prev.numReactions() != L.numReactions) {
            throw PreconditionError("previous CRN has a different number of species or reactions");
        }
        std::vector<Term> everyReactionKnown;
        for (std::size_t m = 0; m < L.numReactions; ++m) {
            std::vector<Term> matchesSome;
            for (const auto& rx : prev.reactions()) {
                std::vector<Term> same;
                for (std::size_t s = 0; s < L.numSpecies; ++s) {
                    same.push_back(eq(var(L.r(m, s)), lit(rx.reactants[s])));
                    same.push_back(eq(var(L.p(m, s)), lit(rx.products[s])));
                }
                matchesSome.push_back(land(std::move(same)));
            }
            everyReactionKnown.push_back(lor(std::move(matchesSome)));
        }
        out.push_back({"different from solution " + std::to_string(firstIndex + c), lnot(land(std::move(everyReactionKnown)))});
    }
    return out;
}

inline SymbolicEncoding encode(const SynthesisProblem& problem) {
    problem.validate();
    SymbolicEncoding enc{problem, EncodingLayout(problem), {}, {}, {}, {}, {}};
    enc.varNames = enc.layout.names();
    enc.structure = encodeStructure(problem);
    for (std::size_t i = 0; i < problem.predicates.size(); ++i) {
        enc.totals.push_back(problem.totalBound(i));
        enc.trajectories.push_back(encodeTrajectory(problem, i));
    }
    return enc;
}

// ---------------------------------------------------------------------------
// SMT-LIB 2 text

inline std::string smtAssert(const smt::Constraint& c, const std::vector<std::string>& names) {
    return "; " + c.label + "\n(assert " + smt::toSmt(c.formula, names) + ")\n";
}

/// Logic, options, declarations and every assertion (no check-sat).
inline std::string emitPrelude(const SymbolicEncoding& enc) {
    const auto& P = enc.problem;
    std::string out;
    out += "; CRN synthesis: N=" + std::to_string(P.numSpecies) + " M=" + std::to_string(P.numReactions) +
           " K=" + std::to_string(P.maxSteps) + " predicates=" + std::to_string(P.predicates.size()) +
           (P.stutter ? (P.stutterBound == StutterBound::Exact ? " stutter=exact" : " stutter=literal") : " stutter=off") +
           "\n";
    out += std::string("(set-logic ") + (enc.nonlinear() ? "QF_NIA" : "QF_LIA") + ")\n";
    out += "(set-option :produce-models true)\n";
    for (const auto& name : enc.varNames) out += "(declare-const " + name + " Int)\n";
    for (const auto& c : enc.allConstraints()) out += smtAssert(c, enc.varNames);
    return out;
}

inline std::string getValueCommand(const SymbolicEncoding& enc) {
    std::string out = "(get-value (";
    for (std::size_t v = 0; v < enc.layout.numStoichiometryVars(); ++v) {
        if (v) out += " ";
        out += enc.varNames[v];
    }
    return out + "))\n";
}

/// A complete, deterministic SMT-LIB 2 script: prelude, check-sat, and a
/// get-value over every stoichiometry entry.
inline std::string emitSmtLib(const SymbolicEncoding& enc) {
    return emitPrelude(enc) + "(check-sat)\n" + getValueCommand(enc);
}

// ---------------------------------------------------------------------------
// Models

/// Builds the CRN described by stoichiometry values (indexed like the
/// layout), with reactions sorted by (reactants, products) and unit rates.
inline Crn crnFromStoichiometry(const SynthesisProblem& problem, const std::vector<std::int64_t>& values) {
    const EncodingLayout L(problem);
    if (values.size() < L.numStoichiometryVars()) throw StructuralError("model lacks stoichiometry values");
    std::vector<Reaction> rxs;
    for (std::size_t m = 0; m < L.numReactions; ++m) {
        Reaction rx{Stoichiometry(L.numSpecies), Stoichiometry(L.numSpecies), 1.0};
        for (std::size_t s = 0; s < L.numSpecies; ++s) {
            rx.reactants[s] = static_cast<int>(values[L.r(m, s)]);
            rx.products[s] = static_cast<int>(values[L.p(m, s)]);
        }
        rxs.push_back(std::move(rx));
    }
    std::sort(rxs.begin(), rxs.end(), [](const Reaction& a, const Reaction& b) {
        return std::tie(a.reactants, a.products) < std::tie(b.reactants, b.products);
    });
    return Crn(L.species, std::move(rxs), problem.inputs, problem.outputs);
}

} // namespace crnsynth

#endif
