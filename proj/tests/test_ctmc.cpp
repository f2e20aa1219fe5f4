#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crnsynth/ctmc/generator.hpp"
#include "crnsynth/ctmc/hitting_time.hpp"
#include "crnsynth/ctmc/probability.hpp"
#include "crnsynth/ctmc/state_space.hpp"
#include "crnsynth/ctmc/transient.hpp"
#include "crnsynth/specs.hpp"
#include "fixtures.hpp"

using namespace crnsynth;
using namespace crnsynth::ctmc;

namespace {

StateSpace spaceFrom(const Crn& c, SysState x) { return buildStateSpace(c, std::vector<SysState>{std::move(x)}); }

double terminalMass(const StateSpace& sp, const Distribution& d) {
    double m = 0.0;
    for (auto s : sp.terminalStates) m += d[s];
    return m;
}

/// Dense Gaussian elimination with partial pivoting; test-side reference.
std::vector<double> solveDense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

/// Expected consensus time of unit-rate DC from (a, n - a): the embedded
/// walk is symmetric with holding time 1 / (2 a (n - a)).
double dcHittingTime(Count a, Count n) {
    if (a == 0 || a == n) return 0.0;
    const std::size_t m = static_cast<std::size_t>(n - 1); // unknowns a = 1..n-1
    std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double k = static_cast<double>(i + 1);
        A[i][i] = 1.0;
        if (i > 0) A[i][i - 1] = -0.5;
        if (i + 1 < m) A[i][i + 1] = -0.5;
        b[i] = 1.0 / (2.0 * k * (static_cast<double>(n) - k));
    }
    return solveDense(A, b)[static_cast<std::size_t>(a - 1)];
}

/// Absorption probability into each terminal state by a direct linear solve
/// over the embedded jump chain.
std::vector<double> absorption(const Crn& c, const StateSpace& sp, std::size_t from) {
    const std::size_t n = sp.size();
    std::vector<double> result(n, 0.0);
    for (auto target : sp.terminalStates) {
        std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
        std::vector<double> b(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            A[i][i] = 1.0;
            if (sp.terminal[i]) {
                b[i] = i == target ? 1.0 : 0.0;
                continue;
            }
            double exit = 0.0;
            std::vector<std::pair<std::size_t, double>> out;
            for (std::size_t r = 0; r < c.numReactions(); ++r) {
                if (!enabled(c, r, sp.states[i])) continue;
                const double a = propensity(c, r, sp.states[i]);
                out.emplace_back(*sp.find(fire(c, r, sp.states[i])), a);
                exit += a;
            }
            for (auto [j, a] : out) A[i][j] -= a / exit;
        }
        result[target] = solveDense(A, b)[from];
    }
    return result;
}

} // namespace

TEST(StateSpaceBuild, DirectCompetitionFromTwoOne) {
    const auto sp = buildStateSpace(fixtures::dc(), parsePredicate("A = 2 && B = 1"), 3);
    EXPECT_EQ(sp.size(), 4u);
    for (SysState x : {SysState{2, 1}, SysState{1, 2}, SysState{3, 0}, SysState{0, 3}}) EXPECT_TRUE(sp.find(x));
    EXPECT_EQ(sp.initialStates, (std::vector<std::size_t>{0}));
    EXPECT_EQ(sp.terminalStates.size(), 2u);
    for (const auto& x : sp.states) EXPECT_EQ(x.total(), 3);
}

TEST(StateSpaceBuild, MajorityNetworkFromOneOneTerminatesInX) {
    const auto sp = spaceFrom(fixtures::am39(), {1, 1, 0});
    ASSERT_EQ(sp.terminalStates.size(), 1u);
    EXPECT_EQ(sp.states[sp.terminalStates[0]], SysState({0, 0, 2}));
}

TEST(StateSpaceBuild, ErrorsAndCap) {
    EXPECT_THROW(buildStateSpace(fixtures::dc(), parsePredicate("A = 20 && B = 1"), 3), SpecificationError);
    EXPECT_THROW(buildStateSpace(fixtures::dc(), std::vector<SysState>{}), SpecificationError);
    EXPECT_THROW(buildStateSpace(fixtures::am39(), std::vector<SysState>{{20, 20, 0}}, 50), CapacityError);
}

TEST(GeneratorBuild, EntriesAndVolume) {
    const Crn dc = fixtures::dc();
    const auto sp = spaceFrom(dc, {1, 1});
    const auto g = buildGenerator(dc, sp);
    const auto i = static_cast<Eigen::Index>(*sp.find({1, 1}));
    EXPECT_DOUBLE_EQ(g.Q.coeff(i, static_cast<Eigen::Index>(*sp.find({0, 2}))), 1.0);
    EXPECT_DOUBLE_EQ(g.Q.coeff(i, static_cast<Eigen::Index>(*sp.find({2, 0}))), 1.0);
    EXPECT_DOUBLE_EQ(g.Q.coeff(i, i), -2.0);
    const auto g2 = buildGenerator(dc, sp, 2.0);
    EXPECT_DOUBLE_EQ(g2.Q.coeff(i, static_cast<Eigen::Index>(*sp.find({0, 2}))), 0.5);
    EXPECT_THROW(buildGenerator(dc, sp, {1.0, 0.0}), PreconditionError);
    EXPECT_THROW(buildGenerator(dc, sp, 0.0), PreconditionError);
    EXPECT_THROW(buildGenerator(dc, sp, std::vector<double>{1.0}), PreconditionError);
}

TEST(GeneratorBuild, MajorityNetworkSingleEdge) {
    const Crn c = fixtures::am39(3.5, 1.0, 1.0);
    const auto sp = spaceFrom(c, {1, 1, 0});
    const auto g = buildGenerator(c, sp);
    EXPECT_EQ(g.Q.row(0).nonZeros(), 2);
    EXPECT_DOUBLE_EQ(g.Q.coeff(0, static_cast<Eigen::Index>(*sp.find({0, 0, 2}))), 3.5);
}

TEST(GeneratorProperties, RowsSumToZeroAndTerminalRowsEmpty) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 40; ++t) {
        const Crn c = fixtures::randomCrn(rng, 2 + t % 2, 1 + t % 3);
        std::vector<SysState> start = statesWithTotal(c.numSpecies(), 8);
        const auto sp = buildStateSpace(c, start);
        const auto g = buildGenerator(c, sp);
        for (Eigen::Index i = 0; i < g.Q.rows(); ++i) {
            double sum = 0.0;
            for (SparseRowMatrix::InnerIterator it(g.Q, i); it; ++it) {
                sum += it.value();
                if (it.col() != i) EXPECT_GE(it.value(), 0.0);
            }
            EXPECT_NEAR(sum, 0.0, 1e-12);
            if (sp.terminal[static_cast<std::size_t>(i)]) EXPECT_EQ(g.Q.row(i).nonZeros(), 0);
        }
    }
}

TEST(Poisson, WeightsCoverTheDistribution) {
    for (double q : {0.3, 5.0, 80.0, 2500.0}) {
        const auto pw = poissonWeights(q, 1e-10);
        EXPECT_GT(pw.sum, 1.0 - 1e-10);
        EXPECT_LE(pw.sum, 1.0 + 1e-12);
        EXPECT_EQ(pw.w.size(), pw.right - pw.left + 1);
    }
    EXPECT_THROW(poissonWeights(-1.0, 1e-8), NumericalError);
}

TEST(Transient, DirectCompetitionRace) {
    const Crn dc = fixtures::dc();
    const auto sp = spaceFrom(dc, {1, 1});
    const auto g = buildGenerator(dc, sp);
    for (auto method : {CmeMethod::Uniformization, CmeMethod::DenseSquaring, CmeMethod::Auto}) {
        for (double t : {0.1, 1.0, 10.0}) {
            const auto d = integrateCme(g, pointMass(sp.size(), 0), t, kDefaultTolerance, method);
            EXPECT_NEAR(terminalMass(sp, d), 1.0 - std::exp(-2.0 * t), 1e-6);
            EXPECT_NEAR(d[*sp.find({2, 0})], d[*sp.find({0, 2})], 1e-12);
            EXPECT_NEAR(d.mass(), 1.0, 1e-9);
        }
        const auto late = integrateCme(g, pointMass(sp.size(), 0), 100.0, kDefaultTolerance, method);
        EXPECT_NEAR(terminalMass(sp, late), 1.0, 1e-9);
    }
    const auto same = integrateCme(g, pointMass(sp.size(), 0), 0.0);
    EXPECT_EQ(same.p, pointMass(sp.size(), 0).p);
}

TEST(Transient, Preconditions) {
    const Crn dc = fixtures::dc();
    const auto sp = spaceFrom(dc, {1, 1});
    const auto g = buildGenerator(dc, sp);
    EXPECT_THROW(integrateCme(g, pointMass(sp.size(), 0), -1.0), PreconditionError);
    EXPECT_THROW(integrateCme(g, pointMass(sp.size(), 0), 1.0, 0.0), PreconditionError);
    Distribution half = pointMass(sp.size(), 0);
    half.p *= 0.5;
    EXPECT_THROW(integrateCme(g, half, 1.0), PreconditionError);
    EXPECT_THROW(integrateCme(g, pointMass(sp.size(), 0), std::vector<double>{2.0, 1.0}), PreconditionError);
}

TEST(TransientProperties, SemigroupAndMethodAgreement) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> st(0.05, 3.0);
    for (int t = 0; t < 25; ++t) {
        const Crn c = fixtures::randomCrn(rng, 2 + t % 2, 1 + t % 3);
        const auto sp = buildStateSpace(c, statesWithTotal(c.numSpecies(), 5));
        const auto g = buildGenerator(c, sp);
        const auto pi0 = uniformOver(sp.size(), sp.initialStates);
        const double s = st(rng), u = st(rng);
        const double tol = 1e-9;
        const auto direct = integrateCme(g, pi0, s + u, tol, CmeMethod::Uniformization);
        const auto twoStep = integrateCme(g, integrateCme(g, pi0, s, tol, CmeMethod::Uniformization), u, tol,
                                          CmeMethod::Uniformization);
        const auto dense = integrateCme(g, pi0, s + u, tol, CmeMethod::DenseSquaring);
        EXPECT_LE((direct.p - twoStep.p).lpNorm<1>(), 10 * tol);
        EXPECT_LE((direct.p - dense.p).lpNorm<1>(), 10 * tol);
        const auto series = integrateCme(g, pi0, std::vector<double>{s, s + u}, tol);
        EXPECT_LE((series[1].p - direct.p).lpNorm<1>(), 10 * tol);
        EXPECT_DOUBLE_EQ(series[1].time, s + u);
        for (const auto& d : series) EXPECT_NEAR(d.mass(), 1.0, 1e-9);
    }
}

TEST(TransientProperties, LongUniformizationAgreesWithDenseSquaring) {
    // lambda t near 1e5: far in the tail, entries decay through the subnormal range
    const Crn c = fixtures::am39(50.0, 20.0, 80.0);
    const auto sp = spaceFrom(c, {7, 5, 0});
    const auto g = buildGenerator(c, sp);
    ASSERT_GT(g.maxExitRate() * 100.0, 1e4);
    const auto pi0 = pointMass(sp.size(), 0);
    const auto u = integrateCme(g, pi0, 100.0, 1e-10, CmeMethod::Uniformization);
    const auto d = integrateCme(g, pi0, 100.0, 1e-10, CmeMethod::DenseSquaring);
    EXPECT_LT((u.p - d.p).lpNorm<1>(), 1e-8);
    EXPECT_NEAR(u.mass(), 1.0, 1e-12);
}

TEST(TransientProperties, LongRunMatchesAbsorptionProbabilities) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> k(1.0, 3.0);
    int checked = 0;
    for (int t = 0; t < 60 && checked < 20; ++t) {
        Crn c = fixtures::randomCrn(rng, 2 + t % 2, 1 + t % 3);
        std::vector<double> rates(c.numReactions());
        for (auto& r : rates) r = k(rng);
        c = c.withRates(rates);
        const SysState x0 = statesWithTotal(c.numSpecies(), 6)[static_cast<std::size_t>(t) % 7];
        const auto sp = spaceFrom(c, x0);
        const auto g = buildGenerator(c, sp);
        try {
            ctmc::detail::requireAbsorbing(g, sp);
        } catch (const StructuralError&) {
            continue;
        }
        ++checked;
        const auto d = integrateCme(g, pointMass(sp.size(), 0), 100.0);
        const auto ref = absorption(c, sp, 0);
        for (auto s : sp.terminalStates) EXPECT_NEAR(d[s], ref[s], 1e-6);
    }
    EXPECT_GE(checked, 10);
}

TEST(Probability, DirectCompetitionFixtures) {
    const Crn dc = fixtures::dc();
    const auto tie = amPredicates(InputGrid({{1, 1}}), 2)[0];
    const auto twoOne = amPredicates(InputGrid({{2, 1}}), 2)[0];
    EXPECT_NEAR(probabilityOf(dc, dc.rates(), tie, 100.0, 2), 1.0, 1e-9);
    EXPECT_NEAR(probabilityOf(dc, dc.rates(), twoOne, 100.0, 3), 2.0 / 3.0, 1e-4);
    const PathPredicate never{twoOne.initial, StatePredicate::truth(false)};
    EXPECT_EQ(probabilityOf(dc, dc.rates(), never, 100.0, 3), 0.0);

    const auto sym = amPredicates(InputGrid({{2, 1}, {1, 2}}), 2);
    EXPECT_NEAR(averageProbability(dc, dc.rates(), sym), 2.0 / 3.0, 1e-4);
    EXPECT_NEAR(averageProbability(dc, dc.rates(), {twoOne}), probabilityOf(dc, dc.rates(), twoOne, 100.0, 3), 1e-12);
}

TEST(Probability, TerminalOnlyExcludesTransientFinals) {
    // phi_F := A >= 0 holds everywhere; only terminal mass counts with terminalOnly.
    const Crn dc = fixtures::dc();
    const PathPredicate any{parsePredicate("A = 1 && B = 1"), parsePredicate("A >= 0")};
    EXPECT_NEAR(probabilityOf(dc, dc.rates(), any, 1.0, 2), 1.0, 1e-12);
    EXPECT_NEAR(probabilityOf(dc, dc.rates(), any, 1.0, 2, kDefaultTolerance, true), 1.0 - std::exp(-2.0), 1e-6);
}

TEST(Probability, ScoringContextSharesSpacesAndMatchesDirectEvaluation) {
    const Crn c = fixtures::am39(1.3, 0.7, 2.1);
    const auto preds = resolveBenchmark("am", 3).predicates();
    const ScoringContext ctx(c, preds);
    EXPECT_LT(ctx.numGroups(), preds.size());
    const auto ps = ctx.probabilities(c.rates());
    for (std::size_t i : {0u, 7u, 31u, 49u}) {
        const auto bound = *totalCountBound(preds[i].initial, c.speciesNames());
        EXPECT_NEAR(ps[i], probabilityOf(c, c.rates(), preds[i], 100.0, bound), 1e-7) << i;
    }
    ScoreOptions par;
    par.jobs = 3;
    EXPECT_EQ(ScoringContext(c, preds, par).probabilities(c.rates()), ps);
    ScoreOptions uni;
    uni.method = CmeMethod::Uniformization;
    const auto pu = ScoringContext(c, preds, uni).probabilities(c.rates());
    for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_NEAR(pu[i], ps[i], 1e-7);
}

TEST(Probability, MajorityNetworkScoresZeroOnTheTie) {
    const Crn c = fixtures::am39();
    const auto tie = amPredicates(InputGrid({{1, 1}}), 3)[0];
    EXPECT_NEAR(probabilityOf(c, c.rates(), tie, 100.0, 2), 0.0, 1e-12);
}

TEST(HittingTime, DirectCompetitionFixtures) {
    const Crn dc = fixtures::dc();
    for (SysState x : {SysState{1, 1}, SysState{2, 1}}) {
        const auto sp = spaceFrom(dc, x);
        const auto g = buildGenerator(dc, sp);
        const auto tau = expectedHittingTime(g, sp);
        EXPECT_NEAR(tau[0], 0.5, 1e-9);
        for (auto s : sp.terminalStates) EXPECT_EQ(tau[s], 0.0);
        const auto scaled = expectedHittingTime(g, sp, true);
        EXPECT_DOUBLE_EQ(scaled[0], tau[0] * static_cast<double>(x.total()));
    }
}

TEST(HittingTime, MatchesBirthDeathFormula) {
    const Crn dc = fixtures::dc();
    for (Count n = 2; n <= 5; ++n) {
        for (Count a = 1; a < n; ++a) {
            const auto sp = spaceFrom(dc, {a, n - a});
            const auto tau = expectedHittingTime(buildGenerator(dc, sp), sp);
            EXPECT_NEAR(tau[0], dcHittingTime(a, n), 1e-9) << a << "/" << n;
        }
    }
}

TEST(HittingTime, DoublingVolumeDoublesTimes) {
    const Crn c = fixtures::am39(1.0, 2.0, 0.5);
    const auto sp = spaceFrom(c, {4, 3, 0});
    const auto t1 = expectedHittingTime(buildGenerator(c, sp, 1.0), sp);
    const auto t2 = expectedHittingTime(buildGenerator(c, sp, 2.0), sp);
    for (std::size_t i = 0; i < sp.size(); ++i) EXPECT_NEAR(t2[i], 2.0 * t1[i], 1e-9 * std::max(1.0, t1[i]));
}

TEST(HittingTime, NonAbsorbingChainIsRejected) {
    // A + B -> 2A and 2A -> A + B cycle forever from (1, 1).
    const Crn c({"A", "B"}, {fixtures::rx(2, {{0, 1}, {1, 1}}, {{0, 2}}), fixtures::rx(2, {{0, 2}}, {{0, 1}, {1, 1}})});
    const auto sp = spaceFrom(c, {1, 1});
    EXPECT_THROW(expectedHittingTime(buildGenerator(c, sp), sp), StructuralError);
}
