#include <gtest/gtest.h>

#include <random>

#include "crnsynth/specs.hpp"
#include "crnsynth/tuner.hpp"
#include "fixtures.hpp"

using namespace crnsynth;
using namespace crnsynth::tuner;

namespace {

std::vector<PathPredicate> smallAm(std::size_t n) { return amPredicates(InputGrid(InputGrid::square(1, 3)), n); }

TuneConfig quick(std::size_t iterations, std::uint64_t seed = 1) {
    TuneConfig c;
    c.burnIn = iterations;
    c.samples = iterations;
    c.rngSeed = seed;
    return c;
}

} // namespace

TEST(Objective, SymmetricForDirectCompetition) {
    const Crn dc = fixtures::dc();
    const auto preds = resolveBenchmark("am", 2).predicates();
    const double v = objective(dc, dc.rates(), preds);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    const ctmc::ScoringContext ctx(dc, preds);
    const auto ps = ctx.probabilities(dc.rates());
    const auto& pairs = benchmarkGrid("am").pairs();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            if (pairs[i].first == pairs[j].second && pairs[i].second == pairs[j].first) EXPECT_NEAR(ps[i], ps[j], 1e-9);
        }
    }
    EXPECT_EQ(objective(ctx, dc.rates()), objective(ctx, dc.rates()));
}

TEST(Objective, TrivialFinalsScoreOne) {
    std::vector<PathPredicate> preds = smallAm(2);
    for (auto& p : preds) p.final = StatePredicate::truth(true);
    EXPECT_NEAR(objective(fixtures::dc(), {1.0, 1.0}, preds), 1.0, 1e-12);
}

TEST(Proposal, StaysInBoundsAndIsSeeded) {
    const ParameterSpace space(3, 0.01, 100.0);
    std::mt19937_64 a(5), b(5);
    std::vector<double> x{1.0, 50.0, 0.02};
    for (std::size_t it = 0; it < 2000; ++it) {
        auto p = propose(x, space, 3.0, it, a);
        EXPECT_EQ(p, propose(x, space, 3.0, it, b));
        EXPECT_TRUE(space.contains(p));
        std::size_t moved = 0;
        for (std::size_t d = 0; d < 3; ++d) moved += p[d] != x[d];
        if (it % 2 == 0) EXPECT_LE(moved, 1u);
        x = p;
    }
}

TEST(Proposal, ReflectionIsAnInvolutionInsideTheInterval) {
    EXPECT_DOUBLE_EQ(reflect(0.5, 0.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(reflect(1.25, 0.0, 1.0), 0.75);
    EXPECT_DOUBLE_EQ(reflect(-0.25, 0.0, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(reflect(2.25, 0.0, 1.0), 0.25);
}

TEST(Acceptance, NeverRejectsImprovementsOrTies) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        EXPECT_TRUE(accept(0.3, 0.4, 50.0, rng));
        EXPECT_TRUE(accept(0.3, 0.3, 50.0, rng));
    }
    int taken = 0;
    for (int i = 0; i < 20000; ++i) taken += accept(0.5, 0.48, 50.0, rng);
    EXPECT_NEAR(taken / 20000.0, std::exp(-1.0), 0.02);
}

TEST(Run, ZeroIterationsReturnsTheBaseline) {
    const Crn dc = fixtures::dc();
    const auto r = run(dc, smallAm(2), quick(0));
    EXPECT_EQ(r.bestRates, (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(r.bestObjective, r.initialObjective);
    EXPECT_NEAR(r.initialObjective, objective(dc, {1.0, 1.0}, smallAm(2)), 1e-15);
    EXPECT_EQ(r.trace.size(), 1u);
}

TEST(Run, DeterministicForAFixedSeed) {
    const auto a = run(fixtures::am39(), smallAm(3), quick(5, 9));
    const auto b = run(fixtures::am39(), smallAm(3), quick(5, 9));
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].rates, b.trace[i].rates);
        EXPECT_EQ(a.trace[i].objective, b.trace[i].objective);
        EXPECT_EQ(a.trace[i].accepted, b.trace[i].accepted);
    }
}

TEST(RunProperties, DominanceAndMonotoneBest) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 6; ++t) {
        const Crn c = fixtures::randomCrn(rng, 3, 2 + t % 2);
        const auto r = run(c, smallAm(3), quick(4, 100 + static_cast<std::uint64_t>(t)));
        EXPECT_GE(r.bestObjective, r.initialObjective);
        double best = r.trace[0].bestSoFar, maxSeen = 0.0;
        for (const auto& e : r.trace) {
            EXPECT_GE(e.bestSoFar, best);
            best = e.bestSoFar;
            maxSeen = std::max(maxSeen, e.objective);
        }
        EXPECT_EQ(r.bestObjective, maxSeen);
        EXPECT_GE(r.acceptanceRate, 0.0);
        EXPECT_LE(r.acceptanceRate, 1.0);
    }
}

TEST(Run, ContinuationNeverLosesTheShortRunsBest) {
    const ctmc::ScoringContext ctx(fixtures::am39(), smallAm(3));
    const auto shortRun = run(ctx, quick(3, 4));
    const auto longRun = runFrom(ctx, quick(6, 4), shortRun.bestRates);
    EXPECT_GE(longRun.bestObjective, shortRun.bestObjective);
}

TEST(Run, InvalidConfigurations) {
    TuneConfig bad = quick(1);
    bad.proposalStdDev = 0.0;
    EXPECT_THROW(run(fixtures::dc(), smallAm(2), bad), PreconditionError);
    TuneConfig outside = quick(1);
    outside.bounds = ParameterSpace(2, 2.0, 10.0);
    const ctmc::ScoringContext ctx(fixtures::dc(), smallAm(2));
    EXPECT_THROW(runFrom(ctx, outside, {1.0, 1.0}), PreconditionError);
    EXPECT_THROW(ParameterSpace(2, 0.0, 1.0), PreconditionError);
    TuneConfig wrongDim = quick(1);
    wrongDim.bounds = ParameterSpace(3);
    EXPECT_THROW(run(ctx, wrongDim), PreconditionError);
}

TEST(Rank, BrokenCandidateRanksLastAndOrderIsStable) {
    // 2A -> 2B never decides a B-minority input correctly and leaves A stranded otherwise.
    const Crn broken({"A", "B", "X"}, {fixtures::rx(3, {{0, 1}, {1, 1}}, {{2, 2}}), fixtures::rx(3, {{2, 2}}, {{0, 1}, {1, 1}})});
    const std::vector<Crn> crns{broken, fixtures::am39()};
    RankConfig rc;
    rc.shortRun = quick(2);
    const auto rows = rankCandidates(crns, smallAm(3), rc);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].crnId, 1u);
    EXPECT_EQ(rows[1].crnId, 0u);
    EXPECT_NEAR(rows[1].shortObjective, 0.0, 1e-9);

    const auto swapped = rankCandidates({fixtures::am39(), broken}, smallAm(3), rc);
    EXPECT_EQ(swapped[0].shortObjective, rows[0].shortObjective);
    EXPECT_THROW(rankCandidates({}, smallAm(3), rc), PreconditionError);
}

TEST(Rank, LongRunsRespectTopCountAndGate) {
    const std::vector<Crn> crns{fixtures::am39(), fixtures::am39(2.0, 1.0, 1.0)};
    RankConfig rc;
    rc.shortRun = quick(1);
    rc.longRun = quick(2);
    rc.topCount = 1;
    rc.gate = 0.0;
    const auto rows = rankCandidates(crns, smallAm(3), rc);
    std::size_t withLong = 0;
    for (const auto& r : rows) {
        if (r.longObjective) {
            ++withLong;
            EXPECT_GE(*r.longObjective, r.shortObjective);
            EXPECT_TRUE(r.longResult.has_value());
        }
    }
    EXPECT_EQ(withLong, 1u);
    rc.gate = 1.0;
    for (const auto& r : rankCandidates(crns, smallAm(3), rc)) EXPECT_FALSE(r.longObjective.has_value());
    const auto j = resultToJson(rows[0].shortResult);
    EXPECT_EQ(j.at("iterations"), 2u);
}
