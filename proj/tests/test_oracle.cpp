#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "crnsynth/oracle.hpp"
#include "crnsynth/specs.hpp"
#include "fixtures.hpp"

using namespace crnsynth;

namespace {

PathPredicate am(Count a, Count b, std::size_t n) { return amPredicates(InputGrid({{a, b}}), n).front(); }

} // namespace

TEST(ReactionSpace, MultisetAndOrderedCounts) {
    EXPECT_EQ(oracle::ReactionSpace(2).count(), 6u);
    EXPECT_EQ(oracle::ReactionSpace(3).count(), 30u);
    EXPECT_EQ(oracle::binomial(oracle::ReactionSpace(3).orderedCount(), 3), 59640u);
    EXPECT_EQ(oracle::allCrns(2, 1).size(), 6u);
    EXPECT_EQ(oracle::allCrns(2, 2).size(), 15u);
    EXPECT_THROW(oracle::allCrns(4, 1), CapacityError);
    EXPECT_THROW(oracle::allCrns(2, 4), CapacityError);
}

TEST(ReactionSpace, EveryCrnIsDistinct) {
    const auto crns = oracle::allCrns(2, 3);
    EXPECT_EQ(crns.size(), 20u);
    for (std::size_t i = 0; i < crns.size(); ++i) {
        for (std::size_t j = i + 1; j < crns.size(); ++j) EXPECT_FALSE(crns[i].sameReactionSet(crns[j]));
    }
}

TEST(BruteForce, Examples) {
    EXPECT_TRUE(oracle::bruteForceCheck(fixtures::dc(), am(2, 1, 2), 5));
    EXPECT_FALSE(oracle::bruteForceCheck(fixtures::am39(), am(1, 1, 3), 5));
    const PathPredicate empty{parsePredicate("A = 1 && A = 2 && B = 0"), StatePredicate::truth(true)};
    EXPECT_FALSE(oracle::bruteForceCheck(fixtures::dc(), empty, 5));
    const PathPredicate huge{parsePredicate("A = 2 && B = 2"), parsePredicate("A = 1000")};
    EXPECT_FALSE(oracle::bruteForceCheck(fixtures::dc(), huge, 10));
}

TEST(BruteForce, DcReachesConsensusInOneStutterStep) {
    // From (a, b) with a > b, one stutter step of A + B -> 2A with n = b ends in (a + b, 0).
    for (Count a = 2; a <= 10; ++a) {
        for (Count b = 1; b < a; ++b) EXPECT_TRUE(oracle::bruteForceCheck(fixtures::dc(), am(a, b, 2), 1));
    }
    // Without stutter the same needs b single firings.
    EXPECT_FALSE(oracle::bruteForceCheck(fixtures::dc(), am(5, 3, 2), 2, false));
    EXPECT_TRUE(oracle::bruteForceCheck(fixtures::dc(), am(5, 3, 2), 3, false));
}

TEST(BruteForce, CapsAreEnforced) {
    EXPECT_THROW(oracle::bruteForceCheck(fixtures::dc(), am(40, 30, 2), 5), CapacityError);
    EXPECT_THROW(oracle::bruteForceCheck(fixtures::dc(), am(2, 1, 2), 5, Count{1}), CapacityError);
    const PathPredicate unbounded{parsePredicate("A >= 1"), StatePredicate::truth(true)};
    EXPECT_THROW(oracle::bruteForceCheck(fixtures::dc(), unbounded, 5), SpecificationError);
}

TEST(BruteForceProperties, MonotoneInK) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 60; ++t) {
        const Crn c = fixtures::randomCrn(rng, 3, 1 + t % 3);
        for (const auto& phi : amPredicates(InputGrid({{2, 1}, {1, 3}, {2, 2}}), 3)) {
            bool prev = false;
            for (std::size_t k = 1; k <= 6; ++k) {
                const bool now = oracle::bruteForceCheck(c, phi, k);
                EXPECT_TRUE(!prev || now);
                prev = now;
            }
        }
    }
}

TEST(ExhaustiveSynthesis, MajorityWithTwoSpeciesIsDirectCompetition) {
    const auto found = oracle::exhaustiveSynthesis(resolveBenchmark("am", 2).problem(2, 5));
    ASSERT_EQ(found.size(), 1u);
    EXPECT_TRUE(found[0].sameReactionSet(fixtures::dc()));
}

TEST(ExhaustiveSynthesis, InvariantUnderPredicateOrder) {
    SynthesisProblem p = resolveBenchmark("am", 2).problem(2, 3);
    p.predicates = amPredicates(InputGrid({{1, 2}, {3, 1}, {2, 2}}), 2);
    const auto a = oracle::exhaustiveSynthesis(p);
    std::reverse(p.predicates.begin(), p.predicates.end());
    const auto b = oracle::exhaustiveSynthesis(p);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].sameReactionSet(b[i]));
}

TEST(ExhaustiveSynthesis, UnreachableFinalGivesNothing) {
    SynthesisProblem p = resolveBenchmark("am", 2).problem(1, 5);
    p.predicates = {{parsePredicate("A = 3 && B = 3"), parsePredicate("A = 1000")}};
    EXPECT_TRUE(oracle::exhaustiveSynthesis(p).empty());
}

TEST(MinimalSteps, DirectCompetitionNeedsOneStutterStep) {
    const auto preds = resolveBenchmark("am", 2).predicates();
    EXPECT_EQ(oracle::minimalSteps(fixtures::dc(), preds, 5), 1u);
    // Single firings: the longest path is from (5, 5) or (10, 9): min(a, b) firings.
    EXPECT_EQ(oracle::minimalSteps(fixtures::dc(), preds, 12, false), 10u);
}

TEST(BruteForce, DirectCompetitionDecidesTwoOneInOneStutterStep) {
    // (2,1) -> (3,0) by firing A + B -> 2A once; the single B is consumed
    const auto phi = amPredicates(InputGrid({{2, 1}}), 2).front();
    EXPECT_TRUE(oracle::bruteForceCheck(fixtures::dc(), phi, 1));
    EXPECT_TRUE(oracle::bruteForceCheck(fixtures::dc(), phi, 1, false));
    EXPECT_EQ(fire(fixtures::dc(), 1, {2, 1}), SysState({3, 0}));
}
