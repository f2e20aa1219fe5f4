// Synthesize the two-species majority CRN with the builtin backend, then
// score it stochastically and report expected consensus times.

#include <iostream>

#include "crnsynth/crn_json.hpp"
#include "crnsynth/ctmc/generator.hpp"
#include "crnsynth/ctmc/hitting_time.hpp"
#include "crnsynth/ctmc/probability.hpp"
#include "crnsynth/ctmc/state_space.hpp"
#include "crnsynth/specs.hpp"
#include "crnsynth/synthesis.hpp"

using namespace crnsynth;

int main() {
    const BenchmarkSpec am = resolveBenchmark("am", 2);
    const SynthesisOutcome out = enumerate(am.problem(2, 5), SolverBackend::builtin());
    std::cout << out.solutions.size() << " solution(s), " << toString(out.status) << "\n";
    if (out.solutions.empty()) return 1;

    const Crn& dc = out.solutions.front();
    for (std::size_t r = 0; r < dc.numReactions(); ++r) std::cout << "  " << reactionToString(dc, r) << "\n";

    const ctmc::ScoringContext ctx(dc, am.predicates());
    std::cout << "average P over the input grid at unit rates: " << ctx.average(dc.rates()) << "\n";

    for (Count n : {10, 20, 40}) {
        const SysState x0({n * 6 / 10, n - n * 6 / 10});
        const auto space = ctmc::buildStateSpace(dc, std::vector<SysState>{x0});
        const auto tau = ctmc::expectedHittingTime(ctmc::buildGenerator(dc, space), space, true);
        std::cout << "n=" << n << " expected consensus time (volume n): " << tau.tau[0] << "\n";
    }
    return 0;
}
