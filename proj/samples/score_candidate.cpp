// Score a CRN from a JSON file against a benchmark and tune its rates.
//
//   sample_score_candidate CRN.json [am|div|SPEC.json] [iterations]

#include <cstdlib>
#include <iostream>
#include <string>

#include "crnsynth/crn_json.hpp"
#include "crnsynth/specs.hpp"
#include "crnsynth/tuner.hpp"

using namespace crnsynth;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: " << argv[0] << " CRN.json [am|div|SPEC.json] [iterations]\n";
        return 2;
    }
    try {
        const Crn crn = readCrnFile(argv[1]).at(0);
        const BenchmarkSpec spec = resolveBenchmark(argc > 2 ? argv[2] : "am", crn.numSpecies());
        tuner::TuneConfig cfg;
        if (argc > 3) cfg.burnIn = cfg.samples = static_cast<std::size_t>(std::atoi(argv[3]));
        const ctmc::ScoringContext ctx(crn, spec.predicates(), cfg.scoreOptions());
        const auto result = tuner::run(ctx, cfg);
        std::cout << "objective at start: " << result.initialObjective << "\n"
                  << "best objective:     " << result.bestObjective << "\n"
                  << "acceptance rate:    " << result.acceptanceRate << "\n"
                  << crnToJson(crn.withRates(result.bestRates)).dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
