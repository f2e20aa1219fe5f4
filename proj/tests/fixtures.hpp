#ifndef CRNSYNTH_TESTS_FIXTURES_HPP
#define CRNSYNTH_TESTS_FIXTURES_HPP

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "crnsynth/crn.hpp"
#include "crnsynth/problem.hpp"

namespace fixtures {

using namespace crnsynth;

/// Reaction from sparse sides, e.g. rx(2, {{0, 1}, {1, 1}}, {{1, 2}}) is A + B -> 2B.
inline Reaction rx(std::size_t n, std::vector<std::pair<std::size_t, Count>> lhs,
                   std::vector<std::pair<std::size_t, Count>> rhs, double rate = 1.0) {
    Reaction r;
    r.reactants.assign(n, 0);
    r.products.assign(n, 0);
    for (auto [s, c] : lhs) r.reactants[s] += c;
    for (auto [s, c] : rhs) r.products[s] += c;
    r.rate = rate;
    return r;
}

/// Direct competition: A + B -> 2B, A + B -> 2A.
inline Crn dc(double k1 = 1.0, double k2 = 1.0) {
    return Crn({"A", "B"}, {rx(2, {{0, 1}, {1, 1}}, {{1, 2}}, k1), rx(2, {{0, 1}, {1, 1}}, {{0, 2}}, k2)}, {"A", "B"},
               {"A", "B"});
}

/// Three-reaction approximate majority: A + B -> 2X, A + X -> 2A, B + X -> 2B.
inline Crn am39(double k1 = 1.0, double k2 = 1.0, double k3 = 1.0) {
    return Crn({"A", "B", "X"},
               {rx(3, {{0, 1}, {1, 1}}, {{2, 2}}, k1), rx(3, {{0, 1}, {2, 1}}, {{0, 2}}, k2),
                rx(3, {{1, 1}, {2, 1}}, {{1, 2}}, k3)},
               {"A", "B"}, {"A", "B"});
}

/// Uniformly random bimolecular CRN with distinct, non-identity reactions.
inline Crn randomCrn(std::mt19937_64& rng, std::size_t numSpecies, std::size_t numReactions) {
    std::uniform_int_distribution<std::size_t> pick(0, numSpecies - 1);
    std::uniform_real_distribution<double> rate(0.1, 5.0);
    std::vector<Reaction> rs;
    while (rs.size() < numReactions) {
        Reaction r = rx(numSpecies, {{pick(rng), 1}, {pick(rng), 1}}, {{pick(rng), 1}, {pick(rng), 1}}, rate(rng));
        if (r.reactants == r.products) continue;
        bool dup = false;
        for (const auto& q : rs) dup = dup || q.sameStructure(r);
        if (!dup) rs.push_back(r);
    }
    return Crn(canonicalSpeciesNames(numSpecies), rs);
}

inline std::filesystem::path tempDir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("crnsynth_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    return dir;
}

inline bool haveZ3() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

} // namespace fixtures

#endif
