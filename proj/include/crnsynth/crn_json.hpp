#ifndef CRNSYNTH_CRN_JSON_HPP
#define CRNSYNTH_CRN_JSON_HPP

// CRN interchange format:
//   {"species": ["A", "B"],
//    "reactions": [{"reactants": {"A": 1, "B": 1}, "products": {"B": 2}, "rate": 1.0}],
//    "inputs": ["A", "B"], "outputs": ["A", "B"]}
// A missing "rate" means 1.0.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crnsynth/crn.hpp"
#include "crnsynth/error.hpp"

namespace crnsynth {

using json = nlohmann::json;

namespace detail {

inline Stoichiometry readSide(const json& side, const std::vector<std::string>& names, const std::string& where) {
    Stoichiometry v(names.size(), 0);
    if (!side.is_object()) throw StructuralError(where + " must be an object of species counts");
    for (auto it = side.begin(); it != side.end(); ++it) {
        std::size_t idx = names.size();
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == it.key()) idx = i;
        }
        if (idx == names.size()) throw StructuralError(where + " references unknown species '" + it.key() + "'");
        if (!it.value().is_number_integer() || it.value().get<long long>() < 0) {
            throw StructuralError(where + ": count for '" + it.key() + "' must be a nonnegative integer");
        }
        v[idx] += it.value().get<int>();
    }
    return v;
}

inline json writeSide(const Stoichiometry& v, const std::vector<SpeciesId>& species) {
    json side = json::object();
    for (std::size_t s = 0; s < v.size(); ++s) {
        if (v[s] > 0) side[species[s].name] = v[s];
    }
    return side;
}

} // namespace detail

inline Crn crnFromJson(const json& j) {
    try {
        if (!j.is_object()) throw StructuralError("CRN must be a JSON object");
        auto names = j.at("species").get<std::vector<std::string>>();
        std::vector<Reaction> reactions;
        const auto& rxs = j.at("reactions");
        if (!rxs.is_array()) throw StructuralError("\"reactions\" must be an array");
        for (std::size_t r = 0; r < rxs.size(); ++r) {
            const std::string where = "reaction " + std::to_string(r);
            Reaction rx;
            rx.reactants = detail::readSide(rxs[r].at("reactants"), names, where + " reactants");
            rx.products = detail::readSide(rxs[r].at("products"), names, where + " products");
            rx.rate = rxs[r].contains("rate") ? rxs[r].at("rate").get<double>() : 1.0;
            reactions.push_back(std::move(rx));
        }
        std::vector<std::string> inputs, outputs;
        if (j.contains("inputs")) inputs = j.at("inputs").get<std::vector<std::string>>();
        if (j.contains("outputs")) outputs = j.at("outputs").get<std::vector<std::string>>();
        return Crn(std::move(names), std::move(reactions), std::move(inputs), std::move(outputs));
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed CRN JSON: ") + e.what());
    }
}

inline json crnToJson(const Crn& crn) {
    json j;
    j["species"] = crn.speciesNames();
    json rxs = json::array();
    for (const auto& rx : crn.reactions()) {
        rxs.push_back({{"reactants", detail::writeSide(rx.reactants, crn.species())},
                       {"products", detail::writeSide(rx.products, crn.species())},
                       {"rate", rx.rate}});
    }
    j["reactions"] = std::move(rxs);
    json in = json::array(), out = json::array();
    for (auto s : crn.inputs()) in.push_back(crn.species()[s].name);
    for (auto s : crn.outputs()) out.push_back(crn.species()[s].name);
    j["inputs"] = std::move(in);
    j["outputs"] = std::move(out);
    return j;
}

/// Human-readable reaction, e.g. "A + B -> 2B".
inline std::string reactionToString(const Crn& crn, std::size_t r) {
    auto side = [&](const Stoichiometry& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == 0) continue;
            if (!s.empty()) s += " + ";
            if (v[i] > 1) s += std::to_string(v[i]);
            s += crn.species()[i].name;
        }
        return s;
    };
    const auto& rx = crn.reaction(r);
    return side(rx.reactants) + " -> " + side(rx.products);
}

inline json readJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw StructuralError("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Reads either a single CRN object or an array of them (as written by `synth`).
inline std::vector<Crn> readCrnFile(const std::string& path) {
    json j = readJsonFile(path);
    std::vector<Crn> crns;
    if (j.is_array()) {
        for (const auto& item : j) crns.push_back(crnFromJson(item.contains("crn") ? item.at("crn") : item));
    } else if (j.is_object() && j.contains("solutions")) {
        for (const auto& item : j.at("solutions")) crns.push_back(crnFromJson(item.contains("crn") ? item.at("crn") : item));
    } else {
        crns.push_back(crnFromJson(j));
    }
    return crns;
}

} // namespace crnsynth

#endif
