// crnsynth: command-line front end.
//
// Exit codes: 0 success, 2 usage or input error, 3 timeout, 4 numerical failure.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crnsynth/crn.hpp"
#include "crnsynth/crn_json.hpp"
#include "crnsynth/csv.hpp"
#include "crnsynth/ctmc/generator.hpp"
#include "crnsynth/ctmc/hitting_time.hpp"
#include "crnsynth/ctmc/probability.hpp"
#include "crnsynth/ctmc/state_space.hpp"
#include "crnsynth/ctmc/transient.hpp"
#include "crnsynth/oracle.hpp"
#include "crnsynth/parallel.hpp"
#include "crnsynth/specs.hpp"
#include "crnsynth/synthesis.hpp"
#include "crnsynth/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace crnsynth;

namespace {

constexpr const char* kTool = "crnsynth";
constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 2, kTimeout = 3, kNumerical = 4 };

std::string sha256File(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StructuralError("cannot open '" + path + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

/// Everything needed to rerun a command: argv, parameters, input digests.
class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> argv) : start_(std::chrono::steady_clock::now()) {
        j_["tool"] = kTool;
        j_["version"] = kVersion;
        j_["command"] = std::move(command);
        j_["argv"] = std::move(argv);
        j_["parameters"] = json::object();
        j_["inputs"] = json::object();
        j_["outputs"] = json::array();
        j_["seeds"] = json::object();
    }
    template <class T>
    void param(const std::string& key, const T& value) { j_["parameters"][key] = value; }
    void input(const std::string& path) {
        if (path == "am" || path == "div") return;
        j_["inputs"][path] = sha256File(path);
    }
    void seed(const std::string& key, std::uint64_t s) { j_["seeds"][key] = s; }
    void output(const std::string& path) { j_["outputs"].push_back(path); }
    void set(const std::string& key, json value) { j_[key] = std::move(value); }

    void write(const std::string& path) {
        j_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (path == "-") {
            std::cerr << j_.dump() << "\n";
            return;
        }
        std::ofstream os(path);
        os << j_.dump(2) << "\n";
        if (!os) throw Error("cannot write manifest '" + path + "'");
    }

private:
    json j_;
    std::chrono::steady_clock::time_point start_;
};

/// Output stream that is either stdout ("-") or a file.
class Sink {
public:
    explicit Sink(const std::string& path) : path_(path) {
        if (path != "-") {
            if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
            file_.open(path);
            if (!file_) throw Error("cannot write '" + path + "'");
        }
    }
    std::ostream& os() { return path_ == "-" ? std::cout : file_; }
    /// Manifest goes next to a file output, or to stderr for stdout output.
    std::string manifestPath() const { return path_ == "-" ? "-" : path_ + ".manifest.json"; }

private:
    std::string path_;
    std::ofstream file_;
};

std::vector<double> parseDoubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw PreconditionError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::size_t> parseCounts(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parseDoubles(text)) {
        if (v < 0 || v != std::floor(v)) throw PreconditionError("not a nonnegative integer: " + formatDouble(v));
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

/// "LO..HI" inclusive.
std::pair<std::size_t, std::size_t> parseRange(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) throw PreconditionError("range must look like LO..HI");
    const auto lo = parseCounts(text.substr(0, dots)), hi = parseCounts(text.substr(dots + 2));
    if (lo.size() != 1 || hi.size() != 1 || lo[0] > hi[0]) throw PreconditionError("range must look like LO..HI with LO <= HI");
    return {lo[0], hi[0]};
}

std::string stateLabel(const Crn& crn, const SysState& x) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + crn.species()[i].name + "=" + std::to_string(x[i]);
    return s;
}

/// Start state with round(fraction * n) A, the rest B, everything else 0.
SysState splitState(const Crn& crn, std::size_t n, double fraction) {
    if (fraction < 0 || fraction > 1) throw PreconditionError("fractions must lie in [0, 1]");
    const auto a = static_cast<Count>(std::llround(fraction * static_cast<double>(n)));
    std::vector<Count> counts(crn.numSpecies(), 0);
    counts.at(crn.indexOf("A")) = a;
    counts.at(crn.indexOf("B")) = static_cast<Count>(n) - a;
    return SysState(std::move(counts));
}

// ---------------------------------------------------------------------------
// Shared option groups

struct SpecOptions {
    std::string spec = "am";
    std::size_t species = 2;
};

struct SynthOptions {
    SpecOptions spec;
    std::size_t reactions = 2;
    std::size_t steps = 5;
    bool noStutter = false;
    std::string stutterBound = "exact";
    std::string backend = "exec";
    std::string solver = "z3";
    double timeout = 7200.0;
    std::string dumpSmt;
    bool z3Preprocess = false;
};

void addSpecOptions(CLI::App* cmd, SpecOptions& o, bool speciesFlag = true) {
    cmd->add_option("--spec", o.spec, "am, div, or a spec JSON file")->capture_default_str();
    if (speciesFlag) cmd->add_option("--species", o.species, "number of species N")->check(CLI::PositiveNumber)->capture_default_str();
}

void addSynthOptions(CLI::App* cmd, SynthOptions& o) {
    addSpecOptions(cmd, o.spec);
    cmd->add_option("--reactions", o.reactions, "number of reactions M")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--steps", o.steps, "path length bound K")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--no-stutter", o.noStutter, "single firings instead of stutter steps");
    cmd->add_option("--stutter-bound", o.stutterBound, "exact or literal")
        ->check(CLI::IsMember({"exact", "literal"}))
        ->capture_default_str();
    cmd->add_option("--backend", o.backend, "exec (SMT-LIB solver process) or builtin")
        ->check(CLI::IsMember({"exec", "builtin"}))
        ->capture_default_str();
    cmd->add_option("--solver", o.solver, "solver executable for --backend exec")->capture_default_str();
    cmd->add_option("--timeout", o.timeout, "seconds per enumeration run")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--dump-smt", o.dumpSmt, "directory for one SMT-LIB script per iteration");
    cmd->add_flag("--z3-preprocess", o.z3Preprocess, "z3 only: run a simplifying tactic before each check");
}

BenchmarkSpec loadSpec(const SpecOptions& o) {
    BenchmarkSpec spec = resolveBenchmark(o.spec, o.species);
    spec.predicates(); // validates N for the benchmark
    return spec;
}

SynthesisProblem makeProblem(const SynthOptions& o, std::size_t steps) {
    const BenchmarkSpec spec = loadSpec(o.spec);
    SynthesisProblem p = spec.problem(o.reactions, steps, !o.noStutter);
    p.stutterBound = o.stutterBound == "literal" ? StutterBound::Literal : StutterBound::Exact;
    return p;
}

SolverBackend makeBackend(const SynthOptions& o) {
    SolverBackend b = o.backend == "builtin" ? SolverBackend::builtin() : SolverBackend::external(o.solver);
    b.timeoutSeconds = o.timeout;
    if (!o.dumpSmt.empty()) b.dumpDir = o.dumpSmt;
    if (o.z3Preprocess) b.checkCommand = kZ3PreprocessCheck;
    return b;
}

void recordSynth(Manifest& m, const SynthOptions& o) {
    m.param("spec", o.spec.spec);
    m.param("species", o.spec.species);
    m.param("reactions", o.reactions);
    m.param("steps", o.steps);
    m.param("stutter", !o.noStutter);
    m.param("stutter_bound", o.stutterBound);
    m.param("backend", o.backend);
    m.param("solver", o.solver);
    m.param("timeout", o.timeout);
    m.param("z3_preprocess", o.z3Preprocess);
    m.input(o.spec.spec);
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
    std::vector<std::string> argv;
    bool verbose = false;
};

int cmdSynth(const Context& cx, const SynthOptions& o, std::size_t maxSolutions, const std::string& out,
             std::string timingPath) {
    Manifest m("synth", cx.argv);
    recordSynth(m, o);
    m.param("max_solutions", maxSolutions);
    const SynthesisProblem problem = makeProblem(o, o.steps);
    const SolverBackend backend = makeBackend(o);
    SolutionCallback progress;
    if (cx.verbose) {
        progress = [](const Crn& c, std::size_t i, double secs) {
            std::cerr << "solution " << i << " (" << formatDouble(secs) << " s):";
            for (std::size_t r = 0; r < c.numReactions(); ++r) std::cerr << (r ? "; " : " ") << reactionToString(c, r);
            std::cerr << "\n";
        };
    }
    const SynthesisOutcome outcome =
        enumerate(problem, backend, maxSolutions ? maxSolutions : std::numeric_limits<std::size_t>::max(), progress);
    Sink sink(out);
    sink.os() << outcomeToJson(outcome, false).dump(2) << "\n";
    if (timingPath.empty() && out != "-") timingPath = out + ".timing.csv";
    if (!timingPath.empty()) {
        Sink timing(timingPath);
        writeCsvRow(timing.os(), {"index", "solve_seconds", "cumulative_seconds"});
        double cumulative = 0.0;
        for (std::size_t i = 0; i < outcome.solveSeconds.size(); ++i) {
            cumulative += outcome.solveSeconds[i];
            writeCsvRow(timing.os(), {std::to_string(i), formatDouble(outcome.solveSeconds[i]), formatDouble(cumulative)});
        }
        m.output(timingPath);
    }
    m.output(out);
    m.set("status", toString(outcome.status));
    m.set("solutions", outcome.solutions.size());
    m.set("solver_wall_seconds", outcome.wallSeconds);
    m.write(sink.manifestPath());
    if (cx.verbose) {
        std::cerr << outcome.solutions.size() << " solutions, " << toString(outcome.status) << ", "
                  << formatDouble(outcome.wallSeconds) << " s\n";
    }
    return outcome.status == SynthesisStatus::Timeout ? kTimeout : kOk;
}

int cmdSweepK(const Context& cx, const SynthOptions& o, std::size_t maxSteps, std::size_t jobs, bool omitTiming,
              const std::string& out) {
    if (maxSteps < o.steps) throw PreconditionError("--max-steps must be at least --steps");
    Manifest m("sweep-k", cx.argv);
    recordSynth(m, o);
    m.param("max_steps", maxSteps);
    m.param("omit_timing", omitTiming);
    const SolverBackend backend = makeBackend(o);
    const std::size_t cells = maxSteps - o.steps + 1;
    std::vector<SynthesisOutcome> outcomes(cells);
    parallelFor(cells, jobs, [&](std::size_t c) {
        SolverBackend b = backend;
        if (b.dumpDir) b.dumpDir = (fs::path(*b.dumpDir) / ("K" + std::to_string(o.steps + c))).string();
        outcomes[c] = enumerate(makeProblem(o, o.steps + c), b);
    });
    Sink sink(out);
    std::vector<std::string> header{"K", "solutions", "status"};
    if (!omitTiming) header.push_back("wallSeconds");
    writeCsvRow(sink.os(), header);
    bool timedOut = false;
    for (const auto& oc : outcomes) {
        std::vector<std::string> row{std::to_string(oc.problem.maxSteps), std::to_string(oc.solutions.size()),
                                     toString(oc.status)};
        if (!omitTiming) row.push_back(formatDouble(oc.wallSeconds));
        writeCsvRow(sink.os(), row);
        timedOut = timedOut || oc.status == SynthesisStatus::Timeout;
    }
    m.output(out);
    m.write(sink.manifestPath());
    return timedOut ? kTimeout : kOk;
}

struct TuneOptions {
    std::string crnFile;
    SpecOptions spec;
    std::size_t burnIn = 20, samples = 20;
    std::size_t longBurnIn = 700, longSamples = 700;
    std::size_t top = 0;
    double gate = 0.5;
    double tFinal = 100.0;
    double sd = 0.5;
    double beta = 50.0;
    std::uint64_t seed = 1;
    bool terminalOnly = false;
    std::size_t jobs = 1;
    std::string outDir;
};

int cmdTune(const Context& cx, const TuneOptions& o) {
    Manifest m("tune", cx.argv);
    const auto crns = readCrnFile(o.crnFile);
    if (crns.empty()) throw SpecificationError("no CRN in '" + o.crnFile + "'");
    SpecOptions so = o.spec;
    so.species = crns.front().numSpecies();
    const BenchmarkSpec spec = loadSpec(so);
    const auto predicates = spec.predicates();

    tuner::RankConfig rc;
    rc.shortRun.burnIn = o.burnIn;
    rc.shortRun.samples = o.samples;
    rc.shortRun.tFinal = o.tFinal;
    rc.shortRun.proposalStdDev = o.sd;
    rc.shortRun.beta = o.beta;
    rc.shortRun.rngSeed = o.seed;
    rc.shortRun.terminalOnly = o.terminalOnly;
    rc.shortRun.jobs = o.jobs;
    rc.topCount = o.top;
    rc.gate = o.gate;
    if (o.top > 0) {
        tuner::TuneConfig lc = rc.shortRun;
        lc.burnIn = o.longBurnIn;
        lc.samples = o.longSamples;
        rc.longRun = lc;
    }
    m.input(o.crnFile);
    m.input(o.spec.spec);
    m.param("spec", o.spec.spec);
    m.param("burnin", o.burnIn);
    m.param("samples", o.samples);
    m.param("top", o.top);
    m.param("long_burnin", o.longBurnIn);
    m.param("long_samples", o.longSamples);
    m.param("gate", o.gate);
    m.param("tfinal", o.tFinal);
    m.param("proposal_sd", o.sd);
    m.param("beta", o.beta);
    m.param("terminal_only", o.terminalOnly);
    m.seed("mcmc", o.seed);

    const auto rows = tuner::rankCandidates(crns, predicates, rc);
    fs::create_directories(o.outDir);
    const fs::path dir(o.outDir);
    {
        Sink report((dir / "report.csv").string());
        writeCsvRow(report.os(), {"rank", "crnId", "preOptObjective", "shortObjective", "longObjective"});
        json jr = json::array();
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& r = rows[k];
            writeCsvRow(report.os(), {std::to_string(k + 1), std::to_string(r.crnId), formatDouble(r.preOptObjective),
                                      formatDouble(r.shortObjective),
                                      r.longObjective ? formatDouble(*r.longObjective) : ""});
            json row{{"rank", k + 1},
                     {"crnId", r.crnId},
                     {"preOptObjective", r.preOptObjective},
                     {"shortObjective", r.shortObjective},
                     {"longObjective", r.longObjective ? json(*r.longObjective) : json(nullptr)},
                     {"bestRates", r.bestRates}};
            jr.push_back(std::move(row));
        }
        Sink reportJson((dir / "report.json").string());
        reportJson.os() << jr.dump(2) << "\n";
        m.output((dir / "report.csv").string());
        m.output((dir / "report.json").string());
    }
    for (const auto& r : rows) {
        const std::string id = std::to_string(r.crnId);
        Sink best((dir / ("best_rates_" + id + ".json")).string());
        best.os() << crnToJson(crns[r.crnId].withRates(r.bestRates)).dump(2) << "\n";
        auto writeTrace = [&](const tuner::TuneResult& t, const std::string& name) {
            Sink trace((dir / name).string());
            std::vector<std::string> header{"iteration"};
            for (std::size_t d = 0; d < crns[r.crnId].numReactions(); ++d) header.push_back("k_" + std::to_string(d + 1));
            header.insert(header.end(), {"objective", "accepted", "bestSoFar"});
            writeCsvRow(trace.os(), header);
            for (const auto& e : t.trace) {
                std::vector<std::string> row{std::to_string(e.iteration)};
                for (double k : e.rates) row.push_back(formatDouble(k));
                row.insert(row.end(), {formatDouble(e.objective), e.accepted ? "1" : "0", formatDouble(e.bestSoFar)});
                writeCsvRow(trace.os(), row);
            }
            m.output((dir / name).string());
        };
        writeTrace(r.shortResult, "trace_" + id + ".csv");
        if (r.longResult) writeTrace(*r.longResult, "trace_long_" + id + ".csv");
    }
    m.write((dir / "manifest.json").string());
    return kOk;
}

int cmdHeatmap(const Context& cx, const std::string& crnFile, std::size_t crnIndex, SpecOptions so, double tFinal,
               bool terminalOnly, std::size_t jobs, const std::string& out) {
    Manifest m("heatmap", cx.argv);
    const auto crns = readCrnFile(crnFile);
    if (crnIndex >= crns.size()) throw PreconditionError("--crn-index out of range");
    const Crn& crn = crns[crnIndex];
    so.species = crn.numSpecies();
    const BenchmarkSpec spec = loadSpec(so);
    ctmc::ScoreOptions opts;
    opts.tFinal = tFinal;
    opts.terminalOnly = terminalOnly;
    opts.jobs = jobs;
    const ctmc::ScoringContext ctx(crn, spec.predicates(), opts);
    const auto ps = ctx.probabilities(crn.rates());
    Sink sink(out);
    writeCsvRow(sink.os(), {"a", "b", "probability"});
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto [a, b] = spec.grid.pairs()[i];
        writeCsvRow(sink.os(), {std::to_string(a), std::to_string(b), formatDouble(ps[i])});
    }
    m.input(crnFile);
    m.input(so.spec);
    m.param("crn_index", crnIndex);
    m.param("spec", so.spec);
    m.param("tfinal", tFinal);
    m.param("terminal_only", terminalOnly);
    m.output(out);
    m.write(sink.manifestPath());
    return kOk;
}

int cmdHitting(const Context& cx, const std::string& crnFile, std::size_t crnIndex, const std::string& fractions,
               const std::string& range, bool noScaling, const std::string& out) {
    Manifest m("hitting", cx.argv);
    const auto crns = readCrnFile(crnFile);
    if (crnIndex >= crns.size()) throw PreconditionError("--crn-index out of range");
    const Crn& crn = crns[crnIndex];
    const auto shares = parseDoubles(fractions);
    const auto [lo, hi] = parseRange(range);
    Sink sink(out);
    writeCsvRow(sink.os(), {"n", "fraction", "initialConfig", "expectedTime"});
    for (std::size_t n = lo; n <= hi; ++n) {
        for (double f : shares) {
            const SysState x0 = splitState(crn, n, f);
            const auto space = ctmc::buildStateSpace(crn, std::vector<SysState>{x0});
            const auto gen = ctmc::buildGenerator(crn, space);
            const auto tau = ctmc::expectedHittingTime(gen, space, !noScaling);
            writeCsvRow(sink.os(), {std::to_string(n), formatDouble(f), stateLabel(crn, x0), formatDouble(tau.tau[0])});
        }
    }
    m.input(crnFile);
    m.param("crn_index", crnIndex);
    m.param("fractions", fractions);
    m.param("n_range", range);
    m.param("scale_by_total", !noScaling);
    m.output(out);
    m.write(sink.manifestPath());
    return kOk;
}

int cmdCmeBench(const Context& cx, const std::string& crnFile, std::size_t crnIndex, const std::string& nList,
                double fraction, const std::string& out) {
    Manifest m("cme-bench", cx.argv);
    const auto crns = readCrnFile(crnFile);
    if (crnIndex >= crns.size()) throw PreconditionError("--crn-index out of range");
    const Crn& crn = crns[crnIndex];
    Sink sink(out);
    writeCsvRow(sink.os(), {"n", "stateCount", "wallSeconds", "tFinal", "terminalMass"});
    for (std::size_t n : parseCounts(nList)) {
        if (n == 0) throw PreconditionError("n must be positive");
        const auto start = std::chrono::steady_clock::now();
        const auto space = ctmc::buildStateSpace(crn, std::vector<SysState>{splitState(crn, n, fraction)});
        const auto gen = ctmc::buildGenerator(crn, space);
        const double t = 100.0 / static_cast<double>(n);
        const auto pi = ctmc::integrateCme(gen, ctmc::pointMass(space.size(), 0), t);
        double terminalMass = 0.0;
        for (auto s : space.terminalStates) terminalMass += pi[s];
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        writeCsvRow(sink.os(), {std::to_string(n), std::to_string(space.size()), formatDouble(secs), formatDouble(t),
                                formatDouble(terminalMass)});
        sink.os().flush();
    }
    m.input(crnFile);
    m.param("crn_index", crnIndex);
    m.param("n_list", nList);
    m.param("fraction", fraction);
    m.output(out);
    m.write(sink.manifestPath());
    return kOk;
}

int cmdTransient(const Context& cx, const std::string& crnFile, std::size_t crnIndex, const std::string& init,
                 const std::string& times, const std::string& finalPred, double tol, const std::string& out) {
    Manifest m("transient", cx.argv);
    const auto crns = readCrnFile(crnFile);
    if (crnIndex >= crns.size()) throw PreconditionError("--crn-index out of range");
    const Crn& crn = crns[crnIndex];
    const StatePredicate phi0 = parsePredicate(init);
    const auto bound = totalCountBound(phi0, crn.speciesNames());
    if (!bound) throw SpecificationError("--init must bound the total molecule count");
    const auto space = ctmc::buildStateSpace(crn, phi0, *bound);
    const auto gen = ctmc::buildGenerator(crn, space);
    const auto dists = ctmc::integrateCme(gen, ctmc::uniformOver(space.size(), space.initialStates), parseDoubles(times), tol);
    Sink sink(out);
    if (finalPred.empty()) {
        writeCsvRow(sink.os(), {"time", "stateIndex", "state", "probability"});
        for (const auto& d : dists) {
            for (std::size_t s = 0; s < space.size(); ++s) {
                writeCsvRow(sink.os(), {formatDouble(d.time), std::to_string(s), stateLabel(crn, space.states[s]),
                                        formatDouble(d[s])});
            }
        }
    } else {
        const BoundPredicate fin(parsePredicate(finalPred), crn.speciesNames());
        writeCsvRow(sink.os(), {"time", "mass"});
        for (const auto& d : dists) {
            double mass = 0.0;
            for (std::size_t s = 0; s < space.size(); ++s) {
                if (fin(space.states[s])) mass += d[s];
            }
            writeCsvRow(sink.os(), {formatDouble(d.time), formatDouble(mass)});
        }
    }
    m.input(crnFile);
    m.param("init", init);
    m.param("times", times);
    m.param("final", finalPred);
    m.param("tol", tol);
    m.output(out);
    m.write(sink.manifestPath());
    return kOk;
}

int cmdOracle(const Context& cx, const SynthOptions& o, const std::string& out) {
    Manifest m("oracle", cx.argv);
    recordSynth(m, o);
    const SynthesisProblem problem = makeProblem(o, o.steps);
    const auto start = std::chrono::steady_clock::now();
    const auto found = oracle::exhaustiveSynthesis(problem);
    SynthesisOutcome oc;
    oc.problem = problem;
    oc.backend = "oracle";
    oc.solutions = found;
    oc.solveSeconds.assign(found.size(), 0.0);
    oc.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Sink sink(out);
    sink.os() << outcomeToJson(oc, false).dump(2) << "\n";
    m.output(out);
    m.set("solutions", found.size());
    m.write(sink.manifestPath());
    return kOk;
}

int cmdCheck(const Context& cx, const std::string& crnFile, const SynthOptions& o, const std::string& out) {
    Manifest m("check", cx.argv);
    const auto crns = readCrnFile(crnFile);
    Sink sink(out);
    writeCsvRow(sink.os(), {"crnIndex", "satisfied", "ioConstraints", "failedPredicates"});
    bool all = true;
    for (std::size_t c = 0; c < crns.size(); ++c) {
        SynthOptions so = o;
        so.spec.species = crns[c].numSpecies();
        const SynthesisProblem problem = makeProblem(so, o.steps);
        std::size_t failed = 0;
        for (const auto& phi : problem.predicates) {
            if (!oracle::bruteForceCheck(crns[c], phi, problem.maxSteps, problem.stutter, problem.stutterBound)) ++failed;
        }
        const bool io = oracle::meetsIoConstraints(crns[c], problem);
        all = all && failed == 0 && io;
        writeCsvRow(sink.os(), {std::to_string(c), failed == 0 && io ? "1" : "0", io ? "1" : "0",
                                std::to_string(failed)});
    }
    m.input(crnFile);
    recordSynth(m, o);
    m.output(out);
    m.set("all_satisfied", all);
    m.write(sink.manifestPath());
    return kOk;
}

int dispatch(std::vector<std::string> args);

int cmdReplay(const std::string& manifestPath, const std::string& out, const std::string& outDir) {
    const json mj = readJsonFile(manifestPath);
    auto argv = mj.at("argv").get<std::vector<std::string>>();
    for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
        if (!out.empty() && argv[i] == "--out") argv[i + 1] = out;
        if (!outDir.empty() && argv[i] == "--out-dir") argv[i + 1] = outDir;
    }
    return dispatch(argv);
}

int dispatch(std::vector<std::string> args) {
    CLI::App app{"Synthesis and analysis of bimolecular chemical reaction networks", "crnsynth"};
    app.set_version_flag("--version", std::string(kTool) + " " + kVersion);
    app.require_subcommand(1);
    Context cx;
    cx.argv = args;
    app.add_flag("-v,--verbose", cx.verbose, "progress on stderr");

    SynthOptions synth;
    std::size_t maxSolutions = 0;
    std::string out = "-", timing;
    auto* cSynth = app.add_subcommand("synth", "enumerate CRNs satisfying a specification");
    addSynthOptions(cSynth, synth);
    cSynth->add_option("--max-solutions", maxSolutions, "stop after this many (0 = all)")->capture_default_str();
    cSynth->add_option("--out", out, "solutions JSON ('-' for stdout)")->capture_default_str();
    cSynth->add_option("--timing", timing, "per-solution timing CSV (default OUT.timing.csv)");

    SynthOptions sweep;
    std::size_t maxSteps = 5, jobs = 1;
    bool omitTiming = false;
    auto* cSweep = app.add_subcommand("sweep-k", "solution counts for K = --steps .. --max-steps");
    addSynthOptions(cSweep, sweep);
    cSweep->add_option("--max-steps", maxSteps, "largest K")->required()->check(CLI::PositiveNumber);
    cSweep->add_option("--jobs", jobs, "parallel K cells")->check(CLI::PositiveNumber)->capture_default_str();
    cSweep->add_flag("--omit-timing", omitTiming, "drop the wallSeconds column");
    cSweep->add_option("--out", out, "CSV output")->capture_default_str();

    TuneOptions tune;
    auto* cTune = app.add_subcommand("tune", "optimise reaction rates of candidate CRNs");
    cTune->add_option("--crn", tune.crnFile, "CRN JSON (one CRN, an array, or synth output)")->required();
    addSpecOptions(cTune, tune.spec, false);
    cTune->add_option("--burnin", tune.burnIn, "short-run burn-in iterations")->capture_default_str();
    cTune->add_option("--samples", tune.samples, "short-run sample iterations")->capture_default_str();
    cTune->add_option("--top", tune.top, "candidates given a long run")->capture_default_str();
    cTune->add_option("--long-burnin", tune.longBurnIn, "long-run burn-in")->capture_default_str();
    cTune->add_option("--long-samples", tune.longSamples, "long-run samples")->capture_default_str();
    cTune->add_option("--gate", tune.gate, "long run only above this short objective")->capture_default_str();
    cTune->add_option("--tfinal", tune.tFinal, "evaluation time")->capture_default_str();
    cTune->add_option("--proposal-sd", tune.sd, "log-space proposal standard deviation")->check(CLI::PositiveNumber)->capture_default_str();
    cTune->add_option("--beta", tune.beta, "likelihood sharpness")->check(CLI::PositiveNumber)->capture_default_str();
    cTune->add_option("--seed", tune.seed, "RNG seed")->capture_default_str();
    cTune->add_flag("--terminal-only", tune.terminalOnly, "count only terminal final states");
    cTune->add_option("--jobs", tune.jobs, "parallel CME evaluations")->check(CLI::PositiveNumber)->capture_default_str();
    cTune->add_option("--out-dir", tune.outDir, "output directory")->required();

    std::string crnFile;
    std::size_t crnIndex = 0;
    SpecOptions heatSpec;
    double tFinal = 100.0;
    bool terminalOnly = false;
    auto* cHeat = app.add_subcommand("heatmap", "P_Phi per input pair");
    cHeat->add_option("--crn", crnFile, "CRN JSON with rates")->required();
    cHeat->add_option("--crn-index", crnIndex, "which CRN of the file")->capture_default_str();
    addSpecOptions(cHeat, heatSpec, false);
    cHeat->add_option("--tfinal", tFinal, "evaluation time")->capture_default_str();
    cHeat->add_flag("--terminal-only", terminalOnly, "count only terminal final states");
    cHeat->add_option("--jobs", jobs, "parallel CME evaluations")->check(CLI::PositiveNumber)->capture_default_str();
    cHeat->add_option("--out", out, "CSV output")->capture_default_str();

    std::string fractions = "0.1,0.6,0.9", range;
    bool noScaling = false;
    auto* cHit = app.add_subcommand("hitting", "expected time to a terminal state");
    cHit->add_option("--crn", crnFile, "CRN JSON with rates")->required();
    cHit->add_option("--crn-index", crnIndex, "which CRN of the file")->capture_default_str();
    cHit->add_option("--fractions", fractions, "initial share of A, comma separated")->capture_default_str();
    cHit->add_option("--n-range", range, "total molecule counts LO..HI")->required();
    cHit->add_flag("--no-scaling", noScaling, "report unscaled times (volume 1)");
    cHit->add_option("--out", out, "CSV output")->capture_default_str();

    std::string nList = "10,20,30,40,50,60,70,80,90,100";
    double fraction = 0.6;
    auto* cBench = app.add_subcommand("cme-bench", "CME integration timing over [0, 100/n]");
    cBench->add_option("--crn", crnFile, "CRN JSON with rates")->required();
    cBench->add_option("--crn-index", crnIndex, "which CRN of the file")->capture_default_str();
    cBench->add_option("--n-list", nList, "total molecule counts")->capture_default_str();
    cBench->add_option("--fraction", fraction, "initial share of A")->capture_default_str();
    cBench->add_option("--out", out, "CSV output")->capture_default_str();

    std::string init, times = "100", finalPred;
    double tol = ctmc::kDefaultTolerance;
    auto* cTrans = app.add_subcommand("transient", "transient distribution of the CME");
    cTrans->add_option("--crn", crnFile, "CRN JSON with rates")->required();
    cTrans->add_option("--crn-index", crnIndex, "which CRN of the file")->capture_default_str();
    cTrans->add_option("--init", init, "initial predicate, e.g. 'A = 1 && B = 1'")->required();
    cTrans->add_option("--times", times, "output times, comma separated")->capture_default_str();
    cTrans->add_option("--final", finalPred, "report only the mass on states satisfying this predicate");
    cTrans->add_option("--tol", tol, "total-variation tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    cTrans->add_option("--out", out, "CSV output")->capture_default_str();

    SynthOptions orc;
    auto* cOracle = app.add_subcommand("oracle", "exhaustive enumeration (N, M <= 3)");
    addSynthOptions(cOracle, orc);
    cOracle->add_option("--out", out, "solutions JSON")->capture_default_str();

    SynthOptions chk;
    auto* cCheck = app.add_subcommand("check", "explicit-state check of CRNs against a specification");
    cCheck->add_option("--crn", crnFile, "CRN JSON (one CRN, an array, or synth output)")->required();
    addSynthOptions(cCheck, chk);
    cCheck->add_option("--out", out, "CSV output")->capture_default_str();

    std::string manifestPath, outDir;
    auto* cReplay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
    cReplay->add_option("manifest", manifestPath, "manifest JSON")->required();
    cReplay->add_option("--out", out, "replace the recorded --out");
    cReplay->add_option("--out-dir", outDir, "replace the recorded --out-dir");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    if (*cSynth) return cmdSynth(cx, synth, maxSolutions, out, timing);
    if (*cSweep) return cmdSweepK(cx, sweep, maxSteps, jobs, omitTiming, out);
    if (*cTune) return cmdTune(cx, tune);
    if (*cHeat) return cmdHeatmap(cx, crnFile, crnIndex, heatSpec, tFinal, terminalOnly, jobs, out);
    if (*cHit) return cmdHitting(cx, crnFile, crnIndex, fractions, range, noScaling, out);
    if (*cBench) return cmdCmeBench(cx, crnFile, crnIndex, nList, fraction, out);
    if (*cTrans) return cmdTransient(cx, crnFile, crnIndex, init, times, finalPred, tol, out);
    if (*cOracle) return cmdOracle(cx, orc, out);
    if (*cCheck) return cmdCheck(cx, crnFile, chk, out);
    if (*cReplay) return cmdReplay(manifestPath, out == "-" ? std::string() : out, outDir);
    return kUsage;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(args);
    } catch (const TimeoutError& e) {
        std::cerr << "timeout: " << e.what() << "\n";
        return kTimeout;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const BackendError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        if (!e.transcript().empty()) {
            const std::string& t = e.transcript();
            std::cerr << "--- last solver exchange ---\n" << (t.size() > 4000 ? t.substr(t.size() - 4000) : t) << "\n";
        }
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
