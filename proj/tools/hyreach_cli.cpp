// hyreach: reachability verification of the robot contact task.
//
// exit status: 0 safe / passed, 1 not verified / violations, 2 error
#include "hyreach/bench.hpp"
#include "hyreach/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace hyreach;

namespace {

struct Overrides {
    std::string scenarioFile;
    std::string method;
    double mass = 0.0;
    double speed = 0.0;
    double step = 0.0;
    std::string sync;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scenario", scenarioFile, "scenario file (key = value)")->check(CLI::ExistingFile);
        cmd->add_option("--method", method, "geometric|mapping|scaling|tsm|trinal");
        cmd->add_option("--mass", mass, "robot mass; selects the tabulated damping");
        cmd->add_option("--speed", speed, "impact speed");
        cmd->add_option("--step", step, "reachability time step");
        cmd->add_option("--sync", sync, "both|synced|unsynced");
    }

    Scenario load() const {
        Scenario s = scenarioFile.empty() ? Scenario{} : loadScenario(scenarioFile);
        if (mass > 0.0) s = gridScenario(s, mass, s.trajectory.impactSpeed, s.method);
        if (speed > 0.0) s.trajectory.impactSpeed = speed;
        if (!method.empty()) s.method = parseMethod(method);
        if (step > 0.0) s.stepSize = step;
        if (!sync.empty()) s.syncMode = parseSyncMode(sync);
        s.validate();
        return s;
    }
};

std::vector<double> parseList(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::string cellDir(double mass, double speed) {
    return "m" + formatNumber(mass) + "_v" + formatNumber(speed);
}

void summary(const ScenarioResult& r) {
    std::printf("verdict %s\npeak_force %.6g N\nsegments %zu\nstep %g (refinements %d)\nwall %.3f s\n",
                toString(r.safety.verdict).c_str(), r.safety.peakForce, r.reach.segments.size(), r.reach.stepSize,
                r.reach.refinements, r.wallSeconds);
    if (r.safety.contactStart) std::printf("contact_start %.6g s\n", *r.safety.contactStart);
}

int verdictCode(Verdict v) { return v == Verdict::Safe ? 0 : 1; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyreach: zonotope reachability for hybrid automata, robot contact verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Overrides runOpts;
    std::string runOut;
    bool runDump = false;
    auto* run = app.add_subcommand("run", "verify one scenario");
    runOpts.attach(run);
    run->add_option("--out", runOut, "write envelope.csv and run.json here");
    run->add_flag("--dump", runDump, "also write sets.dump");

    Overrides gridOpts;
    std::string masses = "1.5,4.5,8", speeds = "0.1,0.2,0.35,0.45,0.55";
    std::string gridOut = "grid_out";
    bool serial = false, gridExport = false;
    auto* grid = app.add_subcommand("grid", "verify every (mass, speed) pair and write grid.csv");
    gridOpts.attach(grid);
    grid->add_option("--masses", masses, "comma-separated masses")->capture_default_str();
    grid->add_option("--speeds", speeds, "comma-separated impact speeds")->capture_default_str();
    grid->add_option("--out", gridOut, "output directory")->capture_default_str();
    grid->add_flag("--serial", serial, "run cells one after another");
    grid->add_flag("--export", gridExport, "write each cell's envelope and metadata into a subdirectory");

    Overrides checkOpts;
    ContainmentOptions co;
    auto* check = app.add_subcommand("check", "simulate sampled trajectories and check they stay in the reachable sets");
    checkOpts.attach(check);
    check->add_option("--samples", co.samples, "trajectories")->capture_default_str();
    check->add_option("--seed", co.seed, "sampling seed")->capture_default_str();
    check->add_option("--tolerance", co.tolerance, "containment tolerance")->capture_default_str();

    std::string benchOut = "bench_out";
    bool benchQuick = false;
    BenchConfig benchConfig;
    auto* bench = app.add_subcommand("bench", "method comparison tables and kernel timings");
    bench->add_option("--out", benchOut, "output directory")->capture_default_str();
    bench->add_option("--samples", benchConfig.kernelSamples, "containment samples in the kernel timing")
        ->capture_default_str();
    bench->add_flag("--quick", benchQuick, "reduced case list");

    Overrides showOpts;
    auto* show = app.add_subcommand("scenario", "print the effective scenario file, or the key list");
    showOpts.attach(show);
    bool keys = false;
    show->add_flag("--keys", keys, "list accepted keys");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const ScenarioResult r = runScenario(runOpts.load());
            summary(r);
            if (!runOut.empty()) exportRun(r, runOut, runDump);
            return verdictCode(r.safety.verdict);
        }
        if (*grid) {
            const Scenario base = gridOpts.load();
            const auto ms = parseList(masses), vs = parseList(speeds);
            CellSink sink;
            if (gridExport) {
                sink = [&](const ScenarioResult& r) {
                    exportRun(r, (fs::path(gridOut) / cellDir(r.scenario.params.m, r.scenario.trajectory.impactSpeed)).string(),
                              false);
                };
            }
            const auto cells = serial ? runGridSerial(base, ms, vs, base.method, sink)
                                      : runGrid(base, ms, vs, base.method, sink);
            fs::create_directories(gridOut);
            std::ofstream f(fs::path(gridOut) / "grid.csv");
            writeGridCsv(f, cells);
            if (!f) throw std::runtime_error("cannot write grid.csv");
            int failed = 0, safe = 0;
            for (const auto& c : cells) {
                std::printf("m %-4g v %-5g %s\n", c.mass, c.speed,
                            c.failed ? ("FAILED " + c.error).c_str() : toString(c.verdict).c_str());
                failed += c.failed ? 1 : 0;
                safe += !c.failed && c.verdict == Verdict::Safe ? 1 : 0;
            }
            std::printf("%d cells, %d safe, %d failed\n", int(cells.size()), safe, failed);
            return safe == int(cells.size()) ? 0 : 1;
        }
        if (*check) {
            const ScenarioResult r = runScenario(checkOpts.load());
            summary(r);
            const ContainmentReport rep = checkContainment(r, co);
            std::printf("samples %d\nchecked_points %ld\nviolations %zu\nsimulation_errors %d\n", rep.samples,
                        rep.checkedPoints, rep.violations.size(), rep.simulationErrors);
            for (std::size_t i = 0; i < std::min<std::size_t>(rep.violations.size(), 10); ++i) {
                const auto& v = rep.violations[i];
                std::printf("  sample %d t %.6f L%d\n", v.sample, v.time, v.location + 1);
            }
            return rep.passed() ? 0 : 1;
        }
        if (*bench) {
            if (benchQuick) {
                benchConfig.masses = {4.5, 8.0};
                benchConfig.speeds = {0.55};
                benchConfig.kernelSpeeds = {0.45, 0.55};
            }
            runBench(benchConfig, benchOut, &std::cout);
            return 0;
        }
        if (*show) {
            if (keys) {
                for (const auto& [k, help] : scenarioKeys()) std::printf("%-20s %s\n", k.c_str(), help.c_str());
            } else {
                std::cout << formatScenario(showOpts.load());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
