#include "hyreach/bench.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyreach {

Scenario comparisonBase() {
    Scenario s;
    s.syncMode = SyncMode::UnsyncedOnly;
    s.maxRefinements = 0;
    return s;
}

std::vector<GridCell> compareMethods(const Scenario& base, const std::vector<double>& masses,
                                     const std::vector<double>& speeds, const std::vector<IntersectionMethod>& methods) {
    std::vector<GridCell> cells;
    for (IntersectionMethod m : methods) {
        auto part = runGrid(base, masses, speeds, m);
        cells.insert(cells.end(), part.begin(), part.end());
    }
    return cells;
}

namespace {

const GridCell* findCell(const std::vector<GridCell>& cells, double m, double v, IntersectionMethod method) {
    for (const auto& c : cells) {
        if (c.mass == m && c.speed == v && c.method == method) return &c;
    }
    return nullptr;
}

std::vector<std::pair<double, double>> cases(const std::vector<GridCell>& cells) {
    std::vector<std::pair<double, double>> out;
    for (const auto& c : cells) {
        const std::pair<double, double> key{c.mass, c.speed};
        if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    }
    return out;
}

std::string cell(const std::optional<double>& x, double scale) { return x ? formatNumber(*x * scale) : ""; }

double seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

bool sameCells(const std::vector<GridCell>& a, const std::vector<GridCell>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const GridCell& x = a[i];
        const GridCell& y = b[i];
        if (x.mass != y.mass || x.speed != y.speed || x.failed != y.failed || x.error != y.error ||
            x.verdict != y.verdict || x.peakForce != y.peakForce || x.segments != y.segments ||
            x.measure2 != y.measure2 || x.measure3 != y.measure3)
            return false;
    }
    return true;
}

}  // namespace

void writeMeasureTable(std::ostream& out, const std::vector<GridCell>& cells,
                       const std::vector<IntersectionMethod>& methods) {
    out << "mass,speed";
    for (auto m : methods) {
        const std::string n = toString(m);
        out << ',' << n << "_second_e3," << n << "_third_e3," << n << "_failed";
    }
    out << '\n';
    for (const auto& [mass, speed] : cases(cells)) {
        out << formatNumber(mass) << ',' << formatNumber(speed);
        for (auto m : methods) {
            const GridCell* c = findCell(cells, mass, speed, m);
            if (!c) {
                out << ",,,";
                continue;
            }
            out << ',' << cell(c->measure2, 1e3) << ',' << cell(c->measure3, 1e3) << ',' << (c->failed ? 1 : 0);
        }
        out << '\n';
    }
}

void writeTimeTable(std::ostream& out, const std::vector<GridCell>& cells,
                    const std::vector<IntersectionMethod>& methods) {
    auto done = [&](double mass, double speed, IntersectionMethod m) {
        const GridCell* c = findCell(cells, mass, speed, m);
        return c && !c->failed && c->seconds2 && c->seconds3;
    };
    // a method that never completes would empty the table; it is reported blank instead
    std::vector<IntersectionMethod> ranked;
    for (auto m : methods) {
        for (const auto& [mass, speed] : cases(cells)) {
            if (done(mass, speed, m)) {
                ranked.push_back(m);
                break;
            }
        }
    }
    std::vector<std::pair<double, double>> complete;
    for (const auto& [mass, speed] : cases(cells)) {
        bool all = true;
        for (auto m : ranked) all = all && done(mass, speed, m);
        if (all) complete.push_back({mass, speed});
    }
    out << "intersection,cases";
    for (auto m : methods) out << ',' << toString(m) << "_s";
    out << '\n';
    for (int order : {2, 3}) {
        out << (order == 2 ? "second" : "third") << ',' << complete.size();
        for (auto m : methods) {
            out << ',';
            if (complete.empty() || std::find(ranked.begin(), ranked.end(), m) == ranked.end()) continue;
            double sum = 0.0;
            for (const auto& [mass, speed] : complete) {
                const GridCell* c = findCell(cells, mass, speed, m);
                sum += order == 2 ? *c->seconds2 : *c->seconds3;
            }
            out << formatNumber(sum / double(complete.size()));
        }
        out << '\n';
    }
}

std::vector<KernelTiming> timeKernels(const Scenario& scenario, int samples, const std::vector<double>& masses,
                                      const std::vector<double>& speeds) {
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::vector<KernelTiming> rows;

    const ScenarioResult run = runScenario(scenario);
    ContainmentOptions co;
    co.samples = samples;
    co.seed = scenario.seed;
    {
        KernelTiming k;
        k.kernel = "containment";
        k.threads = threads;
        auto t0 = std::chrono::steady_clock::now();
        const auto par = checkContainment(run, co);
        k.parallelSeconds = seconds(t0);
        t0 = std::chrono::steady_clock::now();
        const auto ser = checkContainment(run, co, true);
        k.serialSeconds = seconds(t0);
        k.identical = par.checkedPoints == ser.checkedPoints && par.violations.size() == ser.violations.size() &&
                      par.simulationErrors == ser.simulationErrors;
        rows.push_back(k);
    }
    {
        KernelTiming k;
        k.kernel = "grid";
        k.threads = threads;
        auto t0 = std::chrono::steady_clock::now();
        const auto par = runGrid(scenario, masses, speeds, scenario.method);
        k.parallelSeconds = seconds(t0);
        t0 = std::chrono::steady_clock::now();
        const auto ser = runGridSerial(scenario, masses, speeds, scenario.method);
        k.serialSeconds = seconds(t0);
        k.identical = sameCells(par, ser);
        rows.push_back(k);
    }
    return rows;
}

void writeKernelTable(std::ostream& out, const std::vector<KernelTiming>& rows) {
    out << "kernel,threads,parallel_s,serial_s,speedup,identical\n";
    for (const auto& r : rows) {
        const double speedup = r.parallelSeconds > 0.0 ? r.serialSeconds / r.parallelSeconds : 0.0;
        out << r.kernel << ',' << r.threads << ',' << formatNumber(r.parallelSeconds) << ','
            << formatNumber(r.serialSeconds) << ',' << formatNumber(speedup) << ',' << (r.identical ? 1 : 0) << '\n';
    }
}

void runBench(const BenchConfig& config, const std::string& dir, std::ostream* log) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [&](const char* name, auto&& fill) {
        std::ofstream f(fs::path(dir) / name);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        fill(f);
        if (!f) throw std::runtime_error(std::string("write failed: ") + name);
        if (log) *log << "wrote " << (fs::path(dir) / name).string() << '\n';
    };

    const auto cells = compareMethods(comparisonBase(), config.masses, config.speeds, config.methods);
    write("measures.csv", [&](std::ostream& o) { writeMeasureTable(o, cells, config.methods); });
    write("times.csv", [&](std::ostream& o) { writeTimeTable(o, cells, config.methods); });
    write("runs.csv", [&](std::ostream& o) { writeGridCsv(o, cells); });

    const Scenario kernelCase =
        gridScenario(Scenario{}, config.kernelMass, config.kernelSpeed, IntersectionMethod::Trinal);
    const auto kernels = timeKernels(kernelCase, config.kernelSamples, config.kernelMasses, config.kernelSpeeds);
    write("kernels.csv", [&](std::ostream& o) { writeKernelTable(o, kernels); });
}

}  // namespace hyreach
