#include "hyreach/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace hyreach {

EngineOptions Scenario::engineOptions() const {
    EngineOptions o;
    o.stepSize = stepSize;
    o.tEnd = trajectory.horizon;
    o.method = method;
    o.tuning = tuning;
    o.tuning.maxOrder = maxOrder;
    o.syncThreshold = syncThreshold;
    o.syncMode = syncMode;
    o.maxJumps = maxJumps;
    o.maxOrder = maxOrder;
    o.maxRefinements = maxRefinements;
    return o;
}

void Scenario::validate() const {
    params.validate();
    trajectory.validate();
    if (!(stepSize > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(maxOrder >= 1.0)) throw std::invalid_argument("max_order must be at least 1");
    if (maxJumps < 1) throw std::invalid_argument("max_jumps must be at least 1");
    if (maxRefinements < 0) throw std::invalid_argument("max_refinements must be nonnegative");
    if (tuning.refineFactor < 1) throw std::invalid_argument("refine_factor must be at least 1");
    if (!(tuning.ks > 0.0)) throw std::invalid_argument("ks must be positive");
    if (!(limits.transient > 0.0) || !(limits.quasiStatic > 0.0) || !(limits.window >= 0.0))
        throw std::invalid_argument("force limits must be positive");
}

std::string toString(SyncMode mode) {
    switch (mode) {
        case SyncMode::Both: return "both";
        case SyncMode::SyncedOnly: return "synced";
        case SyncMode::UnsyncedOnly: return "unsynced";
    }
    return "unknown";
}

SyncMode parseSyncMode(const std::string& name) {
    for (auto m : {SyncMode::Both, SyncMode::SyncedOnly, SyncMode::UnsyncedOnly}) {
        if (toString(m) == name) return m;
    }
    throw std::invalid_argument("unknown sync mode '" + name + "'");
}

std::string formatNumber(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

struct Field {
    std::string key;
    std::string help;
    std::function<void(Scenario&, const std::string&)> set;
    std::function<std::string(const Scenario&)> get;
};

double toDouble(const std::string& v) {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters in number '" + v + "'");
    return x;
}

int toInt(const std::string& v) {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters in integer '" + v + "'");
    return x;
}

template <class T>
Field real(const char* key, const char* help, T Scenario::*part, double T::*member) {
    return {key, help, [=](Scenario& s, const std::string& v) { (s.*part).*member = toDouble(v); },
            [=](const Scenario& s) { return formatNumber((s.*part).*member); }};
}

Field real(const char* key, const char* help, double Scenario::*member) {
    return {key, help, [=](Scenario& s, const std::string& v) { s.*member = toDouble(v); },
            [=](const Scenario& s) { return formatNumber(s.*member); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = [] {
        std::vector<Field> f{
            real("m", "effective mass [kg]", &Scenario::params, &ContactParams::m),
            real("kt", "impedance stiffness [N/m]", &Scenario::params, &ContactParams::kt),
            real("dt", "impedance damping [Ns/m]; defaults to the tabulated value for m", &Scenario::params,
                 &ContactParams::dt),
            real("dr", "reaction damping [Ns/m]", &Scenario::params, &ContactParams::dr),
            real("ft", "reaction force threshold [N]", &Scenario::params, &ContactParams::ft),
            real("ke", "environment stiffness [N/m]", &Scenario::params, &ContactParams::ke),
            real("de", "environment damping [Ns/m]", &Scenario::params, &ContactParams::de),
            real("l", "surface position [m]", &Scenario::params, &ContactParams::l),
            real("d1", "input delay [s]", &Scenario::params, &ContactParams::d1),
            real("d2", "state feedback delay [s]", &Scenario::params, &ContactParams::d2),
            real("impact_time", "time of surface contact on the desired path [s]", &Scenario::trajectory,
                 &TrajectorySpec::impactTime),
            real("impact_speed", "desired speed at contact [m/s]", &Scenario::trajectory,
                 &TrajectorySpec::impactSpeed),
            real("stop_position", "final desired position [m]", &Scenario::trajectory, &TrajectorySpec::stopPosition),
            real("sample_rate", "trajectory sample rate [Hz]", &Scenario::trajectory, &TrajectorySpec::sampleRate),
            real("horizon", "time horizon [s]", &Scenario::trajectory, &TrajectorySpec::horizon),
            {"method", "geometric | mapping | scaling | tsm | trinal",
             [](Scenario& s, const std::string& v) { s.method = parseMethod(v); },
             [](const Scenario& s) { return toString(s.method); }},
            real("ks", "scaling gain", &Scenario::tuning, &IntersectionTuning::ks),
            real("r_delta", "crossing-time target of the scaled phase [s]; <= 0 means one step", &Scenario::tuning,
                 &IntersectionTuning::rDeltaTarget),
            real("r_vol", "expansion limit of the scaled phase", &Scenario::tuning, &IntersectionTuning::rVolLimit),
            {"refine_factor", "fine steps per coarse step in the crossing refinement",
             [](Scenario& s, const std::string& v) { s.tuning.refineFactor = toInt(v); },
             [](const Scenario& s) { return std::to_string(s.tuning.refineFactor); }},
            real("max_order", "zonotope order limit", &Scenario::maxOrder),
            real("step", "reachability step [s]", &Scenario::stepSize),
            real("sync_threshold", "clock width above which sync is tried [s]; < 0 means two steps",
                 &Scenario::syncThreshold),
            {"sync", "both | synced | unsynced",
             [](Scenario& s, const std::string& v) { s.syncMode = parseSyncMode(v); },
             [](const Scenario& s) { return toString(s.syncMode); }},
            {"max_jumps", "jump depth cap",
             [](Scenario& s, const std::string& v) { s.maxJumps = toInt(v); },
             [](const Scenario& s) { return std::to_string(s.maxJumps); }},
            {"max_refinements", "step halvings allowed when no branch completes",
             [](Scenario& s, const std::string& v) { s.maxRefinements = toInt(v); },
             [](const Scenario& s) { return std::to_string(s.maxRefinements); }},
            real("limit_transient", "force limit during the transient window [N]", &Scenario::limits,
                 &ForceLimits::transient),
            real("limit_quasi_static", "force limit after the window [N]", &Scenario::limits,
                 &ForceLimits::quasiStatic),
            real("limit_window", "transient window length from first contact [s]", &Scenario::limits,
                 &ForceLimits::window),
            {"out", "output directory", [](Scenario& s, const std::string& v) { s.outputDir = v; },
             [](const Scenario& s) { return s.outputDir; }},
            {"seed", "master seed of the containment sampler",
             [](Scenario& s, const std::string& v) { s.seed = std::stoull(v); },
             [](const Scenario& s) { return std::to_string(s.seed); }},
        };
        return f;
    }();
    return all;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& scenarioKeys() {
    static const std::vector<std::pair<std::string, std::string>> keys = [] {
        std::vector<std::pair<std::string, std::string>> k;
        for (const auto& f : fields()) k.emplace_back(f.key, f.help);
        return k;
    }();
    return keys;
}

Scenario parseScenario(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<int> lines;
    std::set<std::string> seen;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(n) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!seen.insert(key).second) throw std::invalid_argument("line " + std::to_string(n) + ": duplicate key '" + key + "'");
        values.emplace_back(std::move(key), std::move(value));
        lines.push_back(n);
    }

    Scenario s;
    // the mass decides the default damping, so it goes first
    for (const auto& [k, v] : values) {
        if (k == "m") s.params = ContactParams::forMass(toDouble(v));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& [key, value] = values[i];
        const auto f = std::find_if(fields().begin(), fields().end(), [&](const Field& x) { return x.key == key; });
        const std::string where = "line " + std::to_string(lines[i]) + ": ";
        if (f == fields().end()) throw std::invalid_argument(where + "unknown key '" + key + "'");
        try {
            f->set(s, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + key + ": " + e.what());
        } catch (const std::out_of_range&) {
            throw std::invalid_argument(where + key + ": value out of range");
        }
    }
    s.validate();
    return s;
}

Scenario loadScenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    try {
        return parseScenario(in);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::string formatScenario(const Scenario& s) {
    std::ostringstream out;
    for (const auto& f : fields()) out << f.key << " = " << f.get(s) << "\n";
    return out.str();
}

ScenarioResult runScenario(const Scenario& s) {
    s.validate();
    const auto started = std::chrono::steady_clock::now();
    ScenarioResult r;
    r.scenario = s;
    const HybridAutomaton ha = buildAutomaton(s.params);
    const InputModel im = buildInputModel(s.trajectory, s.params);
    const Zonotope x0 = buildInitialSet(im.samples);
    r.reach = runAutomaton(ha, x0, loc::freeMotion, im, s.engineOptions());
    r.safety = unsafeCheck(r.reach, s.params, s.limits);
    r.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
}

ContainmentReport checkContainment(const ScenarioResult& r, ContainmentOptions options, bool serial) {
    const Scenario& s = r.scenario;
    const HybridAutomaton ha = buildAutomaton(s.params);
    const InputModel im = buildInputModel(s.trajectory, s.params);
    const IntervalVector box = intervalHull(buildInitialSet(im.samples));
    const EngineOptions eo = s.engineOptions();
    return serial ? containmentTestSerial(ha, box, loc::freeMotion, im, r.reach, eo, options)
                  : containmentTest(ha, box, loc::freeMotion, im, r.reach, eo, options);
}

Scenario gridScenario(const Scenario& base, double mass, double speed, IntersectionMethod method) {
    Scenario s = base;
    const ContactParams tabulated = ContactParams::forMass(mass);
    s.params.m = tabulated.m;
    s.params.dt = tabulated.dt;
    s.trajectory.impactSpeed = speed;
    s.method = method;
    return s;
}

GridCell summarizeCell(double mass, double speed, IntersectionMethod method, const ScenarioResult& r) {
    GridCell c;
    c.mass = mass;
    c.speed = speed;
    c.method = method;
    c.verdict = r.safety.verdict;
    c.peakForce = r.safety.peakForce;
    c.segments = int(r.reach.segments.size());
    c.stepSize = r.reach.stepSize;
    c.refinements = r.reach.refinements;
    c.wallSeconds = r.wallSeconds;
    for (const auto& rec : r.reach.intersections) {
        if (!rec.set) continue;
        if (rec.order == 2 && !c.measure2) {
            c.measure2 = rec.measure;
            c.seconds2 = rec.wallSeconds;
        }
        if (rec.order == 3 && !c.measure3) {
            c.measure3 = rec.measure;
            c.seconds3 = rec.wallSeconds;
        }
    }
    return c;
}

namespace {

GridCell runCell(const Scenario& base, double mass, double speed, IntersectionMethod method, const CellSink& sink) {
    try {
        const ScenarioResult r = runScenario(gridScenario(base, mass, speed, method));
        if (sink) sink(r);
        return summarizeCell(mass, speed, method, r);
    } catch (const std::exception& e) {
        GridCell c;
        c.mass = mass;
        c.speed = speed;
        c.method = method;
        c.failed = true;
        c.error = e.what();
        return c;
    }
}

}  // namespace

std::vector<GridCell> runGrid(const Scenario& base, const std::vector<double>& masses,
                              const std::vector<double>& speeds, IntersectionMethod method, const CellSink& sink) {
    const int n = int(masses.size() * speeds.size());
    std::vector<GridCell> cells(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        const std::size_t k = std::size_t(i);
        cells[k] = runCell(base, masses[k / speeds.size()], speeds[k % speeds.size()], method, sink);
    }
    return cells;
}

std::vector<GridCell> runGridSerial(const Scenario& base, const std::vector<double>& masses,
                                    const std::vector<double>& speeds, IntersectionMethod method,
                                    const CellSink& sink) {
    std::vector<GridCell> cells;
    for (double m : masses) {
        for (double v : speeds) cells.push_back(runCell(base, m, v, method, sink));
    }
    return cells;
}

namespace {

std::string csvQuote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string optional3(const std::optional<double>& x, double scale) {
    return x ? formatNumber(*x * scale) : "";
}

}  // namespace

void writeGridCsv(std::ostream& out, const std::vector<GridCell>& cells) {
    out << "mass,speed,method,failed,verdict,peak_force,segments,step,refinements,wall_s,"
           "measure2_e3,measure3_e3,time2_s,time3_s,error\n";
    for (const auto& c : cells) {
        out << formatNumber(c.mass) << ',' << formatNumber(c.speed) << ',' << toString(c.method) << ','
            << (c.failed ? 1 : 0) << ',' << (c.failed ? "" : toString(c.verdict)) << ','
            << (c.failed ? "" : formatNumber(c.peakForce)) << ',' << c.segments << ','
            << (c.failed ? "" : formatNumber(c.stepSize)) << ',' << c.refinements << ','
            << formatNumber(c.wallSeconds) << ',' << optional3(c.measure2, 1e3) << ',' << optional3(c.measure3, 1e3)
            << ',' << optional3(c.seconds2, 1.0) << ',' << optional3(c.seconds3, 1.0) << ',' << csvQuote(c.error)
            << '\n';
    }
}

const std::string& envelopeHeader() {
    static const std::string header =
        "t_lo,t_hi,location,branch,synced,z_lo,z_hi,zdot_lo,zdot_hi,zhat_lo,zhat_hi,zhatdot_lo,zhatdot_hi,"
        "clock_lo,clock_hi,force_lo,force_hi";
    return header;
}

void writeEnvelopeCsv(std::ostream& out, const ScenarioResult& r) {
    out << envelopeHeader() << '\n';
    for (const auto& seg : r.reach.segments) {
        for (const auto& e : seg.entries) {
            const IntervalVector box = intervalHull(e.timeIntervalSet);
            const Interval f = forceFromState(e.timeIntervalSet, r.scenario.params, e.location);
            out << formatNumber(e.clock.lo) << ',' << formatNumber(e.clock.hi) << ',' << e.location << ',' << seg.id
                << ',' << (seg.synced ? 1 : 0);
            for (Eigen::Index i = 0; i < box.dim(); ++i)
                out << ',' << formatNumber(box.lower()(i)) << ',' << formatNumber(box.upper()(i));
            out << ',' << formatNumber(f.lo) << ',' << formatNumber(f.hi) << '\n';
        }
    }
}

void writeMetadataJson(std::ostream& out, const ScenarioResult& r) {
    using nlohmann::json;
    json scenario = json::object();
    for (const auto& f : fields()) scenario[f.key] = f.get(r.scenario);
    json records = json::array();
    for (const auto& rec : r.reach.intersections) {
        json j{{"segment", rec.segment},
               {"transition", rec.transitionName},
               {"order", rec.order},
               {"method", toString(rec.method)},
               {"measure", rec.measure},
               {"tsm_failed", rec.tsmFailed},
               {"hit_window", {rec.hitWindow.lo, rec.hitWindow.hi}},
               {"hit_steps", rec.hitSteps},
               {"scaled_steps", rec.scaledSteps},
               {"wall_s", rec.wallSeconds}};
        if (rec.measureGeometric) j["measure_geometric"] = *rec.measureGeometric;
        if (rec.measureTsm) j["measure_tsm"] = *rec.measureTsm;
        if (!rec.note.empty()) j["note"] = rec.note;
        if (rec.set) {
            j["lo"] = std::vector<double>(rec.set->lower().data(), rec.set->lower().data() + rec.set->dim());
            j["hi"] = std::vector<double>(rec.set->upper().data(), rec.set->upper().data() + rec.set->dim());
        } else {
            j["unreachable"] = true;
        }
        records.push_back(std::move(j));
    }
    json segments = json::array();
    for (const auto& seg : r.reach.segments) {
        json j{{"id", seg.id},        {"parent", seg.parent},   {"location", seg.location},
               {"depth", seg.depth},  {"synced", seg.synced},   {"steps", seg.entries.size()},
               {"groups", seg.childGroups}, {"safe_subtree", r.safety.subtreeSafe[std::size_t(seg.id)]}};
        if (seg.subsumedBy >= 0) j["subsumed_by"] = seg.subsumedBy;
        if (seg.failed) j["failure"] = seg.failure;
        segments.push_back(std::move(j));
    }
    json doc{{"version", kVersion},
             {"scenario", scenario},
             {"verdict", toString(r.safety.verdict)},
             {"peak_force", r.safety.peakForce},
             {"step", r.reach.stepSize},
             {"refinements", r.reach.refinements},
             {"seed", r.scenario.seed},
             {"wall_s", r.wallSeconds},
             {"segments", segments},
             {"intersections", records}};
    if (r.safety.contactStart) doc["contact_start"] = *r.safety.contactStart;
    out << doc.dump(2) << '\n';
}

void writeDump(std::ostream& out, const ReachResult& r) {
    const Eigen::Index n = r.segments.empty() ? 0 : r.segments.front().initialSet.dim();
    out << "hyreach-dump 1\n" << "dim " << n << '\n';
    for (const auto& seg : r.segments) {
        for (std::size_t k = 0; k < seg.entries.size(); ++k) {
            const auto& e = seg.entries[k];
            const Zonotope& z = e.timeIntervalSet;
            out << "set " << seg.id << ' ' << k << ' ' << e.location << ' ' << (seg.synced ? 1 : 0) << ' '
                << formatNumber(e.clock.lo) << ' ' << formatNumber(e.clock.hi) << ' ' << z.numGenerators() << '\n';
            out << 'c';
            for (Eigen::Index i = 0; i < z.dim(); ++i) out << ' ' << formatNumber(z.center()(i));
            out << '\n';
            for (Eigen::Index j = 0; j < z.numGenerators(); ++j) {
                out << 'g';
                for (Eigen::Index i = 0; i < z.dim(); ++i) out << ' ' << formatNumber(z.generators()(i, j));
                out << '\n';
            }
        }
    }
}

std::vector<DumpedSet> readDump(std::istream& in) {
    std::string line;
    int lineNo = 0;
    auto next = [&](const char* what) {
        if (!std::getline(in, line)) throw std::invalid_argument(std::string("dump: unexpected end, expected ") + what);
        ++lineNo;
        return std::istringstream(line);
    };
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("dump line " + std::to_string(lineNo) + ": " + msg);
    };
    auto vec = [&](std::istringstream& ss, Eigen::Index n) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::string tok;
            if (!(ss >> tok)) fail("too few values");
            v(i) = std::stod(tok);
        }
        return v;
    };

    std::string tag;
    int version = 0;
    if (!(next("header") >> tag >> version) || tag != "hyreach-dump" || version != 1) fail("bad header");
    Eigen::Index n = 0;
    if (!(next("dim") >> tag >> n) || tag != "dim" || n < 0) fail("bad dim line");

    std::vector<DumpedSet> out;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        std::istringstream ss(line);
        DumpedSet d;
        int synced = 0;
        long gens = 0;
        std::string lo, hi;
        if (!(ss >> tag >> d.segment >> d.index >> d.location >> synced >> lo >> hi >> gens) || tag != "set" ||
            gens < 0)
            fail("bad set line");
        d.synced = synced != 0;
        d.clock = {std::stod(lo), std::stod(hi)};
        auto cl = next("center");
        if (!(cl >> tag) || tag != "c") fail("expected center line");
        const Vec c = vec(cl, n);
        Mat g(n, gens);
        for (long j = 0; j < gens; ++j) {
            auto gl = next("generator");
            if (!(gl >> tag) || tag != "g") fail("expected generator line");
            g.col(j) = vec(gl, n);
        }
        d.set = Zonotope(c, g);
        out.push_back(std::move(d));
    }
    return out;
}

void exportRun(const ScenarioResult& r, const std::string& dir, bool dump) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(fs::path(dir) / name);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        return f;
    };
    {
        auto f = open("envelope.csv");
        writeEnvelopeCsv(f, r);
        if (!f) throw std::runtime_error("write failed: envelope.csv");
    }
    {
        auto f = open("run.json");
        writeMetadataJson(f, r);
        if (!f) throw std::runtime_error("write failed: run.json");
    }
    if (dump) {
        auto f = open("sets.dump");
        writeDump(f, r.reach);
        if (!f) throw std::runtime_error("write failed: sets.dump");
    }
}

}  // namespace hyreach
