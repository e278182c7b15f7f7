#include "doctest.h"

#include "hyreach/scenario.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hyreach;

namespace {

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parseScenario(in);
}

std::string parseError(const std::string& text) {
    try {
        parse(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return {};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
}

const ScenarioResult& quickRun() {
    static const ScenarioResult r = runScenario(gridScenario(Scenario{}, 4.5, 0.55, IntersectionMethod::Trinal));
    return r;
}

bool sameCell(const GridCell& a, const GridCell& b) {
    return a.mass == b.mass && a.speed == b.speed && a.method == b.method && a.failed == b.failed &&
           a.error == b.error && a.verdict == b.verdict && a.peakForce == b.peakForce && a.segments == b.segments &&
           a.stepSize == b.stepSize && a.refinements == b.refinements && a.measure2 == b.measure2 &&
           a.measure3 == b.measure3;
}

}  // namespace

TEST_CASE("scenario text") {
    SUBCASE("defaults and comments") {
        const Scenario s = parse("# nothing but a comment\n\n   \n");
        const Scenario d;
        CHECK(s.params.m == d.params.m);
        CHECK(s.stepSize == d.stepSize);
        CHECK((s.method == IntersectionMethod::Trinal));
    }
    SUBCASE("mass picks the damping unless given") {
        const Scenario a = parse("m = 8\n");
        CHECK(a.params.m == 8.0);
        CHECK(a.params.dt == ContactParams::forMass(8.0).dt);
        const Scenario b = parse("dt = 123\nm = 8\n");
        CHECK(b.params.dt == 123.0);
        CHECK(b.params.m == 8.0);
    }
    SUBCASE("values") {
        const Scenario s = parse("method = tsm\nsync = unsynced\nstep = 1e-3\nmax_jumps = 4\nseed = 99\nout = x/y\n"
                                 "impact_speed = 0.2\n");
        CHECK((s.method == IntersectionMethod::Tsm));
        CHECK((s.syncMode == SyncMode::UnsyncedOnly));
        CHECK(s.stepSize == 1e-3);
        CHECK(s.maxJumps == 4);
        CHECK(s.seed == 99);
        CHECK(s.outputDir == "x/y");
        CHECK(s.trajectory.impactSpeed == 0.2);
    }
    SUBCASE("errors carry the line") {
        CHECK(parseError("m = 4.5\nbogus = 1\n").find("line 2") != std::string::npos);
        CHECK(parseError("m = 4.5\nbogus = 1\n").find("unknown key 'bogus'") != std::string::npos);
        CHECK(parseError("step = 1e-3\n# c\nstep = 2e-3\n").find("line 3: duplicate key 'step'") != std::string::npos);
        CHECK(parseError("just words\n").find("line 1") != std::string::npos);
        CHECK(parseError("step = fast\n").find("line 1: step") != std::string::npos);
        CHECK(parseError("method = magic\n").find("line 1: method") != std::string::npos);
        CHECK(parseError("sync = sometimes\n") != "");
        CHECK(parseError("step = -1\n") != "");
        CHECK(parseError("max_jumps = 2.5\n") != "");
    }
    SUBCASE("round trip") {
        Scenario s = gridScenario(Scenario{}, 1.5, 0.35, IntersectionMethod::Scaling);
        s.stepSize = 1.0 / 3.0e3;
        s.syncMode = SyncMode::SyncedOnly;
        s.seed = 12345678901234ULL;
        s.limits.quasiStatic = 77.7;
        const std::string text = formatScenario(s);
        const Scenario back = parse(text);
        CHECK(formatScenario(back) == text);
        CHECK(back.stepSize == s.stepSize);
        CHECK(back.params.dt == s.params.dt);
        CHECK(back.seed == s.seed);
        // every key is written once
        for (const auto& [key, help] : scenarioKeys()) {
            int count = 0;
            for (const auto& l : lines(text))
                if (l.rfind(key + " = ", 0) == 0) ++count;
            CHECK_MESSAGE(count == 1, key);
        }
    }
}

TEST_CASE("number format") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.5e-4, 1e22, 0.0}) {
        const std::string s = formatNumber(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(formatNumber(0.5) == "0.5");
}

TEST_CASE("envelope csv") {
    const ScenarioResult& r = quickRun();
    std::ostringstream os;
    writeEnvelopeCsv(os, r);
    const auto rows = lines(os.str());
    REQUIRE(rows.size() > 1);
    CHECK(rows[0] == envelopeHeader());
    const std::size_t columns = split(envelopeHeader()).size();
    CHECK(columns == 17);

    std::size_t entries = 0;
    for (const auto& seg : r.reach.segments) entries += seg.entries.size();
    CHECK(rows.size() == entries + 1);

    bool sawContact = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = split(rows[i]);
        REQUIRE(f.size() == columns);
        CHECK(std::stod(f[0]) <= std::stod(f[1]));
        const int location = std::stoi(f[2]);
        const double flo = std::stod(f[15]), fhi = std::stod(f[16]);
        CHECK(flo <= fhi);
        if (location == loc::freeMotion || location == loc::reactionFree) {
            CHECK(flo == 0.0);
            CHECK(fhi == 0.0);
        } else {
            sawContact = true;
        }
        for (std::size_t c = 5; c < 15; c += 2) CHECK(std::stod(f[c]) <= std::stod(f[c + 1]));
    }
    CHECK(sawContact);
}

TEST_CASE("output is deterministic") {
    const Scenario s = gridScenario(Scenario{}, 4.5, 0.55, IntersectionMethod::Trinal);
    const ScenarioResult a = runScenario(s);
    const ScenarioResult b = runScenario(s);
    std::ostringstream ea, eb, da, db;
    writeEnvelopeCsv(ea, a);
    writeEnvelopeCsv(eb, b);
    writeDump(da, a.reach);
    writeDump(db, b.reach);
    CHECK(ea.str() == eb.str());
    CHECK(da.str() == db.str());
}

TEST_CASE("dump round trip") {
    const ScenarioResult& r = quickRun();
    std::stringstream io;
    writeDump(io, r.reach);
    CHECK(lines(io.str()).at(0) == "hyreach-dump 1");
    const std::vector<DumpedSet> sets = readDump(io);

    std::vector<const ReachEntry*> flat;
    std::vector<const Segment*> owner;
    for (const auto& seg : r.reach.segments)
        for (const auto& e : seg.entries) {
            flat.push_back(&e);
            owner.push_back(&seg);
        }
    REQUIRE(sets.size() == flat.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const ReachEntry& e = *flat[i];
        CHECK(sets[i].segment == owner[i]->id);
        CHECK(sets[i].location == e.location);
        CHECK(sets[i].synced == owner[i]->synced);
        CHECK(sets[i].clock.lo == e.clock.lo);
        CHECK(sets[i].clock.hi == e.clock.hi);
        CHECK(sets[i].set.center() == e.timeIntervalSet.center());
        CHECK(sets[i].set.generators() == e.timeIntervalSet.generators());
        const double v = volumeMeasure(e.timeIntervalSet);
        CHECK(std::abs(volumeMeasure(sets[i].set) - v) <= 1e-12 * std::max(1.0, std::abs(v)));
    }

    std::istringstream bad("hyreach-dump 7\n");
    CHECK_THROWS(readDump(bad));
}

TEST_CASE("export writes the three files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hyreach_test_export";
    fs::remove_all(dir);
    exportRun(quickRun(), dir.string(), true);
    CHECK(fs::exists(dir / "envelope.csv"));
    CHECK(fs::exists(dir / "run.json"));
    CHECK(fs::exists(dir / "sets.dump"));
    std::ifstream json(dir / "run.json");
    const std::string text((std::istreambuf_iterator<char>(json)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"verdict\"") != std::string::npos);
    CHECK(text.find("\"seed\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("grid") {
    const Scenario base;
    SUBCASE("single cell matches a direct run") {
        const auto cells = runGrid(base, {4.5}, {0.55}, IntersectionMethod::Trinal);
        REQUIRE(cells.size() == 1);
        const GridCell direct = summarizeCell(4.5, 0.55, IntersectionMethod::Trinal, quickRun());
        CHECK(sameCell(cells[0], direct));
        CHECK_FALSE(cells[0].failed);
        CHECK((cells[0].verdict == Verdict::Safe));
    }
    SUBCASE("parallel and serial tables agree and keep order") {
        const std::vector<double> masses{8.0, 4.5};
        const std::vector<double> speeds{0.55, 0.45};
        std::atomic<int> seen{0};
        const auto par = runGrid(base, masses, speeds, IntersectionMethod::Trinal, [&](const ScenarioResult&) { ++seen; });
        const auto ser = runGridSerial(base, masses, speeds, IntersectionMethod::Trinal);
        CHECK(seen == 4);
        REQUIRE(par.size() == 4);
        REQUIRE(ser.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK(sameCell(par[i], ser[i]));
        CHECK(par[0].mass == 8.0);
        CHECK(par[0].speed == 0.55);
        CHECK(par[1].speed == 0.45);
        CHECK(par[2].mass == 4.5);
    }
    SUBCASE("a throwing sink fails the cell") {
        const auto cells = runGrid(base, {4.5}, {0.55}, IntersectionMethod::Trinal,
                                   [](const ScenarioResult&) { throw std::runtime_error("disk full"); });
        REQUIRE(cells.size() == 1);
        CHECK(cells[0].failed);
        CHECK(cells[0].error.find("disk full") != std::string::npos);
    }
    SUBCASE("csv") {
        const auto cells = runGrid(base, {4.5}, {0.55}, IntersectionMethod::Trinal);
        std::ostringstream os;
        writeGridCsv(os, cells);
        const auto rows = lines(os.str());
        REQUIRE(rows.size() == 2);
        CHECK(split(rows[0]).size() == split(rows[1]).size());
        CHECK(rows[1].rfind("4.5,0.55000000000000004,trinal,0,SAFE,", 0) == 0);
    }
}
