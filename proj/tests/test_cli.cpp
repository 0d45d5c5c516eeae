// End-to-end checks of the command-line tool: pipelines over real files,
// deterministic outputs, exit codes. Each test shells out to the built binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli = DEPNET_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("depnet-cli-test-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    int status = std::system((std::string(cli) + " " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string data(const std::string& name) {
    return std::string(DEPNET_TEST_DATA) + "/" + name;
}

}  // namespace

TEST_CASE("synth then stats: end-to-end pipeline, deterministic output") {
    TempDir dir;
    std::string graph = dir.file("g.ndjson");
    CHECK(run("synth --libraries 10 --max-versions 4 --dep-prob 0.2 --vulns 3 --fix-prob 0.5"
              " --seed 1 --out " + graph) == 0);

    std::string out1 = dir.file("stats1.csv");
    std::string out2 = dir.file("stats2.csv");
    CHECK(run("stats --graph " + graph + " --out " + out1) == 0);
    CHECK(run("stats --graph " + graph + " --out " + out2) == 0);
    CHECK(slurp(out1) == slurp(out2));
    CHECK(slurp(out1).find("total_libraries,10") != std::string::npos);

    // synth is seed-deterministic at the byte level
    std::string graph2 = dir.file("g2.ndjson");
    CHECK(run("synth --libraries 10 --max-versions 4 --dep-prob 0.2 --vulns 3 --fix-prob 0.5"
              " --seed 1 --out " + graph2) == 0);
    CHECK(slurp(graph) == slurp(graph2));
}

TEST_CASE("fig1 pipeline through the CLI reproduces the worked example") {
    TempDir dir;
    std::string graph = dir.file("fig1.ndjson");
    std::string matched = dir.file("fig1-matched.ndjson");
    std::string warnings = dir.file("warnings.ndjson");

    CHECK(run("ingest --index " + data("fig1/index.ndjson") + " --metadata " +
              data("fig1/metadata.ndjson") + " --out " + graph + " --warnings " + warnings) == 0);
    CHECK(run("import-vulns --graph " + graph + " --feed " + data("fig1/feed.json") +
              " --mapping " + data("fig1/mapping.ndjson") + " --out " + matched + " --report " +
              dir.file("matches.csv") + " --warnings " + warnings) == 0);
    CHECK(slurp(dir.file("matches.csv")) == "vuln_id,matches\nCVE-2020-0001,1\n");

    std::string propagation = dir.file("propagation.csv");
    CHECK(run("propagation --graph " + matched + " --mode shortest --out " + propagation +
              " --plot-data " + dir.file("plot.csv")) == 0);
    CHECK(slurp(propagation) == "level,count,stratum\n0,1,all\n1,1,all\n2,1,all\n");
    CHECK(slurp(dir.file("plot.csv")) == slurp(propagation));

    std::string upgrades = dir.file("upgrades.csv");
    CHECK(run("upgrades --graph " + matched + " --scope all --out " + upgrades) == 0);
    std::string table = slurp(upgrades);
    CHECK(table.find("group,fixed,not_fixed,fixed_fraction\n1,0,1,") != std::string::npos);
    CHECK(table.find("\n2,1,1,") != std::string::npos);
    CHECK(table.find("total_chains,3") != std::string::npos);

    std::string precision = dir.file("precision.csv");
    CHECK(run("precision --graph " + matched + " --out " + precision) == 0);
    CHECK(slurp(precision).find("CVE-2020-0001,1,0,1,1") != std::string::npos);

    // every analysis ran from the persisted graph alone; json variant too
    std::string stats_json = dir.file("stats.json");
    CHECK(run("stats --graph " + matched + " --format json --out " + stats_json) == 0);
    CHECK(slurp(stats_json).find("\"latest_affected_fraction\": 0.0") != std::string::npos);
}

TEST_CASE("ingest accepts manifest kinds and bare version entries") {
    TempDir dir;
    std::ofstream(dir.file("app.podfile")) << "pod 'Dep', '~> 1.0'\n";
    std::ofstream(dir.file("broken.lock")) << "no pods section here\n";
    std::ofstream(dir.file("index.ndjson"))
        << R"({"library":"dep","version":"1.0","released":100,"kind":"none"})" << "\n"
        << R"({"library":"dep","version":"1.2","released":200,"kind":"none"})" << "\n"
        << R"({"library":"app","version":"1.0","released":300,"kind":"podfile","path":"app.podfile"})"
        << "\n"
        << R"({"library":"crashy","version":"1.0","released":400,"kind":"podfile.lock","path":"broken.lock"})"
        << "\n";

    std::string graph = dir.file("g.ndjson");
    std::string warnings = dir.file("w.ndjson");
    CHECK(run("ingest --index " + dir.file("index.ndjson") + " --out " + graph + " --warnings " +
              warnings) == 0);

    std::string saved = slurp(graph);
    // the manifest requirement resolved temporally onto dep@1.2
    CHECK(saved.find(R"("from":["app","1.0"])") != std::string::npos);
    CHECK(saved.find(R"("to":["dep","1.2"])") != std::string::npos);
    CHECK(saved.find("manifest") != std::string::npos);
    // the unparseable lockfile was skipped but its version node survives
    CHECK(saved.find(R"("library":"crashy")") != std::string::npos);
    CHECK(slurp(warnings).find("file skipped") != std::string::npos);
}

TEST_CASE("usage and input errors exit 1") {
    TempDir dir;
    CHECK(run("stats --graph " + dir.file("missing.ndjson") + " 2>/dev/null") == 1);
    CHECK(run("propagation --graph x --mode bogus 2>/dev/null") == 1);
    CHECK(run("nonexistent-subcommand 2>/dev/null") == 1);
    CHECK(run("synth --libraries -3 --out " + dir.file("g") + " 2>/dev/null") == 1);

    // malformed graph file is an input error, not a crash
    std::string bad = dir.file("bad.ndjson");
    std::ofstream(bad) << "{\"kind\":\"dep\",\"from\":[\"a\",\"1\"],\"to\":[\"b\",\"1\"]}\n";
    CHECK(run("stats --graph " + bad + " 2>/dev/null") == 1);
}

TEST_CASE("propagation stratified and all-levels variants run from a graph file") {
    TempDir dir;
    std::string graph = dir.file("g.ndjson");
    CHECK(run("synth --libraries 25 --max-versions 6 --dep-prob 0.12 --vulns 6 --fix-prob 0.5"
              " --seed 9 --out " + graph) == 0);

    std::string by_language = dir.file("lang.csv");
    CHECK(run("propagation --graph " + graph + " --mode all-levels --stratify language --out " +
              by_language) == 0);
    CHECK(slurp(by_language).rfind("level,count,stratum\n", 0) == 0);

    std::string all_lengths = dir.file("lengths.csv");
    CHECK(run("propagation --graph " + graph + " --mode all-levels --multiplicity all-lengths"
              " --out " + all_lengths) == 0);

    std::string upgrades_json = dir.file("up.json");
    CHECK(run("upgrades --graph " + graph + " --scope latest --mode vuln-aware --group severity"
              " --format json --out " + upgrades_json) == 0);
    CHECK(slurp(upgrades_json).find("\"scope\": \"latest\"") != std::string::npos);
}
