#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "longwatch/cli.hpp"
#include "longwatch/simulate.hpp"

using namespace longwatch;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "longwatch");
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("longwatch_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

// Five side-by-side boxes spanning the synthetic world around City Hall.
std::string borough_geojson() {
    const char* names[] = {"Manhattan", "Brooklyn", "Bronx", "Queens", "Staten Island"};
    nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
    for (int i = 0; i < 5; ++i) {
        double lo = -74.20 + 0.08 * i, hi = lo + 0.08;
        fc["features"].push_back({{"type", "Feature"},
                                  {"properties", {{"borough", names[i]}, {"nta2020", std::string("NTA") + char('A' + i)}}},
                                  {"geometry",
                                   {{"type", "Polygon"},
                                    {"coordinates", {{{lo, 40.5}, {hi, 40.5}, {hi, 40.9}, {lo, 40.9}, {lo, 40.5}}}}}}});
    }
    return fc.dump();
}

// Writes a synthetic world's frames and permits to disk.
void write_world(const TempDir& dir) {
    GridConfig grid;
    auto world = gen_world(40, 4, default_world_bounds(44), 5, grid);
    FrameGenParams fp;
    fp.passes_per_shed = 25;
    fp.background_frames = 200;
    fp.seed = 8;
    auto frames = gen_frames(world, DetectorModel{0.7, 0.02, 120}, fp, grid);
    std::ofstream(dir / "frames.jsonl") << frames_to_jsonl(frames);
    std::ofstream(dir / "permits.csv") << permits_to_csv(
        world_permits(world, grid, make_date(2023, 6, 1), make_date(2024, 12, 31)));
    std::ofstream(dir / "boroughs.geojson") << borough_geojson();
}

}  // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"bogus"}).code == cli::kUsage);
    CHECK(run({"thresholds", "--nope"}).code == cli::kUsage);
    auto r = run({"tag"});
    CHECK(r.code == cli::kUsage);
    CHECK(nlohmann::json::parse(r.err)["error"] == "usage");
    CHECK(run({"tag", "--frames", "/nonexistent/frames.jsonl", "--out", "/tmp/x"}).code == cli::kUsage);
    CHECK(run({"thresholds", "--threshold", "3"}).code == cli::kUsage);  // not a thresholds flag
    CHECK(run({"simulate", "--threshold", "21"}).code == cli::kUsage);
    CHECK(run({"thresholds", "--recall", "0"}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("thresholds defaults select 6 and write artifacts") {
    TempDir dir("thresholds");
    auto r = run({"thresholds", "--out", dir.path.string()});
    REQUIRE(r.code == cli::kOk);
    auto json = nlohmann::json::parse(slurp(dir.path / "threshold.json"));
    CHECK(json["selected_threshold"] == 6);
    auto csv = slurp(dir.path / "pr_curve.csv");
    CHECK(csv.find("6,0.995941,0.998445\n") != std::string::npos);
    CHECK(run({"thresholds", "--out", dir.path.string()}).out == r.out);
}

TEST_CASE("config precedence: flags over file over defaults") {
    TempDir dir("config");
    std::ofstream(dir / "cfg.json") << R"({"recall": 0.99, "precision": 0.5})";
    auto from_file = run({"--config", dir / "cfg.json", "thresholds"});
    REQUIRE(from_file.code == cli::kOk);
    CHECK(from_file.out.find("\"selected_threshold\": 18") != std::string::npos);
    auto flag = run({"--config", dir / "cfg.json", "thresholds", "--recall", "0.5676", "--precision", "0.9329"});
    CHECK(flag.out.find("\"selected_threshold\": 6") != std::string::npos);

    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(run({"--config", dir / "bad.json", "thresholds"}).code == cli::kUsage);
    std::ofstream(dir / "badval.json") << R"({"recall": "high"})";
    CHECK(run({"--config", dir / "badval.json", "thresholds"}).code == cli::kUsage);
}

TEST_CASE("app token: flag over file over environment") {
    httplib::Server server;
    std::string seen;
    server.Get("/r.csv", [&](const httplib::Request& req, httplib::Response& res) {
        seen = req.get_header_value("X-App-Token");
        res.set_content(
            "Job Number,Latitude Point,Longitude Point,First Permit Date,Expiration Date,Borough Name\n"
            "P1,40.7,-74.0,2023-01-01,2024-06-01,Manhattan\n",
            "text/csv");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/r.csv";

    TempDir dir("fetch");
    std::ofstream(dir / "cfg.json") << R"({"app_token": "from-file"})";
    ::setenv("LONGWATCH_APP_TOKEN", "from-env", 1);
    auto r = run({"fetch-permits", "--endpoint", url, "--out", dir.path.string()});
    CHECK(r.code == cli::kOk);
    CHECK(seen == "from-env");
    run({"--config", dir / "cfg.json", "fetch-permits", "--endpoint", url, "--out", dir.path.string()});
    CHECK(seen == "from-file");
    run({"--config", dir / "cfg.json", "fetch-permits", "--endpoint", url, "--app-token", "from-flag", "--out",
         dir.path.string()});
    CHECK(seen == "from-flag");
    ::unsetenv("LONGWATCH_APP_TOKEN");
    CHECK(slurp(dir.path / "permits.csv").find("P1") != std::string::npos);
    CHECK(run({"fetch-permits", "--out", dir.path.string()}).code == cli::kUsage);

    server.stop();
    t.join();
}

TEST_CASE("data errors exit 2") {
    TempDir dir("data");
    std::ofstream bad(dir / "frames.jsonl");
    for (int i = 0; i < 10; ++i) bad << "{garbage\n";
    bad.close();
    auto r = run({"tag", "--frames", dir / "frames.jsonl", "--out", dir.path.string()});
    CHECK(r.code == cli::kData);
    CHECK(nlohmann::json::parse(r.err)["error"] == "data");

    std::ofstream(dir / "permits.csv") << "Job Number\nP1\n";
    std::ofstream(dir / "ok.jsonl") << "";
    CHECK(run({"evaluate", "--frames", dir / "ok.jsonl", "--permits", dir / "permits.csv", "--as-of", "2024-01-22",
               "--out", dir.path.string()})
              .code == cli::kData);
}

TEST_CASE("simulate verdicts map to exit codes") {
    auto ok = run({"simulate", "--sheds", "100", "--seed", "3"});
    CHECK(ok.code == cli::kOk);
    CHECK(ok.out.rfind("PASS", 0) == 0);
    // The analytic comparison needs exactly one window of passes; anything else is a FAIL.
    auto bad = run({"simulate", "--sheds", "50", "--passes", "30"});
    CHECK(bad.code == cli::kInternal);
    CHECK(bad.out.rfind("FAIL", 0) == 0);
}

TEST_CASE("pipeline commands run and rerun byte-identically") {
    TempDir dir("pipeline");
    write_world(dir);
    const std::string out1 = dir / "out1", out2 = dir / "out2";
    for (const auto& out : {out1, out2}) {
        auto v = run({"validate", "--frames", dir / "frames.jsonl", "--permits", dir / "permits.csv", "--boroughs",
                      dir / "boroughs.geojson", "--as-of", "2023-11-01", "--out", out});
        REQUIRE(v.code == cli::kOk);
        CHECK(v.out.find("KL(permits || frames)") != std::string::npos);
        CHECK(v.out.find("Nov 2023") != std::string::npos);

        REQUIRE(run({"curate", "--frames", dir / "frames.jsonl", "--permits", dir / "permits.csv", "--boroughs",
                     dir / "boroughs.geojson", "--as-of", "2023-11-01", "--total", "100", "--seed", "4", "--out", out})
                    .code == cli::kOk);
        REQUIRE(run({"tag", "--frames", dir / "frames.jsonl", "--out", out, "--workers", out == out1 ? "1" : "3"}).code ==
                cli::kOk);
        auto e = run({"evaluate", "--frames", dir / "frames.jsonl", "--permits", dir / "permits.csv", "--boroughs",
                      dir / "boroughs.geojson", "--areas", dir / "boroughs.geojson", "--as-of", "2023-11-01", "--out",
                      out});
        REQUIRE(e.code == cli::kOk);
        CHECK(e.out.find("Unpermitted (clusters)") != std::string::npos);
        REQUIRE(run({"impact", "--permits", dir / "permits.csv", "--areas", dir / "boroughs.geojson", "--as-of",
                     "2023-11-01", "--out", out})
                    .code == cli::kOk);
    }
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(out1)) {
        ++files;
        CHECK(slurp(entry.path()) == slurp(fs::path(out2) / entry.path().filename()));
    }
    CHECK(files == 10);

    auto report = nlohmann::json::parse(slurp(fs::path(out1) / "report.json"));
    CHECK(report["tagged_total"].get<int>() ==
          report["confirmed_permitted"].get<int>() + report["unpermitted_clusters"].get<int>());
    auto selection = slurp(fs::path(out1) / "selection.csv");
    CHECK(std::count(selection.begin(), selection.end(), '\n') == 101);
}

#ifdef LONGWATCH_EXE
TEST_CASE("the installed binary reports exit codes") {
    const std::string exe = LONGWATCH_EXE;
    CHECK(std::system((exe + " thresholds > /dev/null").c_str()) == 0);
    int rc = std::system((exe + " tag 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 1);
}
#endif
