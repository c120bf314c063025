#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "phaserw/io.hpp"
#include "phaserw/metrics.hpp"

namespace fs = std::filesystem;
using namespace phaserw;

namespace {

struct Run {
    int code;
    std::string output;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" PHASERW_CLI_PATH "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    while (const std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("phaserw_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

// A small dataset: 3 phases, 4-dimensional features, 60-80 frames.
void small_synth(const TempDir& dir, const std::string& sub, const std::string& extra = "") {
    const auto r = run("synth --out " + dir / sub + " --num-phases 3 --dim 4 --videos 4 --t-min 60 --t-max 80 --seed 5 " +
                       extra);
    REQUIRE_MESSAGE(r.code == 0, r.output);
}

}  // namespace

TEST_CASE("usage errors exit 64") {
    CHECK(run("").code == 64);
    CHECK(run("frobnicate").code == 64);
    CHECK(run("segment --features").code == 64);
    CHECK(run("--help").code == 0);
    CHECK(run("fit --help").code == 0);
}

TEST_CASE("fit") {
    TempDir dir;
    CHECK(run("fit " + dir.path.string() + " --out " + dir / "m.json").code == 2);
    CHECK(run("fit " + dir / "missing" + " --out " + dir / "m.json").code == 2);

    small_synth(dir, "train");
    CHECK(run("fit " + dir / "train" + " --alpha 1.5 --out " + dir / "m.json").code == 64);
    CHECK(run("fit " + dir / "train" + " --alpha 0 --out " + dir / "m.json").code == 64);

    const auto ok = run("fit " + dir / "train" + " --out " + dir / "m.json");
    REQUIRE_MESSAGE(ok.code == 0, ok.output);
    CHECK(ok.output.find("phase 2:") != std::string::npos);
    const auto model = io::read_model(dir / "m.json");
    CHECK(model.gaussians.num_phases() == 3);
    CHECK(model.histogram.n_x() >= 60);

    io::write_file(dir / "train/video_000.features", "XXXXjunkjunkjunk");
    const auto bad = run("fit " + dir / "train" + " --out " + dir / "m2.json");
    CHECK(bad.code == 2);
    CHECK(bad.output.find("video_000.features") != std::string::npos);
}

TEST_CASE("segment flag misuse") {
    TempDir dir;
    small_synth(dir, "d", "--timestamps-k 1");
    REQUIRE(run("fit " + dir / "d" + " --out " + dir / "m.json").code == 0);
    const std::string f = " --features " + dir / "d/video_000.features";
    const std::string ts = " --timestamps " + dir / "d/video_000.timestamps.json";
    const std::string m = " --model " + dir / "m.json";
    const std::string out = " --out " + dir / "p.csv";

    CHECK(run("segment" + f + ts + m + out).code == 64);
    CHECK(run("segment --mode fewshot" + f + ts + out).code == 64);
    CHECK(run("segment --mode timestamps" + f + m + out).code == 64);
    CHECK(run("segment --mode sideways" + f + ts + out).code == 64);
    CHECK(run("segment" + f + out).code == 64);
    CHECK(run("segment" + f + ts).code == 64);
    CHECK(run("segment --weight-convention euclidean" + f + ts + out).code == 64);
    CHECK(run("segment --beta -1" + f + ts + out).code == 64);
    CHECK(run("segment --gamma 0" + f + ts + out).code == 64);
    CHECK(run("segment" + f + ts + out, "PHASERW_THREADS=zero").code == 64);
    CHECK(run("segment --features " + dir / "nope.features" + ts + out).code == 2);
}

TEST_CASE("synth, fit, segment and eval end to end") {
    TempDir dir;
    small_synth(dir, "train");
    small_synth(dir, "test", "--first-video 4 --timestamps-k 1");
    REQUIRE(run("fit " + dir / "train" + " --out " + dir / "m.json").code == 0);

    const auto labels = io::read_labels(dir / "test/video_004.labels.csv");
    const std::string f = " --features " + dir / "test/video_004.features";

    auto r = run("segment --mode timestamps" + f + " --timestamps " + dir / "test/video_004.timestamps.json" +
                 " --weight-convention distance --out " + dir / "ts.csv");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(io::read_labels(dir / "ts.csv").size() == labels.size());

    r = run("segment --mode fewshot" + f + " --model " + dir / "m.json" + " --probs --out " + dir / "fs.csv");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    const auto fs_csv = io::read_file(dir / "fs.csv");
    CHECK(fs_csv.substr(0, fs_csv.find('\n')) == "frame,phase,p0,p1,p2");
    CHECK(count(fs_csv, "\n") == labels.size() + 1);

    r = run("segment --input-dir " + dir / "test" + " --model " + dir / "m.json" + " --out-dir " + dir / "pred");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    REQUIRE(run("segment" + f + " --model " + dir / "m.json" + " --out " + dir / "single.csv").code == 0);
    CHECK(io::read_file(dir / "pred/video_004.pred.csv") == io::read_file(dir / "single.csv"));

    r = run("segment --input-dir " + dir / "test" + " --model " + dir / "m.json" + " --out-dir " + dir / "pred4",
            "PHASERW_THREADS=4");
    REQUIRE(r.code == 0);
    for (int v = 4; v < 8; ++v) {
        const std::string name = "/video_00" + std::to_string(v) + ".pred.csv";
        CHECK(io::read_file(dir / ("pred" + name)) == io::read_file(dir / ("pred4" + name)));
    }

    r = run("eval --pred-dir " + dir / "pred" + " --gt-dir " + dir / "test" + " --out " + dir / "report.json");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    const auto report = nlohmann::json::parse(io::read_file(dir / "report.json"));
    CHECK(report["per_video"].size() == 4);

    // The batch report is the mean of the single-video reports.
    double acc = 0.0, f1 = 0.0;
    for (int v = 4; v < 8; ++v) {
        const std::string id = "video_00" + std::to_string(v);
        r = run("eval --pred " + dir / ("pred/" + id + ".pred.csv") + " --gt " + dir / ("test/" + id + ".labels.csv") +
                " --out " + dir / "one.json");
        REQUIRE(r.code == 0);
        const auto one = nlohmann::json::parse(io::read_file(dir / "one.json"));
        acc += one["accuracy"].get<double>() / 4.0;
        f1 += one["f1"]["25"].get<double>() / 4.0;
    }
    CHECK(report["accuracy"].get<double>() == doctest::Approx(acc).epsilon(1e-12));
    CHECK(report["f1"]["25"].get<double>() == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("eval") {
    TempDir dir;
    small_synth(dir, "d");
    const std::string gt = dir / "d/video_000.labels.csv";
    auto r = run("eval --pred " + gt + " --gt " + gt + " --out " + dir / "r.json");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    const auto doc = nlohmann::json::parse(io::read_file(dir / "r.json"));
    CHECK(doc["accuracy"].get<double>() == 1.0);
    for (const char* k : {"10", "25", "50"}) CHECK(doc["f1"][k].get<double>() == 100.0);

    r = run("eval --pred " + gt + " --gt " + dir / "d/video_001.labels.csv");
    const bool same_length = io::read_labels(gt).size() == io::read_labels(dir / "d/video_001.labels.csv").size();
    if (!same_length) {
        CHECK(r.code == 2);
        CHECK(r.output.find("LengthMismatch") != std::string::npos);
    }
    io::write_labels(LabelSequence({0, 1}, 2), dir / "short.csv");
    r = run("eval --pred " + dir / "short.csv" + " --gt " + gt);
    CHECK(r.code == 2);
    CHECK(r.output.find("LengthMismatch") != std::string::npos);

    CHECK(run("eval --pred " + gt).code == 64);
    CHECK(run("eval --pred " + gt + " --gt " + gt + " --overlap 0").code == 64);
    CHECK(run("eval --pred " + gt + " --gt " + gt + " --overlap 10,x").code == 64);
    CHECK(run("eval").code == 2);

    r = run("eval --pred " + gt + " --gt " + gt + " --overlap 50,75");
    CHECK(r.output.find("F1@75") != std::string::npos);
}

TEST_CASE("synth is deterministic and validates its flags") {
    TempDir dir;
    small_synth(dir, "a", "--timestamps-k 2");
    small_synth(dir, "b", "--timestamps-k 2");
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "a")) {
        ++files;
        CHECK(io::read_file(e.path()) == io::read_file(dir.path / "b" / e.path().filename()));
    }
    CHECK(files == 12);

    io::write_file(dir / "cfg.json", R"({"num_phases": 3, "dim": 4, "num_videos": 4, "t_min": 60, "t_max": 80, "seed": 5})");
    REQUIRE(run("synth --config " + dir / "cfg.json" + " --out " + dir / "c --timestamps-k 2").code == 0);
    CHECK(io::read_file(dir / "c/video_003.features") == io::read_file(dir / "a/video_003.features"));
    REQUIRE(run("synth --config " + dir / "cfg.json" + " --seed 6 --out " + dir / "e").code == 0);
    CHECK(io::read_file(dir / "e/video_003.features") != io::read_file(dir / "a/video_003.features"));

    CHECK(run("synth --out " + dir / "x --num-phases 1").code == 64);
    CHECK(run("synth --out " + dir / "x --noise 0").code == 64);
    io::write_file(dir / "bad.json", "{");
    CHECK(run("synth --config " + dir / "bad.json" + " --out " + dir / "x").code == 2);
}

TEST_CASE("plot ribbons") {
    TempDir dir;
    small_synth(dir, "d");
    const std::string gt = dir / "d/video_000.labels.csv";
    const std::size_t T = io::read_labels(gt).size();

    REQUIRE(run("plot --pred " + gt + " --gt " + gt + " --out " + dir / "r.svg").code == 0);
    const auto svg = io::read_file(dir / "r.svg");
    CHECK(count(svg, "<rect") == 2 * T);
    const auto gt_row = svg.substr(svg.find("<g class=\"gt\">"), svg.find("<g class=\"pred\">") - svg.find("<g class=\"gt\">"));
    auto pred_row = svg.substr(svg.find("<g class=\"pred\">"));
    pred_row = pred_row.substr(0, pred_row.find("</g>") + 5);
    const auto strip_rows = [](std::string s) {
        for (auto pos = s.find("y=\""); pos != std::string::npos; pos = s.find("y=\"", pos + 1)) s[pos + 3] = '#';
        return s.substr(s.find('\n'));
    };
    CHECK(strip_rows(gt_row) == strip_rows(pred_row));

    REQUIRE(run("plot --pred " + gt + " --gt " + gt + " --out " + dir / "r.csv").code == 0);
    CHECK(count(io::read_file(dir / "r.csv"), "\n") == 2 * T + 1);

    CHECK(run("plot --pred " + gt + " --gt " + gt + " --out " + dir / "r.png").code == 64);
    io::write_labels(LabelSequence({0, 1}, 2), dir / "short.csv");
    CHECK(run("plot --pred " + dir / "short.csv" + " --gt " + gt + " --out " + dir / "r.svg").code == 2);
}

TEST_CASE("grid search") {
    TempDir dir;
    small_synth(dir, "val");
    auto r = run("segment --grid " + dir / "val" + " --mode timestamps --k 2 --out " + dir / "grid.json");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output.find("best: beta=") != std::string::npos);
    auto doc = nlohmann::json::parse(io::read_file(dir / "grid.json"));
    CHECK(doc["results"].size() == 12);
    double best = 0.0;
    for (const auto& row : doc["results"]) best = std::max(best, row["accuracy"].get<double>());
    CHECK(doc["best"]["accuracy"].get<double>() == best);

    REQUIRE(run("fit " + dir / "val" + " --out " + dir / "m.json").code == 0);
    r = run("segment --grid " + dir / "val" + " --model " + dir / "m.json" + " --out " + dir / "grid2.json");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(nlohmann::json::parse(io::read_file(dir / "grid2.json"))["results"].size() == 36);
}
