#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <sys/wait.h>

#include "cpd/geometry.hpp"
#include "cpd/io.hpp"
#include "cpd/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(CPD_CLI_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 512> buf;
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) result.output += buf.data();
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("cpd_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("generate: files, determinism, usage errors") {
    fs::path a = fresh_dir("gen_a");
    fs::path b = fresh_dir("gen_b");

    RunResult r = run_cli("generate --count 5 --seed 42 --out " + a.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("manifest.json") != std::string::npos);
    for (int i = 0; i < 5; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%05d.png", i);
        CHECK(fs::exists(a / name));
    }
    CHECK(fs::exists(a / "annotations.json"));

    CHECK(run_cli("generate --count 5 --seed 42 --out " + b.string()).exit_code == 0);
    CHECK(slurp(a / "annotations.json") == slurp(b / "annotations.json"));

    CHECK(run_cli("generate --count 0 --seed 1 --out " + a.string()).exit_code == 2);
    CHECK(run_cli("generate --seed 1 --out " + a.string()).exit_code == 2); // missing --count
    CHECK(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("detect: batch run, empty result for a single ellipse, failures") {
    fs::path dir = fresh_dir("detect");
    REQUIRE(run_cli("generate --count 3 --seed 9 --out " + dir.string()).exit_code == 0);

    // a lone ellipse has no concave points
    cpd::BinaryMask single = cpd::rasterize_union(
        std::vector<cpd::Ellipse>{cpd::Ellipse::make({150, 150}, 40, 25, 1.0)}, 300, 300);
    cpd::io::write_mask_png(dir / "scene_00099.png", single);

    fs::path out = dir / "detections.json";
    RunResult r = run_cli("detect --in " + dir.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);

    auto records = cpd::io::read_detections(out);
    REQUIRE(records.size() == 4);
    bool found_single = false;
    for (const auto& rec : records) {
        if (rec.id == 99) {
            found_single = true;
            CHECK(rec.points.empty());
        } else {
            CHECK(rec.points.size() >= 2);
        }
    }
    CHECK(found_single);

    // byte-identical on a second run
    fs::path out2 = dir / "detections2.json";
    REQUIRE(run_cli("detect --in " + dir.string() + " --out " + out2.string()).exit_code == 0);
    std::string bytes1 = slurp(out), bytes2 = slurp(out2);
    // the config echo is identical, records too
    CHECK(bytes1 == bytes2);

    RunResult missing = run_cli("detect --in /nonexistent_dir_xyz --out " + out.string());
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("/nonexistent_dir_xyz") != std::string::npos);

    // glob patterns select a subset (quoted so the shell stays out of
    // it); scene_00099 has a non-zero fourth digit and is excluded
    fs::path out3 = dir / "detections3.json";
    REQUIRE(run_cli("detect --in '" + (dir / "scene_0000?.png").string() + "' --out " +
                    out3.string())
                .exit_code == 0);
    CHECK(cpd::io::read_detections(out3).size() == 3);
}

TEST_CASE("detect honors config files and rejects unknown keys") {
    fs::path dir = fresh_dir("config");
    REQUIRE(run_cli("generate --count 1 --seed 4 --out " + dir.string()).exit_code == 0);

    fs::path cfg = dir / "run.cfg";
    std::ofstream(cfg) << "# tuned run\ndetector.k = 9\ndetector.epsilon = 0.1\n";
    fs::path out = dir / "det.json";
    REQUIRE(run_cli("detect --in " + dir.string() + " --out " + out.string() + " --config " +
                    cfg.string() + " --epsilon 0.3")
                .exit_code == 0);
    std::string bytes = slurp(out);
    CHECK(bytes.find("\"k\": \"9\"") != std::string::npos);         // from config file
    CHECK(bytes.find("\"epsilon\": \"0.3\"") != std::string::npos); // flag wins over file

    std::ofstream(cfg) << "detector.bogus = 1\n";
    CHECK(run_cli("detect --in " + dir.string() + " --out " + out.string() + " --config " +
                  cfg.string())
              .exit_code == 2);
}

TEST_CASE("eval: perfect detections, empty detections, sweep csv") {
    fs::path dir = fresh_dir("eval");
    REQUIRE(run_cli("generate --count 4 --seed 11 --out " + dir.string()).exit_code == 0);

    // detections == ground truth
    auto annotations = cpd::io::read_annotations(dir / "annotations.json");
    std::vector<cpd::io::DetectionRecord> perfect, empty;
    for (const auto& rec : annotations) {
        perfect.push_back({rec.id, rec.concave_points, ""});
        empty.push_back({rec.id, {}, ""});
    }
    cpd::io::write_detections(dir / "perfect.json", perfect, {{"source", "oracle"}});
    cpd::io::write_detections(dir / "empty.json", empty, {{"source", "oracle"}});

    RunResult r = run_cli("eval --detections " + (dir / "perfect.json").string() +
                          " --annotations " + (dir / "annotations.json").string() + " --theta 15");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("15 1 1 1 0 0") != std::string::npos); // p r f1 med std

    RunResult zero = run_cli("eval --detections " + (dir / "empty.json").string() +
                             " --annotations " + (dir / "annotations.json").string());
    CHECK(zero.exit_code == 0);
    CHECK(zero.output.find("15 0 0 0") != std::string::npos);

    fs::path csv = dir / "sweep.csv";
    REQUIRE(run_cli("eval --detections " + (dir / "perfect.json").string() + " --annotations " +
                    (dir / "annotations.json").string() + " --theta-range 1:20 --out " + csv.string())
                .exit_code == 0);
    std::string lines = slurp(csv);
    CHECK(lines.rfind("theta,precision,recall,f1\n", 0) == 0);
    int rows = 0;
    for (char ch : lines)
        if (ch == '\n') ++rows;
    CHECK(rows == 23); // header + 20 thetas + med summary + config comment
    CHECK(lines.find("\nmed,0,std,0\n") != std::string::npos);

    // sweep subcommand defaults to 1:20
    fs::path csv2 = dir / "sweep2.csv";
    REQUIRE(run_cli("sweep --detections " + (dir / "perfect.json").string() + " --annotations " +
                    (dir / "annotations.json").string() + " --out " + csv2.string())
                .exit_code == 0);
    CHECK(slurp(csv2) == lines);

    // id mismatch: drop one detection record
    perfect.pop_back();
    cpd::io::write_detections(dir / "partial.json", perfect, {});
    RunResult mismatch = run_cli("eval --detections " + (dir / "partial.json").string() +
                                 " --annotations " + (dir / "annotations.json").string());
    CHECK(mismatch.exit_code == 1);
    CHECK(mismatch.output.find("missing") != std::string::npos);
}

TEST_CASE("render: disks differ from the mask in exactly the disk pixels") {
    fs::path dir = fresh_dir("render");
    cpd::BinaryMask mask = cpd::rasterize_union(
        std::vector<cpd::Ellipse>{cpd::Ellipse::make({30, 30}, 20, 12, 0.4)}, 60, 60);
    cpd::io::write_mask_png(dir / "scene_00000.png", mask);

    std::vector<cpd::io::DetectionRecord> dets{{0, {{20.0, 20.0}, {40.0, 35.0}}, ""}};
    cpd::io::write_detections(dir / "det.json", dets, {});

    fs::path out = dir / "overlay.png";
    REQUIRE(run_cli("render --mask " + (dir / "scene_00000.png").string() + " --detections " +
                    (dir / "det.json").string() + " --out " + out.string())
                .exit_code == 0);

    auto in_disk = [&](int x, int y) {
        for (cpd::Point2 c : dets[0].points)
            if (cpd::distance({x + 0.5, y + 0.5}, c) <= 3.0) return true;
        return false;
    };

    cpd::io::RgbImage overlay = cpd::io::read_rgb_png(out);
    REQUIRE(overlay.width == 60);
    REQUIRE(overlay.height == 60);
    for (int y = 0; y < 60; ++y) {
        for (int x = 0; x < 60; ++x) {
            cpd::io::Rgb px = overlay.pixels[static_cast<std::size_t>(y) * 60 + x];
            if (in_disk(x, y)) {
                CHECK(px.r == 255);
                CHECK(px.g == 0);
                CHECK(px.b == 0);
            } else {
                std::uint8_t v = mask.at(x, y) ? 255 : 0;
                CHECK(px.r == v);
                CHECK(px.g == v);
                CHECK(px.b == v);
            }
        }
    }

    // no-points render equals the grayscale mask expanded to rgb
    fs::path plain = dir / "plain.png";
    REQUIRE(run_cli("render --mask " + (dir / "scene_00000.png").string() + " --out " +
                    plain.string())
                .exit_code == 0);
    cpd::io::RgbImage gray = cpd::io::read_rgb_png(plain);
    for (int y = 0; y < 60; ++y)
        for (int x = 0; x < 60; ++x) {
            cpd::io::Rgb px = gray.pixels[static_cast<std::size_t>(y) * 60 + x];
            std::uint8_t v = mask.at(x, y) ? 255 : 0;
            CHECK((px.r == v && px.g == v && px.b == v));
        }

    // byte-compare two renders for idempotence
    fs::path out2 = dir / "overlay2.png";
    REQUIRE(run_cli("render --mask " + (dir / "scene_00000.png").string() + " --detections " +
                    (dir / "det.json").string() + " --out " + out2.string())
                .exit_code == 0);
    CHECK(slurp(out) == slurp(out2));

    // missing output directory fails with exit 1
    CHECK(run_cli("render --mask " + (dir / "scene_00000.png").string() + " --out " +
                  (dir / "no_such_dir" / "x.png").string())
              .exit_code == 1);
}
