#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cpd/config.hpp"
#include "cpd/detector.hpp"
#include "cpd/eval.hpp"
#include "cpd/io.hpp"
#include "cpd/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// -------------------------------------------------------------------------
// shared helpers

bool glob_match(const std::string& pattern, const std::string& text) {
    std::size_t p = 0, t = 0, star = std::string::npos, match = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            match = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++match;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::vector<fs::path> resolve_inputs(const std::string& in) {
    fs::path p(in);
    std::vector<fs::path> files;
    if (fs::is_regular_file(p)) {
        files.push_back(p);
    } else if (fs::is_directory(p)) {
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.is_regular_file() && entry.path().extension() == ".png")
                files.push_back(entry.path());
    } else {
        fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.is_regular_file() && glob_match(p.filename().string(), entry.path().filename().string()))
                    files.push_back(entry.path());
        }
    }
    if (files.empty()) throw std::runtime_error("no input masks match: " + in);
    std::sort(files.begin(), files.end());
    return files;
}

std::optional<std::uint64_t> id_from_name(const fs::path& path) {
    std::string stem = path.stem().string();
    auto last = stem.find_last_not_of("0123456789");
    if (last == stem.size() - 1) return std::nullopt;
    return std::stoull(stem.substr(last + 1));
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string config_comment(const std::map<std::string, std::string>& entries) {
    std::string line = "# config:";
    for (const auto& [key, value] : entries) line += " " + key + "=" + value;
    return line;
}

void write_sweep_csv(const fs::path& path, const cpd::eval::SweepResult& sweep,
                     const std::map<std::string, std::string>& config) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "theta,precision,recall,f1\n";
    for (const auto& row : sweep.rows)
        out << row.theta << ',' << format_metric(row.precision) << ',' << format_metric(row.recall)
            << ',' << format_metric(row.f1) << '\n';
    out << "med," << format_metric(sweep.med_mean) << ",std," << format_metric(sweep.med_std) << '\n';
    out << config_comment(config) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::pair<cpd::eval::PointSets, cpd::eval::PointSets> load_point_sets(const fs::path& detections,
                                                                      const fs::path& annotations) {
    cpd::eval::PointSets gt, pred;
    for (const auto& rec : cpd::io::read_annotations(annotations)) gt[rec.id] = rec.concave_points;
    // failed images count as empty detections
    for (const auto& rec : cpd::io::read_detections(detections)) pred[rec.id] = rec.points;

    std::string extra, missing;
    for (const auto& [id, pts] : pred)
        if (!gt.count(id)) extra += (extra.empty() ? "" : ", ") + std::to_string(id);
    for (const auto& [id, pts] : gt)
        if (!pred.count(id)) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
    if (!extra.empty())
        throw std::runtime_error("detection ids not present in annotations: " + extra);
    if (!missing.empty())
        throw std::runtime_error("annotation ids missing from detections: " + missing);
    return {std::move(gt), std::move(pred)};
}

// -------------------------------------------------------------------------
// subcommands

struct GenerateArgs {
    int count = 0;
    std::uint64_t seed = 42;
    std::string out;
    int jobs = 1;
    std::string config;
    int image_size = 0;
};

int run_generate(const GenerateArgs& args) {
    cpd::Config cfg;
    if (!args.config.empty()) cfg.load(args.config);
    cfg.generator.seed = args.seed;
    if (args.image_size > 0) cfg.generator.image_size = args.image_size;

    auto manifest =
        cpd::synth::generate_dataset(args.count, cfg.generator, args.out, args.jobs);
    std::cout << (fs::path(args.out) / "manifest.json").string() << '\n';
    (void)manifest;
    return 0;
}

struct DetectArgs {
    std::string in;
    std::string out;
    std::string config;
    int jobs = 1;
    cpd::DetectorParams params;
};

int run_detect(const DetectArgs& args) {
    auto files = resolve_inputs(args.in);

    std::vector<cpd::io::DetectionRecord> records(files.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            auto& rec = records[i];
            rec.id = id_from_name(files[i]).value_or(i);
            try {
                cpd::BinaryMask mask = cpd::io::read_mask_png(files[i]);
                rec.points = cpd::detect_concave_points(mask, args.params);
            } catch (const std::exception& e) {
                rec.error = e.what();
                std::lock_guard lock(log_mutex);
                std::cerr << "detect: " << files[i].string() << ": " << e.what() << '\n';
            }
        }
    };

    int jobs = std::max(1, args.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    bool all_failed = std::all_of(records.begin(), records.end(),
                                  [](const auto& r) { return !r.error.empty(); });

    cpd::Config cfg;
    cfg.detector = args.params;
    cpd::io::write_detections(args.out, records, cfg.detector_entries());

    if (all_failed) throw std::runtime_error("every input image failed");
    return 0;
}

struct EvalArgs {
    std::string detections;
    std::string annotations;
    int theta = 15;
    std::string theta_range;
    std::string out;
};

std::pair<int, int> parse_range(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("theta range must be lo:hi, got '" + spec + "'");
    return {std::stoi(spec.substr(0, colon)), std::stoi(spec.substr(colon + 1))};
}

int run_eval(const EvalArgs& args, bool sweep_mode) {
    auto [gt, pred] = load_point_sets(args.detections, args.annotations);

    int lo = args.theta, hi = args.theta;
    if (sweep_mode || !args.theta_range.empty())
        std::tie(lo, hi) = parse_range(args.theta_range.empty() ? "1:20" : args.theta_range);

    auto sweep = cpd::eval::theta_sweep(gt, pred, lo, hi);

    std::map<std::string, std::string> entries{{"theta", std::to_string(lo) +
                                                             (hi != lo ? ":" + std::to_string(hi) : "")},
                                               {"images", std::to_string(sweep.images)}};

    std::cout << "theta precision recall f1 med std\n";
    for (const auto& row : sweep.rows)
        std::cout << row.theta << ' ' << format_metric(row.precision) << ' '
                  << format_metric(row.recall) << ' ' << format_metric(row.f1) << ' '
                  << format_metric(sweep.med_mean) << ' ' << format_metric(sweep.med_std) << '\n';
    if (sweep.med_defined < sweep.images)
        std::cerr << "MED undefined (empty point set) on " << sweep.images - sweep.med_defined
                  << " of " << sweep.images << " images; excluded from aggregation\n";

    if (!args.out.empty()) write_sweep_csv(args.out, sweep, entries);
    return 0;
}

struct RenderArgs {
    std::string mask;
    std::string annotations;
    std::string detections;
    std::string out;
    std::int64_t id = -1;
};

void draw_disk(std::vector<cpd::io::Rgb>& pixels, int width, int height, cpd::Point2 center,
               cpd::io::Rgb color) {
    constexpr double kRadius = 3.0;
    int x0 = static_cast<int>(std::floor(center.x - kRadius - 1));
    int x1 = static_cast<int>(std::ceil(center.x + kRadius + 1));
    int y0 = static_cast<int>(std::floor(center.y - kRadius - 1));
    int y1 = static_cast<int>(std::ceil(center.y + kRadius + 1));
    for (int y = std::max(0, y0); y <= std::min(height - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(width - 1, x1); ++x)
            if (cpd::distance({x + 0.5, y + 0.5}, center) <= kRadius)
                pixels[static_cast<std::size_t>(y) * width + x] = color;
}

int run_render(const RenderArgs& args) {
    cpd::BinaryMask mask = cpd::io::read_mask_png(args.mask);
    std::vector<cpd::io::Rgb> pixels(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        std::uint8_t v = mask.data[i] ? 255 : 0;
        pixels[i] = {v, v, v};
    }

    std::optional<std::uint64_t> id;
    if (args.id >= 0)
        id = static_cast<std::uint64_t>(args.id);
    else
        id = id_from_name(args.mask);

    if (!args.annotations.empty()) {
        if (!id) throw std::runtime_error("cannot infer scene id for " + args.mask + "; pass --id");
        for (const auto& rec : cpd::io::read_annotations(args.annotations))
            if (rec.id == *id)
                for (cpd::Point2 p : rec.concave_points)
                    draw_disk(pixels, mask.width, mask.height, p, {0, 0, 255});
    }
    if (!args.detections.empty()) {
        if (!id) throw std::runtime_error("cannot infer scene id for " + args.mask + "; pass --id");
        for (const auto& rec : cpd::io::read_detections(args.detections))
            if (rec.id == *id)
                for (cpd::Point2 p : rec.points)
                    draw_disk(pixels, mask.width, mask.height, p, {255, 0, 0});
    }

    cpd::io::write_rgb_png(args.out, mask.width, mask.height, pixels);
    return 0;
}

void apply_detector_overrides(const CLI::App* cmd, cpd::Config& cfg, const cpd::DetectorParams& flags) {
    if (cmd->count("--k")) cfg.detector.k = flags.k;
    if (cmd->count("--lmin")) cfg.detector.l_min = flags.l_min;
    if (cmd->count("--lmax")) cfg.detector.l_max = flags.l_max;
    if (cmd->count("--epsilon")) cfg.detector.epsilon = flags.epsilon;
    if (cmd->count("--t0")) cfg.detector.t0 = flags.t0;
    if (cmd->count("--dt")) cfg.detector.dt = flags.dt;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"concave point detection on overlapping objects in binary images"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    auto* gen = app.add_subcommand("generate", "generate a synthetic dataset with ground truth");
    gen->add_option("--count", gen_args.count, "number of scenes")->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_args.seed, "RNG seed");
    gen->add_option("--out", gen_args.out, "output directory")->required();
    gen->add_option("--jobs", gen_args.jobs, "worker threads")->check(CLI::PositiveNumber);
    gen->add_option("--config", gen_args.config, "config file");
    gen->add_option("--image-size", gen_args.image_size, "square image size, px")->check(CLI::PositiveNumber);

    DetectArgs det_args;
    cpd::DetectorParams det_flags;
    auto* det = app.add_subcommand("detect", "detect concave points on binary masks");
    det->add_option("--in", det_args.in, "input mask file, directory, or glob")->required();
    det->add_option("--out", det_args.out, "detections JSON path")->required();
    det->add_option("--k", det_flags.k, "curvature offset, px")->check(CLI::PositiveNumber);
    det->add_option("--lmin", det_flags.l_min, "minimum region length")->check(CLI::PositiveNumber);
    det->add_option("--lmax", det_flags.l_max, "maximum region length")->check(CLI::PositiveNumber);
    det->add_option("--epsilon", det_flags.epsilon, "RDP denoising tolerance, px");
    det->add_option("--t0", det_flags.t0, "initial curvature threshold, rad");
    det->add_option("--dt", det_flags.dt, "threshold increment, rad");
    det->add_option("--config", det_args.config, "config file");
    det->add_option("--jobs", det_args.jobs, "worker threads")->check(CLI::PositiveNumber);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate detections against annotations");
    eval->add_option("--detections", eval_args.detections)->required();
    eval->add_option("--annotations", eval_args.annotations)->required();
    eval->add_option("--theta", eval_args.theta, "matching threshold, px")->check(CLI::PositiveNumber);
    eval->add_option("--theta-range", eval_args.theta_range, "sweep range lo:hi");
    eval->add_option("--out", eval_args.out, "CSV output path");

    EvalArgs sweep_args;
    sweep_args.theta_range = "1:20";
    auto* sweep = app.add_subcommand("sweep", "theta sweep (defaults to 1:20)");
    sweep->add_option("--detections", sweep_args.detections)->required();
    sweep->add_option("--annotations", sweep_args.annotations)->required();
    sweep->add_option("--range", sweep_args.theta_range, "sweep range lo:hi");
    sweep->add_option("--out", sweep_args.out, "CSV output path");

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "overlay annotated/detected points on a mask");
    render->add_option("--mask", render_args.mask, "mask PNG")->required();
    render->add_option("--annotations", render_args.annotations, "annotations JSON (blue disks)");
    render->add_option("--detections", render_args.detections, "detections JSON (red disks)");
    render->add_option("--id", render_args.id, "scene id (default: parsed from mask name)");
    render->add_option("--out", render_args.out, "output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) return run_generate(gen_args);
        if (*det) {
            cpd::Config cfg;
            if (!det_args.config.empty()) cfg.load(det_args.config);
            apply_detector_overrides(det, cfg, det_flags);
            cfg.detector.validate();
            det_args.params = cfg.detector;
            return run_detect(det_args);
        }
        if (*eval) return run_eval(eval_args, false);
        if (*sweep) return run_eval(sweep_args, true);
        if (*render) return run_render(render_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
