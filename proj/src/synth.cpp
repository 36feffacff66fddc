#include "cpd/synth.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "cpd/contour.hpp"
#include "cpd/io.hpp"

namespace cpd::synth {
namespace {

constexpr int kMaxRejects = 10000;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// mt19937_64 with an explicit uniform mapping, so the stream is fully
// specified independent of the standard library's distributions
struct Sampler {
    std::mt19937_64 engine;

    explicit Sampler(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) {
        double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }
};

bool ellipses_overlap(const Ellipse& a, const Ellipse& b, double tol) {
    if (!ellipse_pair_intersections(a, b, tol).empty()) return true;
    // no boundary crossing: overlapping iff one contains the other
    return ellipse_eval(a, b.center) < 1.0 || ellipse_eval(b, a.center) < 1.0;
}

bool union_connected(std::span<const Ellipse> ellipses, double tol) {
    const std::size_t n = ellipses.size();
    std::vector<std::size_t> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = i;
    auto find = [&](std::size_t i) {
        while (root[i] != i) i = root[i] = root[root[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (ellipses_overlap(ellipses[i], ellipses[j], tol)) root[find(i)] = find(j);
    for (std::size_t i = 1; i < n; ++i)
        if (find(i) != find(0)) return false;
    return true;
}

// every ground-truth point must be resolvable in the raster: within
// 1 px of the traced outer contour of the union
bool raster_faithful(const Scene& scene, int image_size) {
    BinaryMask mask = rasterize_union(scene.ellipses, image_size, image_size);
    Contour contour;
    try {
        contour = trace_contour(mask);
    } catch (const std::runtime_error&) {
        return false;
    }
    const auto& ring = contour.points;
    for (Point2 gt : scene.ground_truth) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
            best = std::min(best, dist_point_segment(gt, ring[j], ring[i]));
            if (best <= 1.0) break;
        }
        if (best > 1.0) return false;
    }
    return true;
}

} // namespace

void GenParams::validate() const {
    if (!(feret_min > 0.0 && feret_min <= feret_max))
        throw std::invalid_argument("feret bounds must satisfy 0 < feret_min <= feret_max");
    if (!(dist_min >= 0.0 && dist_min <= dist_max))
        throw std::invalid_argument("distance bounds must satisfy 0 <= dist_min <= dist_max");
    if (!(rot_min <= rot_max)) throw std::invalid_argument("rotation bounds are inverted");
    if (image_size <= 0) throw std::invalid_argument("image_size must be positive");
    if (image_size / 2.0 < dist_max + feret_max / 2.0)
        throw std::invalid_argument("image_size cannot contain every admissible ellipse");
}

std::vector<Point2> ground_truth_concave_points(std::span<const Ellipse> ellipses, double tol) {
    std::vector<Point2> points;
    const std::size_t n = ellipses.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (Point2 p : ellipse_pair_intersections(ellipses[i], ellipses[j], tol)) {
                bool occluded = false;
                for (std::size_t k = 0; k < n && !occluded; ++k) {
                    if (k == i || k == j) continue;
                    occluded = ellipse_contains(ellipses[k], p, tol) == Containment::inside;
                }
                if (occluded) continue;
                bool duplicate = false;
                for (Point2 q : points) {
                    if (distance(p, q) <= tol) {
                        duplicate = true;
                        break;
                    }
                }
                if (!duplicate) points.push_back(p);
            }
        }
    }
    std::sort(points.begin(), points.end(),
              [](Point2 a, Point2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    return points;
}

Scene generate_scene(const GenParams& params, std::uint64_t scene_id) {
    params.validate();
    constexpr double kTol = 1e-9;
    Sampler rng(splitmix64(splitmix64(params.seed) ^ scene_id));
    const double deg = std::numbers::pi / 180.0;
    const Point2 center{params.image_size / 2.0, params.image_size / 2.0};

    int rejects = 0;
    auto reject = [&rejects] {
        if (++rejects > kMaxRejects) throw GenerationExhausted();
    };

    // draw order per ellipse: feret1, feret2, rotation, then center
    // offsets (angle, radius) until the annulus constraints hold
    auto draw_ellipse = [&](const Point2* anchor, const Point2* also_near) {
        double f1 = rng.uniform(params.feret_min, params.feret_max);
        double f2 = rng.uniform(params.feret_min, params.feret_max);
        double rot = rng.uniform(params.rot_min * deg, params.rot_max * deg);
        Point2 c = center;
        if (anchor != nullptr) {
            while (true) {
                double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
                double radius = rng.uniform(params.dist_min, params.dist_max);
                c = *anchor + Point2{radius * std::cos(angle), radius * std::sin(angle)};
                if (also_near == nullptr) break;
                double d = distance(c, *also_near);
                if (d >= params.dist_min && d <= params.dist_max) break;
                reject();
            }
        }
        return Ellipse::make(c, std::max(f1, f2) / 2.0, std::min(f1, f2) / 2.0, rot);
    };

    while (true) {
        Scene scene;
        scene.id = scene_id;
        scene.ellipses[0] = draw_ellipse(nullptr, nullptr);
        scene.ellipses[1] = draw_ellipse(&center, nullptr);
        scene.ellipses[2] = draw_ellipse(&center, &scene.ellipses[1].center);
        scene.ground_truth = ground_truth_concave_points(scene.ellipses, kTol);

        if (scene.ground_truth.empty() || !union_connected(scene.ellipses, kTol) ||
            !raster_faithful(scene, params.image_size)) {
            reject();
            continue;
        }
        return scene;
    }
}

Manifest generate_dataset(int n, const GenParams& params, const std::filesystem::path& out_dir,
                          int jobs) {
    if (n < 1) throw std::invalid_argument("dataset size must be >= 1");
    params.validate();
    std::filesystem::create_directories(out_dir);

    std::vector<io::AnnotationRecord> annotations(static_cast<std::size_t>(n));
    std::vector<ManifestRecord> records(static_cast<std::size_t>(n));

    auto run_one = [&](int id) {
        Scene scene = generate_scene(params, static_cast<std::uint64_t>(id));
        BinaryMask mask = rasterize_union(scene.ellipses, params.image_size, params.image_size);

        char name[32];
        std::snprintf(name, sizeof name, "scene_%05d.png", id);
        io::write_mask_png(out_dir / name, mask);

        auto idx = static_cast<std::size_t>(id);
        annotations[idx] = {scene.id, name, scene.ellipses, scene.ground_truth};
        records[idx] = {scene.id, name, static_cast<int>(scene.ground_truth.size())};
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int id = 0; id < n; ++id) run_one(id);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            while (true) {
                int id = next.fetch_add(1);
                if (id >= n) return;
                try {
                    run_one(id);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (error) std::rethrow_exception(error);
    }

    io::write_annotations(out_dir / "annotations.json", annotations);

    Manifest manifest{params.seed, params, n, std::move(records)};
    io::write_manifest(out_dir / "manifest.json", manifest);
    return manifest;
}

} // namespace cpd::synth
