#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpd/geometry.hpp"

namespace cpd::synth {

/// Scene generation constraints. Distances in px, rotations in degrees.
struct GenParams {
    double feret_min = 45.0;
    double feret_max = 100.0;
    double dist_min = 45.0;
    double dist_max = 85.0;
    double rot_min = 0.0;
    double rot_max = 360.0;
    int image_size = 300;
    std::uint64_t seed = 42;

    void validate() const; // throws std::invalid_argument
};

/// Three overlapping ellipses plus their analytically exact concave
/// points (pair intersections not strictly inside the third ellipse).
struct Scene {
    std::array<Ellipse, 3> ellipses;
    std::vector<Point2> ground_truth;
    std::uint64_t id = 0;
};

class GenerationExhausted : public std::runtime_error {
  public:
    GenerationExhausted()
        : std::runtime_error("scene generation exceeded 10000 rejected draws; "
                             "the generation parameters are likely inconsistent") {}
};

/// Union over the ellipse pairs of their boundary intersections, keeping
/// points not strictly inside any remaining ellipse, deduplicated within
/// tol and sorted by (x, y).
std::vector<Point2> ground_truth_concave_points(std::span<const Ellipse> ellipses, double tol);

/// Draws one scene. Deterministic: the RNG stream is mt19937_64 seeded
/// from splitmix64(params.seed, scene_id); per ellipse the draw order is
/// feret1, feret2, rotation, then (angle, radius) center offsets until
/// accepted. Scenes with empty ground truth, a disconnected union, or a
/// ground-truth point farther than 1 px from the rasterized contour are
/// rejected and redrawn. Throws GenerationExhausted after 10000 rejects.
Scene generate_scene(const GenParams& params, std::uint64_t scene_id);

struct ManifestRecord {
    std::uint64_t id = 0;
    std::string image;
    int n_gt = 0;
};

struct Manifest {
    std::uint64_t seed = 0;
    GenParams params;
    int count = 0;
    std::vector<ManifestRecord> records;
};

/// Writes n masks (scene_{id:05}.png), annotations.json and
/// manifest.json under out_dir; returns the manifest. jobs > 1 runs
/// scene generation in parallel with byte-identical output.
Manifest generate_dataset(int n, const GenParams& params, const std::filesystem::path& out_dir,
                          int jobs = 1);

} // namespace cpd::synth
