#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cpd/geometry.hpp"
#include "cpd/synth.hpp"

namespace cpd::io {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

/// 8-bit grayscale PNG, background 0, object 255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Reads a PNG as a mask: any nonzero gray value is object.
BinaryMask read_mask_png(const std::filesystem::path& path);

/// 8-bit RGB PNG.
void write_rgb_png(const std::filesystem::path& path, int width, int height,
                   const std::vector<Rgb>& pixels);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;
};

RgbImage read_rgb_png(const std::filesystem::path& path);

struct AnnotationRecord {
    std::uint64_t id = 0;
    std::string image;
    std::array<Ellipse, 3> ellipses;
    std::vector<Point2> concave_points;
};

void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const synth::Manifest& manifest);

struct DetectionRecord {
    std::uint64_t id = 0;
    std::vector<Point2> points;
    std::string error; // nonempty when the image failed
};

/// Detections are written as {"config": {...}, "records": [...]}; the
/// reader also accepts a bare array of records.
void write_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& records,
                      const std::map<std::string, std::string>& config);
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);

} // namespace cpd::io
