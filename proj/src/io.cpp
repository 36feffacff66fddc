#include "cpd/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <png.h>

#include <json.hpp>

namespace cpd::io {
namespace {

using ordered_json = nlohmann::ordered_json;

double round6(double v) { return std::round(v * 1e6) / 1e6; }

[[noreturn]] void fail(const std::filesystem::path& path, const char* what) {
    throw std::runtime_error(std::string(what) + ": " + path.string());
}

void write_png(const std::filesystem::path& path, int width, int height, int format,
               const std::uint8_t* pixels) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = static_cast<png_uint_32>(format);
    if (png_image_write_to_file(&image, path.string().c_str(), 0, pixels, 0, nullptr) == 0)
        fail(path, "cannot write PNG");
}

ordered_json json_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(path, e.what());
    }
}

void json_to_file(const std::filesystem::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) fail(path, "write failed");
}

ordered_json points_json(const std::vector<Point2>& points) {
    ordered_json arr = ordered_json::array();
    for (Point2 p : points) arr.push_back({round6(p.x), round6(p.y)});
    return arr;
}

std::vector<Point2> points_from_json(const ordered_json& arr) {
    std::vector<Point2> points;
    for (const auto& p : arr) points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return points;
}

} // namespace

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i) gray[i] = mask.data[i] ? 255 : 0;
    write_png(path, mask.width, mask.height, PNG_FORMAT_GRAY, gray.data());
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.string().c_str()) == 0)
        fail(path, "cannot read PNG");
    image.format = PNG_FORMAT_GRAY;

    std::vector<std::uint8_t> gray(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr) == 0)
        fail(path, "cannot decode PNG");

    BinaryMask mask(static_cast<int>(image.width), static_cast<int>(image.height));
    for (std::size_t i = 0; i < gray.size(); ++i) mask.data[i] = gray[i] != 0 ? 1 : 0;
    return mask;
}

void write_rgb_png(const std::filesystem::path& path, int width, int height,
                   const std::vector<Rgb>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("pixel buffer size mismatch");
    write_png(path, width, height, PNG_FORMAT_RGB,
              reinterpret_cast<const std::uint8_t*>(pixels.data()));
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.string().c_str()) == 0)
        fail(path, "cannot read PNG");
    image.format = PNG_FORMAT_RGB;

    RgbImage result;
    result.width = static_cast<int>(image.width);
    result.height = static_cast<int>(image.height);
    result.pixels.resize(static_cast<std::size_t>(result.width) * result.height);
    if (png_image_finish_read(&image, nullptr, result.pixels.data(), 0, nullptr) == 0)
        fail(path, "cannot decode PNG");
    return result;
}

void write_annotations(const std::filesystem::path& path,
                       const std::vector<AnnotationRecord>& records) {
    ordered_json arr = ordered_json::array();
    for (const auto& rec : records) {
        ordered_json ellipses = ordered_json::array();
        for (const Ellipse& e : rec.ellipses)
            ellipses.push_back({{"cx", round6(e.center.x)},
                                {"cy", round6(e.center.y)},
                                {"a", round6(e.a)},
                                {"b", round6(e.b)},
                                {"phi", round6(e.phi)}});
        arr.push_back({{"id", rec.id},
                       {"image", rec.image},
                       {"ellipses", ellipses},
                       {"concave_points", points_json(rec.concave_points)}});
    }
    json_to_file(path, arr);
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
    ordered_json arr = json_from_file(path);
    std::vector<AnnotationRecord> records;
    for (const auto& rec : arr) {
        AnnotationRecord r;
        r.id = rec.at("id").get<std::uint64_t>();
        r.image = rec.at("image").get<std::string>();
        const auto& ellipses = rec.at("ellipses");
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& e = ellipses.at(i);
            r.ellipses[i] = Ellipse::make({e.at("cx").get<double>(), e.at("cy").get<double>()},
                                          e.at("a").get<double>(), e.at("b").get<double>(),
                                          e.at("phi").get<double>());
        }
        r.concave_points = points_from_json(rec.at("concave_points"));
        records.push_back(std::move(r));
    }
    return records;
}

void write_manifest(const std::filesystem::path& path, const synth::Manifest& manifest) {
    const auto& p = manifest.params;
    ordered_json records = ordered_json::array();
    for (const auto& rec : manifest.records)
        records.push_back({{"id", rec.id}, {"image", rec.image}, {"n_gt", rec.n_gt}});
    json_to_file(path, ordered_json{{"seed", manifest.seed},
                                    {"params",
                                     {{"feret_min", p.feret_min},
                                      {"feret_max", p.feret_max},
                                      {"dist_min", p.dist_min},
                                      {"dist_max", p.dist_max},
                                      {"rot_min", p.rot_min},
                                      {"rot_max", p.rot_max},
                                      {"image_size", p.image_size}}},
                                    {"count", manifest.count},
                                    {"records", records}});
}

void write_detections(const std::filesystem::path& path,
                      const std::vector<DetectionRecord>& records,
                      const std::map<std::string, std::string>& config) {
    ordered_json recs = ordered_json::array();
    for (const auto& rec : records) {
        if (!rec.error.empty())
            recs.push_back({{"id", rec.id}, {"error", rec.error}});
        else
            recs.push_back({{"id", rec.id}, {"points", points_json(rec.points)}});
    }
    ordered_json cfg = ordered_json::object();
    for (const auto& [key, value] : config) cfg[key] = value;
    json_to_file(path, ordered_json{{"config", cfg}, {"records", recs}});
}

std::vector<DetectionRecord> read_detections(const std::filesystem::path& path) {
    ordered_json j = json_from_file(path);
    const ordered_json& arr = j.is_array() ? j : j.at("records");
    std::vector<DetectionRecord> records;
    for (const auto& rec : arr) {
        DetectionRecord r;
        r.id = rec.at("id").get<std::uint64_t>();
        if (rec.contains("error"))
            r.error = rec.at("error").get<std::string>();
        else
            r.points = points_from_json(rec.at("points"));
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace cpd::io
