#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cpd {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double distance_sq(Point2 a, Point2 b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Distance from p to the closed segment [a, b].
double dist_point_segment(Point2 p, Point2 a, Point2 b);

/// Axis-aligned-at-angle-phi ellipse. Invariants: a >= b > 0, phi in [0, pi).
struct Ellipse {
    Point2 center;
    double a = 1.0;   // semi-major, px
    double b = 1.0;   // semi-minor, px
    double phi = 0.0; // rotation of the major axis vs. horizontal, rad

    /// Validates the axes and normalizes phi into [0, pi).
    static Ellipse make(Point2 center, double a, double b, double phi);
};

enum class Containment { inside, boundary, outside };

/// Row-major boolean raster; pixel (x, y) covers the unit square whose
/// center is (x + 0.5, y + 0.5).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // 1 = object

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;
};

class DegenerateConics : public std::runtime_error {
  public:
    DegenerateConics() : std::runtime_error("the two conics are identical within tolerance") {}
};

/// Left-hand side of the ellipse equation: lambda1 + lambda2.
/// < 1 strictly inside, = 1 on the boundary, > 1 outside.
double ellipse_eval(const Ellipse& e, Point2 p);

/// Classifies p against e: boundary iff |ellipse_eval - 1| <= tol.
Containment ellipse_contains(const Ellipse& e, Point2 p, double tol);

/// All real boundary intersections of two ellipses (0 to 4 points,
/// tangencies collapsed within distance tol), each satisfying
/// |ellipse_eval(e_i, p) - 1| <= tol for both ellipses. Points are
/// sorted by (x, y). Throws DegenerateConics for identical conics.
std::vector<Point2> ellipse_pair_intersections(const Ellipse& e1, const Ellipse& e2, double tol);

/// Even-odd (ray crossing) containment; boundary if p lies within
/// 1e-9 px of an edge. poly is a closed ring (last-to-first edge implied).
Containment point_in_polygon(std::span<const Point2> poly, Point2 p);

/// Pixel (x, y) is set iff its center satisfies ellipse_eval <= 1 for at
/// least one ellipse.
BinaryMask rasterize_union(std::span<const Ellipse> ellipses, int width, int height);

} // namespace cpd
