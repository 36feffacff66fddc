#include "cpd/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "cpd/kernels.hpp"

namespace cpd {

double dist_point_segment(Point2 p, Point2 a, Point2 b) {
    Point2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

Ellipse Ellipse::make(Point2 center, double a, double b, double phi) {
    if (!(a >= b && b > 0.0))
        throw std::invalid_argument("ellipse requires a >= b > 0");
    if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(phi))
        throw std::invalid_argument("ellipse parameters must be finite");
    double p = std::fmod(phi, std::numbers::pi);
    if (p < 0.0) p += std::numbers::pi;
    return Ellipse{center, a, b, p};
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

// same operation order as the batch kernels, so scalar and SIMD paths
// agree bitwise
double ellipse_eval(const Ellipse& e, Point2 p) {
    double dx = p.x - e.center.x;
    double dy = p.y - e.center.y;
    double c = std::cos(e.phi), s = std::sin(e.phi);
    double u = (dx * c) + (dy * s);
    double v = (dx * s) - (dy * c);
    return ((u * u) * (1.0 / (e.a * e.a))) + ((v * v) * (1.0 / (e.b * e.b)));
}

Containment ellipse_contains(const Ellipse& e, Point2 p, double tol) {
    if (tol < 0.0) throw std::invalid_argument("tol must be >= 0");
    double val = ellipse_eval(e, p);
    if (std::abs(val - 1.0) <= tol) return Containment::boundary;
    return val < 1.0 ? Containment::inside : Containment::outside;
}

Containment point_in_polygon(std::span<const Point2> poly, Point2 p) {
    const std::size_t n = poly.size();
    if (n < 3) throw std::invalid_argument("polygon requires >= 3 points");

    constexpr double kEdgeTol = 1e-9;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (dist_point_segment(p, poly[j], poly[i]) <= kEdgeTol) return Containment::boundary;
    }

    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = poly[j], b = poly[i];
        if ((b.y > p.y) != (a.y > p.y)) {
            double x_int = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_int) inside = !inside;
        }
    }
    return inside ? Containment::inside : Containment::outside;
}

BinaryMask rasterize_union(std::span<const Ellipse> ellipses, int width, int height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("mask dimensions must be positive");
    BinaryMask mask(width, height);
    auto row_fn = kernels::inside_row();

    for (const Ellipse& e : ellipses) {
        double c = std::cos(e.phi), s = std::sin(e.phi);
        // tight axis-aligned extents of the rotated ellipse
        double hw = std::sqrt(e.a * e.a * c * c + e.b * e.b * s * s);
        double hh = std::sqrt(e.a * e.a * s * s + e.b * e.b * c * c);
        int x0 = std::max(0, static_cast<int>(std::floor(e.center.x - hw - 1.0)));
        int x1 = std::min(width - 1, static_cast<int>(std::ceil(e.center.x + hw + 1.0)));
        int y0 = std::max(0, static_cast<int>(std::floor(e.center.y - hh - 1.0)));
        int y1 = std::min(height - 1, static_cast<int>(std::ceil(e.center.y + hh + 1.0)));
        if (x0 > x1 || y0 > y1) continue;

        kernels::EllipseCoeffs coeffs = kernels::make_coeffs(e);
        for (int y = y0; y <= y1; ++y) {
            std::uint8_t* row = mask.data.data() + static_cast<std::size_t>(y) * width;
            row_fn(coeffs, y + 0.5, x0 + 0.5, x1 - x0 + 1, row + x0);
        }
    }
    return mask;
}

} // namespace cpd
