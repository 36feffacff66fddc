#pragma once

#include <stdexcept>
#include <vector>

#include "cpd/geometry.hpp"

namespace cpd {

/// Closed contour in pixel-center coordinates, counter-clockwise
/// (positive shoelace area, object on the left of travel).
struct Contour {
    std::vector<Point2> points;

    int size() const { return static_cast<int>(points.size()); }
    Point2 at_wrapped(int i) const {
        int n = size();
        int m = ((i % n) + n) % n;
        return points[static_cast<std::size_t>(m)];
    }
};

/// Per-point k-curvature values, radians in (-pi, pi]. Negative at
/// concavities of a CCW contour, positive at convexities.
struct CurvatureProfile {
    std::vector<double> values;
    int k = 0;

    int size() const { return static_cast<int>(values.size()); }
};

class EmptyMask : public std::runtime_error {
  public:
    EmptyMask() : std::runtime_error("mask contains no object pixel") {}
};

class TinyObject : public std::runtime_error {
  public:
    TinyObject() : std::runtime_error("largest component has fewer than 4 pixels") {}
};

/// Outer boundary of the largest 8-connected component (Moore-neighbour
/// tracing, Jacob's stopping criterion), CCW, starting at the
/// topmost-then-leftmost boundary pixel. Throws EmptyMask / TinyObject.
Contour trace_contour(const BinaryMask& mask);

/// Convenience variant: one contour per 8-connected component of at
/// least min_pixels pixels, in row-major discovery order.
std::vector<Contour> trace_all_contours(const BinaryMask& mask, int min_pixels = 50);

/// Closed-curve Ramer-Douglas-Peucker: splits at the two mutually
/// farthest points and simplifies each arc. Every input point stays
/// within epsilon of the output polyline.
Contour simplify_rdp(const Contour& c, double epsilon);

/// Denoising pre-pass: projects every dense contour point onto the
/// RDP(epsilon) simplification, keeping the point count and indexing.
/// Each point moves at most epsilon. epsilon <= 0 is the identity.
Contour denoise_contour(const Contour& c, double epsilon);

/// Angle in (-pi, pi] of the chord from point (i - k mod n) to point i.
double k_slope(const Contour& c, int i, int k);

/// values[i] = wrap(angle(chord i -> i+k) - angle(chord i-k -> i)).
/// Requires 1 <= k < size/2.
CurvatureProfile k_curvature(const Contour& c, int k);

} // namespace cpd
