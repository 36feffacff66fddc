#pragma once

#include <stdexcept>
#include <vector>

#include "cpd/contour.hpp"
#include "cpd/geometry.hpp"

namespace cpd {

struct DetectorParams {
    int k = 7;            // curvature offset, px of contour arc
    int l_min = 2;        // minimum region length, points
    int l_max = 11;       // maximum region length, points
    double epsilon = 0.2; // RDP denoising tolerance, px
    double t0 = 0.0;      // initial curvature threshold, rad; <= 0 selects
                          // the 80th percentile of |curvature|
    double dt = 0.0;      // threshold increment, rad; <= 0 selects 0.1 * t0

    void validate() const; // throws std::invalid_argument
};

/// Circular index interval [start, end] (inclusive, may wrap) of
/// contiguous high-curvature contour points. threshold is the t the
/// region was formed under.
struct Region {
    int start = 0;
    int end = 0;
    double threshold = 0.0;
};

/// Number of points in the region on a contour of n points.
int region_length(const Region& r, int n);

/// True iff index i lies in the (circular) region.
bool region_contains(const Region& r, int i, int n);

enum class PointKind { concave, convex };

struct InterestPoint {
    int index = 0;
    Point2 location;
    PointKind kind = PointKind::convex;
};

class NoRegions : public std::runtime_error {
  public:
    NoRegions() : std::runtime_error("no contour point exceeds the initial curvature threshold") {}
};

/// Step 1: maximal circular runs of |curvature| > t, ordered by start.
std::vector<Region> initial_regions(const CurvatureProfile& profile, double t);

/// Step 2: recursive refinement. Every returned region has
/// l_min <= length <= l_max and regions are pairwise disjoint.
/// Throws NoRegions when nothing exceeds the initial threshold.
std::vector<Region> refine_regions(const CurvatureProfile& profile, const DetectorParams& params);

/// Weighted median of |curvature| over the region: the smallest index
/// (circular order from start) whose cumulative weight reaches half the
/// region total.
int interest_point(const Region& r, const CurvatureProfile& profile);

/// Chord-midpoint test on the k-neighbours of index: concave iff the
/// midpoint falls outside the object. Containment via the mask when
/// given (midpoint pixel (floor x, floor y); off-frame counts as
/// outside), else point_in_polygon against the contour.
PointKind classify_concave(const Contour& c, int index, int k, const BinaryMask* mask);

/// Full pipeline: trace, denoise, k-curvature, refine, locate, classify.
/// Returns concave point locations on the traced contour, in contour
/// order. NoRegions maps to an empty result.
std::vector<Point2> detect_concave_points(const BinaryMask& mask, const DetectorParams& params);

/// Interest points of every final region (both kinds), for inspection
/// and tests. Locations are on the traced (pre-denoise) contour.
std::vector<InterestPoint> detect_interest_points(const BinaryMask& mask, const DetectorParams& params);

} // namespace cpd
