#include "cpd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace cpd {
namespace {

struct AbsProfile {
    std::vector<double> m; // |curvature|
    int n = 0;

    double at(int i) const { return m[static_cast<std::size_t>(((i % n) + n) % n)]; }
};

AbsProfile abs_profile(const CurvatureProfile& profile) {
    AbsProfile p;
    p.n = profile.size();
    p.m.reserve(profile.values.size());
    for (double v : profile.values) p.m.push_back(std::abs(v));
    return p;
}

double percentile80(const std::vector<double>& values) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    auto idx = static_cast<std::size_t>(std::floor(0.8 * (static_cast<double>(sorted.size()) - 1.0)));
    return sorted[idx];
}

double region_total(const AbsProfile& p, const Region& r, int len) {
    double total = 0.0;
    for (int off = 0; off < len; ++off) total += p.at(r.start + off);
    return total;
}

// maximal runs of m > t inside the span of r (circular when r covers the
// whole contour)
std::vector<Region> runs_within(const AbsProfile& p, const Region& r, double t) {
    const int n = p.n;
    const int len = region_length(r, n);
    std::vector<Region> runs;

    if (len == n) {
        bool all = true, none = true;
        for (int i = 0; i < n; ++i) (p.at(i) > t ? none : all) = false;
        if (none) return runs;
        if (all) {
            runs.push_back({0, n - 1, t});
            return runs;
        }
        for (int i = 0; i < n; ++i) {
            if (p.at(i) > t && !(p.at(i - 1) > t)) {
                int end = i;
                while (p.at(end + 1) > t) ++end;
                runs.push_back({i, ((end % n) + n) % n, t});
            }
        }
        return runs;
    }

    int run_start = -1;
    for (int off = 0; off < len; ++off) {
        bool high = p.at(r.start + off) > t;
        if (high && run_start < 0) run_start = off;
        if (!high && run_start >= 0) {
            runs.push_back({(r.start + run_start) % n, (r.start + off - 1) % n, t});
            run_start = -1;
        }
    }
    if (run_start >= 0) runs.push_back({(r.start + run_start) % n, (r.start + len - 1) % n, t});
    return runs;
}

// split r at its minimum-|curvature| interior point (ties: closest to
// the middle, then lowest offset); used when raising t cannot subdivide
// a plateau
std::pair<Region, Region> plateau_split(const AbsProfile& p, const Region& r) {
    const int n = p.n;
    const int len = region_length(r, n);
    int split_off = len / 2;
    if (len >= 3) {
        double best_m = std::numeric_limits<double>::infinity();
        double best_mid = std::numeric_limits<double>::infinity();
        for (int off = 1; off <= len - 2; ++off) {
            double m = p.at(r.start + off);
            double mid = std::abs(off - 0.5 * len);
            if (m < best_m || (m == best_m && mid < best_mid)) {
                best_m = m;
                best_mid = mid;
                split_off = off;
            }
        }
    } else {
        split_off = 1;
    }
    Region left{r.start, (r.start + split_off - 1) % n, r.threshold};
    Region right{(r.start + split_off) % n, r.end, r.threshold};
    return {left, right};
}

} // namespace

void DetectorParams::validate() const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(0 < l_min && l_min <= l_max))
        throw std::invalid_argument("length bounds must satisfy 0 < l_min <= l_max");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    if (!std::isfinite(t0) || !std::isfinite(dt))
        throw std::invalid_argument("thresholds must be finite");
}

int region_length(const Region& r, int n) {
    return r.end >= r.start ? r.end - r.start + 1 : r.end + n - r.start + 1;
}

bool region_contains(const Region& r, int i, int n) {
    int off = ((i - r.start) % n + n) % n;
    return off < region_length(r, n);
}

std::vector<Region> initial_regions(const CurvatureProfile& profile, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("threshold must be > 0");
    AbsProfile p = abs_profile(profile);
    Region whole{0, p.n - 1, t};
    auto runs = runs_within(p, whole, t);
    std::sort(runs.begin(), runs.end(), [](const Region& a, const Region& b) { return a.start < b.start; });
    return runs;
}

std::vector<Region> refine_regions(const CurvatureProfile& profile, const DetectorParams& params) {
    params.validate();
    AbsProfile p = abs_profile(profile);
    const int n = p.n;
    if (n == 0) throw NoRegions();

    const double t0 = params.t0 > 0.0 ? params.t0 : percentile80(p.m);
    const double dt = params.dt > 0.0 ? params.dt : 0.1 * t0;
    if (!(t0 > 0.0) || !(dt > 0.0)) throw NoRegions(); // flat/zero curvature profile

    std::deque<Region> queue;
    {
        auto initial = initial_regions(profile, t0);
        if (initial.empty()) throw NoRegions();
        queue.assign(initial.begin(), initial.end());
    }

    std::vector<Region> final_regions;
    // each step strictly raises a region's threshold, strictly shrinks
    // it, or merges two regions, so this bound is generous
    long budget = 64L * n + 1024;

    while (!queue.empty()) {
        if (--budget < 0) throw std::logic_error("region refinement failed to terminate");
        Region r = queue.front();
        queue.pop_front();
        const int len = region_length(r, n);

        if (len >= params.l_min && len <= params.l_max) { // Case 1
            final_regions.push_back(r);
            continue;
        }

        if (len > params.l_max) { // Case 2: re-threshold within the region
            const double max_m = [&] {
                double mx = 0.0;
                for (int off = 0; off < len; ++off) mx = std::max(mx, p.at(r.start + off));
                return mx;
            }();
            double t = r.threshold;
            bool subdivided = false;
            while (true) {
                t += dt;
                if (t >= max_m) break;
                auto subs = runs_within(p, r, t);
                if (subs.size() == 1 && region_length(subs[0], n) == len) continue;
                for (const Region& s : subs) queue.push_back(s);
                subdivided = true;
                break;
            }
            if (!subdivided) {
                auto [left, right] = plateau_split(p, r);
                queue.push_back(left);
                queue.push_back(right);
            }
            continue;
        }

        // Case 3: merge with the closest region within k, else discard
        int best_d = 0;
        double best_total = -1.0;
        int best_start = -1;
        std::size_t best_idx = 0;
        bool best_forward = true, found = false;

        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const Region& s = queue[qi];
            int df = (((s.start - r.end) % n) + n) % n;
            int db = (((r.start - s.end) % n) + n) % n;
            bool forward = df <= db;
            int d = forward ? df : db;
            if (d >= params.k) continue;

            // the gap must not touch any other region
            int gap_from = forward ? r.end + 1 : s.end + 1;
            int gap_len = d - 1;
            bool clean = true;
            for (int g = 0; g < gap_len && clean; ++g) {
                int gi = ((gap_from + g) % n + n) % n;
                for (std::size_t qj = 0; qj < queue.size() && clean; ++qj)
                    if (qj != qi && region_contains(queue[qj], gi, n)) clean = false;
                for (const Region& f : final_regions)
                    if (region_contains(f, gi, n)) {
                        clean = false;
                        break;
                    }
            }
            if (!clean) continue;

            double total = region_total(p, s, region_length(s, n));
            if (!found || d < best_d || (d == best_d && total > best_total) ||
                (d == best_d && total == best_total && s.start < best_start)) {
                found = true;
                best_d = d;
                best_total = total;
                best_start = s.start;
                best_idx = qi;
                best_forward = forward;
            }
        }

        if (!found) continue; // no neighbour within k: drop the short region

        Region s = queue[best_idx];
        queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(best_idx));
        Region merged = best_forward ? Region{r.start, s.end, std::min(r.threshold, s.threshold)}
                                     : Region{s.start, r.end, std::min(r.threshold, s.threshold)};
        queue.push_front(merged);
    }

    std::sort(final_regions.begin(), final_regions.end(),
              [](const Region& a, const Region& b) { return a.start < b.start; });
    return final_regions;
}

int interest_point(const Region& r, const CurvatureProfile& profile) {
    AbsProfile p = abs_profile(profile);
    const int n = p.n;
    const int len = region_length(r, n);
    double half = 0.5 * region_total(p, r, len);
    double cum = 0.0;
    for (int off = 0; off < len; ++off) {
        cum += p.at(r.start + off);
        if (cum >= half) return (r.start + off) % n;
    }
    return r.end;
}

PointKind classify_concave(const Contour& c, int index, int k, const BinaryMask* mask) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    Point2 before = c.at_wrapped(index - k);
    Point2 after = c.at_wrapped(index + k);
    Point2 mid = 0.5 * (before + after);

    if (mask != nullptr) {
        int px = static_cast<int>(std::floor(mid.x));
        int py = static_cast<int>(std::floor(mid.y));
        if (!mask->in_bounds(px, py)) return PointKind::concave; // off-frame is outside
        return mask->at(px, py) ? PointKind::convex : PointKind::concave;
    }
    return point_in_polygon(c.points, mid) == Containment::outside ? PointKind::concave
                                                                   : PointKind::convex;
}

std::vector<InterestPoint> detect_interest_points(const BinaryMask& mask,
                                                  const DetectorParams& params) {
    params.validate();
    Contour traced = trace_contour(mask);
    const int n = traced.size();
    if (n <= 2 * params.k) return {}; // too short for the curvature offset

    Contour work = denoise_contour(traced, params.epsilon);
    CurvatureProfile profile = k_curvature(work, params.k);

    std::vector<Region> regions;
    try {
        regions = refine_regions(profile, params);
    } catch (const NoRegions&) {
        return {};
    }

    std::vector<InterestPoint> points;
    points.reserve(regions.size());
    for (const Region& r : regions) {
        int idx = interest_point(r, profile);
        PointKind kind = classify_concave(work, idx, params.k, &mask);
        points.push_back({idx, traced.points[static_cast<std::size_t>(idx)], kind});
    }
    return points;
}

std::vector<Point2> detect_concave_points(const BinaryMask& mask, const DetectorParams& params) {
    std::vector<Point2> result;
    for (const InterestPoint& ip : detect_interest_points(mask, params))
        if (ip.kind == PointKind::concave) result.push_back(ip.location);
    return result;
}

} // namespace cpd
